// Copyright 2026 The qmlbk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmlbk/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"
#include "qmlbk/data/pipeline.hpp"
#include "qmlbk/learning/learning.hpp"
#include "qmlbk/mappings/mappings.hpp"
#include "qmlbk/separation/separation.hpp"

#ifndef QMLBK_VERSION
#define QMLBK_VERSION "unknown"
#endif

namespace qmlbk::cli {

namespace {

enum class Type { Int, Seed, Double, Bool, String, IntList, DoubleList, StringList };

struct Key {
    std::string name;
    Type type;
    json def; ///< null: required
    std::string help;
};

const std::vector<Key> &keys_for(const std::string &command) {
    static const std::map<std::string, std::vector<Key>> table = {
        {"map",
         {{"input", Type::String, nullptr, "re-uploading model JSON"},
          {"kind", Type::String, nullptr, "approx, simple or nested"},
          {"delta", Type::Double, 0.1, "approximation error (approx)"},
          {"delta_prime", Type::Double, 0.1, "failure probability (nested)"},
          {"trials", Type::Int, 50, "random (x, theta) draws for verification"},
          {"tolerance", Type::Double, 1e-9, "verification tolerance (exact kinds)"},
          {"out", Type::String, "out/map", "output directory"},
          {"seed", Type::Seed, 0, "rng seed"},
          {"threads", Type::Int, 0, "worker threads (0: all cores)"}}},
        {"parity",
         {{"d", Type::IntList, json::array(), "input dimensions"},
          {"delta", Type::Double, 0.1, "learner failure probability"},
          {"trials", Type::Int, 200, "learner trials per d"},
          {"n", Type::IntList, json::array({1, 2}), "qubit counts for the oracles"},
          {"m", Type::IntList, json::array({4}), "training-set sizes for the implicit oracle"},
          {"angle_scale", Type::Double, std::numbers::pi / 4, "feature-map angle scale"},
          {"oracle_max_d", Type::Int, 10, "largest d for the oracles"},
          {"out", Type::String, "out/parity", "output directory"},
          {"seed", Type::Seed, 0, "rng seed"},
          {"threads", Type::Int, 0, "worker threads (0: all cores)"}}},
        {"regression",
         {{"n", Type::IntList, json::array({2, 4, 6}), "qubit counts"},
          {"label_seeds", Type::IntList, json::array({0}), "labelling-function seeds"},
          {"train", Type::Int, 200, "training-set size"},
          {"validation", Type::Int, 50, "validation-set size"},
          {"test", Type::Int, 50, "test-set size"},
          {"train_images", Type::String, "", "IDX training images (optional)"},
          {"test_images", Type::String, "", "IDX test images (optional)"},
          {"synthetic", Type::Bool, true, "fall back to synthetic pools"},
          {"synthetic_dim", Type::Int, 64, "synthetic pool dimension"},
          {"ansatz", Type::StringList, json::array({"hea", "heisenberg"}),
           "explicit ansatz families"},
          {"steps", Type::Int, 300, "ADAM steps"},
          {"lr_params", Type::Double, 0.01, "ADAM step size for theta"},
          {"lr_weight", Type::Double, 0.1, "ADAM step size for the observable weight"},
          {"lambdas", Type::DoubleList, json::array({0.0, 1e-4, 1e-3, 1e-2, 1e-1}),
           "implicit regularization strengths"},
          {"save_datasets", Type::Bool, true, "write the generated splits"},
          {"out", Type::String, "out/regression", "output directory"},
          {"seed", Type::Seed, 0, "rng seed"},
          {"threads", Type::Int, 0, "worker threads (0: all cores)"}}},
        {"selftest",
         {{"filter", Type::String, "", "run one module only"},
          {"fixture", Type::String, "", "fixture directory"}}},
    };
    const auto it = table.find(command);
    if (it == table.end())
        throw UsageError("unknown command '" + command + "'");
    return it->second;
}

std::string flag_name(const std::string &key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

bool type_matches(Type t, const json &v) {
    auto all = [&](auto pred) {
        return v.is_array() && std::all_of(v.begin(), v.end(), pred);
    };
    switch (t) {
    case Type::Int: return v.is_number_integer();
    case Type::Seed: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Type::Double: return v.is_number();
    case Type::Bool: return v.is_boolean();
    case Type::String: return v.is_string();
    case Type::IntList: return all([](const json &e) { return e.is_number_integer(); });
    case Type::DoubleList: return all([](const json &e) { return e.is_number(); });
    case Type::StringList: return all([](const json &e) { return e.is_string(); });
    }
    return false;
}

std::string type_name(Type t) {
    switch (t) {
    case Type::Int: return "an integer";
    case Type::Seed: return "a non-negative integer";
    case Type::Double: return "a number";
    case Type::Bool: return "a boolean";
    case Type::String: return "a string";
    case Type::IntList: return "a list of integers";
    case Type::DoubleList: return "a list of numbers";
    case Type::StringList: return "a list of strings";
    }
    return "?";
}

json parse_scalar(Type t, const std::string &s, const std::string &flag) {
    try {
        std::size_t used = 0;
        switch (t) {
        case Type::Int: {
            const long long v = std::stoll(s, &used);
            if (used == s.size())
                return v;
            break;
        }
        case Type::Seed: {
            if (!s.empty() && s[0] != '-') {
                const unsigned long long v = std::stoull(s, &used);
                if (used == s.size())
                    return v;
            }
            break;
        }
        case Type::Double: {
            const double v = std::stod(s, &used);
            if (used == s.size())
                return v;
            break;
        }
        case Type::Bool:
            if (s == "true" || s == "1")
                return true;
            if (s == "false" || s == "0")
                return false;
            break;
        case Type::String: return s;
        default: break;
        }
    } catch (const std::exception &) {
    }
    throw UsageError(flag + ": cannot parse '" + s + "' as " + type_name(t));
}

json parse_flag(Type t, const std::string &s, const std::string &flag) {
    Type elem;
    switch (t) {
    case Type::IntList: elem = Type::Int; break;
    case Type::DoubleList: elem = Type::Double; break;
    case Type::StringList: elem = Type::String; break;
    default: return parse_scalar(t, s, flag);
    }
    json arr = json::array();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            arr.push_back(parse_scalar(elem, item, flag));
    return arr;
}

std::string fmt10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::filesystem::path out_dir(const json &cfg) {
    std::filesystem::path dir = cfg.at("out").get<std::string>();
    std::filesystem::create_directories(dir);
    return dir;
}

void write_json(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

unsigned threads_of(const json &cfg) {
    const int t = cfg.at("threads").get<int>();
    if (t < 0)
        throw UsageError("threads must be >= 0");
    return static_cast<unsigned>(t);
}

void write_manifest(const std::filesystem::path &dir, const std::string &command,
                    const json &cfg, std::vector<std::string> outputs,
                    std::chrono::steady_clock::time_point start) {
    json m;
    m["command"] = command;
    m["version"] = QMLBK_VERSION;
    m["seed"] = cfg.contains("seed") ? cfg["seed"] : json(nullptr);
    m["config"] = cfg;
    std::sort(outputs.begin(), outputs.end());
    m["outputs"] = outputs;
    m["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(dir / "manifest.json", m);
}

json report_to_json(const MappingReport &r) {
    json j;
    j["kind"] = std::string(mapping_kind_name(r.kind));
    j["num_encoding_gates"] = r.num_encoding_gates;
    j["added_qubits"] = r.added_qubits;
    j["added_gates"] = r.added_gates;
    j["precision_bits"] = r.precision_bits;
    j["repetitions"] = r.repetitions;
    j["acceptance_probability"] = r.acceptance_probability;
    j["observable_rescale"] = r.observable_rescale;
    j["guaranteed_error"] = r.guaranteed_error;
    j["observable_norm"] = r.observable_norm;
    return j;
}

} // namespace

// ---------------------------------------------------------------------------

json resolve_config(const std::string &command, const json &file_config,
                    const json &flag_overrides) {
    const auto &keys = keys_for(command);
    json cfg = json::object();
    for (const auto &k : keys)
        cfg[k.name] = k.def;
    auto find = [&](const std::string &name) -> const Key * {
        for (const auto &k : keys)
            if (k.name == name)
                return &k;
        return nullptr;
    };
    auto merge = [&](const json &src, const std::string &origin) {
        if (src.is_null())
            return;
        if (!src.is_object())
            throw UsageError(origin + ": config must be a JSON object");
        for (auto it = src.begin(); it != src.end(); ++it) {
            if (it.key() == "command") {
                if (it.value() != command)
                    throw UsageError(origin + ": config is for command " +
                                     it.value().dump() + ", not '" + command + "'");
                continue;
            }
            const Key *k = find(it.key());
            if (!k)
                throw UsageError(origin + ": unknown key '" + it.key() + "' for command " +
                                 command);
            if (!type_matches(k->type, it.value()))
                throw UsageError(origin + ": key '" + it.key() + "' must be " +
                                 type_name(k->type));
            cfg[k->name] = it.value();
        }
    };
    merge(file_config, "config");
    if (const char *env = std::getenv("QMLBK_SEED"); env && find("seed"))
        cfg["seed"] = parse_scalar(Type::Seed, env, "QMLBK_SEED");
    merge(flag_overrides, "flags");
    for (const auto &k : keys)
        if (cfg[k.name].is_null())
            throw UsageError(command + ": missing required " + flag_name(k.name));
    return cfg;
}

// ---------------------------------------------------------------------------

int cmd_map(const json &cfg, std::ostream &out) {
    const auto start = std::chrono::steady_clock::now();
    const std::string kind = cfg.at("kind");
    if (kind != "approx" && kind != "simple" && kind != "nested")
        throw UsageError("--kind must be approx, simple or nested, got '" + kind + "'");
    const double delta = cfg.at("delta"), delta_prime = cfg.at("delta_prime");
    if (kind == "approx" && !(delta > 0))
        throw UsageError("--delta must be > 0");
    if (kind == "nested" && !(delta_prime > 0 && delta_prime < 1))
        throw UsageError("--delta-prime must lie in (0, 1)");
    if (cfg.at("trials").get<int>() < 1)
        throw UsageError("--trials must be >= 1");
    const unsigned threads = threads_of(cfg);

    const std::string input = cfg.at("input");
    const Model src = model_from_json(read_json_file(input));
    const auto *reup = std::get_if<ReuploadingModel>(&src);
    if (!reup)
        throw std::runtime_error(input + ": mapping needs a reuploading model");

    auto mapped = kind == "approx"   ? map_approximate(*reup, delta)
                  : kind == "simple" ? map_exact_simple(*reup)
                                     : map_exact_nested(*reup, delta_prime);
    VerifyOptions vo;
    vo.trials = cfg.at("trials");
    vo.tolerance = kind == "approx" ? delta : cfg.at("tolerance").get<double>();
    vo.seed = cfg.at("seed");
    vo.threads = threads;
    const VerifyReport vr = verify_equivalence(src, Model(mapped.first), vo);

    const auto dir = out_dir(cfg);
    write_json(dir / "mapped_model.json", model_to_json(Model(mapped.first)));
    write_json(dir / "mapping_report.json", report_to_json(mapped.second));
    json vj;
    vj["trials"] = vr.trials;
    vj["tolerance"] = vo.tolerance;
    vj["max_abs_diff"] = vr.max_abs_diff;
    vj["pass"] = vr.pass;
    write_json(dir / "verify_report.json", vj);
    write_manifest(dir, "map", cfg,
                   {"mapped_model.json", "mapping_report.json", "verify_report.json"}, start);

    out << "map " << kind << ": D=" << mapped.second.num_encoding_gates
        << " added_qubits=" << mapped.second.added_qubits;
    if (kind == "approx")
        out << " p=" << mapped.second.precision_bits;
    else
        out << " N=" << mapped.second.repetitions
            << " p_acc=" << fmt10(mapped.second.acceptance_probability);
    out << " max_abs_diff=" << fmt10(vr.max_abs_diff) << (vr.pass ? " PASS" : " FAIL") << '\n';
    return vr.pass ? kExitOk : kExitFailure;
}

int cmd_parity(const json &cfg, std::ostream &out) {
    const auto start = std::chrono::steady_clock::now();
    SeparationConfig sc;
    sc.d_list = cfg.at("d").get<std::vector<int>>();
    if (sc.d_list.empty())
        throw UsageError("--d needs at least one dimension");
    sc.delta = cfg.at("delta");
    if (!(sc.delta > 0 && sc.delta < 1))
        throw UsageError("--delta must lie in (0, 1)");
    sc.trials = cfg.at("trials");
    if (sc.trials < 1)
        throw UsageError("--trials must be >= 1");
    sc.n_list = cfg.at("n").get<std::vector<int>>();
    sc.m_list = cfg.at("m").get<std::vector<int>>();
    sc.angle_scale = cfg.at("angle_scale");
    sc.oracle_max_d = cfg.at("oracle_max_d");
    sc.seed = cfg.at("seed");
    sc.threads = threads_of(cfg);

    const SeparationReport rep = run_separation_experiment(sc);
    const auto dir = out_dir(cfg);
    std::ostringstream csv;
    write_separation_csv(rep, csv);
    write_text(dir / "separation.csv", csv.str());

    json summary;
    summary["delta"] = sc.delta;
    summary["trials"] = sc.trials;
    json per_d = json::array();
    bool bounds_hold = true;
    for (const auto &[d, err] : rep.exactness) {
        json e;
        e["d"] = d;
        e["k"] = schedule_k(d);
        e["samples_lemma"] = parity_sample_count(d, sc.delta);
        e["samples_log_scale"] = std::log(d / sc.delta);
        e["exactness_max_error"] = err;
        for (const auto &r : rep.rows) {
            if (r.d != d)
                continue;
            if (r.learner_success_rate)
                e["learner_success_rate"] = *r.learner_success_rate;
            if (r.bound && r.epsilon_avg < *r.bound - 1e-9)
                bounds_hold = false;
        }
        per_d.push_back(e);
    }
    summary["per_d"] = per_d;
    summary["oracle_bounds_hold"] = bounds_hold;
    write_json(dir / "summary.json", summary);
    write_manifest(dir, "parity", cfg, {"separation.csv", "summary.json"}, start);

    for (const auto &r : rep.rows)
        if (r.learner_success_rate)
            out << "parity d=" << r.d << " k=" << r.k << " M=" << *r.samples_used
                << " success=" << fmt10(*r.learner_success_rate) << '\n';
    out << "oracle bounds " << (bounds_hold ? "hold" : "VIOLATED") << '\n';
    return bounds_hold ? kExitOk : kExitFailure;
}

int cmd_regression(const json &cfg, std::ostream &out) {
    const auto start = std::chrono::steady_clock::now();
    const auto n_list = cfg.at("n").get<std::vector<int>>();
    const auto label_seeds = cfg.at("label_seeds").get<std::vector<int>>();
    const auto ansatz = cfg.at("ansatz").get<std::vector<std::string>>();
    const auto lambdas = cfg.at("lambdas").get<std::vector<double>>();
    if (n_list.empty() || label_seeds.empty())
        throw UsageError("--n and --label-seeds need at least one value");
    for (const auto &a : ansatz)
        if (a != "hea" && a != "heisenberg")
            throw UsageError("--ansatz entries must be hea or heisenberg, got '" + a + "'");
    for (double l : lambdas)
        if (!(l >= 0))
            throw UsageError("--lambdas must be >= 0");
    const unsigned threads = threads_of(cfg);

    RegressionDataConfig dc;
    const std::string tr_img = cfg.at("train_images"), te_img = cfg.at("test_images");
    if (!tr_img.empty())
        dc.train_images = tr_img;
    if (!te_img.empty())
        dc.test_images = te_img;
    if (dc.train_images.has_value() != dc.test_images.has_value())
        throw UsageError("--train-images and --test-images go together");
    dc.synthetic_fallback = cfg.at("synthetic");
    dc.synthetic_dim = cfg.at("synthetic_dim");
    dc.sizes = {cfg.at("train"), cfg.at("validation"), cfg.at("test")};
    dc.seed = cfg.at("seed");
    dc.threads = threads;

    TrainConfig tc;
    tc.steps = cfg.at("steps");
    tc.lr_params = cfg.at("lr_params");
    tc.lr_weight = cfg.at("lr_weight");
    tc.seed = cfg.at("seed");
    tc.threads = threads;
    tc.validate();

    const auto dir = out_dir(cfg);
    std::vector<std::string> outputs{"regression.csv", "traces.csv", "summary.json"};
    std::ostringstream csv, traces;
    csv << "n,label_seed,model,lambda,metric,value\n";
    traces << "n,label_seed,model,step,loss\n";
    json summary = json::array();

    for (int label_seed : label_seeds) {
        for (int n : n_list) {
            dc.n = n;
            dc.label_seed = static_cast<std::uint64_t>(label_seed);
            const RegressionData data = prepare_regression_data(dc);
            if (cfg.at("save_datasets").get<bool>()) {
                const std::string sub =
                    "data/n" + std::to_string(n) + "_label" + std::to_string(label_seed);
                save_regression_data(dir / sub, data);
                for (const char *f : {"train.csv", "validation.csv", "test.csv", "dataset.json"})
                    outputs.push_back(sub + "/" + f);
            }
            auto row = [&](const std::string &model, const std::string &lambda,
                           const std::string &metric, double v) {
                csv << n << ',' << label_seed << ',' << model << ',' << lambda << ','
                    << metric << ',' << fmt10(v) << '\n';
            };
            json s;
            s["n"] = n;
            s["label_seed"] = label_seed;
            s["w_norm"] = data.labels.w_norm;

            const FeatureEncoding enc = FeatureEncoding::havlicek(n);
            const int layers = layer_schedule(n);
            double best_explicit_train = std::numeric_limits<double>::infinity();
            for (const auto &a : ansatz) {
                if (a == "heisenberg" && n < 2)
                    continue;
                Circuit var = a == "hea" ? build_hardware_efficient_ansatz(n, layers)
                                         : build_heisenberg_ansatz(n, layers);
                ExplicitModel m(enc, std::move(var), Observable::single(n, 'Z', 0));
                const TrainResult tr = train_explicit(m, data.train, tc);
                m.set_observable_weight(tr.weight);
                const std::string name = "explicit_" + a;
                const double train_loss = mse_loss(Model(m), tr.theta, data.train, threads);
                const double test_loss = mse_loss(Model(m), tr.theta, data.test, threads);
                row(name, "", "train_loss", train_loss);
                row(name, "", "test_loss", test_loss);
                best_explicit_train = std::min(best_explicit_train, train_loss);
                for (std::size_t t = 0; t < tr.loss_trace.size(); ++t)
                    traces << n << ',' << label_seed << ',' << name << ',' << t << ','
                           << fmt10(tr.loss_trace[t]) << '\n';
                s[name + "_train_loss"] = train_loss;
                s[name + "_test_loss"] = test_loss;
            }

            const Eigen::MatrixXd K = gram_matrix(enc, data.train.inputs, threads);
            const Eigen::MatrixXd Kt = cross_kernel(enc, data.test.inputs, data.train.inputs, threads);
            const Eigen::Map<const Eigen::VectorXd> y(data.train.labels.data(),
                                                      static_cast<Eigen::Index>(data.train.size()));
            const Eigen::Map<const Eigen::VectorXd> yt(data.test.labels.data(),
                                                       static_cast<Eigen::Index>(data.test.size()));
            const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                       K, Eigen::EigenvaluesOnly)
                                       .eigenvalues()
                                       .minCoeff();
            s["gram_min_eigenvalue"] = min_eig;
            for (double lambda : lambdas) {
                const Eigen::VectorXd alpha = krr_fit(K, y, lambda);
                const double train_loss = (K * alpha - y).squaredNorm() / y.size();
                const double test_loss = (Kt * alpha - yt).squaredNorm() / yt.size();
                row("implicit", fmt10(lambda), "train_loss", train_loss);
                row("implicit", fmt10(lambda), "test_loss", test_loss);
                if (lambda == 0.0) {
                    s["implicit_lambda0_train_loss"] = train_loss;
                    s["implicit_lambda0_test_loss"] = test_loss;
                    s["implicit_dominates_training"] = train_loss <= best_explicit_train;
                }
            }

            for (auto kind : {BaselineKind::Linear, BaselineKind::Gaussian}) {
                const BaselineFit fit = baseline_grid_search(kind, data.train, data.validation);
                auto loss_of = [&](const Dataset &ds) {
                    std::vector<double> p(ds.size());
                    for (std::size_t i = 0; i < ds.size(); ++i)
                        p[i] = fit.predict(ds.inputs[i]);
                    return mse(p, ds.labels);
                };
                const std::string name =
                    kind == BaselineKind::Linear ? "baseline_linear" : "baseline_gaussian";
                row(name, "", "train_loss", loss_of(data.train));
                row(name, "", "test_loss", loss_of(data.test));
                s[name + "_c"] = fit.c;
                s[name + "_gamma"] = fit.gamma;
            }
            summary.push_back(s);
            out << "regression n=" << n << " label_seed=" << label_seed << " done\n";
        }
    }
    write_text(dir / "regression.csv", csv.str());
    write_text(dir / "traces.csv", traces.str());
    write_json(dir / "summary.json", summary);
    write_manifest(dir, "regression", cfg, outputs, start);
    return kExitOk;
}

int cmd_selftest(const json &cfg, std::ostream &out) {
    static const std::vector<std::string> modules = {"simulator", "models",     "mappings",
                                                     "learning",  "separation", "data"};
    const std::string filter = cfg.at("filter");
    if (!filter.empty() && std::find(modules.begin(), modules.end(), filter) == modules.end())
        throw UsageError("--filter must name a module: simulator, models, mappings, "
                         "learning, separation or data");
    const std::string fixture = cfg.at("fixture");
    const auto results =
        run_selftest(filter, fixture.empty() ? default_fixture_dir() : std::filesystem::path(fixture));
    int failed = 0;
    for (const auto &r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.module << '.' << r.property;
        if (!r.detail.empty())
            out << ": " << r.detail;
        out << '\n';
        failed += r.pass ? 0 : 1;
    }
    out << results.size() - failed << '/' << results.size() << " properties hold\n";
    return failed ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"qmlbk: explicit, implicit and data re-uploading quantum models"};
    app.set_version_flag("--version", std::string(QMLBK_VERSION));
    app.require_subcommand(1);

    struct Sub {
        CLI::App *app;
        std::string config_path;
        std::map<std::string, std::pair<CLI::Option *, std::string>> values;
    };
    std::map<std::string, Sub> subs;
    const std::map<std::string, std::string> descriptions = {
        {"map", "map a re-uploading model to an explicit model"},
        {"parity", "run the parity learning-separation experiment"},
        {"regression", "run the scaled regression benchmark"},
        {"selftest", "check the invariant suite"},
    };
    for (const auto &[name, desc] : descriptions) {
        Sub &s = subs[name];
        s.app = app.add_subcommand(name, desc);
        s.app->add_option("--config", s.config_path, "JSON config file");
        for (const auto &k : keys_for(name)) {
            auto &slot = s.values[k.name];
            slot.first = s.app->add_option(flag_name(k.name), slot.second, k.help);
        }
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion &) {
        out << QMLBK_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Sub &s = subs.at(command);
    try {
        json file_config;
        if (!s.config_path.empty()) {
            try {
                file_config = read_json_file(s.config_path);
            } catch (const ParseError &e) {
                throw UsageError(e.what());
            }
        }
        json flags = json::object();
        for (const auto &k : keys_for(command)) {
            const auto &slot = s.values.at(k.name);
            if (slot.first->count() > 0)
                flags[k.name] = parse_flag(k.type, slot.second, flag_name(k.name));
        }
        const json cfg = resolve_config(command, file_config, flags);
        if (cfg.contains("threads"))
            set_default_threads(threads_of(cfg));
        if (command == "map")
            return cmd_map(cfg, out);
        if (command == "parity")
            return cmd_parity(cfg, out);
        if (command == "regression")
            return cmd_regression(cfg, out);
        return cmd_selftest(cfg, out);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace qmlbk::cli
