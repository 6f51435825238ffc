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

#include "qmlbk/models/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "qmlbk/common/error.hpp"

namespace qmlbk {

namespace {

void require_object(const json &j, const std::string &path,
                    std::initializer_list<std::string_view> allowed) {
    if (!j.is_object())
        throw SchemaError(path, "expected an object");
    for (const auto &[key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaError(path, "unknown key '" + key + "'");
}

const json &field(const json &j, const std::string &path, const char *key) {
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(path, std::string("missing key '") + key + "'");
    return *it;
}

std::string child(const std::string &path, std::string_view key) {
    return path + "." + std::string(key);
}

std::string index_path(const std::string &path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

int get_int(const json &j, const std::string &path, const char *key) {
    const json &v = field(j, path, key);
    if (!v.is_number_integer())
        throw SchemaError(child(path, key), "expected an integer");
    return v.get<int>();
}

int get_int_or(const json &j, const std::string &path, const char *key,
               int fallback) {
    return j.contains(key) ? get_int(j, path, key) : fallback;
}

double get_double(const json &j, const std::string &path, const char *key) {
    const json &v = field(j, path, key);
    if (!v.is_number())
        throw SchemaError(child(path, key), "expected a number");
    return v.get<double>();
}

double get_double_or(const json &j, const std::string &path, const char *key,
                     double fallback) {
    return j.contains(key) ? get_double(j, path, key) : fallback;
}

std::string get_string(const json &j, const std::string &path,
                       const char *key) {
    const json &v = field(j, path, key);
    if (!v.is_string())
        throw SchemaError(child(path, key), "expected a string");
    return v.get<std::string>();
}

const json &get_array(const json &j, const std::string &path,
                      const char *key) {
    const json &v = field(j, path, key);
    if (!v.is_array())
        throw SchemaError(child(path, key), "expected an array");
    return v;
}

std::vector<int> get_int_array(const json &j, const std::string &path,
                               const char *key) {
    std::vector<int> out;
    if (!j.contains(key))
        return out;
    const json &arr = get_array(j, path, key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_integer())
            throw SchemaError(index_path(child(path, key), i),
                              "expected an integer");
        out.push_back(arr[i].get<int>());
    }
    return out;
}

// Runs `fn` and rewraps library validation errors with the JSON path.
template <class Fn> auto at_path(const std::string &path, Fn &&fn) {
    try {
        return fn();
    } catch (const SchemaError &) {
        throw;
    } catch (const BudgetError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw SchemaError(path, e.what());
    } catch (const std::out_of_range &e) {
        throw SchemaError(path, e.what());
    } catch (const std::logic_error &e) {
        throw SchemaError(path, e.what());
    }
}

std::vector<AngleSource> angles_from_json(const json &j,
                                          const std::string &path,
                                          const char *key) {
    const json &arr = get_array(j, path, key);
    std::vector<AngleSource> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(angle_from_json(arr[i], index_path(child(path, key), i)));
    return out;
}

json angles_to_json(const std::vector<AngleSource> &angles) {
    json arr = json::array();
    for (const auto &a : angles)
        arr.push_back(angle_to_json(a));
    return arr;
}

} // namespace

// ---------------------------------------------------------------------------

json angle_to_json(const AngleSource &a) {
    json j;
    switch (a.kind) {
    case AngleSource::Kind::Constant:
        j["source"] = "constant";
        j["value"] = a.offset;
        return j;
    case AngleSource::Kind::Parameter:
        j["source"] = "parameter";
        j["slot"] = a.slot;
        break;
    case AngleSource::Kind::Data:
        j["source"] = "data";
        j["slot"] = a.slot;
        if (a.slot2 >= 0)
            j["slot2"] = a.slot2;
        break;
    }
    j["factor"] = a.factor;
    j["offset"] = a.offset;
    return j;
}

AngleSource angle_from_json(const json &j, const std::string &path) {
    require_object(j, path, {"source", "value", "slot", "slot2", "factor", "offset"});
    const std::string src = get_string(j, path, "source");
    if (src == "constant") {
        require_object(j, path, {"source", "value"});
        return AngleSource::constant(get_double(j, path, "value"));
    }
    if (j.contains("value"))
        throw SchemaError(path, "'value' is only valid for constant angles");
    const int slot = get_int(j, path, "slot");
    if (slot < 0)
        throw SchemaError(child(path, "slot"), "slot must be non-negative");
    const double factor = get_double_or(j, path, "factor", 1.0);
    const double offset = get_double_or(j, path, "offset", 0.0);
    if (src == "parameter") {
        if (j.contains("slot2"))
            throw SchemaError(path, "'slot2' is only valid for data angles");
        return AngleSource::parameter(slot, factor, offset);
    }
    if (src == "data") {
        if (j.contains("slot2")) {
            const int slot2 = get_int(j, path, "slot2");
            if (slot2 < 0)
                throw SchemaError(child(path, "slot2"),
                                  "slot must be non-negative");
            AngleSource a = AngleSource::data_product(slot, slot2, factor);
            a.offset = offset;
            return a;
        }
        return AngleSource::data(slot, factor, offset);
    }
    throw SchemaError(child(path, "source"),
                      "unknown angle source '" + src + "'");
}

json gate_to_json(const Gate &g) {
    json j;
    j["kind"] = std::string(gate_kind_name(g.kind));
    j["targets"] = g.targets;
    if (!g.controls.empty())
        j["controls"] = g.controls;
    if (g.is_parametric())
        j["angle"] = angle_to_json(g.angle);
    if (g.kind == GateKind::PauliRotation)
        j["pauli"] = g.pauli;
    return j;
}

Gate gate_from_json(const json &j, const std::string &path) {
    require_object(j, path, {"kind", "targets", "controls", "angle", "pauli"});
    const std::string kind_name = get_string(j, path, "kind");
    Gate g;
    g.kind = at_path(child(path, "kind"),
                     [&] { return gate_kind_from_name(kind_name); });
    g.targets = get_int_array(j, path, "targets");
    g.controls = get_int_array(j, path, "controls");
    if (g.is_parametric())
        g.angle = angle_from_json(field(j, path, "angle"), child(path, "angle"));
    else if (j.contains("angle"))
        throw SchemaError(path, kind_name + " gates take no angle");
    if (g.kind == GateKind::PauliRotation)
        g.pauli = get_string(j, path, "pauli");
    else if (j.contains("pauli"))
        throw SchemaError(path, "'pauli' is only valid for PauliRotation");
    return g;
}

json circuit_to_json(const Circuit &c) {
    json j;
    j["num_qubits"] = c.num_qubits();
    j["num_parameter_slots"] = c.num_parameter_slots();
    j["num_data_slots"] = c.num_data_slots();
    json gates = json::array();
    for (const auto &g : c.gates())
        gates.push_back(gate_to_json(g));
    j["gates"] = std::move(gates);
    return j;
}

Circuit circuit_from_json(const json &j, const std::string &path) {
    require_object(j, path,
                   {"num_qubits", "num_parameter_slots", "num_data_slots", "gates"});
    const int n = get_int(j, path, "num_qubits");
    const int p = get_int_or(j, path, "num_parameter_slots", 0);
    const int d = get_int_or(j, path, "num_data_slots", 0);
    if (n > kMaxQubits)
        throw BudgetError(child(path, "num_qubits") + ": " + std::to_string(n) +
                          " qubits exceeds the simulator limit of " +
                          std::to_string(kMaxQubits));
    Circuit c = at_path(path, [&] { return Circuit(n, p, d); });
    const json &gates = get_array(j, path, "gates");
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const std::string gp = index_path(child(path, "gates"), i);
        Gate g = gate_from_json(gates[i], gp);
        at_path(gp, [&] {
            c.add(std::move(g));
            return 0;
        });
    }
    return c;
}

json observable_to_json(const Observable &o) {
    json j;
    j["num_qubits"] = o.num_qubits();
    json terms = json::array();
    for (const auto &t : o.terms())
        terms.push_back({{"weight", t.weight}, {"paulis", t.paulis}});
    j["terms"] = std::move(terms);
    if (!o.projector().empty()) {
        json proj = json::array();
        for (const auto &p : o.projector())
            proj.push_back({{"qubit", p.qubit}, {"value", p.value}});
        j["projector"] = std::move(proj);
    }
    j["scale"] = o.scale();
    return j;
}

Observable observable_from_json(const json &j, const std::string &path) {
    require_object(j, path, {"num_qubits", "terms", "projector", "scale"});
    const int n = get_int(j, path, "num_qubits");
    std::vector<PauliTerm> terms;
    const json &tj = get_array(j, path, "terms");
    for (std::size_t i = 0; i < tj.size(); ++i) {
        const std::string tp = index_path(child(path, "terms"), i);
        require_object(tj[i], tp, {"weight", "paulis"});
        terms.push_back(
            {get_double(tj[i], tp, "weight"), get_string(tj[i], tp, "paulis")});
    }
    std::vector<ProjectorFactor> proj;
    if (j.contains("projector")) {
        const json &pj = get_array(j, path, "projector");
        for (std::size_t i = 0; i < pj.size(); ++i) {
            const std::string pp = index_path(child(path, "projector"), i);
            require_object(pj[i], pp, {"qubit", "value"});
            proj.push_back({get_int(pj[i], pp, "qubit"), get_int(pj[i], pp, "value")});
        }
    }
    const double scale = get_double_or(j, path, "scale", 1.0);
    return at_path(path, [&] {
        return Observable(n, std::move(terms), std::move(proj), scale);
    });
}

json encoding_to_json(const FeatureEncoding &e) {
    json j;
    j["kind"] = std::string(encoding_kind_name(e.kind()));
    switch (e.kind()) {
    case EncodingKind::Havlicek:
        j["num_qubits"] = e.num_qubits();
        break;
    case EncodingKind::BitString:
        j["components"] = angles_to_json(e.components());
        j["arity"] = e.arity();
        j["bits"] = e.bits();
        j["range"] = e.range();
        j["leading_qubits"] = e.leading_qubits();
        break;
    case EncodingKind::GadgetProduct:
        j["angles"] = angles_to_json(e.components());
        j["arity"] = e.arity();
        j["repetitions"] = e.repetitions();
        j["leading_qubits"] = e.leading_qubits();
        break;
    case EncodingKind::ParityAngles:
        j["d"] = e.arity();
        break;
    case EncodingKind::Circuit:
        j["circuit"] = circuit_to_json(e.circuit());
        break;
    }
    return j;
}

FeatureEncoding encoding_from_json(const json &j, const std::string &path) {
    require_object(j, path,
                   {"kind", "num_qubits", "components", "angles", "arity", "bits",
                    "range", "repetitions", "leading_qubits", "d", "circuit"});
    const std::string kind = get_string(j, path, "kind");
    if (kind == "Havlicek") {
        require_object(j, path, {"kind", "num_qubits"});
        const int n = get_int(j, path, "num_qubits");
        return at_path(path, [&] { return FeatureEncoding::havlicek(n); });
    }
    if (kind == "BitString") {
        require_object(j, path,
                       {"kind", "components", "arity", "bits", "range",
                        "leading_qubits"});
        auto comps = angles_from_json(j, path, "components");
        const int arity = get_int(j, path, "arity");
        const int bits = get_int(j, path, "bits");
        const double range = get_double(j, path, "range");
        const int lead = get_int_or(j, path, "leading_qubits", 0);
        return at_path(path, [&] {
            return FeatureEncoding::bit_string(std::move(comps), arity, bits,
                                               range, lead);
        });
    }
    if (kind == "GadgetProduct") {
        require_object(j, path,
                       {"kind", "angles", "arity", "repetitions", "leading_qubits"});
        auto angles = angles_from_json(j, path, "angles");
        const int arity = get_int(j, path, "arity");
        const int reps = get_int(j, path, "repetitions");
        const int lead = get_int_or(j, path, "leading_qubits", 0);
        return at_path(path, [&] {
            return FeatureEncoding::gadget_product(std::move(angles), arity,
                                                   reps, lead);
        });
    }
    if (kind == "ParityAngles") {
        require_object(j, path, {"kind", "d"});
        const int d = get_int(j, path, "d");
        return at_path(path, [&] { return FeatureEncoding::parity_angles(d); });
    }
    if (kind == "Circuit") {
        require_object(j, path, {"kind", "circuit"});
        Circuit c = circuit_from_json(field(j, path, "circuit"),
                                      child(path, "circuit"));
        return at_path(path,
                       [&] { return FeatureEncoding::from_circuit(std::move(c)); });
    }
    throw SchemaError(child(path, "kind"), "unknown encoding kind '" + kind + "'");
}

json model_to_json(const Model &m) {
    json j;
    if (const auto *e = std::get_if<ExplicitModel>(&m)) {
        j["type"] = "explicit";
        j["encoding"] = encoding_to_json(e->encoding());
        j["variational"] = circuit_to_json(e->variational());
        j["observable"] = observable_to_json(e->observable());
        j["observable_weight"] = e->observable_weight();
        return j;
    }
    const auto &r = std::get<ReuploadingModel>(m);
    j["type"] = "reuploading";
    j["circuit"] = circuit_to_json(r.circuit());
    j["observable"] = observable_to_json(r.observable());
    return j;
}

Model model_from_json(const json &j, const std::string &path) {
    require_object(j, path,
                   {"type", "encoding", "variational", "circuit", "observable",
                    "observable_weight"});
    const std::string type = get_string(j, path, "type");
    if (type == "explicit") {
        require_object(j, path,
                       {"type", "encoding", "variational", "observable",
                        "observable_weight"});
        FeatureEncoding enc =
            encoding_from_json(field(j, path, "encoding"), child(path, "encoding"));
        Circuit var = circuit_from_json(field(j, path, "variational"),
                                        child(path, "variational"));
        Observable obs = observable_from_json(field(j, path, "observable"),
                                              child(path, "observable"));
        const double w = get_double_or(j, path, "observable_weight", 1.0);
        return at_path(path, [&] {
            return Model(ExplicitModel(std::move(enc), std::move(var),
                                       std::move(obs), w));
        });
    }
    if (type == "reuploading") {
        require_object(j, path, {"type", "circuit", "observable"});
        Circuit c = circuit_from_json(field(j, path, "circuit"),
                                      child(path, "circuit"));
        Observable obs = observable_from_json(field(j, path, "observable"),
                                              child(path, "observable"));
        return at_path(path, [&] {
            return Model(ReuploadingModel(std::move(c), std::move(obs)));
        });
    }
    throw SchemaError(child(path, "type"), "unknown model type '" + type + "'");
}

json parse_json_text(const std::string &text, const std::string &source_name) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(source_name + ":" + std::to_string(line) + ":" +
                             std::to_string(col) + ": invalid JSON",
                         offset);
    }
}

json read_json_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

} // namespace qmlbk
