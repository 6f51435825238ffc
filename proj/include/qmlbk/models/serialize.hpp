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

// JSON documents for circuits, observables, encodings and models. The schema
// is described in docs/circuit_schema.md. Readers reject unknown keys and
// report the JSON path of the first violation through SchemaError.

#pragma once

#include <string>

#include <json.hpp>

#include "qmlbk/models/models.hpp"

namespace qmlbk {

using json = nlohmann::ordered_json;

json angle_to_json(const AngleSource &a);
AngleSource angle_from_json(const json &j, const std::string &path = "$");

json gate_to_json(const Gate &g);
Gate gate_from_json(const json &j, const std::string &path = "$");

json circuit_to_json(const Circuit &c);
Circuit circuit_from_json(const json &j, const std::string &path = "$");

json observable_to_json(const Observable &o);
Observable observable_from_json(const json &j, const std::string &path = "$");

json encoding_to_json(const FeatureEncoding &e);
FeatureEncoding encoding_from_json(const json &j, const std::string &path = "$");

json model_to_json(const Model &m);
Model model_from_json(const json &j, const std::string &path = "$");

/// Parses JSON text; syntax errors become ParseError with line and column in
/// the message.
json parse_json_text(const std::string &text, const std::string &source_name);

/// Reads and parses a JSON file.
json read_json_file(const std::string &path);

} // namespace qmlbk
