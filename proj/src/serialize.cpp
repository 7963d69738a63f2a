#include "sparsebandit/serialize.hpp"

#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace sparsebandit {
namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw std::invalid_argument("serialize: malformed JSON document");
  if (!doc.is_object()) throw std::invalid_argument("serialize: top-level JSON value must be an object");
  return doc;
}

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw std::invalid_argument(std::string("serialize: missing required field \"") + key + "\"");
  }
  return *it;
}

std::vector<double> as_vector(const json& value, const char* key) {
  if (!value.is_array()) {
    throw std::invalid_argument(std::string("serialize: field \"") + key + "\" must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& entry : value) {
    if (!entry.is_number()) {
      throw std::invalid_argument(std::string("serialize: field \"") + key + "\" must contain only numbers");
    }
    out.push_back(entry.get<double>());
  }
  return out;
}

std::vector<Action> parse_actions(const json& doc, std::size_t dim) {
  const json& rows = require(doc, "actions");
  if (!rows.is_array()) throw std::invalid_argument("serialize: field \"actions\" must be an array");
  std::vector<Action> actions;
  actions.reserve(rows.size());
  for (const auto& row : rows) {
    Action a;
    a.coords = as_vector(row, "actions");
    if (a.coords.size() != dim) {
      throw std::invalid_argument("serialize: action row length does not match \"dim\"");
    }
    actions.push_back(std::move(a));
  }
  return actions;
}

}  // namespace

std::string instance_to_json(const ActionSet& actions, const SparseInstance& instance,
                             const std::vector<std::size_t>& informative) {
  instance.validate();
  if (instance.dim() != actions.dim()) {
    throw std::invalid_argument("serialize: theta dimension does not match action set");
  }
  json doc;
  doc["dim"] = actions.dim();
  json rows = json::array();
  for (std::size_t i = 0; i < actions.size(); ++i) rows.push_back(actions[i].coords);
  doc["actions"] = std::move(rows);
  doc["theta"] = instance.theta;
  doc["sparsity_bound"] = instance.sparsity_bound;
  doc["noise_std"] = instance.noise_std;
  if (!informative.empty()) {
    for (std::size_t idx : informative) {
      if (idx >= actions.size()) throw std::invalid_argument("serialize: informative label out of range");
    }
    doc["labels"] = json{{"informative", informative}};
  }
  return doc.dump(2) + "\n";
}

SerializedInstance instance_from_json(const std::string& text) {
  json doc = parse_document(text);
  const json& dim_field = require(doc, "dim");
  if (!dim_field.is_number_unsigned()) {
    throw std::invalid_argument("serialize: field \"dim\" must be a non-negative integer");
  }
  std::size_t dim = dim_field.get<std::size_t>();

  SparseInstance instance;
  instance.theta = as_vector(require(doc, "theta"), "theta");
  if (instance.theta.size() != dim) {
    throw std::invalid_argument("serialize: theta length does not match \"dim\"");
  }
  const json& sb = require(doc, "sparsity_bound");
  if (!sb.is_number_unsigned()) {
    throw std::invalid_argument("serialize: field \"sparsity_bound\" must be a non-negative integer");
  }
  instance.sparsity_bound = sb.get<std::size_t>();
  const json& ns = require(doc, "noise_std");
  if (!ns.is_number()) throw std::invalid_argument("serialize: field \"noise_std\" must be a number");
  instance.noise_std = ns.get<double>();
  instance.validate();

  std::vector<std::size_t> informative;
  if (auto labels = doc.find("labels"); labels != doc.end()) {
    if (!labels->is_object()) throw std::invalid_argument("serialize: field \"labels\" must be an object");
    if (auto inf = labels->find("informative"); inf != labels->end()) {
      if (!inf->is_array()) {
        throw std::invalid_argument("serialize: field \"labels.informative\" must be an array");
      }
      for (const auto& entry : *inf) {
        if (!entry.is_number_unsigned()) {
          throw std::invalid_argument("serialize: informative labels must be non-negative integers");
        }
        informative.push_back(entry.get<std::size_t>());
      }
    }
  }

  ActionSet actions(parse_actions(doc, dim), dim);
  for (std::size_t idx : informative) {
    if (idx >= actions.size()) throw std::invalid_argument("serialize: informative label out of range");
  }
  return SerializedInstance{std::move(actions), std::move(instance), std::move(informative)};
}

ActionSet actions_from_json(const std::string& text) {
  json doc = parse_document(text);
  const json& dim_field = require(doc, "dim");
  if (!dim_field.is_number_unsigned()) {
    throw std::invalid_argument("serialize: field \"dim\" must be a non-negative integer");
  }
  std::size_t dim = dim_field.get<std::size_t>();
  return ActionSet(parse_actions(doc, dim), dim);
}

std::string design_to_json(const DesignDistribution& design, const DesignCertificate& cert) {
  json atoms = json::array();
  for (const auto& [index, weight] : design.atoms) atoms.push_back(json::array({index, weight}));
  json doc;
  doc["atoms"] = std::move(atoms);
  doc["dim"] = design.dim;
  doc["objective"] = cert.objective;
  doc["fw_gap"] = cert.fw_gap;
  doc["iterations"] = cert.iterations;
  return doc.dump(2) + "\n";
}

std::pair<DesignDistribution, DesignCertificate> design_from_json(const std::string& text) {
  json doc = parse_document(text);
  DesignDistribution design;
  const json& dim_field = require(doc, "dim");
  if (!dim_field.is_number_unsigned()) {
    throw std::invalid_argument("serialize: field \"dim\" must be a non-negative integer");
  }
  design.dim = dim_field.get<std::size_t>();
  const json& atoms = require(doc, "atoms");
  if (!atoms.is_array()) throw std::invalid_argument("serialize: field \"atoms\" must be an array");
  for (const auto& atom : atoms) {
    if (!atom.is_array() || atom.size() != 2 || !atom[0].is_number_unsigned() || !atom[1].is_number()) {
      throw std::invalid_argument("serialize: design atoms must be [index, weight] pairs");
    }
    design.atoms.emplace_back(atom[0].get<std::size_t>(), atom[1].get<double>());
  }
  DesignCertificate cert;
  if (auto it = doc.find("objective"); it != doc.end()) cert.objective = it->get<double>();
  if (auto it = doc.find("fw_gap"); it != doc.end()) cert.fw_gap = it->get<double>();
  if (auto it = doc.find("iterations"); it != doc.end()) cert.iterations = it->get<std::size_t>();
  return {std::move(design), cert};
}

}  // namespace sparsebandit
