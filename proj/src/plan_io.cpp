#include "dosskit/plan_io.hpp"

#include <cmath>

#include <json.hpp>

namespace dosskit {

namespace {

using nlohmann::ordered_json;

ordered_json params_json(const DossParams& p) {
  ordered_json j;
  j["n_cap"] = p.n_cap;
  j["rho"] = p.rho;
  j["tau"] = p.tau;
  return j;
}

DossParams params_from(const ordered_json& j) {
  if (!j.is_object()) throw validation_error("plan params must be an object");
  DossParams p;
  try {
    p.n_cap = j.at("n_cap").get<std::uint64_t>();
    p.rho = j.at("rho").get<double>();
    p.tau = j.value("tau", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad plan params: ") + e.what());
  }
  return p;
}

}  // namespace

std::string plan_to_json(const SelectPlan& plan, int indent) {
  ordered_json doc;
  doc["kind"] = "select";
  doc["params"] = plan.params ? params_json(*plan.params) : ordered_json(nullptr);
  doc["counts"] = ordered_json::object();
  for (const auto& [key, c] : plan.counts) doc["counts"][key.str()] = c;
  doc["warnings"] = plan.warnings;
  return doc.dump(indent);
}

std::string plan_to_json(const WeightPlan& plan, int indent) {
  ordered_json doc;
  doc["kind"] = "weight";
  doc["params"] = params_json(plan.params);
  doc["weights"] = ordered_json::object();
  for (const auto& [key, w] : plan.weights) doc["weights"][key.str()] = w;
  doc["warnings"] = plan.warnings;
  return doc.dump(indent);
}

AnyPlan plan_from_json(std::string_view text) {
  const auto doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw validation_error("plan is not a JSON object");
  const auto& body = doc.contains("plan") ? doc.at("plan") : doc;
  if (!body.is_object() || !body.contains("kind")) throw validation_error("plan has no 'kind'");
  const auto kind = body.at("kind");

  std::vector<std::string> warnings;
  if (body.contains("warnings") && body.at("warnings").is_array()) {
    for (const auto& w : body.at("warnings")) {
      if (w.is_string()) warnings.push_back(w.get<std::string>());
    }
  }

  if (kind == "select") {
    SelectPlan plan;
    if (body.contains("params") && !body.at("params").is_null()) {
      plan.params = params_from(body.at("params"));
    }
    const auto it = body.find("counts");
    if (it == body.end() || !it->is_object()) throw validation_error("select plan has no counts");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number_unsigned()) {
        throw validation_error("count for " + key + " must be a nonnegative integer");
      }
      plan.counts.emplace(DomainKey::parse(key), value.get<std::uint64_t>());
    }
    plan.warnings = std::move(warnings);
    return plan;
  }
  if (kind == "weight") {
    WeightPlan plan;
    if (!body.contains("params")) throw validation_error("weight plan has no params");
    plan.params = params_from(body.at("params"));
    const auto it = body.find("weights");
    if (it == body.end() || !it->is_object()) throw validation_error("weight plan has no weights");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number() || !(value.get<double>() >= 0.0) ||
          !std::isfinite(value.get<double>())) {
        throw validation_error("weight for " + key + " must be a finite nonnegative number");
      }
      plan.weights.emplace(DomainKey::parse(key), value.get<double>());
    }
    plan.warnings = std::move(warnings);
    return plan;
  }
  throw validation_error("unknown plan kind");
}

}  // namespace dosskit
