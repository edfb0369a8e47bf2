#pragma once

// JSON form of a Family: {"kind":"binomial","m":10}, {"kind":"gaussian","variance":1},
// {"kind":"poisson"}, {"kind":"gamma","m":2}.

#include <json.hpp>
#include <string>

#include "isomech/error.hpp"
#include "isomech/expfam.hpp"

namespace isomech {

inline nlohmann::json family_to_json(const Family& f) {
  switch (f.kind()) {
    case FamilyKind::Gaussian: return {{"kind", "gaussian"}, {"variance", f.parameter()}};
    case FamilyKind::Binomial: return {{"kind", "binomial"}, {"m", f.trials()}};
    case FamilyKind::Poisson: return {{"kind", "poisson"}};
    case FamilyKind::Gamma: return {{"kind", "gamma"}, {"m", f.parameter()}};
  }
  return {};
}

inline Family family_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("family: expected an object with a string \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ValidationError("family " + kind + ": missing numeric \"" + key + "\"");
    }
    return j[key].get<double>();
  };
  if (kind == "gaussian") return Family::gaussian(number("variance"));
  if (kind == "binomial") {
    const double m = number("m");
    if (m != static_cast<int>(m)) throw ValidationError("family binomial: m must be an integer");
    return Family::binomial(static_cast<int>(m));
  }
  if (kind == "poisson") return Family::poisson();
  if (kind == "gamma") return Family::gamma(number("m"));
  throw ValidationError("family: unknown kind \"" + kind + "\"");
}

}  // namespace isomech
