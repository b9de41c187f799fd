#pragma once

#include <json.hpp>
#include <string>

namespace fraflow {

enum class Outcome { pass, fail, reject };

std::string to_string(Outcome o);

/// discretization slack: floor + coefficient * tau^exponent.
struct SlackModel {
  double floor = 1e-8;
  double coefficient = 0.0;
  double exponent = 0.5;

  double operator()(double tau) const;
};

nlohmann::json to_json(const SlackModel& s);

/// Serializable summary shared by every certificate.
struct Certificate {
  std::string lemma;
  Outcome outcome = Outcome::reject;
  std::string diagnostic;
  nlohmann::json witnesses = nlohmann::json::object();
  nlohmann::json slack = nlohmann::json::object();
};

nlohmann::json to_json(const Certificate& c);

}  // namespace fraflow
