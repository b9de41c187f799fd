#include "fraflow/certificate.hpp"

#include <cmath>

namespace fraflow {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::reject: return "reject";
  }
  return "unknown";
}

double SlackModel::operator()(double tau) const { return floor + coefficient * std::pow(tau, exponent); }

nlohmann::json to_json(const SlackModel& s) {
  return {{"floor", s.floor}, {"coefficient", s.coefficient}, {"exponent", s.exponent}};
}

nlohmann::json to_json(const Certificate& c) {
  nlohmann::json j;
  j["lemma"] = c.lemma;
  j["outcome"] = to_string(c.outcome);
  if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
  j["witnesses"] = c.witnesses;
  j["slack"] = c.slack;
  return j;
}

}  // namespace fraflow
