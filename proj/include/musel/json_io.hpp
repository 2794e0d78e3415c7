#pragma once

// JSON serialization, kept out of the core headers so hot translation units
// never parse the (large) json library.

#include <json.hpp>

#include "musel/analysis.hpp"
#include "musel/portfolio.hpp"
#include "musel/selectors.hpp"
#include "musel/sim.hpp"

namespace musel {

inline void to_json(nlohmann::json& j, const Estimate& e) {
  j = nlohmann::json{
      {"variant", variant_name(e.variant)},
      {"delta", e.delta},
      {"epsilon", e.epsilon},
      {"lambda", e.lambda},
      {"theta", e.theta_hat},
      {"support", e.support},
      {"l1_norm", e.l1_norm},
  };
}

inline void to_json(nlohmann::json& j, const AssumptionReport& r) {
  j = nlohmann::json{
      {"rho", r.rho},
      {"diag_ok", r.diag_ok},
      {"s", r.s},
      {"alpha", r.alpha},
      {"kappa", r.kappa},
      {"coherence_condition_met", r.coherence_condition_met},
  };
  if (std::isinf(r.alpha)) j["alpha"] = "inf";
}

inline void to_json(nlohmann::json& j, const BoundCheck& b) {
  j = nlohmann::json{{"id", b.id}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"holds", b.holds}};
}

inline void to_json(nlohmann::json& j, const NotApplicable& n) {
  j = nlohmann::json{{"id", n.id}, {"not_applicable", true}, {"reason", n.reason}};
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  nlohmann::json records = nlohmann::json::array();
  for (const BoundCheck& b : r.bounds) records.push_back(b);
  for (const NotApplicable& n : r.not_applicable) records.push_back(n);
  j = nlohmann::json{{"records", records}, {"nu", r.nu}, {"nu1", r.nu1}};
}

inline void to_json(nlohmann::json& j, const MetricSummary& m) {
  j = nlohmann::json{{"mean", m.mean}, {"sd", m.sd}};
}

inline void to_json(nlohmann::json& j, const EstimatorSummary& row) {
  j = nlohmann::json{
      {"label", row.label},
      {"reps_used", row.reps_used},
      {"infeasible", row.infeasible},
      {"err1", row.err1},
      {"err2", row.err2},
      {"nb1", row.nb1},
      {"nb2", row.nb2},
      {"exact", row.exact},
      {"sign_ok", row.sign_ok},
  };
}

inline void to_json(nlohmann::json& j, const TableReport& report) {
  j = nlohmann::json{{"reps", report.reps}, {"rows", report.rows}};
}

inline void to_json(nlohmann::json& j, const ReplicationResult& r) {
  j = nlohmann::json{
      {"retrieved", r.retrieved},
      {"weights", r.weights},
      {"delta", r.delta},
      {"epsilon", r.epsilon},
      {"estimate", r.estimate},
  };
}

}  // namespace musel
