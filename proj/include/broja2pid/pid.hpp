#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "broja2pid/distributions.hpp"
#include "broja2pid/errors.hpp"
#include "broja2pid/model.hpp"
#include "broja2pid/quality.hpp"
#include "broja2pid/solver.hpp"

namespace broja2pid {

inline constexpr const char* kSolverName = "broja2pid-barrier";
inline constexpr double kMassTolerance = 1e-6;
inline constexpr double kCrossCheckToleranceBits = 1e-6;

inline double nats_to_bits(double v) { return v / std::numbers::ln2; }

/// Shared, unique and synergistic information in bits, plus the audit triple
/// and solver metadata.
struct PidResult {
  double si = 0.0;
  double uiy = 0.0;
  double uiz = 0.0;
  double ci = 0.0;
  NumErr num_err;
  std::string solver = kSolverName;
  int iterations = 0;
  int newton_steps = 0;
  int max_iter = 0;
  SolveStatus status = SolveStatus::kOptimal;
  std::string detail;
  bool consistency_warning = false;
  double si_cross_check = 0.0;  // MI_p(X;Z) - UIZ, bits
};

struct DecomposeMeta {
  std::string solver = kSolverName;
  int iterations = 0;
  int newton_steps = 0;
  int max_iter = 0;
  SolveStatus status = SolveStatus::kOptimal;
  std::string detail;
};

/// Decomposition from an optimizer given as entries over p's alphabets.
/// Negative and zero entries are dropped and the mass renormalized.
inline PidResult decompose_entries(const JointDistribution& p, std::vector<Entry> q) {
  std::erase_if(q, [](const Entry& e) { return !(e.p > 0.0); });
  double mass = 0.0;
  for (const auto& e : q) mass += e.p;
  if (!(std::abs(mass - 1.0) <= kMassTolerance)) {
    throw MassLoss("optimizer mass " + std::to_string(mass));
  }
  for (auto& e : q) e.p /= mass;

  const double uiy = mutual_information(q, Grouping::kXwithYgivenZ);
  const double uiz = mutual_information(q, Grouping::kXwithZgivenY);
  const double ci = mutual_information(p, Grouping::kXwithYZ) -
                    mutual_information(q, Grouping::kXwithYZ);
  const double si = mutual_information(p, Grouping::kXwithY) - uiy;
  const double si_alt = mutual_information(p, Grouping::kXwithZ) - uiz;

  PidResult r;
  r.si = nats_to_bits(si);
  r.uiy = nats_to_bits(uiy);
  r.uiz = nats_to_bits(uiz);
  r.ci = nats_to_bits(ci);
  r.si_cross_check = nats_to_bits(si_alt);
  r.consistency_warning =
      std::abs(r.si - r.si_cross_check) > kCrossCheckToleranceBits;
  return r;
}

/// Turns an optimizer q* (indexed like the model's triplets) into the
/// decomposition.
inline PidResult decompose(const JointDistribution& p, const ExpConeModel& model,
                           std::span<const double> qstar, const NumErr& audit,
                           const DecomposeMeta& meta = {}) {
  std::vector<Entry> q;
  for (int i = 0; i < model.num_triplets(); ++i) {
    const auto& t = model.index()[i];
    q.push_back({t.x, t.y, t.z, qstar[i]});
  }
  PidResult r = decompose_entries(p, std::move(q));
  r.num_err = audit;
  r.solver = meta.solver;
  r.iterations = meta.iterations;
  r.newton_steps = meta.newton_steps;
  r.max_iter = meta.max_iter;
  r.status = meta.status;
  r.detail = meta.detail;
  return r;
}

/// The returndata record: exactly the keys SI, UIY, UIZ, CI, Num_err,
/// Solver, in that order.
inline nlohmann::ordered_json to_returndata(const PidResult& r) {
  nlohmann::ordered_json j;
  j["SI"] = r.si;
  j["UIY"] = r.uiy;
  j["UIZ"] = r.uiz;
  j["CI"] = r.ci;
  j["Num_err"] = {r.num_err.primal_violation, r.num_err.dual_violation,
                  r.num_err.gap_violation};
  j["Solver"] = r.solver;
  return j;
}

inline void print_returndata(std::ostream& os, const PidResult& r) {
  os << to_returndata(r).dump() << "\n";
}

/// Inverse of print_returndata for the returndata fields.
inline PidResult parse_returndata(const nlohmann::json& j) {
  static const std::vector<std::string> kKeys = {"SI",  "UIY",     "UIZ",
                                                 "CI",  "Num_err", "Solver"};
  if (!j.is_object() || j.size() != kKeys.size()) {
    throw ParseError("returndata must be an object with 6 keys");
  }
  for (const auto& k : kKeys) {
    if (!j.contains(k)) throw ParseError("returndata lacks key " + k);
  }
  PidResult r;
  r.si = j.at("SI").get<double>();
  r.uiy = j.at("UIY").get<double>();
  r.uiz = j.at("UIZ").get<double>();
  r.ci = j.at("CI").get<double>();
  const auto& e = j.at("Num_err");
  if (!e.is_array() || e.size() != 3) throw ParseError("Num_err must have 3 entries");
  r.num_err.primal_violation = e[0].get<double>();
  r.num_err.dual_violation = e[1].get<double>();
  r.num_err.gap_violation = e[2].get<double>();
  r.solver = j.at("Solver").get<std::string>();
  return r;
}

inline PidResult parse_returndata(std::string_view text) {
  try {
    return parse_returndata(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}
inline PidResult parse_returndata(const std::string& text) {
  return parse_returndata(std::string_view(text));
}
inline PidResult parse_returndata(const char* text) {
  return parse_returndata(std::string_view(text));
}

/// Everything the end-to-end estimator produces, for callers that want more
/// than the decomposition.
struct PidRun {
  PidResult result;
  PrimalDualSolution solution;
};

/// build_distribution -> marginals -> build_model -> solve -> audit ->
/// decompose. With an output stream, prints according to output_mode:
/// 0 the returndata document only; 1 also stage flags; 2 also the solver log.
inline PidRun pid_run(const RawDistribution& input, const SolverParams& params = {},
                      int output_mode = 0, std::ostream* out = nullptr) {
  if (output_mode < 0 || output_mode > 2) {
    throw InvalidParams("output mode must be 0, 1 or 2");
  }
  const auto p = build_distribution(input);
  if (out && output_mode >= 1) *out << "# BROJA_2PID: preparing cone program\n";
  const auto model = build_model(marginals(p));
  if (out && output_mode >= 1) *out << "# BROJA_2PID: calling solver\n";
  PidRun run;
  run.solution = solve(model, params, (out && output_mode >= 2) ? out : nullptr);
  const NumErr err = audit(run.solution, model);
  DecomposeMeta meta;
  meta.iterations = run.solution.iterations;
  meta.newton_steps = run.solution.newton_steps;
  meta.max_iter = params.max_iter;
  meta.status = run.solution.status;
  meta.detail = run.solution.detail;
  const auto qstar = run.solution.q();
  run.result = decompose(p, model, qstar, err, meta);
  if (out) print_returndata(*out, run.result);
  return run;
}

inline PidResult pid(const RawDistribution& input, const SolverParams& params = {},
                     int output_mode = 0, std::ostream* out = nullptr) {
  return pid_run(input, params, output_mode, out).result;
}

}  // namespace broja2pid
