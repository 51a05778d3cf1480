#include <cmath>

#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

namespace tcsf {

namespace {

void check_request(const StructSimModel& model, const StructuralTrajectory& observed, int steps) {
  if (steps < 1 || steps > kMaxSimulatedRows) {
    throw Error(ErrorCode::invalid_argument, "simulate: steps must be in 1..6, got " + std::to_string(steps));
  }
  if (observed.rows() != kObservedRows) {
    throw Error(ErrorCode::shape, "simulate: observed trajectory must have 13 rows");
  }
  if (kObservedRows + steps > model.arch.window_rows) {
    throw Error(ErrorCode::shape, "simulate: completion exceeds the model window height");
  }
  for (double v : observed.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, "simulate: observed rows must be finite");
  }
}

// Runs the observed rows through the network once; members copy the result.
StructSimNetwork::Stepper prefix_state(const StructSimModel& model, const StructuralTrajectory& observed, int steps,
                                       SimulationDiagnostics* diag) {
  StructSimNetwork::Stepper st(model.network, kObservedRows + steps);
  const ScalingSpec& sc = model.scaling;
  int clamped = 0;
  for (int r = 0; r < kObservedRows; ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) {
        double v = observed.at(r, k, q);
        if (!(v > sc.t_min)) {
          v = sc.t_min + 0.5 * sc.margin;
          ++clamped;
        } else if (!(v < sc.t_max)) {
          v = sc.t_max - 0.5 * sc.margin;
          ++clamped;
        }
        st.z(static_cast<Eigen::Index>(r) * kRadialBins + k, q) = sc.to_logit(v);
      }
    }
  }
  if (diag) diag->clamped_values += clamped;
  nn::RowVector raw(model.network.outputs_per_position());
  for (int p = 0; p < kObservedRows * kRadialBins; ++p) st.step(p, raw);
  return st;
}

StructuralTrajectory sample_rows(const StructSimModel& model, const StructuralTrajectory& observed,
                                 StructSimNetwork::Stepper st, int steps, Rng& rng) {
  const int k = model.arch.components;
  nn::RowVector raw(model.network.outputs_per_position());
  const int first = kObservedRows * kRadialBins;
  const int end = (kObservedRows + steps) * kRadialBins;
  for (int p = first; p < end; ++p) {
    st.step(p, raw);
    for (int q = 0; q < kQuadrants; ++q) {
      st.z(p, q) = mol_sample(constrain_mixture(raw.data() + q * 3 * k, k), rng);
    }
  }
  StructuralTrajectory out(kObservedRows, steps, observed.anchor_time());
  for (int r = 0; r < kObservedRows; ++r) out.set_row(r, observed.row(r));
  for (int r = kObservedRows; r < kObservedRows + steps; ++r) {
    for (int b = 0; b < kRadialBins; ++b) {
      for (int q = 0; q < kQuadrants; ++q) {
        out.at(r, b, q) = model.scaling.from_logit(st.z(static_cast<Eigen::Index>(r) * kRadialBins + b, q));
      }
    }
  }
  return out;
}

}  // namespace

StructuralTrajectory simulate_completion(const StructSimModel& model, const StructuralTrajectory& observed,
                                         int steps, Rng& rng, SimulationDiagnostics* diag) {
  check_request(model, observed, steps);
  return sample_rows(model, observed, prefix_state(model, observed, steps, diag), steps, rng);
}

std::vector<StructuralTrajectory> ensemble(const StructSimModel& model, const StructuralTrajectory& observed,
                                           int n, int steps, std::uint64_t master_seed,
                                           SimulationDiagnostics* diag) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "ensemble: n must be at least 1");
  check_request(model, observed, steps);
  const StructSimNetwork::Stepper prefix = prefix_state(model, observed, steps, diag);
  std::vector<StructuralTrajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    out.push_back(sample_rows(model, observed, prefix, steps, rng));
  }
  return out;
}

StructuralTrajectory mean_trajectory(const std::vector<StructuralTrajectory>& members) {
  if (members.empty()) throw Error(ErrorCode::invalid_argument, "mean_trajectory: no members");
  StructuralTrajectory out = members.front();
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i].rows() != out.rows()) throw Error(ErrorCode::shape, "mean_trajectory: member shapes differ");
    for (std::size_t j = 0; j < out.data().size(); ++j) out.data()[j] += members[i].data()[j];
  }
  for (double& v : out.data()) v /= static_cast<double>(members.size());
  return out;
}

}  // namespace tcsf
