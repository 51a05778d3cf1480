#include <cmath>
#include <numeric>

#include "tcsf/common.hpp"
#include "tcsf/pipeline.hpp"

namespace tcsf {

const char* chain_policy_name(ChainPolicy policy) {
  return policy == ChainPolicy::member ? "member" : "ensemble_mean";
}

ChainPolicy parse_chain_policy(const std::string& name) {
  if (name == "member") return ChainPolicy::member;
  if (name == "ensemble_mean") return ChainPolicy::ensemble_mean;
  throw Error(ErrorCode::config, "unknown chain policy '" + name + "' (expected member or ensemble_mean)");
}

double ForecastEnsemble::spread() const {
  const auto n = member_intensities.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : member_intensities) ss += (v - mean_intensity) * (v - mean_intensity);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

std::vector<TrackPoint> truncate_series(const std::vector<TrackPoint>& series, UtcTime t) {
  std::vector<TrackPoint> out;
  for (const auto& p : series) {
    if (p.time <= t) out.push_back(p);
  }
  return out;
}

namespace {

void check_lead(int lead_h) {
  if (lead_h != 6 && lead_h != 12) {
    throw Error(ErrorCode::invalid_argument, "lead must be 6 or 12 h, got " + std::to_string(lead_h));
  }
}

double nowcast_window(const NowcastModel& model, const StructuralTrajectory& traj, int last_row,
                      const std::vector<TrackPoint>& series, UtcTime when) {
  const StructuralTrajectory window = traj.slice(last_row - kObservedRows + 1, kObservedRows, kObservedRows);
  return predict_now(model, build_features(window, series, when, model.features));
}

}  // namespace

ForecastEnsemble forecast_from_trajectories(const NowcastModel& now_model,
                                            std::vector<StructuralTrajectory> trajectories,
                                            const std::vector<TrackPoint>& operational, UtcTime t, int lead_h,
                                            ChainPolicy chain) {
  check_lead(lead_h);
  if (trajectories.empty()) throw Error(ErrorCode::invalid_argument, "forecast: no trajectories");
  const int steps = lead_h / 2;
  for (const auto& traj : trajectories) {
    if (traj.n_observed() != kObservedRows || traj.n_simulated() < steps || traj.anchor_time() != t) {
      throw Error(ErrorCode::shape, "forecast: trajectories must hold 13 observed rows ending at the anchor plus " +
                                        std::to_string(steps) + " simulated rows");
    }
  }
  const std::vector<TrackPoint> ops = truncate_series(operational, t);
  ForecastEnsemble out;
  out.anchor = t;
  out.lead_h = lead_h;
  const int anchor_row = kObservedRows - 1;
  if (lead_h == 6) {
    for (const auto& traj : trajectories) {
      out.member_intensities.push_back(nowcast_window(now_model, traj, anchor_row + 3, ops, t + Hours{6}));
    }
  } else {
    std::vector<double> six;
    for (const auto& traj : trajectories) six.push_back(nowcast_window(now_model, traj, anchor_row + 3, ops, t + Hours{6}));
    const double six_mean = std::accumulate(six.begin(), six.end(), 0.0) / static_cast<double>(six.size());
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      std::vector<TrackPoint> series = ops;
      TrackPoint p;
      p.storm_id = ops.empty() ? std::string() : ops.back().storm_id;
      p.time = t + Hours{6};
      p.vmax = chain == ChainPolicy::member ? six[i] : six_mean;
      p.source = TrackSource::operational;
      series.push_back(p);
      out.member_intensities.push_back(nowcast_window(now_model, trajectories[i], anchor_row + 6, series, t + Hours{12}));
    }
  }
  out.mean_intensity = std::accumulate(out.member_intensities.begin(), out.member_intensities.end(), 0.0) /
                       static_cast<double>(out.member_intensities.size());
  out.trajectories = std::move(trajectories);
  return out;
}

ForecastEnsemble forecast(const StructSimModel& sim_model, const NowcastModel& now_model,
                          const ProfileSeries& history, const std::vector<TrackPoint>& operational, UtcTime t,
                          int lead_h, int n, std::uint64_t seed, ChainPolicy chain) {
  check_lead(lead_h);
  const StructuralTrajectory observed = assemble_trajectory(history, t);
  return forecast_from_trajectories(now_model, ensemble(sim_model, observed, n, lead_h / 2, seed), operational, t,
                                    lead_h, chain);
}

}  // namespace tcsf
