#include <cmath>
#include <set>

#include "tcsf/common.hpp"
#include "tcsf/verify.hpp"

namespace tcsf {

ProfileScore profile_score(const std::vector<ProfileGrid>& members, const ProfileGrid& truth) {
  if (members.empty()) throw Error(ErrorCode::invalid_argument, "profile_score: no members");
  double sq = 0.0, ab = 0.0, sum = 0.0;
  for (const auto& m : members) {
    for (int q = 0; q < kQuadrants; ++q) {
      for (int k = 0; k < kRadialBins; ++k) {
        const double d = m[q][k] - truth[q][k];
        sq += d * d;
        ab += std::abs(d);
        sum += d;
      }
    }
  }
  const double n = static_cast<double>(members.size()) * kQuadrants * kRadialBins;
  return {std::sqrt(sq / n), ab / n, sum / n};
}

TrajectoryScore trajectory_score(const std::vector<StructuralTrajectory>& members, const StructuralTrajectory& truth) {
  if (members.empty()) throw Error(ErrorCode::invalid_argument, "trajectory_score: no members");
  const StructuralTrajectory& first = members.front();
  if (first.n_simulated() < 1) throw Error(ErrorCode::shape, "trajectory_score: members have no simulated rows");
  for (const auto& m : members) {
    if (m.rows() != first.rows() || m.n_observed() != first.n_observed() || m.anchor_time() != first.anchor_time()) {
      throw Error(ErrorCode::shape, "trajectory_score: member shapes differ");
    }
  }
  if (truth.rows() != first.rows() || truth.row_time(first.n_observed() - 1) != first.anchor_time()) {
    throw Error(ErrorCode::shape, "trajectory_score: truth does not match the member rows");
  }
  TrajectoryScore s;
  s.n_times = 1;
  s.n_members = static_cast<int>(members.size());
  double sq = 0.0;
  for (int r = first.n_observed(); r < first.rows(); ++r) {
    std::vector<ProfileGrid> rows;
    for (const auto& m : members) rows.push_back(m.row(r));
    const ProfileScore p = profile_score(rows, truth.row(r));
    s.per_lead[2 * (r - first.n_observed() + 1)] = p;
    sq += p.rmv * p.rmv;
    s.mad += p.mad;
    s.bias += p.bias;
  }
  const double leads = static_cast<double>(s.per_lead.size());
  s.rmv = std::sqrt(sq / leads);
  s.mad /= leads;
  s.bias /= leads;
  return s;
}

TrajectoryScore combine_scores(const std::vector<TrajectoryScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::invalid_argument, "combine_scores: empty input");
  TrajectoryScore out;
  double sq = 0.0;
  std::set<int> leads;
  for (const auto& s : scores) {
    sq += s.rmv * s.rmv;
    out.mad += s.mad;
    out.bias += s.bias;
    out.n_times += s.n_times;
    out.n_members = std::max(out.n_members, s.n_members);
    for (const auto& [lead, p] : s.per_lead) leads.insert(lead);
  }
  const double n = static_cast<double>(scores.size());
  out.rmv = std::sqrt(sq / n);
  out.mad /= n;
  out.bias /= n;
  for (int lead : leads) {
    ProfileScore c;
    double lsq = 0.0, count = 0.0;
    for (const auto& s : scores) {
      const auto it = s.per_lead.find(lead);
      if (it == s.per_lead.end()) continue;
      lsq += it->second.rmv * it->second.rmv;
      c.mad += it->second.mad;
      c.bias += it->second.bias;
      count += 1.0;
    }
    c.rmv = std::sqrt(lsq / count);
    c.mad /= count;
    c.bias /= count;
    out.per_lead[lead] = c;
  }
  return out;
}

StructuralTrajectory persistence_trajectory_baseline(const StructuralTrajectory& observed, int steps) {
  if (observed.n_observed() < 1) throw Error(ErrorCode::shape, "baseline: no observed rows");
  if (steps < 1 || steps > kMaxSimulatedRows) throw Error(ErrorCode::invalid_argument, "baseline: steps must be in 1..6");
  StructuralTrajectory out(observed.n_observed(), steps, observed.anchor_time());
  for (int r = 0; r < observed.n_observed(); ++r) out.set_row(r, observed.row(r));
  const ProfileGrid last = observed.row(observed.n_observed() - 1);
  for (int r = observed.n_observed(); r < out.rows(); ++r) out.set_row(r, last);
  return out;
}

IntensityScore intensity_score(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::invalid_argument, "intensity_score: " + std::to_string(predictions.size()) +
                                                 " predictions vs " + std::to_string(truths.size()) + " truths");
  }
  if (predictions.empty()) throw Error(ErrorCode::invalid_argument, "intensity_score: empty input");
  double sq = 0.0, ab = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    sq += d * d;
    ab += std::abs(d);
    sum += d;
  }
  const double n = static_cast<double>(predictions.size());
  return {std::sqrt(sq / n), ab / n, sum / n, static_cast<int>(predictions.size())};
}

double intensity_persistence_baseline(const std::vector<TrackPoint>& series, UtcTime t, int lead_h) {
  if (lead_h < 0) throw Error(ErrorCode::invalid_argument, "baseline: negative lead");
  const auto v = vmax_at(series, t);
  if (!v) throw Error(ErrorCode::domain, "baseline: intensity missing at " + format_iso(t));
  return *v;
}

}  // namespace tcsf
