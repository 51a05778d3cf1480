#include "tcsf/common.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

StructuralTrajectory::StructuralTrajectory(int n_observed, int n_simulated, UtcTime anchor_time)
    : n_observed_(n_observed), n_simulated_(n_simulated), anchor_time_(anchor_time) {
  if (n_observed < 0 || n_simulated < 0) throw Error(ErrorCode::invalid_argument, "negative row count");
  data_.assign(static_cast<std::size_t>(rows()) * kRadialBins * kQuadrants, 0.0);
}

UtcTime StructuralTrajectory::row_time(int row) const {
  return anchor_time_ + kProfileStep * (row - (n_observed_ - 1));
}

void StructuralTrajectory::set_row(int row, const ProfileGrid& values) {
  for (int k = 0; k < kRadialBins; ++k) {
    for (int q = 0; q < kQuadrants; ++q) at(row, k, q) = values[q][k];
  }
}

ProfileGrid StructuralTrajectory::row(int row) const {
  ProfileGrid out{};
  for (int k = 0; k < kRadialBins; ++k) {
    for (int q = 0; q < kQuadrants; ++q) out[q][k] = at(row, k, q);
  }
  return out;
}

StructuralTrajectory StructuralTrajectory::slice(int first, int count, int n_observed) const {
  if (first < 0 || count < 0 || first + count > rows() || n_observed > count) {
    throw Error(ErrorCode::invalid_argument, "trajectory slice out of range");
  }
  StructuralTrajectory out(n_observed, count - n_observed, row_time(first + n_observed - 1));
  const std::size_t stride = static_cast<std::size_t>(kRadialBins) * kQuadrants;
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
            data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride), out.data_.begin());
  return out;
}

StructuralTrajectory assemble_trajectory(const ProfileSeries& profiles, UtcTime t, int n_rows) {
  std::string missing;
  StructuralTrajectory traj(n_rows, 0, t);
  for (int h = 0; h < n_rows; ++h) {
    const UtcTime when = traj.row_time(h);
    const auto it = profiles.find(when);
    if (it == profiles.end()) {
      missing += (missing.empty() ? "" : ", ") + format_iso(when);
      continue;
    }
    traj.set_row(h, it->second.values);
  }
  if (!missing.empty()) throw Error(ErrorCode::domain, "missing profiles at: " + missing);
  return traj;
}

std::vector<double> azimuthal_mean(const StructuralTrajectory& traj) {
  std::vector<double> out(static_cast<std::size_t>(traj.rows()) * kRadialBins);
  for (int h = 0; h < traj.rows(); ++h) {
    for (int k = 0; k < kRadialBins; ++k) {
      double s = 0.0;
      for (int q = 0; q < kQuadrants; ++q) s += traj.at(h, k, q);
      out[static_cast<std::size_t>(h) * kRadialBins + k] = s / kQuadrants;
    }
  }
  return out;
}

}  // namespace tcsf
