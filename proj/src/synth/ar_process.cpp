#include <cmath>
#include <numbers>

#include "tcsf/common.hpp"
#include "tcsf/rng.hpp"
#include "tcsf/synth.hpp"

namespace tcsf {

namespace {

double gaussian_nll(double x, double mean, double var) {
  const double d = x - mean;
  return 0.5 * std::log(2.0 * std::numbers::pi * var) + 0.5 * d * d / var;
}

}  // namespace

ArProcessOracle::ArProcessOracle(const ArProcessParams& params) : p_(params) {
  if (!(std::abs(p_.phi) < 1.0)) throw Error(ErrorCode::invalid_argument, "ar process: |phi| must be below 1 for stationarity");
  if (!(p_.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "ar process: sigma must be positive");
  if (p_.length < 1) throw Error(ErrorCode::invalid_argument, "ar process: length must be positive");
}

double ArProcessOracle::mean(int quadrant, int bin) const {
  return p_.mean_inner + (p_.mean_outer - p_.mean_inner) * bin / static_cast<double>(kRadialBins - 1) +
         p_.quadrant_offset[quadrant];
}

double ArProcessOracle::conditional_mean(int quadrant, int bin, double previous) const {
  const double m = mean(quadrant, bin);
  return m + p_.phi * (previous - m);
}

double ArProcessOracle::step_nll() const {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * conditional_variance());
}

double ArProcessOracle::stationary_nll() const {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * stationary_variance());
}

double ArProcessOracle::window_nll(int rows) const {
  if (rows < 1) throw Error(ErrorCode::invalid_argument, "ar process: window needs at least one row");
  return (stationary_nll() + (rows - 1) * step_nll()) / rows;
}

double ArProcessOracle::window_nll(const StructuralTrajectory& w) const {
  double total = 0.0;
  for (int r = 0; r < w.rows(); ++r) {
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) {
        total += r == 0 ? gaussian_nll(w.at(r, k, q), mean(q, k), stationary_variance())
                        : gaussian_nll(w.at(r, k, q), conditional_mean(q, k, w.at(r - 1, k, q)),
                                       conditional_variance());
      }
    }
  }
  return total / static_cast<double>(w.data().size());
}

ArProcessSeries gen_ar_profile_process(std::uint64_t seed, const ArProcessParams& params) {
  ArProcessSeries out{{}, ArProcessOracle(params)};
  const ArProcessOracle& o = out.oracle;
  Rng rng(seed);
  ProfileGrid x{};
  for (int q = 0; q < kQuadrants; ++q) {
    for (int k = 0; k < kRadialBins; ++k) x[q][k] = o.mean(q, k) + std::sqrt(o.stationary_variance()) * standard_normal(rng);
  }
  for (int t = 0; t < params.length; ++t) {
    if (t > 0) {
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) {
          x[q][k] = o.conditional_mean(q, k, x[q][k]) + params.sigma * standard_normal(rng);
        }
      }
    }
    RadialProfileSet set;
    set.time = params.start + kProfileStep * t;
    set.values = x;
    for (auto& row : set.valid_counts) row.fill(1);
    out.series[set.time] = set;
  }
  return out;
}

}  // namespace tcsf
