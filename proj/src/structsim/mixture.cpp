#include <algorithm>
#include <cmath>
#include <limits>

#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

namespace tcsf {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log f(z; mu, s) for the logistic density.
double logistic_logpdf(double z, double mu, double s) {
  const double t = (z - mu) / s;
  return -t - std::log(s) - 2.0 * softplus(-t);
}

double log_sum_exp(const double* v, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

void LogisticMixture::validate() const {
  const std::size_t k = weights.size();
  if (k == 0 || locations.size() != k || scales.size() != k) {
    throw Error(ErrorCode::invalid_argument, "mixture: component arrays must be non-empty and equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(weights[i] >= 0.0)) throw Error(ErrorCode::invalid_argument, "mixture: negative weight");
    if (!(scales[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "mixture: scale must be positive");
    if (!std::isfinite(locations[i]) || !std::isfinite(scales[i])) {
      throw Error(ErrorCode::invalid_argument, "mixture: non-finite parameter");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "mixture: weights do not sum to 1");
}

double mol_logpdf(double z, const LogisticMixture& mix) {
  mix.validate();
  const int k = mix.components();
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    terms[i] = mix.weights[i] > 0.0
                   ? std::log(mix.weights[i]) + logistic_logpdf(z, mix.locations[i], mix.scales[i])
                   : -std::numeric_limits<double>::infinity();
  }
  return log_sum_exp(terms.data(), k);
}

double mol_cdf(double z, const LogisticMixture& mix) {
  mix.validate();
  double c = 0.0;
  for (int i = 0; i < mix.components(); ++i) c += mix.weights[i] * sigmoid((z - mix.locations[i]) / mix.scales[i]);
  return c;
}

double mol_mean(const LogisticMixture& mix) {
  double m = 0.0;
  for (int i = 0; i < mix.components(); ++i) m += mix.weights[i] * mix.locations[i];
  return m;
}

double mol_sample(const LogisticMixture& mix, Rng& rng) {
  mix.validate();
  const int k = mix.components();
  const double pick = uniform_open(rng);
  int chosen = -1;
  double cum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (mix.weights[i] <= 0.0) continue;
    chosen = i;
    cum += mix.weights[i];
    if (pick < cum) break;
  }
  const double u = uniform_open(rng);
  return mix.locations[chosen] + mix.scales[chosen] * (std::log(u) - std::log1p(-u));
}

LogisticMixture constrain_mixture(const double* raw, int components) {
  LogisticMixture mix;
  const int k = components;
  mix.weights.resize(k);
  mix.locations.assign(raw + k, raw + 2 * k);
  mix.scales.resize(k);
  const double m = *std::max_element(raw, raw + k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += (mix.weights[i] = std::exp(raw[i] - m));
  for (int i = 0; i < k; ++i) {
    mix.weights[i] /= sum;
    mix.scales[i] = softplus(raw[2 * k + i]) + kScaleFloor;
  }
  return mix;
}

double mixture_nll_and_grad(double z, const double* raw, int components, double* grad) {
  const int k = components;
  constexpr int kMax = 16;
  if (k > kMax) throw Error(ErrorCode::invalid_argument, "mixture: too many components");
  double log_pi[kMax], ell[kMax], t[kMax], s[kMax];
  const double lse_logits = log_sum_exp(raw, k);
  for (int i = 0; i < k; ++i) {
    log_pi[i] = raw[i] - lse_logits;
    s[i] = softplus(raw[2 * k + i]) + kScaleFloor;
    t[i] = (z - raw[k + i]) / s[i];
    ell[i] = log_pi[i] - t[i] - std::log(s[i]) - 2.0 * softplus(-t[i]);
  }
  const double log_p = log_sum_exp(ell, k);
  for (int i = 0; i < k; ++i) {
    const double w = std::exp(ell[i] - log_p);  // responsibility
    const double pi = std::exp(log_pi[i]);
    const double dlogf_dt = 1.0 - 2.0 * sigmoid(t[i]);
    const double dlogf_dmu = -dlogf_dt / s[i];
    const double dlogf_ds = -dlogf_dt * t[i] / s[i] - 1.0 / s[i];
    grad[i] = -(w - pi);
    grad[k + i] = -w * dlogf_dmu;
    grad[2 * k + i] = -w * dlogf_ds * sigmoid(raw[2 * k + i]);
  }
  return -log_p;
}

}  // namespace tcsf
