#include <cmath>
#include <sstream>

#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

namespace tcsf {

ScalingSpec ScalingSpec::fit(double data_min, double data_max, double margin) {
  if (!std::isfinite(data_min) || !std::isfinite(data_max) || data_min > data_max) {
    throw Error(ErrorCode::invalid_argument, "scaling: invalid data range");
  }
  if (!(margin > 0.0)) throw Error(ErrorCode::invalid_argument, "scaling: margin must be positive");
  return {data_min - margin, data_max + margin, margin};
}

void ScalingSpec::validate() const {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max)) {
    throw Error(ErrorCode::invalid_argument, "scaling: t_min must be below t_max");
  }
}

double ScalingSpec::to_logit(double degc) const {
  if (!(degc > t_min && degc < t_max)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "temperature " << degc << " degC outside (" << t_min << ", " << t_max << ")";
    throw Error(ErrorCode::domain, msg.str());
  }
  const double x = (degc - t_min) / (t_max - t_min);
  return std::log(x) - std::log1p(-x);
}

double ScalingSpec::from_logit(double z) const {
  const double x = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  const double t = t_min + x * (t_max - t_min);
  const double lo = std::nextafter(t_min, t_max);
  const double hi = std::nextafter(t_max, t_min);
  return t < lo ? lo : (t > hi ? hi : t);
}

double ScalingSpec::log_jacobian(double degc) const {
  const double x = (degc - t_min) / (t_max - t_min);
  return -std::log(t_max - t_min) - std::log(x) - std::log1p(-x);
}

}  // namespace tcsf
