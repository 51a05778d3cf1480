#include <cmath>

#include "tcsf/nn.hpp"

namespace tcsf::nn {

void Adam::step(const std::vector<Param*>& params) {
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Param* p : params) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (Param* p : params) {
    const auto g = p->grad.array() * scale;
    p->adam_m.array() = config_.beta1 * p->adam_m.array() + (1.0 - config_.beta1) * g;
    p->adam_v.array() = config_.beta2 * p->adam_v.array() + (1.0 - config_.beta2) * g.square();
    p->value.array() -= config_.learning_rate * (p->adam_m.array() / c1) /
                        ((p->adam_v.array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace tcsf::nn
