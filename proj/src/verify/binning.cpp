#include <cmath>
#include <limits>

#include "tcsf/common.hpp"
#include "tcsf/verify.hpp"

namespace tcsf {

int shear_magnitude_bin(double kt) {
  if (!(kt >= 0.0)) throw Error(ErrorCode::domain, "shear magnitude must be non-negative");
  return kt < 10.0 ? 0 : (kt < 20.0 ? 1 : 2);
}

int shear_direction_bin(double deg) {
  if (!std::isfinite(deg)) throw Error(ErrorCode::domain, "shear direction must be finite");
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return static_cast<int>(d / 90.0) % 4;
}

int category_bin(double kt) {
  if (kt < 34.0) return 0;
  if (kt < 64.0) return 1;
  if (kt < 96.0) return 2;
  return 3;
}

int evolution_bin(double delta6h) {
  if (delta6h < -5.0) return 0;
  if (delta6h <= 5.0) return 1;
  return 2;
}

namespace {

struct Accumulator {
  std::vector<std::vector<double>> preds, truths;
  int unbinned = 0;
  explicit Accumulator(std::size_t n) : preds(n), truths(n) {}
  void add(std::optional<int> bin, const VerificationRecord& r) {
    if (!bin) {
      ++unbinned;
      return;
    }
    preds[*bin].push_back(r.prediction);
    truths[*bin].push_back(r.truth);
  }
  BinnedTable table(std::string name, std::vector<std::string> labels) const {
    BinnedTable t{std::move(name), std::move(labels), {}, unbinned};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < preds.size(); ++b) {
      t.scores.push_back(preds[b].empty() ? IntensityScore{nan, nan, nan, 0} : intensity_score(preds[b], truths[b]));
    }
    return t;
  }
};

}  // namespace

BinnedVerification binned_verification(const std::vector<VerificationRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::invalid_argument, "binned_verification: no records");
  Accumulator mag(3), dir(4), cat(4), evo(3);
  std::vector<double> p, t;
  for (const auto& r : records) {
    p.push_back(r.prediction);
    t.push_back(r.truth);
    mag.add(r.shear_magnitude && *r.shear_magnitude >= 0.0 ? std::optional(shear_magnitude_bin(*r.shear_magnitude))
                                                           : std::nullopt,
            r);
    dir.add(r.shear_direction && std::isfinite(*r.shear_direction)
                ? std::optional(shear_direction_bin(*r.shear_direction))
                : std::nullopt,
            r);
    cat.add(std::isfinite(r.truth) ? std::optional(category_bin(r.truth)) : std::nullopt, r);
    evo.add(r.delta6h && std::isfinite(*r.delta6h) ? std::optional(evolution_bin(*r.delta6h)) : std::nullopt, r);
  }
  BinnedVerification v;
  v.overall = intensity_score(p, t);
  v.shear_magnitude = mag.table("shear_magnitude", {"0-10kt", "10-20kt", ">=20kt"});
  v.shear_direction = dir.table("shear_direction", {"NE", "SE", "SW", "NW"});
  v.category = cat.table("category", {"TD", "TS", "HU", "MH"});
  v.evolution = evo.table("evolution", {"weakening", "maintenance", "intensifying"});
  return v;
}

}  // namespace tcsf
