#include <algorithm>
#include <cmath>
#include <numbers>

#include "tcsf/common.hpp"
#include "tcsf/rng.hpp"
#include "tcsf/synth.hpp"

namespace tcsf {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

StormStatus status_for(double vmax) {
  if (vmax < 34.0) return StormStatus::TD;
  if (vmax < 64.0) return StormStatus::TS;
  return StormStatus::HU;
}

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

}  // namespace

void SynthStormSpec::validate() const {
  const double rates[] = {duration_h,       initial_kt,         peak_kt,          growth_rate_per_h,
                          peak_time_h,      decay_rate_per_h,   noise_std_kt,     noise_corr_h,
                          ambient_degc,     depression_per_kt,  ring_base_km,     ring_per_kt,
                          eye_threshold_kt, eye_radius_km,      eye_warming_per_kt, shear_kt,
                          shear_heading_deg, asymmetry_per_kt,  structure_noise_degc, lat0,
                          lon0,             drift_north_kmh,    drift_east_kmh,   carq_noise_kt,
                          pixel_km};
  for (double r : rates) {
    if (!std::isfinite(r)) throw Error(ErrorCode::invalid_argument, "synth: non-finite storm parameter");
  }
  if (duration_h < 6.0) throw Error(ErrorCode::invalid_argument, "synth: duration must be at least 6 h");
  if (noise_std_kt < 0.0 || structure_noise_degc < 0.0 || carq_noise_kt < 0.0) {
    throw Error(ErrorCode::invalid_argument, "synth: noise std must be non-negative");
  }
  if (!(eye_threshold_kt > 0.0)) throw Error(ErrorCode::invalid_argument, "synth: eye threshold must be positive");
  if (!(growth_rate_per_h > 0.0) || !(noise_corr_h > 0.0) || !(eye_radius_km > 0.0) || !(ring_base_km > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "synth: rates and radii must be positive");
  }
  if (!(pixel_km > 0.0) || extent < 3 || extent % 2 == 0) {
    throw Error(ErrorCode::invalid_argument, "synth: grid extent must be odd and at least 3");
  }
  if (!is_synoptic(genesis)) throw Error(ErrorCode::invalid_argument, "synth: genesis must be a synoptic time");
  if (storm_id.size() != 8) throw Error(ErrorCode::invalid_argument, "synth: storm id must look like AL012001");
}

double synth_base_intensity(const SynthStormSpec& s, double hours) {
  const double mid = s.peak_time_h - 3.0 / s.growth_rate_per_h;
  const auto rise = [&](double t) { return s.initial_kt + (s.peak_kt - s.initial_kt) * sigmoid(s.growth_rate_per_h * (t - mid)); };
  if (hours <= s.peak_time_h) return rise(hours);
  return s.initial_kt + (rise(s.peak_time_h) - s.initial_kt) * std::exp(-s.decay_rate_per_h * (hours - s.peak_time_h));
}

double synth_mean_temperature(const SynthStormSpec& s, double v, double r_km) {
  const double radius = s.ring_base_km + s.ring_per_kt * v;
  const double ring = std::exp(-r_km * r_km / (2.0 * radius * radius));
  double t = s.ambient_degc - s.depression_per_kt * v * ring;
  if (v >= s.eye_threshold_kt) {
    t += s.eye_warming_per_kt * (v - s.eye_threshold_kt) *
         std::exp(-r_km * r_km / (2.0 * s.eye_radius_km * s.eye_radius_km));
  }
  return t;
}

double synth_temperature(const SynthStormSpec& s, double v, double east_km, double north_km) {
  const double r = std::hypot(east_km, north_km);
  const double radius = s.ring_base_km + s.ring_per_kt * v;
  const double ring = std::exp(-r * r / (2.0 * radius * radius));
  const double bearing = std::atan2(east_km, north_km);
  const double heading = s.shear_heading_deg * std::numbers::pi / 180.0;
  return synth_mean_temperature(s, v, r) - s.asymmetry_per_kt * s.shear_kt * std::cos(bearing - heading) * ring;
}

SynthStorm gen_storm(const SynthStormSpec& spec, const std::function<void(BrightnessStamp&&)>& sink) {
  spec.validate();
  SynthStorm out;
  out.spec = spec;
  const int n = static_cast<int>(std::floor(spec.duration_h / 2.0)) + 1;

  Rng intensity_rng(derive_seed(spec.seed, 0));
  const double rho = std::exp(-2.0 / spec.noise_corr_h);
  double noise = spec.noise_std_kt * standard_normal(intensity_rng);
  const double km_per_deg = 111.0;
  for (int i = 0; i < n; ++i) {
    const double h = 2.0 * i;
    if (i > 0) noise = rho * noise + spec.noise_std_kt * std::sqrt(1.0 - rho * rho) * standard_normal(intensity_rng);
    TrackPoint p;
    p.storm_id = spec.storm_id;
    p.time = spec.genesis + kProfileStep * i;
    p.lat = spec.lat0 + spec.drift_north_kmh * h / km_per_deg;
    p.lon = spec.lon0 + spec.drift_east_kmh * h / (km_per_deg * std::cos(p.lat * std::numbers::pi / 180.0));
    p.vmax = std::max(10.0, synth_base_intensity(spec, h) + noise);
    p.status = status_for(*p.vmax);
    p.source = TrackSource::best_track;
    p.pressure = 1012.0 - 0.9 * std::max(0.0, *p.vmax - 20.0);
    out.truth.push_back(p);
  }

  Rng carq_rng(derive_seed(spec.seed, 1));
  for (const auto& t : out.truth) {
    if (!is_synoptic(t.time)) continue;
    TrackPoint b = t;
    b.lat = round_to(t.lat, 0.1);
    b.lon = round_to(t.lon, 0.1);
    b.vmax = std::round(*t.vmax);
    b.pressure = std::round(*t.pressure);
    b.status = status_for(*b.vmax);
    out.best_track.push_back(b);
    TrackPoint o = b;
    o.source = TrackSource::operational;
    o.vmax = std::max(10.0, std::round(*b.vmax + spec.carq_noise_kt * standard_normal(carq_rng)));
    out.operational.push_back(o);
    out.shear.push_back({spec.storm_id, t.time, round_to(spec.shear_kt, 0.1), round_to(spec.shear_heading_deg, 1.0)});
  }

  const auto half = static_cast<std::size_t>(spec.extent / 2);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(i)));
    BrightnessStamp st;
    st.storm_id = spec.storm_id;
    st.time = out.truth[i].time;
    st.pixel_km = spec.pixel_km;
    st.rows = st.cols = static_cast<std::size_t>(spec.extent);
    st.center_row = st.center_col = half;
    st.grid.resize(st.rows * st.cols);
    const double v = *out.truth[i].vmax;
    for (std::size_t r = 0; r < st.rows; ++r) {
      for (std::size_t c = 0; c < st.cols; ++c) {
        const double north = (static_cast<double>(half) - static_cast<double>(r)) * spec.pixel_km;
        const double east = (static_cast<double>(c) - static_cast<double>(half)) * spec.pixel_km;
        double t = synth_temperature(spec, v, east, north);
        if (spec.structure_noise_degc > 0.0) t += spec.structure_noise_degc * standard_normal(rng);
        st.at(r, c) = static_cast<float>(std::clamp(t, kMinStampTemperature + 5.0, kMaxStampTemperature - 5.0));
      }
    }
    if (sink) {
      sink(std::move(st));
    } else {
      out.stamps.push_back(std::move(st));
    }
  }
  return out;
}

SynthStormProfiles gen_storm_profiles(const SynthStormSpec& spec) {
  SynthStormProfiles out;
  out.storm = gen_storm(spec, [&](BrightnessStamp&& st) { out.profiles[st.time] = compute_radial_profiles(st); });
  return out;
}

}  // namespace tcsf
