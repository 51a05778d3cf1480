#pragma once

// Synthetic storms with closed-form structure. This is a test bed, not a
// physical tropical-cyclone model.
//
// Intensity (kt), t in hours since genesis:
//   rise(t)  = v0 + (vp - v0) * sigmoid(g * (t - t_peak + 3/g))        t <= t_peak
//   decay(t) = v0 + (rise(t_peak) - v0) * exp(-d * (t - t_peak))       t >  t_peak
//   v(t)     = max(10, base(t) + n(t)), n an AR(1) sequence on the 2-h grid with
//              stationary std `noise_std_kt` and correlation exp(-2 h / noise_corr_h).
//
// Brightness temperature at radius r (km) and compass bearing b (deg):
//   ring(r)  = exp(-r^2 / (2 R^2)),  R = ring_base_km + ring_per_kt * v
//   T(r, b)  = ambient - depression_per_kt * v * ring(r)
//              + [v >= eye_threshold] * eye_warming_per_kt * (v - eye_threshold) * exp(-r^2 / (2 r_eye^2))
//              - asymmetry_per_kt * S * cos(b - shear_heading) * ring(r)
//              + white noise (structure_noise_degc)
// so the azimuthal mean is the same expression without the shear and noise
// terms.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tcsf/ingest.hpp"
#include "tcsf/orb.hpp"
#include "tcsf/stamp.hpp"

namespace tcsf {

struct SynthStormSpec {
  std::string storm_id = "AL012001";
  std::string name = "SYNTH";
  std::uint64_t seed = 1;
  UtcTime genesis = make_time(2001, 8, 1, 0);
  double duration_h = 144.0;

  double initial_kt = 25.0;
  double peak_kt = 110.0;
  double growth_rate_per_h = 0.08;
  double peak_time_h = 72.0;
  double decay_rate_per_h = 0.015;
  double noise_std_kt = 2.0;
  double noise_corr_h = 12.0;

  double ambient_degc = 10.0;
  double depression_per_kt = 0.6;
  double ring_base_km = 150.0;
  double ring_per_kt = 1.0;
  double eye_threshold_kt = 64.0;
  double eye_radius_km = 15.0;
  double eye_warming_per_kt = 0.8;
  double shear_kt = 10.0;
  double shear_heading_deg = 45.0;
  double asymmetry_per_kt = 0.15;
  double structure_noise_degc = 1.0;

  double lat0 = 15.0;
  double lon0 = -45.0;
  double drift_north_kmh = 10.0;
  double drift_east_kmh = -15.0;
  double carq_noise_kt = 3.0;

  double pixel_km = 4.0;
  int extent = 201;  // odd; the centre pixel is the storm centre

  void validate() const;
};

struct SynthStorm {
  SynthStormSpec spec;
  std::vector<BrightnessStamp> stamps;       // 2-h cadence
  std::vector<TrackPoint> best_track;        // 6-h cadence, rounded kt
  std::vector<TrackPoint> operational;       // CARQ-style: best track plus noise
  std::vector<TrackPoint> truth;             // 2-h, unrounded
  std::vector<ShearRecord> shear;            // 6-h cadence
};

// Noise-free intensity curve.
double synth_base_intensity(const SynthStormSpec& spec, double hours);
// Noise-free azimuthal-mean temperature at radius r for intensity v.
double synth_mean_temperature(const SynthStormSpec& spec, double v, double r_km);
// Noise-free field at offset (east, north) km.
double synth_temperature(const SynthStormSpec& spec, double v, double east_km, double north_km);

// Stamps go to `sink` one at a time when given, otherwise into the result.
SynthStorm gen_storm(const SynthStormSpec& spec,
                     const std::function<void(BrightnessStamp&&)>& sink = nullptr);

// Storm tracks plus the profile series reduced from each rendered stamp.
struct SynthStormProfiles {
  SynthStorm storm;  // without stamps
  ProfileSeries profiles;
};
SynthStormProfiles gen_storm_profiles(const SynthStormSpec& spec);

// ---- autoregressive profile process ------------------------------------------------

// x_{t,q,k} = m_{q,k} + phi * (x_{t-1,q,k} - m_{q,k}) + sigma * e, e ~ N(0,1)
// independently per pixel, started from the stationary law; m is linear in
// radius plus a per-quadrant offset.
struct ArProcessParams {
  double phi = 0.7;
  double sigma = 2.0;
  double mean_inner = -60.0;
  double mean_outer = -20.0;
  std::array<double, kQuadrants> quadrant_offset{0.0, 0.0, 0.0, 0.0};
  int length = 200;
  UtcTime start = make_time(2001, 1, 1, 0);
};

class ArProcessOracle {
 public:
  explicit ArProcessOracle(const ArProcessParams& params);
  double mean(int quadrant, int bin) const;
  double conditional_mean(int quadrant, int bin, double previous) const;
  double conditional_variance() const { return p_.sigma * p_.sigma; }
  double stationary_variance() const { return p_.sigma * p_.sigma / (1.0 - p_.phi * p_.phi); }
  // Exact negative log-density of one innovation step / one stationary draw.
  double step_nll() const;
  double stationary_nll() const;
  // Expected per-pixel NLL of a window of `rows` rows whose first row has no
  // conditioning context.
  double window_nll(int rows) const;
  // Exact NLL of a window given its values.
  double window_nll(const StructuralTrajectory& window) const;
  const ArProcessParams& params() const { return p_; }

 private:
  ArProcessParams p_;
};

struct ArProcessSeries {
  ProfileSeries series;
  ArProcessOracle oracle;
};

ArProcessSeries gen_ar_profile_process(std::uint64_t seed, const ArProcessParams& params);

// ---- corpus ---------------------------------------------------------------------

struct StormSplits {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

// Storm-level 60/20/20 split: validation and test each max(1, round(0.2 n)).
StormSplits split_storms(std::vector<std::string> ids, std::uint64_t seed);

struct SynthCorpus {
  std::vector<SynthStormSpec> specs;
  StormSplits splits;
};

struct SynthCorpusOptions {
  double min_duration_h = 120.0;
  double max_duration_h = 168.0;
  double pixel_km = 4.0;
  int extent = 201;
  double structure_noise_degc = 1.0;
};

// Randomised storm specs with deterministic ids, parameters and splits.
SynthCorpus gen_corpus(int n_storms, std::uint64_t seed, const SynthCorpusOptions& options = {});

// Writes the corpus in the ingest layouts under `root`:
// storms/<id>/stamps/<YYYYMMDDHH>.hdr|.bin, hurdat2.txt, adeck/<id>.dat,
// ships.txt, splits.json.
void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& root);

void write_splits_json(const StormSplits& splits, const std::filesystem::path& path);
StormSplits read_splits_json(const std::filesystem::path& path);

}  // namespace tcsf
