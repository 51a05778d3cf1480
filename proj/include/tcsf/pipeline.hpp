#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcsf/nowcast.hpp"
#include "tcsf/orb.hpp"
#include "tcsf/structsim.hpp"
#include "tcsf/verify.hpp"

namespace tcsf {

// How the unknown intensity at t+6 h feeds the 12-h chain.
enum class ChainPolicy { member, ensemble_mean };

const char* chain_policy_name(ChainPolicy policy);
ChainPolicy parse_chain_policy(const std::string& name);

struct ForecastEnsemble {
  std::string storm_id;
  UtcTime anchor{};
  int lead_h = 6;
  std::vector<StructuralTrajectory> trajectories;  // 13 observed + lead/2 simulated rows
  std::vector<double> member_intensities;          // kt
  double mean_intensity = 0.0;

  int size() const { return static_cast<int>(member_intensities.size()); }
  double spread() const;  // sample standard deviation, 0 for one member
};

// Operational intensities at or before t only.
std::vector<TrackPoint> truncate_series(const std::vector<TrackPoint>& series, UtcTime t);

// Nowcasts at t+lead on already completed trajectories. Intensities after the
// anchor in `operational` are ignored.
ForecastEnsemble forecast_from_trajectories(const NowcastModel& now_model,
                                            std::vector<StructuralTrajectory> trajectories,
                                            const std::vector<TrackPoint>& operational, UtcTime t, int lead_h,
                                            ChainPolicy chain = ChainPolicy::member);

// Simulates lead/2 rows per member (member i seeded by derive_seed(seed, i))
// and nowcasts the 13-row window ending at t+lead.
ForecastEnsemble forecast(const StructSimModel& sim_model, const NowcastModel& now_model,
                          const ProfileSeries& history, const std::vector<TrackPoint>& operational, UtcTime t,
                          int lead_h, int n, std::uint64_t seed, ChainPolicy chain = ChainPolicy::member);

// ---- guidance ---------------------------------------------------------------------

struct GuidanceRecord {
  std::string storm_id;
  UtcTime anchor{};
  int lead_h = 0;
  std::vector<double> members;
  double mean = 0.0;
  double spread = 0.0;
  std::optional<double> observed;

  bool operator==(const GuidanceRecord&) const = default;
};

GuidanceRecord make_guidance_record(const ForecastEnsemble& ensemble, std::optional<double> observed = {});
std::string format_guidance_record(const GuidanceRecord& record);  // one JSON line, no newline
GuidanceRecord parse_guidance_record(const std::string& line);
void write_guidance_records(const std::vector<GuidanceRecord>& records, const std::filesystem::path& path);
std::vector<GuidanceRecord> read_guidance_records(const std::filesystem::path& path);

// Simulated profile at the lead row for every member, per quadrant, with the
// ensemble-mean overlay.
struct SpaghettiPanel {
  Quadrant quadrant = Quadrant::NE;
  std::vector<std::vector<double>> members;  // members x 80 bins
  std::vector<double> mean;
};
std::vector<SpaghettiPanel> spaghetti_panels(const ForecastEnsemble& ensemble);

Image render_histogram(const ForecastEnsemble& ensemble, std::optional<double> observed = {});
Image render_spaghetti(const std::vector<SpaghettiPanel>& panels);

struct GuidanceFiles {
  std::filesystem::path histogram;
  std::filesystem::path spaghetti;
  std::vector<std::filesystem::path> hovmollers;
  std::filesystem::path record;
};

// Writes <stem>_histogram.png, <stem>_spaghetti.png, <stem>_member<i>.png for
// the first `hovmoller_members` members, and <stem>.jsonl.
GuidanceFiles emit_guidance(const ForecastEnsemble& ensemble, const std::filesystem::path& dir,
                            const std::string& stem, int hovmoller_members = 4,
                            std::optional<double> observed = {});

// ---- bulk verification --------------------------------------------------------------

struct StormCase {
  std::string storm_id;
  ProfileSeries profiles;
  std::vector<TrackPoint> best_track;   // 2-h interpolated truth
  std::vector<TrackPoint> operational;  // CARQ
  std::vector<ShearRecord> shear;
};

// Synoptic anchors with 13 observed rows, operational persistence coverage,
// a best-track value at t+lead and observed profiles through t+lead.
std::vector<UtcTime> forecast_anchors(const StormCase& storm, int lead_h, const NowcastFeatureConfig& features);

struct BulkVerification {
  int lead_h = 6;
  std::vector<VerificationRecord> model;        // ensemble mean
  std::vector<VerificationRecord> persistence;  // Y_t carried forward
  std::vector<VerificationRecord> frozen;       // nowcast on frozen-profile trajectories
  std::vector<GuidanceRecord> guidance;
  std::vector<TrajectoryScore> structure;
  std::vector<TrajectoryScore> structure_persistence;
};

// Anchor k of storm s uses seed derive_seed(derive_seed(seed, s), k).
BulkVerification run_bulk_verification(const StructSimModel& sim_model, const NowcastModel& now_model,
                                       const std::vector<StormCase>& storms, int lead_h, int members,
                                       std::uint64_t seed, ChainPolicy chain = ChainPolicy::member);

}  // namespace tcsf
