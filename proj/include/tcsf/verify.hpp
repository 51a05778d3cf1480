#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcsf/ingest.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

// ---- structure --------------------------------------------------------------------

struct ProfileScore {
  double rmv = 0.0;
  double mad = 0.0;
  double bias = 0.0;
};

// Radial integrals are unweighted means over the 80 bins.
ProfileScore profile_score(const std::vector<ProfileGrid>& members, const ProfileGrid& truth);

struct TrajectoryScore {
  double rmv = 0.0;  // pooled over every scored lead (quadrature)
  double mad = 0.0;
  double bias = 0.0;
  std::map<int, ProfileScore> per_lead;  // lead hours 2, 4, ..
  int n_times = 0;
  int n_members = 0;
};

// Scores the simulated rows of each member against the same rows of `truth`,
// which must share the members' shape and anchor.
TrajectoryScore trajectory_score(const std::vector<StructuralTrajectory>& members, const StructuralTrajectory& truth);

// MAD and bias averaged, RMV averaged in quadrature; likewise per lead.
TrajectoryScore combine_scores(const std::vector<TrajectoryScore>& scores);

// Frozen-profile stand-in: every forecast row repeats the anchor row.
StructuralTrajectory persistence_trajectory_baseline(const StructuralTrajectory& observed,
                                                     int steps = kMaxSimulatedRows);

// ---- intensity --------------------------------------------------------------------

struct IntensityScore {
  double rmse = 0.0;
  double mae = 0.0;
  double bias = 0.0;  // mean(prediction - truth)
  int n = 0;
};

IntensityScore intensity_score(const std::vector<double>& predictions, const std::vector<double>& truths);

// Y_t from the series; the lead does not change the answer.
double intensity_persistence_baseline(const std::vector<TrackPoint>& series, UtcTime t, int lead_h);

// ---- binned tables ------------------------------------------------------------------

struct VerificationRecord {
  std::string storm_id;
  UtcTime time{};  // valid time
  int lead_h = 0;
  double prediction = 0.0;
  double truth = 0.0;                    // best-track kt at the valid time
  std::optional<double> delta6h;         // truth change over the prior 6 h
  std::optional<double> shear_magnitude; // kt
  std::optional<double> shear_direction; // heading, deg
};

// Bin indices; nullopt for missing keys.
int shear_magnitude_bin(double kt);   // [0,10) [10,20) [20,inf)
int shear_direction_bin(double deg);  // NE [0,90) SE [90,180) SW [180,270) NW [270,360)
int category_bin(double kt);          // TD <34, TS 34-63, HU 64-95, MH >=96
int evolution_bin(double delta6h);    // weakening < -5, maintenance |d| <= 5, intensifying > 5

struct BinnedTable {
  std::string name;
  std::vector<std::string> labels;
  std::vector<IntensityScore> scores;  // n = 0 and NaN metrics for empty bins
  int unbinned = 0;
};

struct BinnedVerification {
  IntensityScore overall;
  BinnedTable shear_magnitude;
  BinnedTable shear_direction;
  BinnedTable category;
  BinnedTable evolution;
};

BinnedVerification binned_verification(const std::vector<VerificationRecord>& records);

void write_table_text(std::ostream& out, const BinnedTable& table);
void write_table_csv(std::ostream& out, const BinnedTable& table);
void write_trajectory_table(std::ostream& out, const TrajectoryScore& score, bool csv);

// Columns: storm_id,time,lead_h,prediction,truth,delta6h,shear_kt,shear_dir
void write_records_csv(std::ostream& out, const std::vector<VerificationRecord>& records);
std::vector<VerificationRecord> read_records_csv(std::istream& in);

}  // namespace tcsf
