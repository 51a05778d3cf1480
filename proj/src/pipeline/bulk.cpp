#include "tcsf/common.hpp"
#include "tcsf/pipeline.hpp"

namespace tcsf {

namespace {

bool has_rows(const ProfileSeries& profiles, UtcTime first, UtcTime last) {
  for (UtcTime t = first; t <= last; t += kProfileStep) {
    if (!profiles.count(t)) return false;
  }
  return true;
}

const ShearRecord* shear_at(const std::vector<ShearRecord>& shear, UtcTime t) {
  for (const auto& r : shear) {
    if (r.time == t) return &r;
  }
  return nullptr;
}

VerificationRecord record(const StormCase& storm, UtcTime t, int lead_h, double prediction) {
  const UtcTime valid = t + Hours{lead_h};
  VerificationRecord r;
  r.storm_id = storm.storm_id;
  r.time = valid;
  r.lead_h = lead_h;
  r.prediction = prediction;
  r.truth = *vmax_at(storm.best_track, valid);
  if (const auto before = vmax_at(storm.best_track, valid - Hours{6})) r.delta6h = r.truth - *before;
  if (const ShearRecord* s = shear_at(storm.shear, t)) {
    r.shear_magnitude = s->magnitude;
    r.shear_direction = s->direction;
  }
  return r;
}

}  // namespace

std::vector<UtcTime> forecast_anchors(const StormCase& storm, int lead_h, const NowcastFeatureConfig& features) {
  if (lead_h != 6 && lead_h != 12) throw Error(ErrorCode::invalid_argument, "lead must be 6 or 12 h");
  std::vector<UtcTime> out;
  for (const auto& [t, set] : storm.profiles) {
    if (!is_synoptic(t)) continue;
    if (!vmax_at(storm.best_track, t + Hours{lead_h})) continue;
    if (!has_rows(storm.profiles, t - kProfileStep * (kObservedRows - 1), t + Hours{lead_h})) continue;
    try {
      // Persistence for the nowcast at t covers the earliest times any lead needs.
      build_features(assemble_trajectory(storm.profiles, t), truncate_series(storm.operational, t), t, features);
    } catch (const Error&) {
      continue;
    }
    out.push_back(t);
  }
  return out;
}

BulkVerification run_bulk_verification(const StructSimModel& sim_model, const NowcastModel& now_model,
                                       const std::vector<StormCase>& storms, int lead_h, int members,
                                       std::uint64_t seed, ChainPolicy chain) {
  if (members < 1) throw Error(ErrorCode::invalid_argument, "bulk verification: members must be at least 1");
  BulkVerification out;
  out.lead_h = lead_h;
  const int steps = lead_h / 2;
  for (std::size_t s = 0; s < storms.size(); ++s) {
    const StormCase& storm = storms[s];
    const auto anchors = forecast_anchors(storm, lead_h, now_model.features);
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      const UtcTime t = anchors[k];
      const std::uint64_t anchor_seed = derive_seed(derive_seed(seed, s), k);
      ForecastEnsemble ens = forecast(sim_model, now_model, storm.profiles, storm.operational, t, lead_h, members,
                                      anchor_seed, chain);
      ens.storm_id = storm.storm_id;
      const VerificationRecord rec = record(storm, t, lead_h, ens.mean_intensity);
      out.model.push_back(rec);
      out.guidance.push_back(make_guidance_record(ens, rec.truth));

      const std::vector<TrackPoint> ops = truncate_series(storm.operational, t);
      const auto y_t = intensity_at(ops, t);
      if (!y_t) throw Error(ErrorCode::internal, "bulk verification: no operational intensity at the anchor");
      out.persistence.push_back(record(storm, t, lead_h, *y_t));

      const StructuralTrajectory observed = assemble_trajectory(storm.profiles, t);
      const StructuralTrajectory frozen = persistence_trajectory_baseline(observed, steps);
      const ForecastEnsemble fz = forecast_from_trajectories(now_model, {frozen}, storm.operational, t, lead_h, chain);
      out.frozen.push_back(record(storm, t, lead_h, fz.mean_intensity));

      StructuralTrajectory truth(kObservedRows, steps, t);
      for (int r = 0; r < truth.rows(); ++r) truth.set_row(r, storm.profiles.at(truth.row_time(r)).values);
      out.structure.push_back(trajectory_score(ens.trajectories, truth));
      out.structure_persistence.push_back(trajectory_score({frozen}, truth));
    }
  }
  return out;
}

}  // namespace tcsf
