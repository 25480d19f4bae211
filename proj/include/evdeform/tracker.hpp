#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "evdeform/event.hpp"
#include "evdeform/series.hpp"
#include "evdeform/synth.hpp"

namespace evdeform {

struct TrackerParams {
  double d_th = 3.0;            // Mahalanobis gate, strict
  Micros t_su = 10'000;         // member lifetime, us
  double var_floor = 0.25;      // px^2
  Micros sample_period = 1'000; // us
  int min_seed_events = 20;
  Micros seed_window = 20'000;  // prefix used for seeding, us

  void validate() const;
};

struct ClusterMember {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Micros t = 0;
};

/// Running Gaussian model of one marker's event cluster with diagonal
/// covariance. Mean and variances always describe the current members
/// exactly; sums are kept as exact integers relative to an integer origin.
class ClusterState {
 public:
  ClusterState(std::int32_t marker_id, PointF origin, double var_floor);

  void add(const ClusterMember& m);
  /// Drops members with now - t > t_su, never the newest one.
  void expire(Micros now, Micros t_su);

  std::int32_t marker_id() const { return marker_id_; }
  const PointF& mean() const { return mean_; }
  double var_x() const { return var_x_; }
  double var_y() const { return var_y_; }
  std::size_t n() const { return members_.size(); }
  Micros t_new() const { return t_new_; }
  const std::deque<ClusterMember>& members() const { return members_; }

 private:
  void recompute();

  std::int32_t marker_id_;
  std::int32_t ox_, oy_;
  double var_floor_;
  std::deque<ClusterMember> members_;
  std::int64_t sx_ = 0, sy_ = 0, sxx_ = 0, syy_ = 0;
  PointF mean_;
  double var_x_, var_y_;
  Micros t_new_ = 0;
};

double mahalanobis(PointF point, const ClusterState& cluster);

struct Admission {
  bool admitted = false;
  std::size_t cluster = 0;  // index into the cluster list
  double distance = 0.0;
};

/// Admits the event into the nearest gating cluster (d < d_th, ties to the
/// lowest marker id), then expires that cluster's stale members.
Admission admit_event(const Event& e, std::vector<ClusterState>& clusters, const TrackerParams& params);

/// Same expiry rule with an explicit clock.
void expire_members(ClusterState& cluster, Micros now, const TrackerParams& params);

/// Connected components (8-neighbourhood) of occupied pixels in the first
/// seed_window of the stream; the `expected_markers` largest by event count
/// become clusters, numbered left to right. Throws StageError when fewer
/// than `expected_markers` components reach min_seed_events.
std::vector<ClusterState> seed_clusters(std::span<const Event> events, int expected_markers,
                                        const TrackerParams& params);

struct TrackResult {
  std::vector<CenterTrajectory> trajectories;
  std::size_t admitted = 0;
  std::size_t discarded = 0;
  std::vector<std::string> warnings;
};

/// Seeds from the stream prefix, replays the remaining events through
/// admit/expire and samples every cluster mean at t = k * sample_period.
/// Samples more than 10 * t_su after a cluster's last admission are marked
/// stale.
TrackResult track(const EventStream& stream, const TrackerParams& params, int expected_markers);

}  // namespace evdeform
