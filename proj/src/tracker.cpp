#include "evdeform/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "evdeform/errors.hpp"

namespace evdeform {

void TrackerParams::validate() const {
  if (!(d_th > 0)) throw ConfigError("d_th must be > 0");
  if (t_su < 0) throw ConfigError("t_su must be >= 0");
  if (!(var_floor > 0)) throw ConfigError("var_floor must be > 0");
  if (sample_period < 1) throw ConfigError("sample_period must be >= 1");
  if (min_seed_events < 1) throw ConfigError("min_seed_events must be >= 1");
  if (seed_window < 1) throw ConfigError("seed_window must be >= 1");
}

ClusterState::ClusterState(std::int32_t marker_id, PointF origin, double var_floor)
    : marker_id_(marker_id),
      ox_(static_cast<std::int32_t>(std::lround(origin.x))),
      oy_(static_cast<std::int32_t>(std::lround(origin.y))),
      var_floor_(var_floor),
      mean_(origin),
      var_x_(var_floor),
      var_y_(var_floor) {}

void ClusterState::add(const ClusterMember& m) {
  const std::int64_t dx = m.x - ox_, dy = m.y - oy_;
  sx_ += dx;
  sy_ += dy;
  sxx_ += dx * dx;
  syy_ += dy * dy;
  members_.push_back(m);
  t_new_ = std::max(t_new_, m.t);
  recompute();
}

void ClusterState::expire(Micros now, Micros t_su) {
  bool changed = false;
  while (members_.size() > 1 && now - members_.front().t > t_su) {
    const std::int64_t dx = members_.front().x - ox_, dy = members_.front().y - oy_;
    sx_ -= dx;
    sy_ -= dy;
    sxx_ -= dx * dx;
    syy_ -= dy * dy;
    members_.pop_front();
    changed = true;
  }
  if (changed) recompute();
}

void ClusterState::recompute() {
  const auto n = static_cast<std::int64_t>(members_.size());
  if (n == 0) return;
  const double nd = static_cast<double>(n);
  mean_ = {ox_ + static_cast<double>(sx_) / nd, oy_ + static_cast<double>(sy_) / nd};
  // n * sum(d^2) - sum(d)^2 is exact in 128-bit integers.
  const __int128 vx = static_cast<__int128>(n) * sxx_ - static_cast<__int128>(sx_) * sx_;
  const __int128 vy = static_cast<__int128>(n) * syy_ - static_cast<__int128>(sy_) * sy_;
  var_x_ = std::max(var_floor_, static_cast<double>(vx) / (nd * nd));
  var_y_ = std::max(var_floor_, static_cast<double>(vy) / (nd * nd));
}

double mahalanobis(PointF p, const ClusterState& c) {
  const double dx = p.x - c.mean().x, dy = p.y - c.mean().y;
  return std::sqrt(dx * dx / c.var_x() + dy * dy / c.var_y());
}

void expire_members(ClusterState& cluster, Micros now, const TrackerParams& params) {
  cluster.expire(now, params.t_su);
}

Admission admit_event(const Event& e, std::vector<ClusterState>& clusters, const TrackerParams& params) {
  Admission best;
  const PointF p{double(e.x), double(e.y)};
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const double d = mahalanobis(p, clusters[k]);
    if (!(d < params.d_th)) continue;
    if (!best.admitted || d < best.distance ||
        (d == best.distance && clusters[k].marker_id() < clusters[best.cluster].marker_id()))
      best = Admission{true, k, d};
  }
  if (best.admitted) {
    auto& c = clusters[best.cluster];
    c.add(ClusterMember{e.x, e.y, e.t});
    expire_members(c, c.t_new(), params);
  }
  return best;
}

std::vector<ClusterState> seed_clusters(std::span<const Event> events, int expected_markers,
                                        const TrackerParams& params) {
  params.validate();
  if (expected_markers < 1) throw ConfigError("expected marker count must be >= 1");
  if (events.empty()) throw StageError("insufficient markers visible: empty stream prefix");

  const Micros end = events.front().t + params.seed_window;
  std::size_t n = 0;
  while (n < events.size() && events[n].t < end) ++n;
  const auto prefix = events.first(n);

  // Occupied pixels -> their events.
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> occupied;
  auto key = [](int x, int y) { return (static_cast<std::uint32_t>(y) << 16) | static_cast<std::uint32_t>(x); };
  for (std::uint32_t i = 0; i < prefix.size(); ++i) occupied[key(prefix[i].x, prefix[i].y)].push_back(i);

  // Deterministic component order: visit pixels sorted by key.
  std::vector<std::uint32_t> keys;
  keys.reserve(occupied.size());
  for (const auto& kv : occupied) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  std::unordered_map<std::uint32_t, bool> visited;
  std::vector<std::vector<std::uint32_t>> components;  // event indices
  for (auto start : keys) {
    if (visited[start]) continue;
    std::vector<std::uint32_t> members, stack{start};
    visited[start] = true;
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      const auto& ev = occupied[k];
      members.insert(members.end(), ev.begin(), ev.end());
      const int x = int(k & 0xFFFF), y = int(k >> 16);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || x + dx < 0 || y + dy < 0) continue;
          const auto nk = key(x + dx, y + dy);
          if (!occupied.count(nk) || visited[nk]) continue;
          visited[nk] = true;
          stack.push_back(nk);
        }
    }
    if (members.size() >= static_cast<std::size_t>(params.min_seed_events))
      components.push_back(std::move(members));
  }

  if (components.size() < static_cast<std::size_t>(expected_markers)) {
    std::ostringstream os;
    os << "insufficient markers visible: found " << components.size() << " of " << expected_markers;
    throw StageError(os.str());
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  components.resize(static_cast<std::size_t>(expected_markers));

  std::vector<ClusterState> clusters;
  for (auto& comp : components) {
    std::sort(comp.begin(), comp.end());  // time order
    double sx = 0, sy = 0;
    for (auto i : comp) {
      sx += prefix[i].x;
      sy += prefix[i].y;
    }
    ClusterState c(0, PointF{sx / comp.size(), sy / comp.size()}, params.var_floor);
    for (auto i : comp) c.add(ClusterMember{prefix[i].x, prefix[i].y, prefix[i].t});
    clusters.push_back(std::move(c));
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const ClusterState& a, const ClusterState& b) {
    return a.mean().x != b.mean().x ? a.mean().x < b.mean().x : a.mean().y < b.mean().y;
  });
  std::vector<ClusterState> numbered;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    ClusterState c(static_cast<std::int32_t>(k), clusters[k].mean(), params.var_floor);
    for (const auto& m : clusters[k].members()) c.add(m);
    c.expire(c.t_new(), params.t_su);
    numbered.push_back(std::move(c));
  }
  return numbered;
}

TrackResult track(const EventStream& stream, const TrackerParams& params, int expected_markers) {
  params.validate();
  TrackResult result;
  const auto& events = stream.events;
  if (events.empty()) {
    for (int k = 0; k < expected_markers; ++k) result.trajectories.push_back(CenterTrajectory{k, {}});
    return result;
  }
  auto clusters = seed_clusters(events, expected_markers, params);
  for (const auto& c : clusters) result.trajectories.push_back(CenterTrajectory{c.marker_id(), {}});

  const Micros seed_end = events.front().t + params.seed_window;
  const Micros stale_after = 10 * params.t_su;
  const Micros last_t = events.back().t;
  std::vector<bool> starving(clusters.size(), false);

  auto sample = [&](Micros t) {
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const auto& c = clusters[k];
      const bool stale = t - c.t_new() > stale_after;
      if (stale && !starving[k]) {
        std::ostringstream os;
        os << "marker " << c.marker_id() << " starved: no events since t = " << c.t_new() << " us";
        result.warnings.push_back(os.str());
      }
      starving[k] = stale;
      result.trajectories[k].samples.push_back(TrajectorySample{t, c.mean().x, c.mean().y, stale});
    }
  };

  // Sampling starts once tracking does, on the first grid point after seeding.
  Micros next_sample = (seed_end + params.sample_period - 1) / params.sample_period * params.sample_period;
  for (const auto& e : events) {
    while (next_sample < e.t) {
      sample(next_sample);
      next_sample += params.sample_period;
    }
    if (e.t < seed_end) continue;  // already absorbed by seeding
    if (admit_event(e, clusters, params).admitted)
      ++result.admitted;
    else
      ++result.discarded;
  }
  while (next_sample <= last_t) {
    sample(next_sample);
    next_sample += params.sample_period;
  }
  return result;
}

}  // namespace evdeform
