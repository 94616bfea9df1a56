#pragma once

#include "mlb/handover.hpp"
#include "mlb/metrics.hpp"
#include "mlb/radio.hpp"
#include "mlb/scheduler.hpp"
#include "mlb/traffic.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mlb {

enum class HandoverMode { A3, Rebuha };

struct SimConfig {
  RadioConfig radio;
  HandoverConfig handover;
  HandoverMode mode = HandoverMode::A3;
  double gamma_rb = 0.6;  // ReBUHA utilization threshold

  int n_cells = 3;
  double isd_m = 720.0;
  int n_ues = 30;
  double edge_fraction = 0.4;
  double edge_disc_radius_m = 100.0;
  /// Distance from the middle BS to each edge-disc centre. Unset means
  /// isd/2 - radius, i.e. the disc touches the cell border from inside.
  std::optional<double> edge_disc_offset_m;

  int n_cbr = 20;
  FlowSpec cbr = FlowSpec::cbr(250, 10.0);
  FlowSpec poisson = FlowSpec::poisson(32, 100000.0);
  int queue_capacity = 300;

  double mobility_fraction = 0.0;
  double speed_mps = 20.0;
  double heading_period_ms = 1000.0;

  void validate() const;
  double edge_offset() const { return edge_disc_offset_m.value_or(isd_m / 2 - edge_disc_radius_m); }
  double coverage_radius() const { return isd_m / 2; }
};

struct Bounds {
  Point lo;
  Point hi;
  bool contains(const Point& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

/// Base stations on a line, `isd` apart, starting at the origin.
struct Topology {
  std::vector<Point> bs_positions;

  static Topology collinear(int n_cells, double isd_m);
  int n_cells() const { return static_cast<int>(bs_positions.size()); }
  int middle() const { return n_cells() / 2; }
  /// Bounding box of the sites grown by `margin` on every side.
  Bounds bounds(double margin) const;
};

struct UeState {
  int id = 0;
  Point position = Point::Zero();
  Attachment serving;
  bool mobile = false;
  double speed_mps = 0.0;
  double heading_rad = 0.0;
  double heading_age_ms = 0.0;
  FlowSpec flow;
  UeQueue queue;
  int last_cqi = 0;
};

struct BsState {
  int id = 0;
  std::vector<int> attached_ues;  // ascending ids
  std::vector<double> tti_utilization_log;
};

/// Edge UEs first (alternating between the discs at the middle cell's edges
/// toward each neighbor), then the rest uniform in the middle cell's
/// coverage disc.
std::vector<Point> place_ues(const Topology& topo, int n, double edge_fraction,
                             double edge_disc_radius_m, double edge_disc_offset_m,
                             double coverage_radius_m, Rng& rng);

/// Advances a mobile UE by speed*dt, drawing a new uniform heading every
/// `heading_period_ms` and reflecting off the bounds.
void random_walk_step(UeState& ue, double dt_ms, const Bounds& bounds, Rng& rng,
                      double heading_period_ms = 1000.0);

struct UeCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t lost = 0;
};

/// Multi-cell downlink simulator with a 1 ms TTI loop.
class Simulation {
 public:
  Simulation(SimConfig cfg, std::uint64_t seed);

  /// Rebuilds the UE population: placement depends on the run seed only,
  /// traffic and mobility streams on (seed, episode).
  void reset(std::uint64_t episode = 0);

  KpiWindow run_agent_step(int duration_ms = 1000);

  void set_cio(std::span<const double> cio_db);
  void execute_handover(int ue, int target);

  /// Drops every attached UE whose serving SINR is below the RLF floor and
  /// discards its queue. Returns the ids dropped by this call.
  std::vector<int> connectivity_check();

  const SimConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const std::vector<UeState>& ues() const { return ues_; }
  const std::vector<BsState>& cells() const { return cells_; }
  const Matrix& rsrp() const { return rsrp_; }
  double serving_sinr_db(int ue) const;
  double sinr_if_served_db(int ue, int cell) const { return sinr_(ue, cell); }
  int cqi_if_served(int ue, int cell) const { return cqi_(ue, cell); }
  const UeCounters& counters(int ue) const { return counters_.at(ue); }
  double now_ms() const { return now_ms_; }
  std::uint64_t seed() const { return seed_; }
  int total_handovers() const { return total_handovers_; }

  /// Moves a UE and refreshes its radio state.
  void set_ue_position(int ue, const Point& p);

 private:
  void check_ue(int ue) const;
  void refresh_radio(int ue);
  void attach(int ue, int cell);
  void detach(int ue);
  void run_tti();

  SimConfig cfg_;
  std::uint64_t seed_;
  std::uint64_t episode_ = 0;
  Topology topo_;
  Bounds bounds_;
  RbgPartition partition_;
  const CqiTable* cqi_table_;

  std::vector<UeState> ues_;
  std::vector<BsState> cells_;
  std::vector<Attachment> serving_;
  std::vector<TrafficSource> sources_;
  std::vector<Rng> mobility_rngs_;
  std::vector<UeCounters> counters_;
  Matrix rsrp_;
  Matrix sinr_;
  Eigen::MatrixXi cqi_;
  TttTracker ttt_;

  // Per-window logs.
  std::vector<std::vector<Packet>> delivered_;
  std::vector<UeCounters> window_start_;
  int window_handovers_ = 0;
  int window_reattach_ = 0;
  std::optional<Vector> last_rbu_;

  double now_ms_ = 0.0;
  int total_handovers_ = 0;
};

}  // namespace mlb
