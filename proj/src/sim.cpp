#include "mlb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mlb {

namespace {
constexpr std::uint64_t kPlacementStream = 0x706c616365ull;
constexpr std::uint64_t kTrafficStream = 1;
constexpr std::uint64_t kMobilityStream = 2;

Point uniform_in_disc(const Point& centre, double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return centre + r * Point(std::cos(theta), std::sin(theta));
}
}  // namespace

void SimConfig::validate() const {
  radio.validate();
  handover.validate();
  if (n_cells < 2) throw InvalidInput("sim.n_cells must be >= 2");
  if (!(isd_m > 0.0)) throw InvalidInput("sim.isd_m must be > 0");
  if (n_ues < 1) throw InvalidInput("sim.n_ues must be >= 1");
  if (!(edge_fraction >= 0.0 && edge_fraction <= 1.0))
    throw InvalidInput("sim.edge_fraction must lie in [0, 1]");
  if (!(edge_disc_radius_m >= 0.0)) throw InvalidInput("sim.edge_disc_radius_m must be >= 0");
  if (edge_disc_offset_m && !(*edge_disc_offset_m >= 0.0))
    throw InvalidInput("sim.edge_disc_offset_m must be >= 0");
  if (n_cbr < 0) throw InvalidInput("sim.n_cbr must be >= 0");
  cbr.validate();
  poisson.validate();
  if (cbr.kind != FlowKind::Cbr) throw InvalidInput("sim.cbr must be a CBR flow");
  if (poisson.kind != FlowKind::Poisson) throw InvalidInput("sim.poisson must be a Poisson flow");
  if (queue_capacity < 1) throw InvalidInput("sim.queue_capacity must be >= 1");
  if (!(mobility_fraction >= 0.0 && mobility_fraction <= 1.0))
    throw InvalidInput("sim.mobility_fraction must lie in [0, 1]");
  if (!(speed_mps >= 0.0)) throw InvalidInput("sim.speed_mps must be >= 0");
  if (!(heading_period_ms > 0.0)) throw InvalidInput("sim.heading_period_ms must be > 0");
  if (!(gamma_rb >= 0.0 && gamma_rb <= 1.0)) throw InvalidInput("sim.gamma_rb must lie in [0, 1]");
  if (!handover.cio_db.empty() && static_cast<int>(handover.cio_db.size()) != n_cells)
    throw InvalidInput("handover.cio_db must have one entry per cell");
}

Topology Topology::collinear(int n_cells, double isd_m) {
  Topology t;
  for (int i = 0; i < n_cells; ++i) t.bs_positions.emplace_back(i * isd_m, 0.0);
  return t;
}

Bounds Topology::bounds(double margin) const {
  Point lo = bs_positions.front(), hi = bs_positions.front();
  for (const auto& p : bs_positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo.array() - margin, hi.array() + margin};
}

std::vector<Point> place_ues(const Topology& topo, int n, double edge_fraction,
                             double edge_disc_radius_m, double edge_disc_offset_m,
                             double coverage_radius_m, Rng& rng) {
  if (!(edge_fraction >= 0.0 && edge_fraction <= 1.0))
    throw InvalidInput("place_ues: edge_fraction must lie in [0, 1]");
  const int mid = topo.middle();
  const Point& centre = topo.bs_positions[mid];
  std::vector<Point> disc_centres;
  for (int nb : {mid - 1, mid + 1}) {
    if (nb < 0 || nb >= topo.n_cells()) continue;
    const Point dir = (topo.bs_positions[nb] - centre).normalized();
    disc_centres.push_back(centre + edge_disc_offset_m * dir);
  }
  const int n_edge = static_cast<int>(std::lround(n * edge_fraction));
  std::vector<Point> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i < n_edge)
      out.push_back(uniform_in_disc(disc_centres[i % disc_centres.size()], edge_disc_radius_m, rng));
    else
      out.push_back(uniform_in_disc(centre, coverage_radius_m, rng));
  }
  return out;
}

void random_walk_step(UeState& ue, double dt_ms, const Bounds& bounds, Rng& rng,
                      double heading_period_ms) {
  if (!ue.mobile) return;
  if (ue.heading_age_ms >= heading_period_ms) {
    ue.heading_rad = 2.0 * std::numbers::pi * rng.uniform();
    ue.heading_age_ms = 0.0;
  }
  ue.heading_age_ms += dt_ms;
  const double step = ue.speed_mps * dt_ms / 1000.0;
  Point p = ue.position + step * Point(std::cos(ue.heading_rad), std::sin(ue.heading_rad));
  for (int axis = 0; axis < 2; ++axis) {
    bool reflected = false;
    if (p[axis] < bounds.lo[axis]) {
      p[axis] = 2.0 * bounds.lo[axis] - p[axis];
      reflected = true;
    } else if (p[axis] > bounds.hi[axis]) {
      p[axis] = 2.0 * bounds.hi[axis] - p[axis];
      reflected = true;
    }
    if (reflected)
      ue.heading_rad = axis == 0 ? std::numbers::pi - ue.heading_rad : -ue.heading_rad;
    p[axis] = std::clamp(p[axis], bounds.lo[axis], bounds.hi[axis]);
  }
  ue.position = p;
}

Simulation::Simulation(SimConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      seed_(seed),
      topo_(Topology::collinear(cfg_.n_cells, cfg_.isd_m)),
      bounds_(topo_.bounds(cfg_.isd_m / 2)),
      partition_(rbg_partition(cfg_.radio.n_rb)),
      cqi_table_(&CqiTable::standard()),
      ttt_(cfg_.n_ues, cfg_.n_cells, cfg_.handover.ttt_ms) {
  cfg_.validate();
  if (cfg_.handover.cio_db.empty()) cfg_.handover.cio_db.assign(cfg_.n_cells, 0.0);
  reset(0);
}

void Simulation::reset(std::uint64_t episode) {
  episode_ = episode;
  const int n = cfg_.n_ues;
  Rng placement{seed_, kPlacementStream};
  const auto positions = place_ues(topo_, n, cfg_.edge_fraction, cfg_.edge_disc_radius_m,
                                   cfg_.edge_offset(), cfg_.coverage_radius(), placement);
  const int n_mobile = static_cast<int>(std::lround(n * cfg_.mobility_fraction));

  ues_.clear();
  sources_.clear();
  mobility_rngs_.clear();
  ues_.reserve(n);
  for (int i = 0; i < n; ++i) {
    UeState u;
    u.id = i;
    u.position = positions[i];
    u.mobile = i >= n - n_mobile;
    u.speed_mps = u.mobile ? cfg_.speed_mps : 0.0;
    u.heading_age_ms = cfg_.heading_period_ms;
    u.flow = i < cfg_.n_cbr ? cfg_.cbr : cfg_.poisson;
    u.queue = UeQueue(static_cast<std::size_t>(cfg_.queue_capacity));
    Rng traffic{seed_, episode, static_cast<std::uint64_t>(i), kTrafficStream};
    const double phase = u.flow.kind == FlowKind::Cbr ? traffic.uniform(0.0, u.flow.interval_ms) : 0.0;
    sources_.emplace_back(u.flow, i, phase, std::move(traffic));
    mobility_rngs_.emplace_back(
        Rng{seed_, episode, static_cast<std::uint64_t>(i), kMobilityStream});
    ues_.push_back(std::move(u));
  }

  cells_.assign(cfg_.n_cells, BsState{});
  for (int c = 0; c < cfg_.n_cells; ++c) cells_[c].id = c;
  serving_.assign(n, std::nullopt);
  counters_.assign(n, UeCounters{});
  window_start_.assign(n, UeCounters{});
  delivered_.assign(n, {});
  rsrp_.resize(n, cfg_.n_cells);
  sinr_.resize(n, cfg_.n_cells);
  cqi_.resize(n, cfg_.n_cells);
  ttt_ = TttTracker(n, cfg_.n_cells, cfg_.handover.ttt_ms);
  now_ms_ = 0.0;
  total_handovers_ = 0;
  last_rbu_.reset();

  for (int i = 0; i < n; ++i) {
    refresh_radio(i);
    attach(i, topo_.middle());
  }
}

void Simulation::check_ue(int ue) const {
  if (ue < 0 || ue >= static_cast<int>(ues_.size()))
    throw InvalidInput("unknown UE id " + std::to_string(ue));
}

void Simulation::refresh_radio(int ue) {
  const int m = cfg_.n_cells;
  Vector linear(m);
  for (int c = 0; c < m; ++c) {
    const double d = std::max((ues_[ue].position - topo_.bs_positions[c]).norm(), 1.0);
    rsrp_(ue, c) = rsrp_dbm(cfg_.radio, pathloss_db(d, cfg_.radio));
    linear[c] = dbm_to_mw(rsrp_(ue, c));
  }
  // Every other cell interferes at full power on all RBs.
  const double noise = dbm_to_mw(cfg_.radio.noise_dbm());
  const double total = linear.sum();
  for (int c = 0; c < m; ++c) {
    sinr_(ue, c) = mw_to_dbm(linear[c] / (total - linear[c] + noise));
    cqi_(ue, c) = cqi_table_->cqi_from_sinr(sinr_(ue, c));
  }
  if (serving_[ue]) ues_[ue].last_cqi = cqi_(ue, *serving_[ue]);
}

void Simulation::set_ue_position(int ue, const Point& p) {
  check_ue(ue);
  ues_[ue].position = p;
  refresh_radio(ue);
}

double Simulation::serving_sinr_db(int ue) const {
  check_ue(ue);
  return serving_[ue] ? sinr_(ue, *serving_[ue]) : -std::numeric_limits<double>::infinity();
}

void Simulation::attach(int ue, int cell) {
  serving_[ue] = cell;
  ues_[ue].serving = cell;
  ues_[ue].last_cqi = cqi_(ue, cell);
  auto& list = cells_[cell].attached_ues;
  list.insert(std::lower_bound(list.begin(), list.end(), ue), ue);
}

void Simulation::detach(int ue) {
  if (!serving_[ue]) return;
  auto& list = cells_[*serving_[ue]].attached_ues;
  list.erase(std::lower_bound(list.begin(), list.end(), ue));
  serving_[ue].reset();
  ues_[ue].serving.reset();
  ues_[ue].last_cqi = 0;
}

void Simulation::set_cio(std::span<const double> cio_db) {
  if (static_cast<int>(cio_db.size()) != cfg_.n_cells)
    throw InvalidInput("set_cio: one offset per cell required");
  HandoverConfig next = cfg_.handover;
  next.cio_db.assign(cio_db.begin(), cio_db.end());
  next.validate();
  cfg_.handover = std::move(next);
}

void Simulation::execute_handover(int ue, int target) {
  check_ue(ue);
  if (target < 0 || target >= cfg_.n_cells)
    throw InvalidInput("unknown cell id " + std::to_string(target));
  if (serving_[ue] == target)
    throw InvalidInput("handover target equals serving cell for UE " + std::to_string(ue));
  detach(ue);
  attach(ue, target);
  ttt_.reset_ue(ue);
}

std::vector<int> Simulation::connectivity_check() {
  std::vector<int> dropped;
  for (int i = 0; i < static_cast<int>(ues_.size()); ++i) {
    if (!serving_[i] || !(sinr_(i, *serving_[i]) < cfg_.radio.rlf_sinr_db)) continue;
    counters_[i].lost += ues_[i].queue.flush();
    detach(i);
    ttt_.reset_ue(i);
    dropped.push_back(i);
  }
  return dropped;
}

void Simulation::run_tti() {
  const double t = now_ms_;
  const int n = static_cast<int>(ues_.size());

  for (int i = 0; i < n; ++i) {
    if (!ues_[i].mobile) continue;
    random_walk_step(ues_[i], 1.0, bounds_, mobility_rngs_[i], cfg_.heading_period_ms);
    refresh_radio(i);
  }

  for (int i = 0; i < n; ++i) {
    for (auto& p : sources_[i].generate(t, t + 1.0)) {
      ++counters_[i].generated;
      if (!serving_[i])
        ++counters_[i].lost;
      else if (!ues_[i].queue.enqueue(std::move(p)))
        ++counters_[i].dropped;
    }
  }

  if (cfg_.mode == HandoverMode::A3) {
    for (const auto& cmd : a3_scan(serving_, rsrp_, cfg_.handover, ttt_, 1.0)) {
      execute_handover(cmd.ue, cmd.target);
      ++window_handovers_;
      ++total_handovers_;
    }
  }
  for (const auto& cmd : reattach_scan(serving_, rsrp_, ttt_, 1.0)) {
    execute_handover(cmd.ue, cmd.target);
    ++window_reattach_;
  }

  std::vector<SchedulingCandidate> cands;
  for (auto& cell : cells_) {
    cands.clear();
    for (int ue : cell.attached_ues) {
      const auto& q = ues_[ue].queue;
      if (q.empty()) continue;
      cands.push_back({ue, q.hol_delay_ms(t), cqi_(ue, cell.id), q.backlog_bits()});
    }
    const auto alloc = schedule_tti(partition_, cands, *cqi_table_);
    for (auto& p : deliver(alloc, [&](int ue) -> UeQueue& { return ues_[ue].queue; }, t)) {
      ++counters_[p.ue_id].delivered;
      delivered_[p.ue_id].push_back(std::move(p));
    }
    cell.tti_utilization_log.push_back(static_cast<double>(alloc.rbs_used) / cfg_.radio.n_rb);
  }
  now_ms_ += 1.0;
}

KpiWindow Simulation::run_agent_step(int duration_ms) {
  if (duration_ms < 1) throw InvalidInput("run_agent_step: duration must be >= 1 ms");
  const int n = static_cast<int>(ues_.size());
  KpiWindow kpi;
  kpi.start_ms = now_ms_;
  kpi.duration_ms = duration_ms;
  for (auto& d : delivered_) d.clear();
  for (auto& c : cells_) {
    c.tti_utilization_log.clear();
    c.tti_utilization_log.reserve(duration_ms);
  }
  window_start_ = counters_;
  window_handovers_ = 0;
  window_reattach_ = 0;

  if (cfg_.mode == HandoverMode::Rebuha && last_rbu_) {
    for (const auto& cmd : rebuha_step(*last_rbu_, cfg_.gamma_rb, serving_, rsrp_)) {
      execute_handover(cmd.ue, cmd.target);
      ++window_handovers_;
      ++total_handovers_;
    }
  }

  for (int t = 0; t < duration_ms; ++t) run_tti();

  // Delay and jitter come from the window log before any RLF flush.
  std::vector<double> delay(n), jitter(n);
  for (int i = 0; i < n; ++i) {
    delay[i] = ue_delay_ms(delivered_[i], ues_[i].queue, now_ms_);
    jitter[i] = ue_jitter_ms(delivered_[i]);
  }
  connectivity_check();

  std::int64_t bytes = 0;
  std::uint64_t gen = 0, drop = 0, lost = 0, pkts = 0;
  double delay_sum = 0.0, jitter_sum = 0.0;
  int jitter_n = 0;
  kpi.ues.resize(n);
  for (int i = 0; i < n; ++i) {
    UeKpi& u = kpi.ues[i];
    u.ue = i;
    for (const auto& p : delivered_[i]) {
      u.delivered_bytes += p.size_bytes;
      delay_sum += p.delay_ms();
    }
    u.delivered_packets = delivered_[i].size();
    u.mean_delay_ms = delay[i];
    u.jitter_ms = jitter[i];
    u.generated = counters_[i].generated - window_start_[i].generated;
    u.dropped = counters_[i].dropped - window_start_[i].dropped;
    u.lost = counters_[i].lost - window_start_[i].lost;
    u.connected = serving_[i].has_value();
    u.serving_cell = serving_[i].value_or(-1);
    u.cqi = ues_[i].last_cqi;
    u.sinr_db = serving_sinr_db(i);
    bytes += u.delivered_bytes;
    pkts += u.delivered_packets;
    gen += u.generated;
    drop += u.dropped;
    lost += u.lost;
    if (u.delivered_packets >= 2) {
      jitter_sum += u.jitter_ms;
      ++jitter_n;
    }
  }

  std::vector<int> counts(cfg_.n_cells);
  for (int c = 0; c < cfg_.n_cells; ++c) counts[c] = static_cast<int>(cells_[c].attached_ues.size());
  const Vector u = attachment_ratios(counts, n);
  kpi.cells.resize(cfg_.n_cells);
  for (int c = 0; c < cfg_.n_cells; ++c) {
    kpi.cells[c].rbu = rbu(cells_[c].tti_utilization_log);
    kpi.cells[c].attached = counts[c];
    kpi.cells[c].attached_ratio = u[c];
  }
  kpi.throughput_bps = throughput_bps(bytes, duration_ms);
  kpi.mean_delay_ms = pkts > 0 ? delay_sum / static_cast<double>(pkts) : 0.0;
  kpi.jitter_ms = jitter_n > 0 ? jitter_sum / jitter_n : 0.0;
  kpi.plr = plr(gen, drop, lost);
  kpi.handovers = window_handovers_;
  kpi.reattachments = window_reattach_;
  last_rbu_ = kpi.rbu_vector();
  return kpi;
}

}  // namespace mlb
