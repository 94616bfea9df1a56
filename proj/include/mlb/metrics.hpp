#pragma once

#include "mlb/traffic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mlb {

struct UeKpi {
  int ue = 0;
  std::int64_t delivered_bytes = 0;
  std::uint64_t delivered_packets = 0;
  double mean_delay_ms = 0.0;  // with HOL fallback
  double jitter_ms = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t dropped = 0;  // tail drops
  std::uint64_t lost = 0;     // discarded on disconnection
  int cqi = 0;
  double sinr_db = 0.0;
  bool connected = true;
  int serving_cell = -1;  // -1 when unattached
};

struct CellKpi {
  double rbu = 0.0;
  int attached = 0;
  double attached_ratio = 0.0;
};

/// Aggregates over one agent step.
struct KpiWindow {
  double start_ms = 0.0;
  double duration_ms = 0.0;
  std::vector<UeKpi> ues;
  std::vector<CellKpi> cells;
  double throughput_bps = 0.0;   // network sum
  double mean_delay_ms = 0.0;    // over delivered packets
  double jitter_ms = 0.0;        // mean over UEs with >= 2 deliveries
  double plr = 0.0;
  int handovers = 0;
  int reattachments = 0;

  Vector rbu_vector() const;
  Vector attachment_vector() const;
  std::vector<int> cqi_list() const;
  double mean_ue_throughput_bps() const;
};

/// Mean of per-TTI utilization samples.
double rbu(std::span<const double> tti_log);

/// u_i = count_i / n_total.
Vector attachment_ratios(std::span<const int> attached_counts, int n_total);

/// Mean delivered-packet delay; falls back to the oldest pending packet's
/// age when nothing was delivered, 0 when the queue is also empty.
double ue_delay_ms(std::span<const Packet> delivered, const UeQueue& queue, double now_ms);

/// Mean absolute difference of consecutive packet delays; 0 with < 2 packets.
double ue_jitter_ms(std::span<const Packet> delivered);

double plr(std::uint64_t generated, std::uint64_t dropped, std::uint64_t lost_on_disconnect);

double throughput_bps(std::int64_t delivered_bytes, double window_ms);

/// FNV-1a over every numeric field; equal windows hash equal.
std::uint64_t kpi_hash(const KpiWindow& kpi);

/// Mean with a two-sided Student-t confidence interval.
struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
};
ConfidenceInterval mean_ci(std::span<const double> samples, double level = 0.90);

}  // namespace mlb
