#pragma once

#include "mlb/core.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace mlb {

enum class FlowKind { Cbr, Poisson };

struct FlowSpec {
  FlowKind kind = FlowKind::Cbr;
  int payload_bytes = 250;
  double interval_ms = 10.0;  // CBR only
  double rate_bps = 0.0;      // Poisson only

  static FlowSpec cbr(int payload_bytes, double interval_ms);
  static FlowSpec poisson(int payload_bytes, double rate_bps);

  void validate() const;
  double mean_interarrival_ms() const;
};

struct Packet {
  std::uint64_t id = 0;
  int ue_id = 0;
  int size_bytes = 0;
  double created_at_ms = 0.0;
  std::optional<double> delivered_at_ms;

  std::int64_t size_bits() const { return std::int64_t{size_bytes} * 8; }
  double delay_ms() const { return *delivered_at_ms - created_at_ms; }
};

/// Downlink packet source for one UE. Successive calls to generate() must
/// cover consecutive windows; CBR emissions are phase-aligned, Poisson
/// emissions carry their pending arrival across windows.
class TrafficSource {
 public:
  /// `phase_ms` is the CBR offset in [0, interval) or the Poisson start time.
  TrafficSource(FlowSpec flow, int ue_id, double phase_ms, Rng rng);

  /// Packets created in [t0, t1), in creation order.
  std::vector<Packet> generate(double t0_ms, double t1_ms);

  const FlowSpec& flow() const { return flow_; }

 private:
  FlowSpec flow_;
  int ue_id_;
  double phase_ms_;
  double next_arrival_ms_;
  std::uint64_t next_id_ = 0;
  Rng rng_;
};

/// FIFO transmit buffer with tail drop. A partially transmitted head packet
/// keeps its progress across TTIs but is only delivered once complete.
class UeQueue {
 public:
  explicit UeQueue(std::size_t capacity_packets = 300);

  bool enqueue(Packet pkt);

  /// Age of the oldest pending packet, 0 if empty.
  double hol_delay_ms(double now_ms) const;

  /// Bits still to be sent (pending bytes minus head progress).
  std::int64_t backlog_bits() const { return backlog_bits_ - head_progress_bits_; }

  /// Sends up to `bits`; returns the packets completed, stamped with `delivered_at_ms`.
  std::vector<Packet> transmit(std::int64_t bits, double delivered_at_ms);

  /// Removes every pending packet; returns how many were discarded.
  std::size_t flush();

  bool empty() const { return pending_.empty(); }
  std::size_t size() const { return pending_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t dropped_count() const { return dropped_; }
  const std::deque<Packet>& pending() const { return pending_; }

 private:
  std::deque<Packet> pending_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  std::int64_t backlog_bits_ = 0;
  std::int64_t head_progress_bits_ = 0;
};

}  // namespace mlb
