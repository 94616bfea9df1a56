#pragma once

#include "mlb/radio.hpp"
#include "mlb/traffic.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mlb {

/// Resource block groups of size K (the last group may be smaller).
struct RbgPartition {
  int k = 1;
  std::vector<int> groups;

  int n_rb() const;
  int n_groups() const { return static_cast<int>(groups.size()); }
};

/// K by bandwidth tier: <=10 RB -> 1, 11..26 -> 2, 27..63 -> 3, >=64 -> 4.
RbgPartition rbg_partition(int n_rb);

struct SchedulingCandidate {
  int ue_id = 0;
  double hol_ms = 0.0;
  int cqi = 0;
  std::int64_t backlog_bits = 0;
};

struct TtiAllocation {
  std::vector<int> assignments;                          // group -> ue, -1 when idle
  std::vector<std::pair<int, std::int64_t>> bits_granted;  // (ue, bits), first-grant order
  int rbs_used = 0;

  std::int64_t bits_for(int ue_id) const;
};

/// Channel- and QoS-aware metric: (1 + HOL) * achievable bits per RB.
double cqa_metric(double hol_ms, int cqi, const CqiTable& table);

/// Greedy per-group allocation. Each group goes to the highest-metric
/// candidate that still has unserved backlog; ties go to the lower ue_id.
TtiAllocation schedule_tti(const RbgPartition& partition,
                           std::span<const SchedulingCandidate> backlogged,
                           const CqiTable& table = CqiTable::standard());

/// Applies the grants to the per-UE queues; `queue_of(ue_id)` must return a
/// UeQueue&. Delivered packets are stamped at now + 1 ms.
template <class QueueLookup>
std::vector<Packet> deliver(const TtiAllocation& alloc, QueueLookup&& queue_of, double now_ms) {
  std::vector<Packet> out;
  for (const auto& [ue, bits] : alloc.bits_granted) {
    auto done = queue_of(ue).transmit(bits, now_ms + 1.0);
    out.insert(out.end(), std::make_move_iterator(done.begin()),
               std::make_move_iterator(done.end()));
  }
  return out;
}

}  // namespace mlb
