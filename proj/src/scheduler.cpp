#include "mlb/scheduler.hpp"

#include <algorithm>
#include <numeric>

namespace mlb {

int RbgPartition::n_rb() const { return std::accumulate(groups.begin(), groups.end(), 0); }

RbgPartition rbg_partition(int n_rb) {
  if (n_rb < 1) throw InvalidInput("rbg_partition: n_rb must be >= 1");
  RbgPartition p;
  p.k = n_rb <= 10 ? 1 : n_rb <= 26 ? 2 : n_rb <= 63 ? 3 : 4;
  for (int left = n_rb; left > 0; left -= p.k) p.groups.push_back(std::min(p.k, left));
  return p;
}

std::int64_t TtiAllocation::bits_for(int ue_id) const {
  for (const auto& [ue, bits] : bits_granted)
    if (ue == ue_id) return bits;
  return 0;
}

double cqa_metric(double hol_ms, int cqi, const CqiTable& table) {
  return (1.0 + hol_ms) * table.bits_per_rb(cqi);
}

TtiAllocation schedule_tti(const RbgPartition& partition,
                           std::span<const SchedulingCandidate> backlogged,
                           const CqiTable& table) {
  TtiAllocation alloc;
  alloc.assignments.assign(partition.groups.size(), -1);

  // The metric does not change within a TTI, so greedy per-group selection
  // reduces to serving candidates in metric order until each is satisfied.
  struct Entry {
    double metric;
    int ue;
    int bits_per_rb;
    std::int64_t backlog;
  };
  std::vector<Entry> order;
  order.reserve(backlogged.size());
  for (const auto& c : backlogged) {
    const int bits = table.bits_per_rb(c.cqi);
    if (bits <= 0 || c.backlog_bits <= 0) continue;
    order.push_back({cqa_metric(c.hol_ms, c.cqi, table), c.ue_id, bits, c.backlog_bits});
  }
  std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    return a.metric != b.metric ? a.metric > b.metric : a.ue < b.ue;
  });

  std::size_t cursor = 0;
  std::int64_t granted = 0;
  for (int g = 0; g < partition.n_groups() && cursor < order.size(); ++g) {
    const Entry& e = order[cursor];
    const std::int64_t bits = std::int64_t{partition.groups[g]} * e.bits_per_rb;
    alloc.assignments[g] = e.ue;
    alloc.rbs_used += partition.groups[g];
    if (granted == 0) alloc.bits_granted.emplace_back(e.ue, 0);
    granted += bits;
    alloc.bits_granted.back().second = granted;
    if (granted >= e.backlog) {
      ++cursor;
      granted = 0;
    }
  }
  return alloc;
}

}  // namespace mlb
