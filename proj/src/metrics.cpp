#include "mlb/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <bit>
#include <cmath>
#include <numeric>

namespace mlb {

Vector KpiWindow::rbu_vector() const {
  Vector v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Index>(i)] = cells[i].rbu;
  return v;
}

Vector KpiWindow::attachment_vector() const {
  Vector v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i)
    v[static_cast<Index>(i)] = cells[i].attached_ratio;
  return v;
}

std::vector<int> KpiWindow::cqi_list() const {
  std::vector<int> out;
  out.reserve(ues.size());
  for (const auto& u : ues) out.push_back(u.cqi);
  return out;
}

double KpiWindow::mean_ue_throughput_bps() const {
  if (ues.empty()) return 0.0;
  return throughput_bps / static_cast<double>(ues.size());
}

double rbu(std::span<const double> tti_log) {
  if (tti_log.empty()) throw InvalidInput("rbu: empty utilization log");
  return std::accumulate(tti_log.begin(), tti_log.end(), 0.0) /
         static_cast<double>(tti_log.size());
}

Vector attachment_ratios(std::span<const int> attached_counts, int n_total) {
  if (n_total < 1) throw InvalidInput("attachment_ratios: n_total must be >= 1");
  Vector u(static_cast<Index>(attached_counts.size()));
  for (std::size_t i = 0; i < attached_counts.size(); ++i)
    u[static_cast<Index>(i)] = static_cast<double>(attached_counts[i]) / n_total;
  return u;
}

double ue_delay_ms(std::span<const Packet> delivered, const UeQueue& queue, double now_ms) {
  if (delivered.empty()) return queue.hol_delay_ms(now_ms);
  double sum = 0.0;
  for (const auto& p : delivered) sum += p.delay_ms();
  return sum / static_cast<double>(delivered.size());
}

double ue_jitter_ms(std::span<const Packet> delivered) {
  if (delivered.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < delivered.size(); ++i)
    sum += std::abs(delivered[i].delay_ms() - delivered[i - 1].delay_ms());
  return sum / static_cast<double>(delivered.size() - 1);
}

double plr(std::uint64_t generated, std::uint64_t dropped, std::uint64_t lost_on_disconnect) {
  if (generated == 0) return 0.0;
  if (dropped + lost_on_disconnect > generated)
    throw InvalidInput("plr: more losses than generated packets");
  return static_cast<double>(dropped + lost_on_disconnect) / static_cast<double>(generated);
}

double throughput_bps(std::int64_t delivered_bytes, double window_ms) {
  if (!(window_ms > 0.0)) throw InvalidInput("throughput_bps: window must be positive");
  return 8.0 * static_cast<double>(delivered_bytes) / (window_ms / 1000.0);
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  void add(double d) { add(std::bit_cast<std::uint64_t>(d)); }
  void add(int v) { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
};

}  // namespace

std::uint64_t kpi_hash(const KpiWindow& kpi) {
  Fnv1a f;
  f.add(kpi.start_ms);
  f.add(kpi.duration_ms);
  for (const auto& u : kpi.ues) {
    f.add(u.ue);
    f.add(static_cast<std::uint64_t>(u.delivered_bytes));
    f.add(u.delivered_packets);
    f.add(u.mean_delay_ms);
    f.add(u.jitter_ms);
    f.add(u.generated);
    f.add(u.dropped);
    f.add(u.lost);
    f.add(u.cqi);
    f.add(u.sinr_db);
    f.add(static_cast<int>(u.connected));
    f.add(u.serving_cell);
  }
  for (const auto& c : kpi.cells) {
    f.add(c.rbu);
    f.add(c.attached);
    f.add(c.attached_ratio);
  }
  f.add(kpi.throughput_bps);
  f.add(kpi.mean_delay_ms);
  f.add(kpi.jitter_ms);
  f.add(kpi.plr);
  f.add(kpi.handovers);
  f.add(kpi.reattachments);
  return f.h;
}

ConfidenceInterval mean_ci(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("mean_ci: level must lie in (0, 1)");
  ConfidenceInterval ci;
  ci.n = samples.size();
  if (ci.n == 0) return ci;
  ci.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(ci.n);
  if (ci.n < 2) return ci;
  double ss = 0.0;
  for (double x : samples) ss += (x - ci.mean) * (x - ci.mean);
  const double sd = std::sqrt(ss / static_cast<double>(ci.n - 1));
  boost::math::students_t dist(static_cast<double>(ci.n - 1));
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  ci.half_width = t * sd / std::sqrt(static_cast<double>(ci.n));
  return ci;
}

}  // namespace mlb
