#include "mlb/traffic.hpp"

#include <cmath>

namespace mlb {

FlowSpec FlowSpec::cbr(int payload_bytes, double interval_ms) {
  FlowSpec f{FlowKind::Cbr, payload_bytes, interval_ms, 0.0};
  f.validate();
  return f;
}

FlowSpec FlowSpec::poisson(int payload_bytes, double rate_bps) {
  FlowSpec f{FlowKind::Poisson, payload_bytes, 0.0, rate_bps};
  f.validate();
  return f;
}

void FlowSpec::validate() const {
  if (payload_bytes < 1) throw InvalidInput("flow payload_bytes must be >= 1");
  if (kind == FlowKind::Cbr && !(interval_ms > 0.0))
    throw InvalidInput("CBR flow interval_ms must be > 0");
  if (kind == FlowKind::Poisson && !(rate_bps > 0.0))
    throw InvalidInput("Poisson flow rate_bps must be > 0");
}

double FlowSpec::mean_interarrival_ms() const {
  if (kind == FlowKind::Cbr) return interval_ms;
  return 1000.0 * payload_bytes * 8.0 / rate_bps;
}

TrafficSource::TrafficSource(FlowSpec flow, int ue_id, double phase_ms, Rng rng)
    : flow_(flow), ue_id_(ue_id), phase_ms_(phase_ms), rng_(std::move(rng)) {
  flow_.validate();
  next_arrival_ms_ = flow_.kind == FlowKind::Poisson
                         ? phase_ms_ + rng_.exponential(flow_.mean_interarrival_ms())
                         : 0.0;
}

std::vector<Packet> TrafficSource::generate(double t0_ms, double t1_ms) {
  std::vector<Packet> out;
  if (!(t1_ms > t0_ms)) return out;
  auto emit = [&](double t) {
    out.push_back(Packet{next_id_++, ue_id_, flow_.payload_bytes, t, std::nullopt});
  };
  if (flow_.kind == FlowKind::Cbr) {
    const double step = flow_.interval_ms;
    auto k = static_cast<long long>(std::ceil((t0_ms - phase_ms_) / step));
    for (double t = phase_ms_ + k * step; t < t1_ms; t = phase_ms_ + (++k) * step)
      if (t >= t0_ms) emit(t);
  } else {
    const double mean = flow_.mean_interarrival_ms();
    while (next_arrival_ms_ < t1_ms) {
      if (next_arrival_ms_ >= t0_ms) emit(next_arrival_ms_);
      next_arrival_ms_ += rng_.exponential(mean);
    }
  }
  return out;
}

UeQueue::UeQueue(std::size_t capacity_packets) : capacity_(capacity_packets) {
  if (capacity_ == 0) throw InvalidInput("queue capacity must be >= 1");
}

bool UeQueue::enqueue(Packet pkt) {
  if (pending_.size() >= capacity_) {
    ++dropped_;
    return false;
  }
  backlog_bits_ += pkt.size_bits();
  pending_.push_back(std::move(pkt));
  return true;
}

double UeQueue::hol_delay_ms(double now_ms) const {
  return pending_.empty() ? 0.0 : now_ms - pending_.front().created_at_ms;
}

std::vector<Packet> UeQueue::transmit(std::int64_t bits, double delivered_at_ms) {
  std::vector<Packet> done;
  if (bits <= 0 || pending_.empty()) return done;
  std::int64_t credit = head_progress_bits_ + bits;
  while (!pending_.empty() && pending_.front().size_bits() <= credit) {
    Packet p = std::move(pending_.front());
    pending_.pop_front();
    credit -= p.size_bits();
    backlog_bits_ -= p.size_bits();
    p.delivered_at_ms = delivered_at_ms;
    done.push_back(std::move(p));
  }
  head_progress_bits_ = pending_.empty() ? 0 : credit;
  return done;
}

std::size_t UeQueue::flush() {
  const std::size_t n = pending_.size();
  pending_.clear();
  backlog_bits_ = 0;
  head_progress_bits_ = 0;
  return n;
}

}  // namespace mlb
