#include "mlb/metrics.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>

#include <numeric>

using namespace mlb;

namespace {

std::vector<Packet> with_delays(std::initializer_list<double> delays) {
  std::vector<Packet> out;
  double t = 0.0;
  for (double d : delays) {
    Packet p;
    p.created_at_ms = t;
    p.delivered_at_ms = t + d;
    p.size_bytes = 100;
    out.push_back(p);
    t += 10.0;
  }
  return out;
}

}  // namespace

TEST(Rbu, Mean) {
  const std::vector<double> log{1.0, 0.5, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(rbu(log), 0.5);
  EXPECT_EQ(rbu(std::vector<double>(10, 0.0)), 0.0);
  EXPECT_THROW(rbu(std::vector<double>{}), InvalidInput);
}

TEST(Rbu, MatchesIndependentMean) {
  Rng rng(4);
  std::vector<double> log(1000);
  for (auto& x : log) x = rng.uniform();
  long double sum = 0;
  for (double x : log) sum += x;
  EXPECT_NEAR(rbu(log), static_cast<double>(sum / 1000), 1e-12);
}

TEST(Attachment, Ratios) {
  std::vector<int> a{0, 30, 0};
  Vector u = attachment_ratios(a, 30);
  EXPECT_EQ(u, (Vector(3) << 0, 1, 0).finished());
  std::vector<int> b{10, 10, 10};
  EXPECT_NEAR(attachment_ratios(b, 30)[1], 1.0 / 3.0, 1e-15);
  std::vector<int> c{5, 20, 4};
  Vector r = attachment_ratios(c, 30);
  EXPECT_NEAR(r[0], 5.0 / 30, 1e-15);
  EXPECT_NEAR(r[1], 20.0 / 30, 1e-15);
  EXPECT_NEAR(r[2], 4.0 / 30, 1e-15);
  EXPECT_NEAR(r.sum(), 29.0 / 30, 1e-15);
}

TEST(Delay, MeanAndFallback) {
  UeQueue q;
  EXPECT_DOUBLE_EQ(ue_delay_ms(with_delays({10, 12, 11}), q, 0.0), 11.0);
  EXPECT_EQ(ue_delay_ms({}, q, 500.0), 0.0);
  Packet p;
  p.created_at_ms = 100.0;
  p.size_bytes = 10;
  q.enqueue(p);
  EXPECT_DOUBLE_EQ(ue_delay_ms({}, q, 500.0), 400.0);
}

TEST(Jitter, Fixtures) {
  EXPECT_DOUBLE_EQ(ue_jitter_ms(with_delays({10, 12, 11})), 1.5);
  EXPECT_EQ(ue_jitter_ms(with_delays({7, 7, 7, 7})), 0.0);
  EXPECT_EQ(ue_jitter_ms(with_delays({7})), 0.0);
  EXPECT_EQ(ue_jitter_ms(with_delays({})), 0.0);
}

TEST(Plr, Fixtures) {
  EXPECT_EQ(plr(100, 5, 0), 0.05);
  EXPECT_EQ(plr(0, 0, 0), 0.0);
  EXPECT_EQ(plr(200, 10, 10), 0.10);
}

TEST(Throughput, Fixture) {
  EXPECT_EQ(throughput_bps(125000, 1000.0), 1e6);
  EXPECT_EQ(throughput_bps(0, 1000.0), 0.0);
}

TEST(KpiHash, SensitiveToFields) {
  KpiWindow a;
  a.ues.resize(2);
  a.cells.resize(3);
  KpiWindow b = a;
  EXPECT_EQ(kpi_hash(a), kpi_hash(b));
  b.ues[1].lost = 1;
  EXPECT_NE(kpi_hash(a), kpi_hash(b));
  b = a;
  b.cells[2].rbu = 1e-9;
  EXPECT_NE(kpi_hash(a), kpi_hash(b));
}

TEST(KpiWindow, Accessors) {
  KpiWindow k;
  k.cells = {{0.1, 2, 0.2}, {0.9, 8, 0.8}};
  k.ues.resize(2);
  k.ues[0].cqi = 4;
  k.ues[1].cqi = 11;
  k.ues[0].delivered_bytes = 1000;
  k.duration_ms = 1000;
  EXPECT_EQ(k.rbu_vector(), (Vector(2) << 0.1, 0.9).finished());
  EXPECT_EQ(k.attachment_vector(), (Vector(2) << 0.2, 0.8).finished());
  EXPECT_EQ(k.cqi_list(), (std::vector<int>{4, 11}));
}

TEST(ConfidenceInterval, HandComputedThreeSeeds) {
  // mean 2, sample sd 1, t_{0.95,2} = 2.919985580355516
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto ci = mean_ci(x);
  EXPECT_NEAR(ci.mean, 2.0, 1e-12);
  EXPECT_NEAR(ci.half_width, 2.919985580355516 / std::sqrt(3.0), 1e-9);
  EXPECT_EQ(ci.n, 3u);
}

TEST(ConfidenceInterval, SingleSampleHasZeroWidth) {
  const std::vector<double> x{4.5};
  const auto ci = mean_ci(x);
  EXPECT_EQ(ci.mean, 4.5);
  EXPECT_EQ(ci.half_width, 0.0);
  EXPECT_EQ(mean_ci(std::vector<double>{}).n, 0u);
  EXPECT_THROW(mean_ci(x, 1.0), InvalidInput);
}

TEST(ConfidenceInterval, CoversOtherLevels) {
  const std::vector<double> x{3.0, 7.0, 4.0, 9.0, 5.5};
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / 5;
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / 4);
  boost::math::students_t t(4);
  EXPECT_NEAR(mean_ci(x, 0.95).half_width, boost::math::quantile(t, 0.975) * sd / std::sqrt(5.0),
              1e-12);
}
