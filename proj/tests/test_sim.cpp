#include "mlb/sim.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <set>

using namespace mlb;

namespace {

SimConfig small(int n_ues = 30) {
  SimConfig cfg;
  cfg.n_ues = n_ues;
  return cfg;
}

int best_cell(const Simulation& sim, int ue) {
  Index c = 0;
  sim.rsrp().row(ue).maxCoeff(&c);
  return static_cast<int>(c);
}

void expect_conservation(const Simulation& sim) {
  for (const auto& u : sim.ues()) {
    const auto& k = sim.counters(u.id);
    ASSERT_EQ(k.generated, k.delivered + k.dropped + k.lost + u.queue.size()) << "ue " << u.id;
  }
}

}  // namespace

TEST(Topology, Collinear) {
  const auto t = Topology::collinear(3, 720.0);
  EXPECT_EQ(t.middle(), 1);
  EXPECT_EQ(t.bs_positions[2], Point(1440.0, 0.0));
  const auto b = t.bounds(360.0);
  EXPECT_EQ(b.lo, Point(-360.0, -360.0));
  EXPECT_EQ(b.hi, Point(1800.0, 360.0));
}

TEST(Placement, CentreOnly) {
  const auto topo = Topology::collinear(3, 720.0);
  Rng rng(1);
  const auto pts = place_ues(topo, 30, 0.0, 100.0, 260.0, 360.0, rng);
  ASSERT_EQ(pts.size(), 30u);
  for (const auto& p : pts) EXPECT_LE((p - topo.bs_positions[1]).norm(), 360.0);
}

TEST(Placement, EdgeSplitAndDiscs) {
  const auto topo = Topology::collinear(3, 720.0);
  Rng rng(2);
  const auto pts = place_ues(topo, 30, 0.4, 100.0, 260.0, 360.0, rng);
  const Point left(720.0 - 260.0, 0.0), right(720.0 + 260.0, 0.0);
  int edge = 0;
  for (int i = 0; i < 12; ++i) {
    const Point& disc = i % 2 == 0 ? left : right;
    EXPECT_LE((pts[i] - disc).norm(), 100.0 + 1e-9) << i;
    ++edge;
  }
  EXPECT_EQ(edge, 12);
  for (int i = 12; i < 30; ++i) EXPECT_LE((pts[i] - topo.bs_positions[1]).norm(), 360.0);
}

TEST(Placement, EdgeDiscsInsideMiddleCell) {
  // Every point of a default edge disc is closer to the middle site.
  SimConfig cfg;
  const auto topo = Topology::collinear(3, cfg.isd_m);
  Rng rng(3);
  const auto pts = place_ues(topo, 400, 1.0, cfg.edge_disc_radius_m, cfg.edge_offset(),
                             cfg.coverage_radius(), rng);
  for (const auto& p : pts) {
    const double dm = (p - topo.bs_positions[1]).norm();
    EXPECT_LE(dm, (p - topo.bs_positions[0]).norm());
    EXPECT_LE(dm, (p - topo.bs_positions[2]).norm());
  }
}

TEST(Placement, RejectsBadFraction) {
  const auto topo = Topology::collinear(3, 720.0);
  Rng rng(1);
  EXPECT_THROW(place_ues(topo, 3, 1.5, 100, 260, 360, rng), InvalidInput);
}

TEST(Simulation, AllStartOnMiddleCell) {
  for (double f : {0.0, 0.4, 1.0}) {
    auto cfg = small();
    cfg.edge_fraction = f;
    Simulation sim(cfg, 5);
    for (const auto& u : sim.ues()) EXPECT_EQ(u.serving, 1);
    EXPECT_EQ(sim.cells()[1].attached_ues.size(), 30u);
  }
}

TEST(RandomWalk, DisplacementPerSecond) {
  UeState ue;
  ue.mobile = true;
  ue.speed_mps = 20.0;
  ue.position = Point(720.0, 0.0);
  ue.heading_age_ms = 1000.0;
  Bounds wide{Point(-1e6, -1e6), Point(1e6, 1e6)};
  Rng rng(9);
  const Point start = ue.position;
  for (int ms = 0; ms < 1000; ++ms) random_walk_step(ue, 1.0, wide, rng, 1000.0);
  EXPECT_NEAR((ue.position - start).norm(), 20.0, 1e-9);

  ue.speed_mps = 0.0;
  const Point still = ue.position;
  for (int ms = 0; ms < 1000; ++ms) random_walk_step(ue, 1.0, wide, rng, 1000.0);
  EXPECT_EQ(ue.position, still);
}

TEST(RandomWalk, StaysInBounds) {
  UeState ue;
  ue.mobile = true;
  ue.speed_mps = 500.0;
  ue.heading_age_ms = 1000.0;
  Bounds box{Point(0, 0), Point(50, 30)};
  ue.position = Point(25, 15);
  Rng rng(10);
  for (int ms = 0; ms < 20000; ++ms) {
    random_walk_step(ue, 1.0, box, rng, 300.0);
    ASSERT_TRUE(box.contains(ue.position));
  }
}

TEST(Simulation, UtilizationSamplesPerStep) {
  Simulation sim(small(), 1);
  const auto kpi = sim.run_agent_step(1000);
  for (const auto& c : sim.cells()) EXPECT_EQ(c.tti_utilization_log.size(), 1000u);
  EXPECT_DOUBLE_EQ(sim.now_ms(), 1000.0);
  EXPECT_EQ(kpi.duration_ms, 1000.0);
  sim.run_agent_step(250);
  EXPECT_DOUBLE_EQ(sim.now_ms(), 1250.0);
  EXPECT_EQ(sim.cells()[0].tti_utilization_log.size(), 250u);
}

TEST(Simulation, NoTrafficMeansIdle) {
  auto cfg = small();
  cfg.n_cbr = 0;
  cfg.poisson = FlowSpec::poisson(32, 1e-9);
  Simulation sim(cfg, 1);
  const auto kpi = sim.run_agent_step(1000);
  for (const auto& c : sim.cells())
    for (double x : c.tti_utilization_log) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(kpi.throughput_bps, 0.0);
  for (const auto& u : kpi.ues) EXPECT_EQ(u.generated, 0u);
}

TEST(Simulation, ConservationAndDeterminism) {
  for (double mob : {0.0, 0.3}) {
    auto cfg = small();
    cfg.mobility_fraction = mob;
    Simulation a(cfg, 42), b(cfg, 42);
    for (int step = 0; step < 10; ++step) {
      const auto ka = a.run_agent_step();
      const auto kb = b.run_agent_step();
      EXPECT_EQ(kpi_hash(ka), kpi_hash(kb));
      expect_conservation(a);
    }
  }
}

TEST(Simulation, SeedsAndEpisodesDiffer) {
  Simulation a(small(), 1), b(small(), 2);
  EXPECT_NE(kpi_hash(a.run_agent_step()), kpi_hash(b.run_agent_step()));
  // placement survives an episode reset, traffic does not
  const Point p0 = a.ues()[0].position;
  a.reset(0);
  const auto k0 = a.run_agent_step();
  a.reset(1);
  EXPECT_EQ(a.ues()[0].position, p0);
  EXPECT_NE(kpi_hash(a.run_agent_step()), kpi_hash(k0));
}

TEST(Simulation, ConservationUnderHeavyLoadAndRlf) {
  auto cfg = small(50);
  cfg.queue_capacity = 20;
  Simulation sim(cfg, 3);
  sim.set_cio(std::vector<double>{9.0, -9.0, 9.0});
  for (int step = 0; step < 6; ++step) {
    sim.run_agent_step();
    expect_conservation(sim);
  }
  std::uint64_t dropped = 0;
  for (const auto& u : sim.ues()) dropped += sim.counters(u.id).dropped;
  EXPECT_GT(dropped, 0u);
}

TEST(Simulation, AttachmentPartition) {
  auto cfg = small(40);
  cfg.mobility_fraction = 0.5;
  Simulation sim(cfg, 8);
  sim.set_cio(std::vector<double>{6.0, -6.0, 3.0});
  for (int step = 0; step < 5; ++step) {
    const auto kpi = sim.run_agent_step();
    std::set<int> seen;
    int attached = 0;
    for (const auto& c : sim.cells()) {
      for (int ue : c.attached_ues) {
        EXPECT_TRUE(seen.insert(ue).second);
        EXPECT_EQ(sim.ues()[ue].serving, c.id);
      }
      attached += static_cast<int>(c.attached_ues.size());
    }
    int connected = 0;
    for (const auto& u : kpi.ues) connected += u.connected;
    EXPECT_EQ(attached, connected);
    EXPECT_NEAR(kpi.attachment_vector().sum(), static_cast<double>(connected) / 40, 1e-12);
    for (Index c = 0; c < 3; ++c) {
      EXPECT_GE(kpi.rbu_vector()[c], 0.0);
      EXPECT_LE(kpi.rbu_vector()[c], 1.0);
    }
  }
}

TEST(Simulation, ExecuteHandoverValidation) {
  Simulation sim(small(), 1);
  EXPECT_THROW(sim.execute_handover(30, 0), InvalidInput);
  EXPECT_THROW(sim.execute_handover(-1, 0), InvalidInput);
  EXPECT_THROW(sim.execute_handover(0, 3), InvalidInput);
  EXPECT_THROW(sim.execute_handover(0, 1), InvalidInput);
  sim.execute_handover(0, 2);
  EXPECT_EQ(sim.ues()[0].serving, 2);
  EXPECT_EQ(sim.cells()[1].attached_ues.size(), 29u);
  EXPECT_THROW(sim.set_cio(std::vector<double>{0.0, 0.0}), InvalidInput);
  EXPECT_THROW(sim.set_cio(std::vector<double>{0.0, 10.0, 0.0}), InvalidInput);
}

TEST(Connectivity, NearServingIsFine) {
  auto cfg = small();
  cfg.edge_fraction = 0.0;
  Simulation sim(cfg, 4);
  for (int i = 0; i < 30; ++i) sim.set_ue_position(i, Point(720.0 + i, 5.0));
  EXPECT_TRUE(sim.connectivity_check().empty());
}

TEST(Connectivity, FarCellDropsUe) {
  Simulation sim(small(), 4);
  sim.set_ue_position(0, Point(1400.0, 0.0));
  sim.execute_handover(0, 0);
  EXPECT_LT(sim.serving_sinr_db(0), -10.0);
  const auto dropped = sim.connectivity_check();
  ASSERT_EQ(dropped, std::vector<int>{0});
  EXPECT_FALSE(sim.ues()[0].serving.has_value());
}

TEST(Connectivity, BoundaryIsConnected) {
  Simulation probe(small(), 4);
  probe.set_ue_position(0, Point(1000.0, 40.0));
  probe.execute_handover(0, 0);
  const double sinr = probe.serving_sinr_db(0);
  auto cfg = small();
  cfg.radio.rlf_sinr_db = sinr;
  Simulation sim(cfg, 4);
  sim.set_ue_position(0, Point(1000.0, 40.0));
  sim.execute_handover(0, 0);
  ASSERT_EQ(sim.serving_sinr_db(0), sinr);
  EXPECT_TRUE(sim.connectivity_check().empty());
}

TEST(Connectivity, DisconnectedUeReattaches) {
  Simulation sim(small(), 4);
  sim.set_ue_position(0, Point(1400.0, 0.0));
  sim.execute_handover(0, 0);
  sim.connectivity_check();
  const auto kpi = sim.run_agent_step(100);
  EXPECT_EQ(sim.ues()[0].serving, best_cell(sim, 0));
  EXPECT_EQ(kpi.reattachments, 1);
  EXPECT_EQ(kpi.handovers, 0);
}

TEST(A3Mode, DefaultPlacementNeverHandsOver) {
  Simulation sim(small(), 1);
  for (int step = 0; step < 10; ++step) EXPECT_EQ(sim.run_agent_step().handovers, 0);
}

TEST(A3Mode, CioPullsUsersAway) {
  Simulation sim(small(), 1);
  sim.set_cio(std::vector<double>{9.0, -9.0, 9.0});
  const auto kpi = sim.run_agent_step();
  EXPECT_GT(kpi.handovers, 0);
  EXPECT_LT(kpi.cells[1].attached, 30);
}

TEST(RebuhaMode, NoA3Scan) {
  auto cfg = small(10);
  cfg.mode = HandoverMode::Rebuha;
  Simulation sim(cfg, 1);
  sim.set_cio(std::vector<double>{9.0, -9.0, 9.0});
  // light load: the middle cell stays under the threshold, so nothing moves
  for (int step = 0; step < 5; ++step) {
    const auto kpi = sim.run_agent_step();
    EXPECT_LE(kpi.cells[1].rbu, cfg.gamma_rb);
    EXPECT_EQ(kpi.handovers, 0);
  }
}

TEST(Config, Validation) {
  auto cfg = small();
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_cells = 1;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = small();
  cfg.mobility_fraction = 1.2;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = small();
  cfg.gamma_rb = -0.1;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}
