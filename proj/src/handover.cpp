#include "mlb/handover.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mlb {

void HandoverConfig::validate() const {
  if (!(ttt_ms >= 0.0)) throw InvalidInput("handover.ttt_ms must be >= 0");
  if (!(hysteresis_db >= 0.0)) throw InvalidInput("handover.hysteresis_db must be >= 0");
  if (!(cio_min_db <= cio_max_db)) throw InvalidInput("handover.cio_min_db exceeds cio_max_db");
  for (double c : cio_db)
    if (!(c >= cio_min_db && c <= cio_max_db))
      throw InvalidInput("handover.cio_db entry " + std::to_string(c) + " outside [" +
                         std::to_string(cio_min_db) + ", " + std::to_string(cio_max_db) + "]");
}

bool a3_condition(double rsrp_serving_dbm, double rsrp_neighbor_dbm, double cio_neighbor_db,
                  double cio_serving_db, double hysteresis_db) {
  return rsrp_neighbor_dbm + cio_neighbor_db > hysteresis_db + rsrp_serving_dbm + cio_serving_db;
}

TttTracker::TttTracker(int n_ues, int n_cells, double ttt_ms)
    : elapsed_(Matrix::Zero(n_ues, n_cells)), ttt_ms_(ttt_ms) {}

bool TttTracker::update(int ue, int candidate, bool holds, double dt_ms) {
  if (!(dt_ms > 0.0)) throw InvalidInput("TttTracker::update: dt_ms must be > 0");
  double& t = elapsed_(ue, candidate);
  if (!holds) {
    t = 0.0;
    return false;
  }
  t += dt_ms;
  return t >= ttt_ms_;
}

void TttTracker::reset_ue(int ue) { elapsed_.row(ue).setZero(); }
void TttTracker::reset_all() { elapsed_.setZero(); }

namespace {

void check_shape(std::span<const Attachment> serving, const Matrix& rsrp) {
  if (static_cast<Index>(serving.size()) != rsrp.rows())
    throw InvalidInput("handover scan: one RSRP row per UE required");
}

// Clears every candidate counter except `keep`.
void reset_others(TttTracker& tracker, int ue, int n_cells, int keep) {
  for (int c = 0; c < n_cells; ++c)
    if (c != keep) tracker.update(ue, c, false, 1.0);
}

}  // namespace

std::vector<HandoverCommand> a3_scan(std::span<const Attachment> serving, const Matrix& rsrp,
                                     const HandoverConfig& cfg, TttTracker& tracker,
                                     double dt_ms) {
  check_shape(serving, rsrp);
  const int n_cells = static_cast<int>(rsrp.cols());
  std::vector<HandoverCommand> out;
  for (int ue = 0; ue < static_cast<int>(serving.size()); ++ue) {
    if (!serving[ue]) continue;
    const int s = *serving[ue];
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_cells; ++c) {
      if (c == s) continue;
      const double v = rsrp(ue, c) + cfg.cio(c);
      if (v > best_val) {
        best_val = v;
        best = c;
      }
    }
    if (best < 0) continue;
    reset_others(tracker, ue, n_cells, best);
    const bool holds =
        a3_condition(rsrp(ue, s), rsrp(ue, best), cfg.cio(best), cfg.cio(s), cfg.hysteresis_db);
    if (tracker.update(ue, best, holds, dt_ms)) out.push_back({ue, best});
  }
  return out;
}

std::vector<HandoverCommand> reattach_scan(std::span<const Attachment> serving,
                                           const Matrix& rsrp, TttTracker& tracker,
                                           double dt_ms) {
  check_shape(serving, rsrp);
  const int n_cells = static_cast<int>(rsrp.cols());
  std::vector<HandoverCommand> out;
  for (int ue = 0; ue < static_cast<int>(serving.size()); ++ue) {
    if (serving[ue]) continue;
    Index best = 0;
    rsrp.row(ue).maxCoeff(&best);
    reset_others(tracker, ue, n_cells, static_cast<int>(best));
    if (tracker.update(ue, static_cast<int>(best), true, dt_ms))
      out.push_back({ue, static_cast<int>(best)});
  }
  return out;
}

std::vector<HandoverCommand> rebuha_step(const Vector& rbu, double gamma_rb,
                                         std::span<const Attachment> serving,
                                         const Matrix& rsrp) {
  check_shape(serving, rsrp);
  if (rbu.size() != rsrp.cols()) throw InvalidInput("rebuha_step: one RBU entry per cell");
  std::vector<HandoverCommand> out;
  if ((rbu.array() > gamma_rb).all()) return out;

  int target = -1;
  for (Index c = 0; c < rbu.size(); ++c)
    if (rbu[c] < gamma_rb && (target < 0 || rbu[c] < rbu[target])) target = static_cast<int>(c);
  if (target < 0) return out;

  for (Index cell = 0; cell < rbu.size(); ++cell) {
    if (!(rbu[cell] > gamma_rb)) continue;
    int pick = -1;
    for (int ue = 0; ue < static_cast<int>(serving.size()); ++ue) {
      if (serving[ue] != static_cast<int>(cell)) continue;
      if (pick < 0 || rsrp(ue, target) > rsrp(pick, target)) pick = ue;
    }
    if (pick >= 0) out.push_back({pick, target});
  }
  return out;
}

}  // namespace mlb
