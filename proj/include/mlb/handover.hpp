#pragma once

#include "mlb/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mlb {

struct HandoverConfig {
  double hysteresis_db = 2.0;
  double ttt_ms = 8.0;
  double cio_min_db = -9.0;
  double cio_max_db = 9.0;
  std::vector<double> cio_db;  // one offset per cell; empty means all zero

  void validate() const;
  double cio(int cell) const { return cio_db.empty() ? 0.0 : cio_db.at(cell); }
};

/// A3 entering condition with cell individual offsets:
///   rsrp_j + cio_{j->i} > hys + rsrp_i + cio_{i->j}   (strict)
bool a3_condition(double rsrp_serving_dbm, double rsrp_neighbor_dbm, double cio_neighbor_db,
                  double cio_serving_db, double hysteresis_db);

/// Time-to-trigger bookkeeping per (ue, candidate cell).
class TttTracker {
 public:
  TttTracker(int n_ues, int n_cells, double ttt_ms);

  /// Accumulates while `holds`, resets on a false sample. True once the
  /// accumulated time reaches ttt_ms.
  bool update(int ue, int candidate, bool holds, double dt_ms);

  void reset_ue(int ue);
  void reset_all();
  double elapsed(int ue, int candidate) const { return elapsed_(ue, candidate); }
  double ttt_ms() const { return ttt_ms_; }
  void set_ttt_ms(double ttt_ms) { ttt_ms_ = ttt_ms; }

 private:
  Matrix elapsed_;
  double ttt_ms_;
};

struct HandoverCommand {
  int ue = 0;
  int target = 0;

  friend bool operator==(const HandoverCommand&, const HandoverCommand&) = default;
};

using Attachment = std::optional<int>;

/// One A3 evaluation pass. Each connected UE is tested against its best
/// neighbor by CIO-adjusted RSRP; at most one command per UE.
/// `rsrp` has one row per UE and one column per cell.
std::vector<HandoverCommand> a3_scan(std::span<const Attachment> serving, const Matrix& rsrp,
                                     const HandoverConfig& cfg, TttTracker& tracker,
                                     double dt_ms);

/// Unattached UEs select the strongest raw-RSRP cell once it has been the
/// best for the time-to-trigger.
std::vector<HandoverCommand> reattach_scan(std::span<const Attachment> serving,
                                           const Matrix& rsrp, TttTracker& tracker, double dt_ms);

/// Utilization-triggered baseline, one decision epoch. Returns nothing when
/// every cell exceeds gamma_rb. Otherwise each overloaded cell hands one UE
/// (the one with the highest RSRP toward the target) to the least-loaded
/// cell below gamma_rb, ties to the lower index.
std::vector<HandoverCommand> rebuha_step(const Vector& rbu, double gamma_rb,
                                         std::span<const Attachment> serving,
                                         const Matrix& rsrp);

}  // namespace mlb
