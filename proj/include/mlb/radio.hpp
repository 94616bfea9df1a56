#pragma once

#include "mlb/core.hpp"

#include <array>
#include <span>

namespace mlb {

struct RadioConfig {
  double tx_power_dbm = 20.0;
  int n_rb = 25;
  double rb_bandwidth_hz = 180000.0;
  double noise_figure_db = 9.0;
  double pathloss_intercept_db = 95.0;
  double pathloss_slope = 27.0;  // dB per decade of distance
  double rlf_sinr_db = -6.0;

  void validate() const;

  /// Thermal noise over one resource block plus the receiver noise figure.
  double noise_dbm() const;
  double bandwidth_mhz() const { return n_rb * rb_bandwidth_hz / 1e6; }
};

/// Log-distance pathloss, intercept + slope * log10(d / 1 km). Distances
/// below 1 m are clamped to 1 m.
double pathloss_db(double distance_m, const RadioConfig& cfg = {});

/// Per-RB received power: total transmit power split evenly over n_rb.
double rsrp_dbm(const RadioConfig& cfg, double pathloss);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// SINR with all terms summed in the linear domain.
double sinr_db(double serving_rsrp_dbm, std::span<const double> interferer_rsrps_dbm,
               double noise_dbm);

/// SINR -> CQI -> spectral efficiency ladder (4-bit CQI, indices 1..15).
class CqiTable {
 public:
  static constexpr int kLevels = 15;

  CqiTable(const std::array<double, kLevels>& sinr_thresholds_db,
           const std::array<double, kLevels>& efficiencies);

  /// Thresholds from -6.7 dB to 22.7 dB in 2.1 dB steps over the standard
  /// efficiency ladder (0.1523 .. 5.5547 bit/s/Hz).
  static const CqiTable& standard();

  /// Largest CQI whose threshold is <= sinr; 0 below the first threshold.
  int cqi_from_sinr(double sinr_db) const;

  /// floor(efficiency * 180 kHz * 1 ms); zero for CQI 0.
  int bits_per_rb(int cqi) const;

  double threshold_db(int cqi) const;
  double efficiency(int cqi) const;

 private:
  std::array<double, kLevels> thresholds_;
  std::array<double, kLevels> efficiencies_;
  std::array<int, kLevels + 1> bits_;
};

}  // namespace mlb
