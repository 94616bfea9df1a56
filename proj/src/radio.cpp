#include "mlb/radio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlb {

namespace {
constexpr double kThermalNoiseDbmPerHz = -174.0;
constexpr double kRbBandwidthHz = 180000.0;
constexpr double kTtiSeconds = 0.001;
}  // namespace

void RadioConfig::validate() const {
  if (n_rb < 1) throw InvalidInput("radio.n_rb must be >= 1");
  if (!std::isfinite(tx_power_dbm)) throw InvalidInput("radio.tx_power_dbm must be finite");
  if (!(pathloss_slope > 0.0) || !std::isfinite(pathloss_slope))
    throw InvalidInput("radio.pathloss_slope must be > 0");
  if (!std::isfinite(pathloss_intercept_db))
    throw InvalidInput("radio.pathloss_intercept_db must be finite");
  if (!std::isfinite(noise_figure_db)) throw InvalidInput("radio.noise_figure_db must be finite");
  if (!std::isfinite(rlf_sinr_db)) throw InvalidInput("radio.rlf_sinr_db must be finite");
  if (rb_bandwidth_hz != kRbBandwidthHz)
    throw InvalidInput("radio.rb_bandwidth_hz is fixed at 180000");
}

double RadioConfig::noise_dbm() const {
  return kThermalNoiseDbmPerHz + 10.0 * std::log10(rb_bandwidth_hz) + noise_figure_db;
}

double pathloss_db(double distance_m, const RadioConfig& cfg) {
  if (!std::isfinite(distance_m) || distance_m <= 0.0)
    throw InvalidInput("pathloss_db: distance must be positive and finite, got " +
                       std::to_string(distance_m));
  const double d = std::max(distance_m, 1.0);
  return cfg.pathloss_intercept_db + cfg.pathloss_slope * std::log10(d / 1000.0);
}

double rsrp_dbm(const RadioConfig& cfg, double pathloss) {
  return cfg.tx_power_dbm - 10.0 * std::log10(static_cast<double>(cfg.n_rb)) - pathloss;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double sinr_db(double serving_rsrp_dbm, std::span<const double> interferer_rsrps_dbm,
               double noise_dbm) {
  if (!std::isfinite(noise_dbm)) throw InvalidInput("sinr_db: noise must be finite");
  double denom = dbm_to_mw(noise_dbm);
  for (double i : interferer_rsrps_dbm) denom += dbm_to_mw(i);
  return mw_to_dbm(dbm_to_mw(serving_rsrp_dbm) / denom);
}

CqiTable::CqiTable(const std::array<double, kLevels>& sinr_thresholds_db,
                   const std::array<double, kLevels>& efficiencies)
    : thresholds_(sinr_thresholds_db), efficiencies_(efficiencies) {
  for (int i = 1; i < kLevels; ++i) {
    if (!(thresholds_[i] > thresholds_[i - 1]))
      throw InvalidInput("CqiTable: thresholds must be strictly ascending");
    if (!(efficiencies_[i] > efficiencies_[i - 1]))
      throw InvalidInput("CqiTable: efficiencies must be strictly ascending");
  }
  if (efficiencies_[0] <= 0.0 || efficiencies_[kLevels - 1] > 6.0)
    throw InvalidInput("CqiTable: efficiencies must lie in (0, 6]");
  bits_[0] = 0;
  for (int i = 0; i < kLevels; ++i)
    bits_[i + 1] = static_cast<int>(std::floor(efficiencies_[i] * kRbBandwidthHz * kTtiSeconds));
}

const CqiTable& CqiTable::standard() {
  static const CqiTable table = [] {
    std::array<double, kLevels> thr{};
    for (int i = 0; i < kLevels; ++i) thr[i] = -6.7 + 2.1 * i;
    return CqiTable(thr, {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
                          2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547});
  }();
  return table;
}

int CqiTable::cqi_from_sinr(double sinr) const {
  // upper_bound gives the first threshold strictly above sinr.
  auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), sinr);
  return static_cast<int>(it - thresholds_.begin());
}

int CqiTable::bits_per_rb(int cqi) const {
  if (cqi < 0 || cqi > kLevels) throw InvalidInput("bits_per_rb: CQI out of range");
  return bits_[cqi];
}

double CqiTable::threshold_db(int cqi) const {
  if (cqi < 1 || cqi > kLevels) throw InvalidInput("threshold_db: CQI out of range");
  return thresholds_[cqi - 1];
}

double CqiTable::efficiency(int cqi) const {
  if (cqi < 1 || cqi > kLevels) throw InvalidInput("efficiency: CQI out of range");
  return efficiencies_[cqi - 1];
}

}  // namespace mlb
