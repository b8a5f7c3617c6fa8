#include "greenfed/carbon.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace greenfed::carbon {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void CarbonModel::validate() const {
  if (!(i_base_g_per_kwh > 0.0)) throw std::invalid_argument("CarbonModel: i_base must be > 0");
  if (!(amplitude_g_per_kwh >= 0.0))
    throw std::invalid_argument("CarbonModel: amplitude must be >= 0");
  if (!(period_hours > 0.0)) throw std::invalid_argument("CarbonModel: period must be > 0");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("CarbonModel: noise_sigma must be >= 0");
}

void IntensityThresholds::validate() const {
  if (!(low_max < high_min))
    throw std::invalid_argument("IntensityThresholds: low_max must be < high_min");
}

void EnergyModel::validate() const {
  if (!(joules_per_sample_epoch > 0.0))
    throw std::invalid_argument("EnergyModel: joules_per_sample_epoch must be > 0");
  if (!(comm_energy_per_megabyte > 0.0))
    throw std::invalid_argument("EnergyModel: comm_energy_per_megabyte must be > 0");
}

const char* to_string(IntensityClass c) {
  switch (c) {
    case IntensityClass::Low:
      return "Low";
    case IntensityClass::Medium:
      return "Medium";
    case IntensityClass::High:
      return "High";
  }
  return "?";
}

double intensity_at(const CarbonModel& model, double t_hours, double noise_draw) {
  if (!(t_hours >= 0.0)) throw std::invalid_argument("intensity_at: t must be >= 0");
  const double value = model.i_base_g_per_kwh +
                       model.amplitude_g_per_kwh *
                           std::sin(kTwoPi * t_hours / model.period_hours + model.phase_radians) +
                       noise_draw;
  // Clamped so downstream divisions and emission products stay positive.
  return std::max(1.0, value);
}

IntensityClass classify_intensity(double value, const IntensityThresholds& thresholds) {
  thresholds.validate();
  if (value <= thresholds.low_max) return IntensityClass::Low;
  if (value >= thresholds.high_min) return IntensityClass::High;
  return IntensityClass::Medium;
}

double round_energy_kwh(double efficiency, double n_samples, double epochs,
                        double model_size_mb, const EnergyModel& energy) {
  if (!(efficiency > 0.0)) throw std::invalid_argument("round_energy_kwh: efficiency must be > 0");
  if (n_samples < 0.0 || epochs < 0.0 || model_size_mb < 0.0)
    throw std::invalid_argument("round_energy_kwh: negative input");
  const double compute_j = n_samples * epochs * energy.joules_per_sample_epoch / efficiency;
  const double comm_j = 2.0 * model_size_mb * energy.comm_energy_per_megabyte;
  return (compute_j + comm_j) / 3.6e6;  // J -> kWh
}

void EmissionLedger::record_round(int round, double energy_kwh, double intensity_g_per_kwh) {
  if (!entries_.empty() && round <= entries_.back().round)
    throw std::invalid_argument("EmissionLedger: round index must be strictly increasing");
  if (!(energy_kwh >= 0.0)) throw std::invalid_argument("EmissionLedger: negative energy");
  LedgerEntry e;
  e.round = round;
  e.energy_kwh = energy_kwh;
  e.intensity_g_per_kwh = intensity_g_per_kwh;
  e.emissions_g = energy_kwh * intensity_g_per_kwh;
  cumulative_g_ += e.emissions_g;
  entries_.push_back(e);
}

double EmissionLedger::mean_per_round_g() const {
  if (entries_.empty()) return 0.0;
  return cumulative_g_ / static_cast<double>(entries_.size());
}

void EmissionLedger::write_csv(std::ostream& os) const {
  os << "round,energy_kwh,intensity_g_per_kwh,emissions_g,cumulative_g\n";
  double running = 0.0;
  char buf[160];
  for (const auto& e : entries_) {
    running += e.emissions_g;
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", e.round, e.energy_kwh,
                  e.intensity_g_per_kwh, e.emissions_g, running);
    os << buf;
  }
}

}  // namespace greenfed::carbon
