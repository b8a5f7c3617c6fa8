#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

// Grid carbon-intensity model and per-round energy/emission accounting.

namespace greenfed::carbon {

// Sinusoidal daily grid intensity: base + amplitude * sin(2*pi*t/period +
// phase) + noise, clamped to >= 1 gCO2/kWh.
struct CarbonModel {
  double i_base_g_per_kwh = 150.0;
  double amplitude_g_per_kwh = 70.0;
  double period_hours = 24.0;
  double phase_radians = 0.0;
  double noise_sigma = 10.0;

  void validate() const;
};

enum class IntensityClass { Low, Medium, High };

const char* to_string(IntensityClass c);

struct IntensityThresholds {
  double low_max = 120.0;   // value <= low_max  -> Low
  double high_min = 180.0;  // value >= high_min -> High

  void validate() const;
};

// Compute + communication energy, linear in work, divided by the provider's
// efficiency factor.
struct EnergyModel {
  double joules_per_sample_epoch = 0.72;  // at efficiency 1.0
  double comm_energy_per_megabyte = 20.0;

  void validate() const;
};

// Intensity at simulated hour t. noise_draw comes from the caller's
// dedicated noise stream (pass 0 when noise is disabled).
double intensity_at(const CarbonModel& model, double t_hours, double noise_draw);

IntensityClass classify_intensity(double value, const IntensityThresholds& thresholds);

// Energy in kWh for one client's round of local training plus the model
// down/upload. Rejects efficiency <= 0.
double round_energy_kwh(double efficiency, double n_samples, double epochs,
                        double model_size_mb, const EnergyModel& energy);

struct LedgerEntry {
  int round = 0;
  double energy_kwh = 0.0;
  double intensity_g_per_kwh = 0.0;
  double emissions_g = 0.0;
};

// Append-only per-round emission log. Single writer; rounds must be
// strictly increasing.
class EmissionLedger {
 public:
  void record_round(int round, double energy_kwh, double intensity_g_per_kwh);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double cumulative_g() const { return cumulative_g_; }
  double mean_per_round_g() const;

  // Header: round,energy_kwh,intensity_g_per_kwh,emissions_g,cumulative_g
  void write_csv(std::ostream& os) const;

 private:
  std::vector<LedgerEntry> entries_;
  double cumulative_g_ = 0.0;
};

}  // namespace greenfed::carbon
