#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Heterogeneous resource providers: normalized compute capability,
// bandwidth, energy efficiency, and location. Immutable after sampling.

namespace greenfed::fleet {

struct ResourceProvider {
  int id = 0;
  double compute = 1.0;         // normalized, mean ~ 1.0
  double bandwidth_mbps = 10.0;  // MB/s
  double efficiency = 1.0;       // > 0, scales energy down
  double lat = 0.0;
  double lon = 0.0;

  void validate() const;
};

struct FleetRanges {
  double compute_min = 0.5, compute_max = 2.0;
  double bandwidth_min = 5.0, bandwidth_max = 50.0;
  double efficiency_min = 0.6, efficiency_max = 1.4;
  double lat_min = 40.0, lat_max = 50.0;
  double lon_min = 0.0, lon_max = 10.0;

  void validate() const;
};

class Fleet {
 public:
  // Validates ids are 0..n-1 and recomputes the compute spread.
  explicit Fleet(std::vector<ResourceProvider> providers);

  // Uniform draws from the ranges; deterministic per seed. Rejects n < 2
  // and degenerate ranges that collapse the compute spread to zero.
  static Fleet sample(int n, const FleetRanges& ranges, std::uint64_t seed);

  int size() const { return static_cast<int>(providers_.size()); }
  const ResourceProvider& operator[](int id) const { return providers_[static_cast<size_t>(id)]; }
  const std::vector<ResourceProvider>& providers() const { return providers_; }
  // Population standard deviation of compute capability over the fleet.
  double compute_std() const { return compute_std_; }

  std::string to_json() const;
  static Fleet from_json(const std::string& text);

 private:
  std::vector<ResourceProvider> providers_;
  double compute_std_ = 0.0;
};

struct TimeCoefficients {
  double sec_per_sample = 0.001;  // per (sample x epoch) at compute 1.0
};

// Simulated wall-clock for one client's round: local training plus the
// model down/upload.
double simulated_round_time_s(const ResourceProvider& provider, double n_samples,
                              double epochs, double model_size_mb,
                              const TimeCoefficients& coeffs);

// Synchronous round duration: the slowest selected client dominates.
// per_client_samples[i] is the sample count of selected_ids[i].
double selection_round_time_s(const Fleet& fleet, std::span<const int> selected_ids,
                              std::span<const double> per_client_samples, double epochs,
                              double model_size_mb, const TimeCoefficients& coeffs);

}  // namespace greenfed::fleet
