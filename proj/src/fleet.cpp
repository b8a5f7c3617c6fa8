#include "greenfed/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "greenfed/rng.hpp"

namespace greenfed::fleet {

void ResourceProvider::validate() const {
  if (id < 0) throw std::invalid_argument("ResourceProvider: id must be >= 0");
  if (!(compute >= 0.25 && compute <= 2.0))
    throw std::invalid_argument("ResourceProvider: compute must be in [0.25, 2.0]");
  if (!(bandwidth_mbps > 0.0))
    throw std::invalid_argument("ResourceProvider: bandwidth must be > 0");
  if (!(efficiency >= 0.5 && efficiency <= 1.5))
    throw std::invalid_argument("ResourceProvider: efficiency must be in [0.5, 1.5]");
}

void FleetRanges::validate() const {
  auto ordered = [](double lo, double hi) { return lo <= hi; };
  if (!ordered(compute_min, compute_max) || !ordered(bandwidth_min, bandwidth_max) ||
      !ordered(efficiency_min, efficiency_max) || !ordered(lat_min, lat_max) ||
      !ordered(lon_min, lon_max))
    throw std::invalid_argument("FleetRanges: min must be <= max");
}

namespace {

double population_std(const std::vector<ResourceProvider>& providers) {
  const auto n = static_cast<double>(providers.size());
  double mean = 0.0;
  for (const auto& p : providers) mean += p.compute;
  mean /= n;
  double var = 0.0;
  for (const auto& p : providers) var += (p.compute - mean) * (p.compute - mean);
  return std::sqrt(var / n);
}

}  // namespace

Fleet::Fleet(std::vector<ResourceProvider> providers) : providers_(std::move(providers)) {
  for (int i = 0; i < static_cast<int>(providers_.size()); ++i) {
    providers_[static_cast<size_t>(i)].validate();
    if (providers_[static_cast<size_t>(i)].id != i)
      throw std::invalid_argument("Fleet: provider ids must be 0..n-1 in order");
  }
  compute_std_ = providers_.empty() ? 0.0 : population_std(providers_);
}

Fleet Fleet::sample(int n, const FleetRanges& ranges, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("Fleet::sample: need at least 2 providers");
  ranges.validate();
  rng::Xoshiro256 gen(seed);
  std::vector<ResourceProvider> providers;
  providers.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ResourceProvider p;
    p.id = i;
    p.compute = gen.uniform(ranges.compute_min, ranges.compute_max);
    p.bandwidth_mbps = gen.uniform(ranges.bandwidth_min, ranges.bandwidth_max);
    p.efficiency = gen.uniform(ranges.efficiency_min, ranges.efficiency_max);
    p.lat = gen.uniform(ranges.lat_min, ranges.lat_max);
    p.lon = gen.uniform(ranges.lon_min, ranges.lon_max);
    providers.push_back(p);
  }
  Fleet fleet(std::move(providers));
  if (!(fleet.compute_std_ > 0.0))
    throw std::invalid_argument("Fleet::sample: compute spread is zero (degenerate ranges)");
  return fleet;
}

std::string Fleet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : providers_) {
    arr.push_back({{"id", p.id},
                   {"compute", p.compute},
                   {"bandwidth_mbps", p.bandwidth_mbps},
                   {"efficiency", p.efficiency},
                   {"lat", p.lat},
                   {"lon", p.lon}});
  }
  return arr.dump(2);
}

Fleet Fleet::from_json(const std::string& text) {
  const nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("Fleet::from_json: expected an array");
  std::vector<ResourceProvider> providers(arr.size());
  for (const auto& item : arr) {
    ResourceProvider p;
    p.id = item.at("id").get<int>();
    p.compute = item.at("compute").get<double>();
    p.bandwidth_mbps = item.at("bandwidth_mbps").get<double>();
    p.efficiency = item.at("efficiency").get<double>();
    p.lat = item.at("lat").get<double>();
    p.lon = item.at("lon").get<double>();
    if (p.id < 0 || p.id >= static_cast<int>(providers.size()))
      throw std::invalid_argument("Fleet::from_json: id out of range");
    providers[static_cast<size_t>(p.id)] = p;
  }
  return Fleet(std::move(providers));
}

double simulated_round_time_s(const ResourceProvider& provider, double n_samples, double epochs,
                              double model_size_mb, const TimeCoefficients& coeffs) {
  if (n_samples < 0.0 || epochs < 0.0 || model_size_mb < 0.0)
    throw std::invalid_argument("simulated_round_time_s: negative input");
  return n_samples * epochs * coeffs.sec_per_sample / provider.compute +
         2.0 * model_size_mb / provider.bandwidth_mbps;
}

double selection_round_time_s(const Fleet& fleet, std::span<const int> selected_ids,
                              std::span<const double> per_client_samples, double epochs,
                              double model_size_mb, const TimeCoefficients& coeffs) {
  if (selected_ids.size() != per_client_samples.size())
    throw std::invalid_argument("selection_round_time_s: size mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < selected_ids.size(); ++i) {
    worst = std::max(worst, simulated_round_time_s(fleet[selected_ids[i]], per_client_samples[i],
                                                   epochs, model_size_mb, coeffs));
  }
  return worst;
}

}  // namespace greenfed::fleet
