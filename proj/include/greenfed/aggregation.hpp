#pragma once

#include <cstdint>
#include <vector>

#include "greenfed/learning.hpp"

// Server-side combination of client updates. Pure functions; summation
// order is fixed (ascending client id) so upload order never matters.

namespace greenfed::aggregation {

struct ClientUpdate {
  int client_id = 0;
  learning::ModelParams params;
  std::int64_t n_samples = 1;
};

// Data-size-weighted average of client parameters.
learning::ModelParams fedavg(const std::vector<ClientUpdate>& updates);

struct ServerOptState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
};

struct FedAdamHyper {
  double eta = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double tau = 1e-3;
};

// Adaptive server step on the pseudo-gradient fedavg(updates) - global,
// with bias-corrected moments. The state grows lazily on first use.
learning::ModelParams fedadam(const std::vector<ClientUpdate>& updates,
                              const learning::ModelParams& global, ServerOptState& state,
                              const FedAdamHyper& hyper);

// Same step applied directly to an aggregated delta (used when the privacy
// pipeline has already combined the client updates).
learning::ModelParams fedadam_from_delta(const std::vector<double>& delta,
                                         const learning::ModelParams& global,
                                         ServerOptState& state, const FedAdamHyper& hyper);

}  // namespace greenfed::aggregation
