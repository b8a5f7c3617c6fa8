#include "greenfed/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "greenfed/kernels.hpp"

namespace greenfed::aggregation {

learning::ModelParams fedavg(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw std::invalid_argument("fedavg: no updates");
  std::vector<const ClientUpdate*> sorted;
  sorted.reserve(updates.size());
  double total = 0.0;
  for (const auto& u : updates) {
    if (u.n_samples < 1) throw std::invalid_argument("fedavg: n_samples must be >= 1");
    if (u.params.arch != updates.front().params.arch)
      throw std::invalid_argument("fedavg: arch mismatch");
    total += static_cast<double>(u.n_samples);
    sorted.push_back(&u);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ClientUpdate* a, const ClientUpdate* b) { return a->client_id < b->client_id; });

  learning::ModelParams out;
  out.arch = updates.front().params.arch;
  out.values.assign(static_cast<size_t>(out.arch.param_count()), 0.0);
  for (const ClientUpdate* u : sorted) {
    kernels::axpy(out.values.data(), static_cast<double>(u->n_samples) / total,
                  u->params.values.data(), out.values.size());
  }
  return out;
}

learning::ModelParams fedadam_from_delta(const std::vector<double>& delta,
                                         const learning::ModelParams& global,
                                         ServerOptState& state, const FedAdamHyper& hyper) {
  const size_t n = global.values.size();
  if (delta.size() != n) throw std::invalid_argument("fedadam: delta size mismatch");
  if (state.first_moment.empty()) {
    state.first_moment.assign(n, 0.0);
    state.second_moment.assign(n, 0.0);
  }
  if (state.first_moment.size() != n)
    throw std::invalid_argument("fedadam: state size mismatch");

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step_count));

  learning::ModelParams out = global;
  for (size_t i = 0; i < n; ++i) {
    state.first_moment[i] = hyper.beta1 * state.first_moment[i] + (1.0 - hyper.beta1) * delta[i];
    state.second_moment[i] =
        hyper.beta2 * state.second_moment[i] + (1.0 - hyper.beta2) * delta[i] * delta[i];
    const double m_hat = state.first_moment[i] / bc1;
    const double v_hat = state.second_moment[i] / bc2;
    out.values[i] += hyper.eta * m_hat / (std::sqrt(v_hat) + hyper.tau);
  }
  return out;
}

learning::ModelParams fedadam(const std::vector<ClientUpdate>& updates,
                              const learning::ModelParams& global, ServerOptState& state,
                              const FedAdamHyper& hyper) {
  const learning::ModelParams averaged = fedavg(updates);
  if (averaged.arch != global.arch) throw std::invalid_argument("fedadam: arch mismatch");
  std::vector<double> delta(global.values.size());
  for (size_t i = 0; i < delta.size(); ++i) delta[i] = averaged.values[i] - global.values[i];
  return fedadam_from_delta(delta, global, state, hyper);
}

}  // namespace greenfed::aggregation
