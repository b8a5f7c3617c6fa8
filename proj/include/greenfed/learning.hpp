#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "greenfed/data.hpp"

// Flat-parameter-vector models (softmax regression and a one-hidden-layer
// ReLU MLP), local mini-batch SGD with an optional proximal anchor term,
// and centralized evaluation. Training is a pure function of its inputs;
// clients may run concurrently.

namespace greenfed::learning {

enum class ArchKind { Logreg, Mlp };

struct Arch {
  ArchKind kind = ArchKind::Logreg;
  int input_dim = 784;
  int hidden_dim = 0;  // used by Mlp only
  int n_classes = 10;

  std::int64_t param_count() const;
  void validate() const;
  bool operator==(const Arch&) const = default;

  // One-line text descriptor, e.g. "logreg 784 10" or "mlp 784 64 10 relu".
  std::string descriptor() const;
  static Arch from_descriptor(const std::string& line);
};

struct ModelParams {
  Arch arch;
  std::vector<double> values;
};

// Fan-in-scaled uniform weights, zero biases; deterministic per seed.
ModelParams init_model(const Arch& arch, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 0.05;
  int batch_size = 32;
  int local_epochs = 5;
  double prox_mu = 0.0;  // 0 disables the proximal term
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean softmax cross-entropy over the batch plus (prox_mu/2)*||w - anchor||^2.
// batch_x is row-major n x input_dim. The anchor must share the arch.
LossGrad loss_and_grad(const ModelParams& params, std::span<const double> batch_x,
                       std::span<const std::int32_t> batch_y, const ModelParams& anchor,
                       double prox_mu);

struct ClientView {
  const data::Dataset* dataset = nullptr;
  std::span<const std::int32_t> indices;
};

struct TrainResult {
  ModelParams params;
  double final_loss = 0.0;  // mean training loss over the last epoch
};

struct TrainingDiverged : std::runtime_error {
  TrainingDiverged(int epoch, int step)
      : std::runtime_error("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch) + ", step " + std::to_string(step)),
        epoch(epoch),
        step(step) {}
  int epoch;
  int step;
};

// Shuffled mini-batch SGD from `global`, with the proximal anchor fixed at
// `global` for every step.
TrainResult local_train(const ModelParams& global, const ClientView& client,
                        const TrainConfig& config);

// Proximal weight scaled by how far below reference compute the client sits,
// clamped at zero.
double adaptive_mu(double mu_base, double compute);

struct EvalReport {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Argmax accuracy (ties resolve to the lowest class index) and mean
// cross-entropy on the full test set.
EvalReport evaluate(const ModelParams& params, const data::Dataset& test);

// Wire format: descriptor line + '\n' + little-endian float64 values.
std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::span<const std::uint8_t> bytes);
std::int64_t serialized_size_bytes(const Arch& arch);
double model_size_mb(const Arch& arch);  // serialized bytes / 1e6

}  // namespace greenfed::learning
