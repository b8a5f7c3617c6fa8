#include "greenfed/learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "greenfed/kernels.hpp"
#include "greenfed/rng.hpp"

namespace greenfed::learning {

std::int64_t Arch::param_count() const {
  switch (kind) {
    case ArchKind::Logreg:
      return static_cast<std::int64_t>(n_classes) * input_dim + n_classes;
    case ArchKind::Mlp:
      return static_cast<std::int64_t>(hidden_dim) * input_dim + hidden_dim +
             static_cast<std::int64_t>(n_classes) * hidden_dim + n_classes;
  }
  return 0;
}

void Arch::validate() const {
  if (input_dim <= 0 || n_classes < 2) throw std::invalid_argument("Arch: bad dimensions");
  if (kind == ArchKind::Mlp && hidden_dim <= 0)
    throw std::invalid_argument("Arch: mlp needs hidden_dim > 0");
  if (kind == ArchKind::Logreg && hidden_dim != 0)
    throw std::invalid_argument("Arch: logreg must have hidden_dim 0");
}

std::string Arch::descriptor() const {
  std::ostringstream os;
  if (kind == ArchKind::Logreg) {
    os << "logreg " << input_dim << ' ' << n_classes;
  } else {
    os << "mlp " << input_dim << ' ' << hidden_dim << ' ' << n_classes << " relu";
  }
  return os.str();
}

Arch Arch::from_descriptor(const std::string& line) {
  std::istringstream is(line);
  std::string kind;
  is >> kind;
  Arch a;
  if (kind == "logreg") {
    a.kind = ArchKind::Logreg;
    a.hidden_dim = 0;
    if (!(is >> a.input_dim >> a.n_classes))
      throw std::invalid_argument("Arch: bad logreg descriptor: " + line);
  } else if (kind == "mlp") {
    a.kind = ArchKind::Mlp;
    std::string activation;
    if (!(is >> a.input_dim >> a.hidden_dim >> a.n_classes >> activation) ||
        activation != "relu")
      throw std::invalid_argument("Arch: bad mlp descriptor: " + line);
  } else {
    throw std::invalid_argument("Arch: unknown descriptor: " + line);
  }
  a.validate();
  return a;
}

ModelParams init_model(const Arch& arch, std::uint64_t seed) {
  arch.validate();
  rng::Xoshiro256 gen(rng::derive(seed, "init"));
  ModelParams m;
  m.arch = arch;
  m.values.assign(static_cast<size_t>(arch.param_count()), 0.0);

  auto fill_uniform = [&gen](double* w, std::int64_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::int64_t i = 0; i < count; ++i) w[i] = gen.uniform(-bound, bound);
  };

  double* p = m.values.data();
  if (arch.kind == ArchKind::Logreg) {
    fill_uniform(p, static_cast<std::int64_t>(arch.n_classes) * arch.input_dim, arch.input_dim);
  } else {
    fill_uniform(p, static_cast<std::int64_t>(arch.hidden_dim) * arch.input_dim, arch.input_dim);
    p += static_cast<std::int64_t>(arch.hidden_dim) * arch.input_dim + arch.hidden_dim;
    fill_uniform(p, static_cast<std::int64_t>(arch.n_classes) * arch.hidden_dim, arch.hidden_dim);
  }
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: bad learning_rate");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (local_epochs < 1) throw std::invalid_argument("TrainConfig: local_epochs must be >= 1");
  if (!(prox_mu >= 0.0)) throw std::invalid_argument("TrainConfig: prox_mu must be >= 0");
}

namespace {

struct Workspace {
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> hidden;      // post-ReLU activations
  std::vector<double> pre_hidden;  // pre-activation values
  std::vector<double> dhidden;

  void resize(const Arch& arch) {
    logits.resize(static_cast<size_t>(arch.n_classes));
    probs.resize(static_cast<size_t>(arch.n_classes));
    if (arch.kind == ArchKind::Mlp) {
      hidden.resize(static_cast<size_t>(arch.hidden_dim));
      pre_hidden.resize(static_cast<size_t>(arch.hidden_dim));
      dhidden.resize(static_cast<size_t>(arch.hidden_dim));
    }
  }
};

struct ParamLayout {
  const Arch* arch;
  // Offsets into the flat vector.
  std::int64_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;

  explicit ParamLayout(const Arch& a) : arch(&a) {
    if (a.kind == ArchKind::Logreg) {
      w1 = 0;
      b1 = static_cast<std::int64_t>(a.n_classes) * a.input_dim;
    } else {
      w1 = 0;
      b1 = static_cast<std::int64_t>(a.hidden_dim) * a.input_dim;
      w2 = b1 + a.hidden_dim;
      b2 = w2 + static_cast<std::int64_t>(a.n_classes) * a.hidden_dim;
    }
  }
};

// Log-sum-exp stabilized softmax; fills probs and returns the cross-entropy
// of the true label.
double softmax_xent(std::span<const double> logits, int label, std::span<double> probs) {
  double mx = logits[0];
  for (const double v : logits) mx = std::max(mx, v);
  double denom = 0.0;
  for (size_t c = 0; c < logits.size(); ++c) {
    probs[c] = std::exp(logits[c] - mx);
    denom += probs[c];
  }
  for (auto& p : probs) p /= denom;
  return std::log(denom) + mx - logits[static_cast<size_t>(label)];
}

// Accumulates the data gradient for one sample with weight 1/batch_n into
// grad, and returns the sample's cross-entropy.
double forward_backward(const Arch& arch, const ParamLayout& lay, const double* w,
                        const double* x, int label, double inv_batch, double* grad,
                        Workspace& ws) {
  const int d = arch.input_dim;
  const int k = arch.n_classes;

  if (arch.kind == ArchKind::Logreg) {
    for (int c = 0; c < k; ++c)
      ws.logits[static_cast<size_t>(c)] =
          kernels::dot(w + lay.w1 + static_cast<std::int64_t>(c) * d, x,
                       static_cast<size_t>(d)) +
          w[lay.b1 + c];
    const double xent = softmax_xent(ws.logits, label, ws.probs);
    for (int c = 0; c < k; ++c) {
      const double dlogit =
          (ws.probs[static_cast<size_t>(c)] - (c == label ? 1.0 : 0.0)) * inv_batch;
      kernels::axpy(grad + lay.w1 + static_cast<std::int64_t>(c) * d, dlogit, x,
                    static_cast<size_t>(d));
      grad[lay.b1 + c] += dlogit;
    }
    return xent;
  }

  const int h = arch.hidden_dim;
  for (int r = 0; r < h; ++r) {
    const double z = kernels::dot(w + lay.w1 + static_cast<std::int64_t>(r) * d, x,
                                  static_cast<size_t>(d)) +
                     w[lay.b1 + r];
    ws.pre_hidden[static_cast<size_t>(r)] = z;
    ws.hidden[static_cast<size_t>(r)] = z > 0.0 ? z : 0.0;
  }
  for (int c = 0; c < k; ++c)
    ws.logits[static_cast<size_t>(c)] =
        kernels::dot(w + lay.w2 + static_cast<std::int64_t>(c) * h, ws.hidden.data(),
                     static_cast<size_t>(h)) +
        w[lay.b2 + c];
  const double xent = softmax_xent(ws.logits, label, ws.probs);

  std::fill(ws.dhidden.begin(), ws.dhidden.end(), 0.0);
  for (int c = 0; c < k; ++c) {
    const double dlogit =
        (ws.probs[static_cast<size_t>(c)] - (c == label ? 1.0 : 0.0)) * inv_batch;
    kernels::axpy(grad + lay.w2 + static_cast<std::int64_t>(c) * h, dlogit, ws.hidden.data(),
                  static_cast<size_t>(h));
    grad[lay.b2 + c] += dlogit;
    kernels::axpy(ws.dhidden.data(), dlogit, w + lay.w2 + static_cast<std::int64_t>(c) * h,
                  static_cast<size_t>(h));
  }
  for (int r = 0; r < h; ++r) {
    if (ws.pre_hidden[static_cast<size_t>(r)] <= 0.0) continue;  // ReLU gate
    const double dz = ws.dhidden[static_cast<size_t>(r)];
    kernels::axpy(grad + lay.w1 + static_cast<std::int64_t>(r) * d, dz, x,
                  static_cast<size_t>(d));
    grad[lay.b1 + r] += dz;
  }
  return xent;
}

// Batch loss + gradient into preallocated grad (overwritten).
double batch_loss_grad(const ModelParams& params, const double* batch_x,
                       const std::int32_t* batch_y, int n, const ModelParams& anchor,
                       double prox_mu, double* grad, Workspace& ws) {
  const auto count = static_cast<size_t>(params.arch.param_count());
  std::fill(grad, grad + count, 0.0);
  const ParamLayout lay(params.arch);
  const double inv_batch = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    loss += forward_backward(params.arch, lay, params.values.data(),
                             batch_x + static_cast<std::int64_t>(i) * params.arch.input_dim,
                             batch_y[i], inv_batch, grad, ws) *
            inv_batch;
  }
  if (prox_mu > 0.0) {
    double dist_sq = 0.0;
    const double* w = params.values.data();
    const double* a = anchor.values.data();
    for (size_t i = 0; i < count; ++i) {
      const double diff = w[i] - a[i];
      dist_sq += diff * diff;
      grad[i] += prox_mu * diff;
    }
    loss += 0.5 * prox_mu * dist_sq;
  }
  return loss;
}

void gather_row(const data::Dataset& dataset, std::int32_t index, double* out) {
  const float* src = dataset.row(index);
  for (int f = 0; f < dataset.n_features; ++f) out[f] = static_cast<double>(src[f]);
}

}  // namespace

LossGrad loss_and_grad(const ModelParams& params, std::span<const double> batch_x,
                       std::span<const std::int32_t> batch_y, const ModelParams& anchor,
                       double prox_mu) {
  if (batch_y.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  if (params.arch != anchor.arch) throw std::invalid_argument("loss_and_grad: anchor arch mismatch");
  if (batch_x.size() != batch_y.size() * static_cast<size_t>(params.arch.input_dim))
    throw std::invalid_argument("loss_and_grad: feature/label shape mismatch");
  if (!(prox_mu >= 0.0)) throw std::invalid_argument("loss_and_grad: prox_mu must be >= 0");

  Workspace ws;
  ws.resize(params.arch);
  LossGrad out;
  out.grad.resize(static_cast<size_t>(params.arch.param_count()));
  out.loss = batch_loss_grad(params, batch_x.data(), batch_y.data(),
                             static_cast<int>(batch_y.size()), anchor, prox_mu, out.grad.data(),
                             ws);
  return out;
}

TrainResult local_train(const ModelParams& global, const ClientView& client,
                        const TrainConfig& config) {
  config.validate();
  if (client.dataset == nullptr || client.indices.empty())
    throw std::invalid_argument("local_train: client has no data");
  const data::Dataset& dataset = *client.dataset;
  if (dataset.n_features != global.arch.input_dim)
    throw std::invalid_argument("local_train: feature width mismatch");

  rng::Xoshiro256 gen(rng::derive(config.seed, "sgd"));
  std::vector<std::int32_t> order(client.indices.begin(), client.indices.end());
  const int n = static_cast<int>(order.size());
  const int batch = std::min(config.batch_size, n);

  TrainResult result;
  result.params = global;
  std::vector<double> grad(static_cast<size_t>(global.arch.param_count()));
  std::vector<double> batch_x(static_cast<size_t>(batch) *
                              static_cast<size_t>(global.arch.input_dim));
  std::vector<std::int32_t> batch_y(static_cast<size_t>(batch));
  Workspace ws;
  ws.resize(global.arch);

  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    for (size_t j = order.size(); j > 1; --j) {
      const auto k = static_cast<size_t>(gen.below(j));
      std::swap(order[j - 1], order[k]);
    }
    double epoch_loss = 0.0;
    int step = 0;
    for (int start = 0; start < n; start += batch, ++step) {
      const int nb = std::min(batch, n - start);
      for (int i = 0; i < nb; ++i) {
        gather_row(dataset, order[static_cast<size_t>(start + i)],
                   batch_x.data() + static_cast<std::int64_t>(i) * global.arch.input_dim);
        batch_y[static_cast<size_t>(i)] = dataset.labels[static_cast<size_t>(
            order[static_cast<size_t>(start + i)])];
      }
      const double loss = batch_loss_grad(result.params, batch_x.data(), batch_y.data(), nb,
                                          global, config.prox_mu, grad.data(), ws);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch, step);
      kernels::axpy(result.params.values.data(), -config.learning_rate, grad.data(),
                    grad.size());
      epoch_loss += loss * nb;
    }
    result.final_loss = epoch_loss / n;
  }
  return result;
}

double adaptive_mu(double mu_base, double compute) {
  return std::max(0.0, mu_base * (2.0 - compute));
}

EvalReport evaluate(const ModelParams& params, const data::Dataset& test) {
  if (test.n_samples == 0) throw std::invalid_argument("evaluate: empty test set");
  if (test.n_features != params.arch.input_dim || test.n_classes != params.arch.n_classes)
    throw std::invalid_argument("evaluate: dataset/arch mismatch");

  const ParamLayout lay(params.arch);
  Workspace ws;
  ws.resize(params.arch);
  std::vector<double> x(static_cast<size_t>(test.n_features));
  const double* w = params.values.data();
  const int d = params.arch.input_dim;
  const int k = params.arch.n_classes;

  std::int64_t correct = 0;
  double loss_sum = 0.0;
  for (int i = 0; i < test.n_samples; ++i) {
    gather_row(test, i, x.data());
    if (params.arch.kind == ArchKind::Logreg) {
      for (int c = 0; c < k; ++c)
        ws.logits[static_cast<size_t>(c)] =
            kernels::dot(w + lay.w1 + static_cast<std::int64_t>(c) * d, x.data(),
                         static_cast<size_t>(d)) +
            w[lay.b1 + c];
    } else {
      const int h = params.arch.hidden_dim;
      for (int r = 0; r < h; ++r) {
        const double z = kernels::dot(w + lay.w1 + static_cast<std::int64_t>(r) * d, x.data(),
                                      static_cast<size_t>(d)) +
                         w[lay.b1 + r];
        ws.hidden[static_cast<size_t>(r)] = z > 0.0 ? z : 0.0;
      }
      for (int c = 0; c < k; ++c)
        ws.logits[static_cast<size_t>(c)] =
            kernels::dot(w + lay.w2 + static_cast<std::int64_t>(c) * params.arch.hidden_dim,
                         ws.hidden.data(), static_cast<size_t>(params.arch.hidden_dim)) +
            w[lay.b2 + c];
    }
    // Strict comparison scanning upward keeps ties at the lowest index.
    int best = 0;
    for (int c = 1; c < k; ++c)
      if (ws.logits[static_cast<size_t>(c)] > ws.logits[static_cast<size_t>(best)]) best = c;
    if (best == test.labels[static_cast<size_t>(i)]) ++correct;
    loss_sum += softmax_xent(ws.logits, test.labels[static_cast<size_t>(i)], ws.probs);
  }

  EvalReport report;
  report.accuracy = static_cast<double>(correct) / test.n_samples;
  report.mean_loss = loss_sum / test.n_samples;
  return report;
}

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
  const std::string header = params.arch.descriptor() + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const size_t base = out.size();
  out.resize(base + params.values.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + base, params.values.data(), params.values.size() * 8);
  } else {
    for (size_t i = 0; i < params.values.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(params.values[i]);
      for (int b = 0; b < 8; ++b)
        out[base + i * 8 + static_cast<size_t>(b)] =
            static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return out;
}

ModelParams deserialize_params(std::span<const std::uint8_t> bytes) {
  const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
  if (newline == bytes.end())
    throw std::invalid_argument("deserialize_params: missing descriptor line");
  const std::string line(bytes.begin(), newline);
  ModelParams m;
  m.arch = Arch::from_descriptor(line);
  const size_t base = line.size() + 1;
  const auto count = static_cast<size_t>(m.arch.param_count());
  if (bytes.size() - base != count * 8)
    throw std::invalid_argument("deserialize_params: payload size mismatch");
  m.values.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(m.values.data(), bytes.data() + base, count * 8);
  } else {
    for (size_t i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b)
        bits = (bits << 8) | bytes[base + i * 8 + static_cast<size_t>(b)];
      m.values[i] = std::bit_cast<double>(bits);
    }
  }
  return m;
}

std::int64_t serialized_size_bytes(const Arch& arch) {
  return static_cast<std::int64_t>(arch.descriptor().size()) + 1 + arch.param_count() * 8;
}

double model_size_mb(const Arch& arch) {
  return static_cast<double>(serialized_size_bytes(arch)) / 1e6;
}

}  // namespace greenfed::learning
