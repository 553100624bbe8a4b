#include "agl/network.hpp"

#include <algorithm>
#include <cmath>

namespace agl {

using Eigen::MatrixXd;

namespace {

// Offsets of each tensor within a hidden layer's block.
namespace ffn {
constexpr int W = 0, B = 1;
}
namespace rnn {
constexpr int W = 0, U = 1, B = 2;
}
namespace gru {
constexpr int Wz = 0, Uz = 1, Bz = 2, Wr = 3, Ur = 4, Br = 5, Wh = 6, Uh = 7, Bh = 8;
}

std::size_t layer_base(const NetworkConfig& c, int layer) {
  return static_cast<std::size_t>(layer * tensors_per_layer(c.architecture));
}

std::size_t readout_index(const NetworkConfig& c) { return layer_base(c, c.depth); }

MatrixXd block_mask(int neurons, int laminations) {
  const int width = neurons / laminations;
  MatrixXd mask = MatrixXd::Zero(neurons, neurons);
  for (int ch = 0; ch < laminations; ++ch) mask.block(ch * width, ch * width, width, width).setOnes();
  return mask;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd sigmoid(const MatrixXd& m) {
  return m.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

MatrixXd relu_grad_mask(const MatrixXd& pre) {
  return pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

void add_bias(MatrixXd& m, const MatrixXd& bias) { m.colwise() += bias.col(0); }

/// Step inputs for a batch: one (step_width x batch) matrix per step.
std::vector<MatrixXd> gather_steps(const NetworkConfig& c, std::span<const EncodedExample* const> batch) {
  if (batch.empty()) throw InputError("batch is empty");
  const int steps = c.steps();
  const int width = c.input_width();
  const auto n = static_cast<Eigen::Index>(batch.size());
  std::vector<MatrixXd> xs(static_cast<std::size_t>(steps), MatrixXd(width, n));
  for (Eigen::Index b = 0; b < n; ++b) {
    const EncodedExample& e = *batch[static_cast<std::size_t>(b)];
    if (e.steps != steps || e.step_width != width ||
        e.features.size() != static_cast<std::size_t>(steps * width)) {
      throw InputError("example encoding (" + std::to_string(e.steps) + " steps of width " +
                       std::to_string(e.step_width) + ") does not match network input (" + std::to_string(steps) +
                       " steps of width " + std::to_string(width) + ")");
    }
    for (int t = 0; t < steps; ++t) {
      xs[static_cast<std::size_t>(t)].col(b) =
          Eigen::Map<const Eigen::VectorXd>(e.features.data() + static_cast<std::size_t>(t * width), width);
    }
  }
  return xs;
}

std::vector<const EncodedExample*> pointers(std::span<const EncodedExample> batch) {
  std::vector<const EncodedExample*> out;
  out.reserve(batch.size());
  for (const auto& e : batch) out.push_back(&e);
  return out;
}

/// Activations kept for the backward pass.
struct Cache {
  // [layer][step]; FFN uses a single step.
  std::vector<std::vector<MatrixXd>> input;
  std::vector<std::vector<MatrixXd>> pre;      // FFN/RNN pre-activation, GRU candidate pre-activation
  std::vector<std::vector<MatrixXd>> state;    // layer output h_t
  std::vector<std::vector<MatrixXd>> update;   // GRU z
  std::vector<std::vector<MatrixXd>> reset;    // GRU r
  std::vector<std::vector<MatrixXd>> cand;     // GRU candidate
  MatrixXd top;
  Eigen::RowVectorXd prob;
};

/// Runs the network and fills the cache. The RNN/GRU initial state is zero.
void run_forward(const Parameters& p, std::vector<MatrixXd> xs, Cache& cache) {
  const NetworkConfig& c = p.config;
  const auto n = xs.front().cols();
  const int steps = static_cast<int>(xs.size());
  const auto L = static_cast<std::size_t>(c.depth);
  cache.input.assign(L, {});
  cache.pre.assign(L, {});
  cache.state.assign(L, {});
  cache.update.assign(L, {});
  cache.reset.assign(L, {});
  cache.cand.assign(L, {});
  for (int l = 0; l < c.depth; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    const std::size_t base = layer_base(c, l);
    auto T = [&](int off) -> const MatrixXd& { return p.tensors[base + static_cast<std::size_t>(off)].value; };
    cache.input[lu] = xs;
    MatrixXd h = MatrixXd::Zero(c.neurons, n);
    for (int t = 0; t < steps; ++t) {
      const MatrixXd& x = xs[static_cast<std::size_t>(t)];
      switch (c.architecture) {
        case Architecture::FFN: {
          MatrixXd z = T(ffn::W) * x;
          add_bias(z, T(ffn::B));
          h = z.cwiseMax(0.0);
          cache.pre[lu].push_back(std::move(z));
          break;
        }
        case Architecture::RNN: {
          MatrixXd z = T(rnn::W) * x + T(rnn::U) * h;
          add_bias(z, T(rnn::B));
          h = z.cwiseMax(0.0);
          cache.pre[lu].push_back(std::move(z));
          break;
        }
        case Architecture::GRU: {
          MatrixXd az = T(gru::Wz) * x + T(gru::Uz) * h;
          add_bias(az, T(gru::Bz));
          MatrixXd ar = T(gru::Wr) * x + T(gru::Ur) * h;
          add_bias(ar, T(gru::Br));
          MatrixXd z = sigmoid(az);
          MatrixXd r = sigmoid(ar);
          MatrixXd ah = T(gru::Wh) * x + T(gru::Uh) * r.cwiseProduct(h);
          add_bias(ah, T(gru::Bh));
          MatrixXd hc = c.gru_candidate == Candidate::Tanh ? MatrixXd(ah.array().tanh()) : MatrixXd(ah.cwiseMax(0.0));
          h = (1.0 - z.array()) * h.array() + z.array() * hc.array();
          cache.update[lu].push_back(std::move(z));
          cache.reset[lu].push_back(std::move(r));
          cache.cand[lu].push_back(std::move(hc));
          cache.pre[lu].push_back(std::move(ah));
          break;
        }
      }
      cache.state[lu].push_back(h);
    }
    xs = cache.state[lu];
  }
  cache.top = cache.state.back().back();
  const std::size_t ro = readout_index(c);
  Eigen::RowVectorXd logit = p.tensors[ro].value * cache.top;
  logit.array() += p.tensors[ro + 1].value(0, 0);
  cache.prob = logit.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::FFN: return "FFN";
    case Architecture::RNN: return "RNN";
    case Architecture::GRU: return "GRU";
  }
  return "?";
}

std::string_view to_string(Candidate c) { return c == Candidate::Tanh ? "tanh" : "relu"; }

Architecture parse_architecture(std::string_view name) {
  for (auto a : {Architecture::FFN, Architecture::RNN, Architecture::GRU}) {
    if (to_string(a) == name) return a;
  }
  throw ParameterError("unknown architecture: " + std::string(name));
}

Candidate parse_candidate(std::string_view name) {
  if (name == "tanh") return Candidate::Tanh;
  if (name == "relu") return Candidate::Relu;
  throw ParameterError("unknown GRU candidate activation: " + std::string(name));
}

void NetworkConfig::validate() const {
  if (neurons < 1) throw ParameterError("neurons must be positive");
  if (depth < 1) throw ParameterError("depth must be positive");
  if (laminations < 1) throw ParameterError("laminations must be positive");
  if (neurons % laminations != 0) {
    throw ParameterError("neurons (" + std::to_string(neurons) + ") not divisible by laminations (" +
                         std::to_string(laminations) + ")");
  }
  if (window < 1 || window > kFullWindow) throw ParameterError("window must be in 1..12");
  if (architecture == Architecture::FFN && window != kFullWindow) {
    throw ParameterError("FFN input window is fixed at 12");
  }
}

int tensors_per_layer(Architecture arch) {
  switch (arch) {
    case Architecture::FFN: return 2;
    case Architecture::RNN: return 3;
    case Architecture::GRU: return 9;
  }
  return 0;
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.value.size());
  return n;
}

Parameters init_network(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Parameters p;
  p.config = config;
  const int H = config.neurons;
  const bool laminated = config.laminations > 1;
  for (int l = 0; l < config.depth; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    const int in = l == 0 ? config.input_width() : H;
    // Inputs feed every channel; deeper inputs and recurrent weights stay
    // within their channel.
    auto input_weights = [&](const std::string& name) {
      Tensor t{prefix + name, MatrixXd(H, in), {}};
      if (laminated && l > 0) t.mask = block_mask(H, config.laminations);
      return t;
    };
    auto recurrent_weights = [&](const std::string& name) {
      Tensor t{prefix + name, MatrixXd(H, H), {}};
      if (laminated) t.mask = block_mask(H, config.laminations);
      return t;
    };
    auto bias = [&](const std::string& name) { return Tensor{prefix + name, MatrixXd::Zero(H, 1), {}}; };
    switch (config.architecture) {
      case Architecture::FFN:
        p.tensors.push_back(input_weights("W"));
        p.tensors.push_back(bias("b"));
        break;
      case Architecture::RNN:
        p.tensors.push_back(input_weights("W"));
        p.tensors.push_back(recurrent_weights("U"));
        p.tensors.push_back(bias("b"));
        break;
      case Architecture::GRU:
        for (const char* gate : {"z", "r", "h"}) {
          p.tensors.push_back(input_weights(std::string("W") + gate));
          p.tensors.push_back(recurrent_weights(std::string("U") + gate));
          p.tensors.push_back(bias(std::string("b") + gate));
        }
        break;
    }
  }
  p.tensors.push_back(Tensor{"readout.W", MatrixXd(1, H), {}});
  p.tensors.push_back(Tensor{"readout.b", MatrixXd::Zero(1, 1), {}});

  Rng rng(seed);
  for (auto& t : p.tensors) {
    const bool is_bias = t.name[t.name.rfind('.') + 1] == 'b';
    if (is_bias) continue;
    const double fan_in = t.masked() ? t.mask.row(0).sum() : static_cast<double>(t.value.cols());
    const double limit = std::sqrt(1.0 / fan_in);
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index col = 0; col < t.value.cols(); ++col) t.value(r, col) = rng.uniform_real(-limit, limit);
    }
  }
  apply_masks(p);
  return p;
}

void apply_masks(Parameters& params) {
  for (auto& t : params.tensors) {
    if (t.masked()) t.value = t.value.cwiseProduct(t.mask);
  }
}

std::vector<double> forward_batch(const Parameters& params, std::span<const EncodedExample* const> batch) {
  Cache cache;
  run_forward(params, gather_steps(params.config, batch), cache);
  return std::vector<double>(cache.prob.data(), cache.prob.data() + cache.prob.size());
}

std::vector<double> forward_batch(const Parameters& params, std::span<const EncodedExample> batch) {
  const auto ptrs = pointers(batch);
  return forward_batch(params, std::span<const EncodedExample* const>(ptrs));
}

double forward(const Parameters& params, const EncodedExample& example) {
  const EncodedExample* one[] = {&example};
  return forward_batch(params, std::span<const EncodedExample* const>(one)).front();
}

double loss_bce(double p, double y) {
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

BackwardResult backward(const Parameters& params, std::span<const EncodedExample* const> batch) {
  const NetworkConfig& c = params.config;
  Cache cache;
  run_forward(params, gather_steps(c, batch), cache);
  const auto n = static_cast<Eigen::Index>(batch.size());

  BackwardResult result;
  Gradients& g = result.gradients;
  g.reserve(params.tensors.size());
  for (const auto& t : params.tensors) g.push_back(MatrixXd::Zero(t.value.rows(), t.value.cols()));

  // d(mean BCE)/d(logit) = (p - y) / n for a sigmoid output.
  Eigen::RowVectorXd dlogit(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double y = batch[static_cast<std::size_t>(b)]->target;
    const double p = cache.prob(b);
    result.loss += loss_bce(p, y);
    dlogit(b) = (p - y) / static_cast<double>(n);
  }
  result.loss /= static_cast<double>(n);

  const std::size_t ro = readout_index(c);
  g[ro] = dlogit * cache.top.transpose();
  g[ro + 1](0, 0) = dlogit.sum();
  const MatrixXd d_top = params.tensors[ro].value.transpose() * dlogit;

  const int steps = c.steps();
  // Gradient w.r.t. the current layer's output at each step.
  std::vector<MatrixXd> d_out(static_cast<std::size_t>(steps), MatrixXd::Zero(c.neurons, n));
  d_out.back() = d_top;

  for (int l = c.depth - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    const std::size_t base = layer_base(c, l);
    auto W = [&](int off) -> const MatrixXd& { return params.tensors[base + static_cast<std::size_t>(off)].value; };
    auto G = [&](int off) -> MatrixXd& { return g[base + static_cast<std::size_t>(off)]; };
    std::vector<MatrixXd> d_in(static_cast<std::size_t>(steps));
    MatrixXd carry = MatrixXd::Zero(c.neurons, n);
    for (int t = steps - 1; t >= 0; --t) {
      const auto tu = static_cast<std::size_t>(t);
      const MatrixXd& x = cache.input[lu][tu];
      const MatrixXd dh = d_out[tu] + carry;
      switch (c.architecture) {
        case Architecture::FFN: {
          const MatrixXd dz = dh.cwiseProduct(relu_grad_mask(cache.pre[lu][tu]));
          G(ffn::W).noalias() += dz * x.transpose();
          G(ffn::B) += dz.rowwise().sum();
          d_in[tu] = W(ffn::W).transpose() * dz;
          break;
        }
        case Architecture::RNN: {
          const MatrixXd dz = dh.cwiseProduct(relu_grad_mask(cache.pre[lu][tu]));
          G(rnn::W).noalias() += dz * x.transpose();
          if (t > 0) G(rnn::U).noalias() += dz * cache.state[lu][tu - 1].transpose();
          G(rnn::B) += dz.rowwise().sum();
          d_in[tu] = W(rnn::W).transpose() * dz;
          carry = W(rnn::U).transpose() * dz;
          break;
        }
        case Architecture::GRU: {
          const MatrixXd h_prev = t > 0 ? cache.state[lu][tu - 1] : MatrixXd::Zero(c.neurons, n);
          const MatrixXd& z = cache.update[lu][tu];
          const MatrixXd& r = cache.reset[lu][tu];
          const MatrixXd& hc = cache.cand[lu][tu];
          const MatrixXd dz = dh.cwiseProduct(hc - h_prev);
          const MatrixXd dhc = dh.cwiseProduct(z);
          MatrixXd dh_prev = dh.array() * (1.0 - z.array());
          MatrixXd dah;
          if (c.gru_candidate == Candidate::Tanh) {
            dah = dhc.array() * (1.0 - hc.array().square());
          } else {
            dah = dhc.cwiseProduct(relu_grad_mask(cache.pre[lu][tu]));
          }
          const MatrixXd rh = r.cwiseProduct(h_prev);
          G(gru::Wh).noalias() += dah * x.transpose();
          G(gru::Uh).noalias() += dah * rh.transpose();
          G(gru::Bh) += dah.rowwise().sum();
          const MatrixXd drh = W(gru::Uh).transpose() * dah;
          d_in[tu] = W(gru::Wh).transpose() * dah;
          dh_prev += drh.cwiseProduct(r);
          const MatrixXd dar = drh.cwiseProduct(h_prev).array() * r.array() * (1.0 - r.array());
          G(gru::Wr).noalias() += dar * x.transpose();
          G(gru::Ur).noalias() += dar * h_prev.transpose();
          G(gru::Br) += dar.rowwise().sum();
          d_in[tu].noalias() += W(gru::Wr).transpose() * dar;
          dh_prev.noalias() += W(gru::Ur).transpose() * dar;
          const MatrixXd daz = dz.array() * z.array() * (1.0 - z.array());
          G(gru::Wz).noalias() += daz * x.transpose();
          G(gru::Uz).noalias() += daz * h_prev.transpose();
          G(gru::Bz) += daz.rowwise().sum();
          d_in[tu].noalias() += W(gru::Wz).transpose() * daz;
          dh_prev.noalias() += W(gru::Uz).transpose() * daz;
          carry = std::move(dh_prev);
          break;
        }
      }
    }
    d_out = std::move(d_in);
  }

  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (params.tensors[i].masked()) g[i] = g[i].cwiseProduct(params.tensors[i].mask);
  }
  return result;
}

BackwardResult backward(const Parameters& params, std::span<const EncodedExample> batch) {
  const auto ptrs = pointers(batch);
  return backward(params, std::span<const EncodedExample* const>(ptrs));
}

OptimizerState OptimizerState::zeros_like(const Parameters& params, double learning_rate, double momentum) {
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  for (const auto& t : params.tensors) s.velocity.push_back(MatrixXd::Zero(t.value.rows(), t.value.cols()));
  return s;
}

void momentum_step(Parameters& params, const Gradients& grads, OptimizerState& state) {
  if (grads.size() != params.tensors.size() || state.velocity.size() != params.tensors.size()) {
    throw InputError("gradient / velocity count does not match parameters");
  }
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    MatrixXd& v = state.velocity[i];
    v = state.momentum * v + grads[i];
    params.tensors[i].value -= state.learning_rate * v;
  }
  apply_masks(params);
}

}  // namespace agl
