#include "causelab/nn.hpp"

#include <cmath>
#include <sstream>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"
#include "causelab/rng.hpp"

namespace causelab {

namespace {

constexpr const char* kModelMagic = "causelab-mlp v1";

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// out[i, :] = act(in[i, :] * W^T + b) for every row i.
void dense_forward(const DenseLayer& L, const std::vector<double>& in, std::size_t n,
                   std::vector<double>& out, bool is_output) {
  out.assign(n * L.out, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = in.data() + i * L.in;
    double* z = out.data() + i * L.out;
    for (std::size_t j = 0; j < L.out; ++j) {
      const double* w = L.weights.data() + j * L.in;
      double s = L.bias[j];
      for (std::size_t k = 0; k < L.in; ++k) s += w[k] * a[k];
      z[j] = is_output ? sigmoid(s) : (s > 0.0 ? s : 0.0);
    }
  }
}

}  // namespace

Network::Network(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw Error(ErrorCategory::invalid_argument, "network needs >= 2 dims");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] == 0 || dims_[l + 1] == 0) {
      throw Error(ErrorCategory::invalid_argument, "network dims must be positive");
    }
    DenseLayer L;
    L.in = dims_[l];
    L.out = dims_[l + 1];
    L.weights.assign(L.in * L.out, 0.0);
    L.bias.assign(L.out, 0.0);
    layers_.push_back(std::move(L));
  }
}

Network Network::init(std::vector<std::size_t> dims, std::uint64_t seed) {
  Network net(std::move(dims));
  CounterRng rng(derive_key(seed, tag_of("init")));
  for (auto& L : net.layers_) {
    const double a = std::sqrt(3.0 / static_cast<double>(L.in));
    for (double& w : L.weights) w = (2.0 * rng.uniform() - 1.0) * a;
  }
  return net;
}

std::vector<std::size_t> Network::default_dims(std::size_t hidden_width) {
  return {kNumObserved, hidden_width, hidden_width, hidden_width, 2};
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& L : layers_) n += L.weights.size() + L.bias.size();
  return n;
}

double& Network::parameter(std::size_t flat) {
  for (auto& L : layers_) {
    if (flat < L.weights.size()) return L.weights[flat];
    flat -= L.weights.size();
    if (flat < L.bias.size()) return L.bias[flat];
    flat -= L.bias.size();
  }
  throw Error(ErrorCategory::invalid_argument, "parameter index out of range");
}

double Network::parameter(std::size_t flat) const {
  return const_cast<Network*>(this)->parameter(flat);
}

std::vector<double> Network::forward(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw Error(ErrorCategory::invalid_argument,
                "forward: expected " + std::to_string(input_dim()) + " features, got " +
                    std::to_string(input.size()));
  }
  std::vector<double> a(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    dense_forward(layers_[l], a, 1, next, l + 1 == layers_.size());
    a.swap(next);
  }
  return a;
}

std::string Network::serialize() const {
  std::ostringstream out;
  out << kModelMagic << "\ndims";
  for (auto d : dims_) out << ' ' << d;
  out << '\n';
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    out << "layer " << l << " weights";
    for (double w : L.weights) out << ' ' << format_double(w);
    out << "\nlayer " << l << " bias";
    for (double b : L.bias) out << ' ' << format_double(b);
    out << '\n';
  }
  return out.str();
}

Network Network::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kModelMagic) {
    throw Error(ErrorCategory::parse, "model file: bad magic line");
  }
  std::getline(in, line);
  std::istringstream dl(line);
  std::string word;
  dl >> word;
  if (word != "dims") throw Error(ErrorCategory::parse, "model file: expected dims line");
  std::vector<std::size_t> dims;
  std::size_t d;
  while (dl >> d) dims.push_back(d);
  Network net(dims);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    for (auto* vec : {&net.layers_[l].weights, &net.layers_[l].bias}) {
      if (!std::getline(in, line)) throw Error(ErrorCategory::parse, "model file: truncated");
      std::istringstream ls(line);
      std::string tag, kind;
      std::size_t idx = 0;
      ls >> tag >> idx >> kind;
      if (tag != "layer" || idx != l) throw Error(ErrorCategory::parse, "model file: bad layer line");
      std::string tok;
      std::size_t k = 0;
      while (ls >> tok) {
        if (k >= vec->size()) throw Error(ErrorCategory::parse, "model file: too many values");
        (*vec)[k++] = parse_double(tok, "model file");
      }
      if (k != vec->size()) throw Error(ErrorCategory::parse, "model file: too few values");
    }
  }
  return net;
}

void Network::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Network Network::load(const std::filesystem::path& path) { return parse(read_file(path)); }

Batch Batch::from_labels(std::span<const LabeledExample> labels) {
  Batch b;
  b.n = labels.size();
  b.inputs.reserve(b.n * kNumObserved);
  b.targets.reserve(b.n * 2);
  for (const auto& l : labels) {
    b.inputs.insert(b.inputs.end(), l.features.begin(), l.features.end());
    b.targets.push_back(l.label_lower);
    b.targets.push_back(l.label_upper);
  }
  return b;
}

namespace {

void check_batch(const Network& net, const Batch& batch) {
  if (batch.n == 0) throw Error(ErrorCategory::invalid_argument, "empty batch");
  if (batch.inputs.size() != batch.n * net.input_dim() ||
      batch.targets.size() != batch.n * net.output_dim()) {
    throw Error(ErrorCategory::invalid_argument, "batch shape does not match network");
  }
}

// activations[0] = inputs, activations[l+1] = output of layer l.
std::vector<std::vector<double>> forward_all(const Network& net, const Batch& batch) {
  const auto& layers = net.layers();
  std::vector<std::vector<double>> acts(layers.size() + 1);
  acts[0] = batch.inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    dense_forward(layers[l], acts[l], batch.n, acts[l + 1], l + 1 == layers.size());
  }
  return acts;
}

double mean_squared_error(const std::vector<double>& pred, const Batch& batch) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - batch.targets[i];
    s += r * r;
  }
  return s / static_cast<double>(batch.n);
}

}  // namespace

double loss(const Network& net, const Batch& batch) {
  check_batch(net, batch);
  return mean_squared_error(forward_all(net, batch).back(), batch);
}

GradientResult gradient(const Network& net, const Batch& batch) {
  check_batch(net, batch);
  const auto& layers = net.layers();
  const auto acts = forward_all(net, batch);
  const std::size_t n = batch.n;

  GradientResult res{Network(net.dims()), mean_squared_error(acts.back(), batch)};

  // delta = dL/d(pre-activation) of the current layer, n x out.
  const std::vector<double>& pred = acts.back();
  std::vector<double> delta(pred.size());
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    delta[i] = scale * (pred[i] - batch.targets[i]) * pred[i] * (1.0 - pred[i]);
  }

  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& L = layers[l];
    DenseLayer& G = res.grad.layers()[l];
    const std::vector<double>& a = acts[l];
    for (std::size_t i = 0; i < n; ++i) {
      const double* ai = a.data() + i * L.in;
      const double* di = delta.data() + i * L.out;
      for (std::size_t j = 0; j < L.out; ++j) {
        const double dj = di[j];
        if (dj == 0.0) continue;
        G.bias[j] += dj;
        double* gw = G.weights.data() + j * L.in;
        for (std::size_t k = 0; k < L.in; ++k) gw[k] += dj * ai[k];
      }
    }
    if (l == 0) break;
    // Back through W, then through the ReLU of the previous layer.
    std::vector<double> prev(n * L.in, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* di = delta.data() + i * L.out;
      double* pi = prev.data() + i * L.in;
      for (std::size_t j = 0; j < L.out; ++j) {
        const double dj = di[j];
        if (dj == 0.0) continue;
        const double* w = L.weights.data() + j * L.in;
        for (std::size_t k = 0; k < L.in; ++k) pi[k] += dj * w[k];
      }
      const double* ai = a.data() + i * L.in;
      for (std::size_t k = 0; k < L.in; ++k) {
        if (!(ai[k] > 0.0)) pi[k] = 0.0;
      }
    }
    delta.swap(prev);
  }
  return res;
}

const char* to_string(Optimizer o) {
  return o == Optimizer::adam ? "adam" : "gradient_descent";
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "gradient_descent" || name == "gd") return Optimizer::gradient_descent;
  throw Error(ErrorCategory::invalid_argument, "unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (iterations == 0) throw Error(ErrorCategory::invalid_argument, "iterations must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCategory::invalid_argument, "learning_rate must be finite and >= 0");
  }
}

TrainResult train(Network net, const Batch& batch, const TrainConfig& cfg) {
  cfg.validate();
  check_batch(net, batch);
  const std::size_t P = net.parameter_count();
  std::vector<double> m, v;
  if (cfg.optimizer == Optimizer::adam) {
    m.assign(P, 0.0);
    v.assign(P, 0.0);
  }
  TrainResult res;
  res.loss_trace.reserve(cfg.iterations);
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    GradientResult g = gradient(net, batch);
    if (!std::isfinite(g.loss)) {
      throw Error(ErrorCategory::diverged,
                  "training diverged at iteration " + std::to_string(it) + ": non-finite loss");
    }
    res.loss_trace.push_back(g.loss);
    std::size_t p = 0;
    b1t *= cfg.adam_beta1;
    b2t *= cfg.adam_beta2;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      DenseLayer& L = net.layers()[l];
      const DenseLayer& G = g.grad.layers()[l];
      for (auto [param, grad] : {std::pair{&L.weights, &G.weights}, std::pair{&L.bias, &G.bias}}) {
        for (std::size_t k = 0; k < param->size(); ++k, ++p) {
          const double gk = (*grad)[k];
          if (cfg.optimizer == Optimizer::gradient_descent) {
            (*param)[k] -= cfg.learning_rate * gk;
          } else {
            m[p] = cfg.adam_beta1 * m[p] + (1.0 - cfg.adam_beta1) * gk;
            v[p] = cfg.adam_beta2 * v[p] + (1.0 - cfg.adam_beta2) * gk * gk;
            const double mhat = m[p] / (1.0 - b1t);
            const double vhat = v[p] / (1.0 - b2t);
            (*param)[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
          }
        }
      }
    }
  }
  res.net = std::move(net);
  return res;
}

std::vector<std::array<double, 2>> predict_all(const Network& net) {
  if (net.input_dim() != kNumObserved || net.output_dim() != 2) {
    throw Error(ErrorCategory::invalid_argument, "predict_all needs a 15 -> 2 network");
  }
  std::vector<std::array<double, 2>> out(kNumSubpopulations);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(kNumSubpopulations); ++i) {
    const auto f = feature_values(Subpopulation::from_index(static_cast<std::uint32_t>(i)));
    const auto y = net.forward(f);
    out[i] = {y[0], y[1]};
  }
  return out;
}

namespace reference {

std::vector<std::array<double, 2>> predict_all(const Network& net) {
  std::vector<std::array<double, 2>> out;
  out.reserve(kNumSubpopulations);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) {
    const auto y = net.forward(feature_values(Subpopulation::from_index(i)));
    out.push_back({y.at(0), y.at(1)});
  }
  return out;
}

}  // namespace reference

void write_predictions(const std::filesystem::path& path,
                       std::span<const std::array<double, 2>> predictions) {
  std::ostringstream out;
  out << "index\tpred_lower\tpred_upper\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out << i << '\t' << format_double(predictions[i][0]) << '\t' << format_double(predictions[i][1])
        << '\n';
  }
  write_file(path, out.str());
}

std::vector<std::array<double, 2>> read_predictions(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line != "index\tpred_lower\tpred_upper") {
    throw Error(ErrorCategory::parse, path.string() + ":1: unexpected predictions header");
  }
  std::vector<std::array<double, 2>> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    std::istringstream ls(line);
    std::string idx, lo, hi;
    if (!std::getline(ls, idx, '\t') || !std::getline(ls, lo, '\t') || !std::getline(ls, hi)) {
      throw Error(ErrorCategory::parse, ctx + ": expected 3 columns");
    }
    if (parse_int(idx, ctx) != static_cast<std::int64_t>(out.size())) {
      throw Error(ErrorCategory::parse, ctx + ": rows must be in index order");
    }
    out.push_back({parse_double(lo, ctx), parse_double(hi, ctx)});
  }
  return out;
}

}  // namespace causelab
