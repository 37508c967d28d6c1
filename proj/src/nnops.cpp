#include "spherephd/nnops.hpp"

#include <cmath>
#include <numeric>

#include "spherephd/error.hpp"

namespace spherephd {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ShapeError(msg);
}

void require_matrix(const Tensor& x, const char* what) {
  if (x.rank() != 2) throw ShapeError(std::string(what) + " must be a C x N tensor");
}

}  // namespace

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative extent");
    n *= static_cast<std::size_t>(d);
  }
  data.assign(n, fill);
}

ConvParams::ConvParams(int cin, int cout)
    : in_channels(cin), out_channels(cout), weights(std::size_t(cin) * cout * kConvArity, 0.0), bias(cout, 0.0) {
  if (cin <= 0 || cout <= 0) throw ParameterError("channel counts must be positive");
}

ConvParams glorot_conv(int cin, int cout, std::mt19937_64& rng) {
  ConvParams p(cin, cout);
  double limit = std::sqrt(6.0 / ((cin + cout) * double(kConvArity)));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (double& w : p.weights) w = u(rng);
  return p;
}

Tensor conv_forward(const Tensor& x, const ConvTable& table, const ConvParams& p) {
  require_matrix(x, "conv input");
  const std::size_t n = table.rows();
  require(x.dim(0) == p.in_channels, "conv input channels do not match weights");
  require(static_cast<std::size_t>(x.dim(1)) == n, "conv input pixels do not match table");
  require(p.weights.size() == std::size_t(p.in_channels) * p.out_channels * kConvArity, "malformed weights");
  const int cin = p.in_channels;
  // im2col: cols[(i * 10 + k) * n + pixel]
  std::vector<double> cols(std::size_t(cin) * kConvArity * n);
  for (int i = 0; i < cin; ++i)
    for (std::size_t q = 0; q < n; ++q) {
      auto row = table.row(q);
      for (int k = 0; k < kConvArity; ++k) cols[(std::size_t(i) * kConvArity + k) * n + q] = x(i, row[k]);
    }
  Tensor y({p.out_channels, static_cast<int>(n)});
  for (int o = 0; o < p.out_channels; ++o) {
    double* out = &y.data[std::size_t(o) * n];
    std::fill(out, out + n, p.bias[o]);
    for (int ik = 0; ik < cin * kConvArity; ++ik) {
      double w = p.weights[std::size_t(o) * cin * kConvArity + ik];
      const double* c = &cols[std::size_t(ik) * n];
      for (std::size_t q = 0; q < n; ++q) out[q] += w * c[q];
    }
  }
  return y;
}

ConvGrads conv_backward(const Tensor& grad_out, const Tensor& x, const ConvTable& table, const ConvParams& p) {
  require_matrix(x, "conv input");
  require_matrix(grad_out, "conv output gradient");
  const std::size_t n = table.rows();
  require(x.dim(0) == p.in_channels && static_cast<std::size_t>(x.dim(1)) == n, "conv input shape mismatch");
  require(grad_out.dim(0) == p.out_channels && static_cast<std::size_t>(grad_out.dim(1)) == n,
          "conv gradient shape mismatch");
  const int cin = p.in_channels;
  ConvGrads g{Tensor({cin, static_cast<int>(n)}), ConvParams(cin, p.out_channels)};
  std::vector<double> gcols(std::size_t(cin) * kConvArity * n, 0.0);
  for (int o = 0; o < p.out_channels; ++o) {
    const double* go = &grad_out.data[std::size_t(o) * n];
    g.params.bias[o] = std::accumulate(go, go + n, 0.0);
    for (int i = 0; i < cin; ++i)
      for (int k = 0; k < kConvArity; ++k) {
        double w = p.w(o, i, k), acc = 0.0;
        double* gc = &gcols[(std::size_t(i) * kConvArity + k) * n];
        for (std::size_t q = 0; q < n; ++q) {
          acc += go[q] * x(i, table.row(q)[k]);
          gc[q] += w * go[q];
        }
        g.params.w(o, i, k) = acc;
      }
  }
  for (int i = 0; i < cin; ++i)
    for (std::size_t q = 0; q < n; ++q) {
      auto row = table.row(q);
      for (int k = 0; k < kConvArity; ++k) g.x(i, row[k]) += gcols[(std::size_t(i) * kConvArity + k) * n + q];
    }
  return g;
}

MaxPoolResult max_pool(const Tensor& x, const PoolTable& pool) {
  require_matrix(x, "pool input");
  const std::size_t parents = pool.rows();
  require(static_cast<std::size_t>(x.dim(1)) == parents * kPoolArity, "pool input pixels do not match table");
  const int c = x.dim(0);
  MaxPoolResult r{Tensor({c, static_cast<int>(parents)}), PoolRecord{pool.subdivision, c, {}}};
  r.record.slots.resize(std::size_t(c) * parents);
  for (int ch = 0; ch < c; ++ch)
    for (std::size_t j = 0; j < parents; ++j) {
      auto kids = pool.row(j);
      int best = 0;
      for (int s = 1; s < kPoolArity; ++s)
        if (x(ch, kids[s]) > x(ch, kids[best])) best = s;
      r.y(ch, j) = x(ch, kids[best]);
      r.record.slots[std::size_t(ch) * parents + j] = static_cast<std::uint8_t>(best);
    }
  return r;
}

Tensor max_unpool(const Tensor& y, const PoolRecord& rec, const PoolTable& pool) {
  require_matrix(y, "unpool input");
  const std::size_t parents = pool.rows();
  require(rec.subdivision == pool.subdivision, "pool record and table differ in subdivision");
  require(y.dim(0) == rec.channels && static_cast<std::size_t>(y.dim(1)) == parents &&
              rec.slots.size() == std::size_t(rec.channels) * parents,
          "unpool input does not match record");
  Tensor x({rec.channels, static_cast<int>(parents * kPoolArity)});
  for (int ch = 0; ch < rec.channels; ++ch)
    for (std::size_t j = 0; j < parents; ++j) {
      std::uint8_t s = rec.slots[std::size_t(ch) * parents + j];
      require(s < kPoolArity, "pool record slot out of range");
      x(ch, pool.row(j)[s]) = y(ch, j);
    }
  return x;
}

Tensor max_pool_backward(const Tensor& grad_y, const PoolRecord& rec, const PoolTable& pool) {
  return max_unpool(grad_y, rec, pool);
}

Tensor avg_pool(const Tensor& x, const PoolTable& pool) {
  require_matrix(x, "pool input");
  const std::size_t parents = pool.rows();
  require(static_cast<std::size_t>(x.dim(1)) == parents * kPoolArity, "pool input pixels do not match table");
  Tensor y({x.dim(0), static_cast<int>(parents)});
  for (int ch = 0; ch < x.dim(0); ++ch)
    for (std::size_t j = 0; j < parents; ++j) {
      double s = 0.0;
      for (PixelIndex k : pool.row(j)) s += x(ch, k);
      y(ch, j) = s / kPoolArity;
    }
  return y;
}

Tensor avg_pool_backward(const Tensor& grad_y, const PoolTable& pool) {
  require_matrix(grad_y, "pool gradient");
  const std::size_t parents = pool.rows();
  require(static_cast<std::size_t>(grad_y.dim(1)) == parents, "pool gradient does not match table");
  Tensor gx({grad_y.dim(0), static_cast<int>(parents * kPoolArity)});
  for (int ch = 0; ch < grad_y.dim(0); ++ch)
    for (std::size_t j = 0; j < parents; ++j)
      for (PixelIndex k : pool.row(j)) gx(ch, k) += grad_y(ch, j) / kPoolArity;
  return gx;
}

Tensor global_avg_pool(const Tensor& x) {
  require_matrix(x, "global pool input");
  require(x.dim(1) >= 1, "global pool over zero pixels");
  const std::size_t n = x.dim(1);
  Tensor y({x.dim(0)});
  for (int ch = 0; ch < x.dim(0); ++ch) {
    const double* p = &x.data[std::size_t(ch) * n];
    y.data[ch] = std::accumulate(p, p + n, 0.0) / static_cast<double>(n);
  }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& grad_y, std::size_t pixels) {
  require(grad_y.rank() == 1, "global pool gradient must be rank 1");
  Tensor gx({grad_y.dim(0), static_cast<int>(pixels)});
  for (int ch = 0; ch < grad_y.dim(0); ++ch)
    for (std::size_t i = 0; i < pixels; ++i) gx(ch, i) = grad_y.data[ch] / static_cast<double>(pixels);
  return gx;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& grad_y, const Tensor& x) {
  require(grad_y.shape == x.shape, "relu gradient shape mismatch");
  Tensor g = grad_y;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(x.data[i] > 0.0)) g.data[i] = 0.0;
  return g;
}

LossResult softmax_cross_entropy(std::span<const double> logits, int label) {
  if (logits.empty()) throw ShapeError("no logits");
  if (label < 0 || label >= static_cast<int>(logits.size())) throw ParameterError("label out of range");
  double m = *std::max_element(logits.begin(), logits.end());
  LossResult r;
  r.probabilities.resize(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (r.probabilities[i] = std::exp(logits[i] - m));
  for (double& p : r.probabilities) p /= z;
  r.loss = -(logits[label] - m - std::log(z));
  r.grad = r.probabilities;
  r.grad[label] -= 1.0;
  return r;
}

Network::Network(int input_subdivision, int input_channels)
    : input_n_(input_subdivision), input_c_(input_channels), cur_n_(input_subdivision), cur_c_(input_channels) {
  if (input_subdivision < 0 || input_subdivision > kMaxSubdivision)
    throw UnsupportedSubdivision("network input subdivision out of range");
  if (input_channels <= 0) throw ParameterError("input channels must be positive");
  tables_.resize(input_subdivision + 1);
}

const LevelTables& Network::tables(int n) const { return *tables_.at(n); }

Network& Network::conv(int out_channels, std::mt19937_64& rng) {
  if (reduced_) throw ConfigurationError("layer after global pooling");
  if (cur_n_ < 1) throw ConfigurationError("convolution needs subdivision >= 1");
  if (!tables_[cur_n_]) tables_[cur_n_] = TableCache::global().get(cur_n_);
  layers_.push_back({LayerKind::Conv, cur_n_, glorot_conv(cur_c_, out_channels, rng)});
  cur_c_ = out_channels;
  return *this;
}

Network& Network::relu() {
  if (reduced_) throw ConfigurationError("layer after global pooling");
  layers_.push_back({LayerKind::Relu, cur_n_, {}});
  return *this;
}

Network& Network::max_pool() {
  if (reduced_) throw ConfigurationError("layer after global pooling");
  if (cur_n_ < 1) throw ConfigurationError("pooling needs subdivision >= 1");
  if (!tables_[cur_n_]) tables_[cur_n_] = TableCache::global().get(cur_n_);
  layers_.push_back({LayerKind::MaxPool, cur_n_, {}});
  --cur_n_;
  return *this;
}

Network& Network::avg_pool() {
  if (reduced_) throw ConfigurationError("layer after global pooling");
  if (cur_n_ < 1) throw ConfigurationError("pooling needs subdivision >= 1");
  if (!tables_[cur_n_]) tables_[cur_n_] = TableCache::global().get(cur_n_);
  layers_.push_back({LayerKind::AvgPool, cur_n_, {}});
  --cur_n_;
  return *this;
}

Network& Network::global_avg_pool() {
  if (reduced_) throw ConfigurationError("layer after global pooling");
  layers_.push_back({LayerKind::GlobalAvgPool, cur_n_, {}});
  reduced_ = true;
  return *this;
}

Tensor Network::forward(const Tensor& x, Trace* trace) const {
  require_matrix(x, "network input");
  require(x.dim(0) == input_c_ && static_cast<std::size_t>(x.dim(1)) == pixel_count(input_n_),
          "network input shape mismatch");
  if (trace) {
    trace->inputs.assign(layers_.size(), {});
    trace->records.assign(layers_.size(), {});
  }
  Tensor cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& L = layers_[i];
    Tensor next;
    switch (L.kind) {
      case LayerKind::Conv:
        next = conv_forward(cur, *tables(L.subdivision).conv, L.params);
        break;
      case LayerKind::Relu:
        next = spherephd::relu(cur);
        break;
      case LayerKind::MaxPool: {
        auto r = spherephd::max_pool(cur, *tables(L.subdivision).pool);
        next = std::move(r.y);
        if (trace) trace->records[i] = std::move(r.record);
        break;
      }
      case LayerKind::AvgPool:
        next = spherephd::avg_pool(cur, *tables(L.subdivision).pool);
        break;
      case LayerKind::GlobalAvgPool:
        next = spherephd::global_avg_pool(cur);
        break;
    }
    if (trace) trace->inputs[i] = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Network::Gradients Network::backward(const Trace& trace, const Tensor& grad_out) const {
  require(trace.inputs.size() == layers_.size(), "trace does not match network");
  Gradients g;
  g.params.resize(layers_.size());
  Tensor cur = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& L = layers_[i];
    const Tensor& in = trace.inputs[i];
    switch (L.kind) {
      case LayerKind::Conv: {
        auto cg = conv_backward(cur, in, *tables(L.subdivision).conv, L.params);
        g.params[i] = std::move(cg.params);
        cur = std::move(cg.x);
        break;
      }
      case LayerKind::Relu:
        cur = relu_backward(cur, in);
        break;
      case LayerKind::MaxPool:
        cur = max_pool_backward(cur, trace.records[i], *tables(L.subdivision).pool);
        break;
      case LayerKind::AvgPool:
        cur = avg_pool_backward(cur, *tables(L.subdivision).pool);
        break;
      case LayerKind::GlobalAvgPool:
        cur = global_avg_pool_backward(cur, in.dim(1));
        break;
    }
  }
  g.input = std::move(cur);
  return g;
}

Network::Gradients Network::zero_gradients() const {
  Gradients g;
  g.params.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].kind == LayerKind::Conv)
      g.params[i] = ConvParams(layers_[i].params.in_channels, layers_[i].params.out_channels);
  g.input = Tensor({input_c_, static_cast<int>(pixel_count(input_n_))});
  return g;
}

void Network::accumulate(Gradients& into, const Gradients& g) {
  require(into.params.size() == g.params.size(), "gradient layouts differ");
  for (std::size_t i = 0; i < g.params.size(); ++i) {
    auto& a = into.params[i];
    const auto& b = g.params[i];
    require(a.weights.size() == b.weights.size() && a.bias.size() == b.bias.size(), "gradient layouts differ");
    for (std::size_t k = 0; k < a.weights.size(); ++k) a.weights[k] += b.weights[k];
    for (std::size_t k = 0; k < a.bias.size(); ++k) a.bias[k] += b.bias[k];
  }
  if (into.input.size() == g.input.size())
    for (std::size_t k = 0; k < g.input.size(); ++k) into.input.data[k] += g.input.data[k];
}

void Network::sgd_update(const Gradients& g, double lr) {
  require(g.params.size() == layers_.size(), "gradient layout does not match network");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].kind != LayerKind::Conv) continue;
    auto& p = layers_[i].params;
    const auto& d = g.params[i];
    require(d.weights.size() == p.weights.size(), "gradient layout does not match network");
    for (std::size_t k = 0; k < p.weights.size(); ++k) p.weights[k] -= lr * d.weights[k];
    for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= lr * d.bias[k];
  }
}

namespace {

Network make_classifier(const ClassifierConfig& cfg) {
  if (cfg.subdivision < 3) throw ConfigurationError("classifier needs subdivision >= 3 for two poolings");
  if (cfg.c1 <= 0 || cfg.c2 <= 0 || cfg.classes <= 1 || cfg.in_channels <= 0)
    throw ConfigurationError("classifier widths must be positive and classes >= 2");
  std::mt19937_64 rng(cfg.seed);
  Network net(cfg.subdivision, cfg.in_channels);
  net.conv(cfg.c1, rng).relu().max_pool();
  net.conv(cfg.c2, rng).relu().max_pool();
  net.conv(cfg.classes, rng).global_avg_pool();
  return net;
}

}  // namespace

ReferenceClassifier::ReferenceClassifier(const ClassifierConfig& cfg) : cfg_(cfg), net_(make_classifier(cfg)) {}

std::vector<double> ReferenceClassifier::logits(const Tensor& x) const { return net_.forward(x).data; }

int ReferenceClassifier::predict(const Tensor& x) const {
  auto z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double ReferenceClassifier::loss(const Tensor& x, int label) const {
  return softmax_cross_entropy(logits(x), label).loss;
}

double ReferenceClassifier::train_step(std::span<const Tensor> batch, std::span<const int> labels, double lr,
                                       std::size_t* correct) {
  if (batch.empty() || batch.size() != labels.size()) throw ShapeError("batch and labels must be non-empty and equal");
  Network::Gradients total = net_.zero_gradients();
  double loss_sum = 0.0;
  Network::Trace trace;
  if (correct) *correct = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    Tensor z = net_.forward(batch[b], &trace);
    auto l = softmax_cross_entropy(z.data, labels[b]);
    loss_sum += l.loss;
    if (correct) *correct += std::max_element(z.data.begin(), z.data.end()) - z.data.begin() == labels[b];
    Tensor gz({cfg_.classes});
    gz.data = l.grad;
    Network::accumulate(total, net_.backward(trace, gz));
  }
  net_.sgd_update(total, lr / static_cast<double>(batch.size()));
  return loss_sum / static_cast<double>(batch.size());
}

double ReferenceClassifier::accuracy(std::span<const Tensor> batch, std::span<const int> labels) const {
  if (batch.size() != labels.size()) throw ShapeError("batch and labels differ in length");
  if (batch.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) hits += predict(batch[b]) == labels[b];
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

}  // namespace spherephd
