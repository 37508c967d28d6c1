#pragma once

// Reference neural operations on channel-planar SpherePHD activations
// (C x N tensors) with hand-written backward passes.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "spherephd/indexing.hpp"

namespace spherephd {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;  // row-major

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0);

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(i); }
  std::size_t size() const { return data.size(); }

  // Rank-2 access (channel, pixel).
  double& operator()(int c, std::size_t i) { return data[std::size_t(c) * shape[1] + i]; }
  double operator()(int c, std::size_t i) const { return data[std::size_t(c) * shape[1] + i]; }
};

struct ConvParams {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weights;  // [out][in][tap]
  std::vector<double> bias;     // [out]

  ConvParams() = default;
  ConvParams(int cin, int cout);

  double& w(int o, int i, int k) { return weights[(std::size_t(o) * in_channels + i) * kConvArity + k]; }
  double w(int o, int i, int k) const { return weights[(std::size_t(o) * in_channels + i) * kConvArity + k]; }
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)), fans counted over channels x taps; zero bias.
ConvParams glorot_conv(int cin, int cout, std::mt19937_64& rng);

Tensor conv_forward(const Tensor& x, const ConvTable& table, const ConvParams& p);

struct ConvGrads {
  Tensor x;
  ConvParams params;
};
ConvGrads conv_backward(const Tensor& grad_out, const Tensor& x, const ConvTable& table, const ConvParams& p);

// Argmax child slot (0..3) per (channel, parent).
struct PoolRecord {
  int subdivision = 0;  // level of the children
  int channels = 0;
  std::vector<std::uint8_t> slots;  // [channel][parent]
};

struct MaxPoolResult {
  Tensor y;
  PoolRecord record;
};
MaxPoolResult max_pool(const Tensor& x, const PoolTable& pool);
Tensor max_pool_backward(const Tensor& grad_y, const PoolRecord& rec, const PoolTable& pool);
Tensor avg_pool(const Tensor& x, const PoolTable& pool);
Tensor avg_pool_backward(const Tensor& grad_y, const PoolTable& pool);
Tensor max_unpool(const Tensor& y, const PoolRecord& rec, const PoolTable& pool);

// Shape {C}.
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_y, std::size_t pixels);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& grad_y, const Tensor& x);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
  std::vector<double> probabilities;
};
LossResult softmax_cross_entropy(std::span<const double> logits, int label);

enum class LayerKind { Conv, Relu, MaxPool, AvgPool, GlobalAvgPool };

struct Layer {
  LayerKind kind;
  int subdivision;  // level of the layer input
  ConvParams params;
};

class Network {
 public:
  Network(int input_subdivision, int input_channels);

  Network& conv(int out_channels, std::mt19937_64& rng);
  Network& relu();
  Network& max_pool();
  Network& avg_pool();
  Network& global_avg_pool();

  struct Trace {
    std::vector<Tensor> inputs;  // input of each layer
    std::vector<PoolRecord> records;  // one per layer; used by max pooling layers
  };
  struct Gradients {
    std::vector<ConvParams> params;  // one per layer; empty for layers without parameters
    Tensor input;
  };

  Tensor forward(const Tensor& x, Trace* trace = nullptr) const;
  Gradients backward(const Trace& trace, const Tensor& grad_out) const;
  Gradients zero_gradients() const;
  static void accumulate(Gradients& into, const Gradients& g);
  void sgd_update(const Gradients& g, double lr);

  int input_subdivision() const { return input_n_; }
  int input_channels() const { return input_c_; }
  int output_channels() const { return cur_c_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  const LevelTables& tables(int n) const;

  int input_n_, input_c_, cur_n_, cur_c_;
  bool reduced_ = false;
  std::vector<Layer> layers_;
  std::vector<std::shared_ptr<const LevelTables>> tables_;  // indexed by level
};

struct ClassifierConfig {
  int subdivision = 3;
  int in_channels = 1;
  int c1 = 32;
  int c2 = 64;
  int classes = 10;
  std::uint64_t seed = 0;
};

// conv+ReLU+maxpool, conv+ReLU+maxpool, conv+global average pool.
class ReferenceClassifier {
 public:
  explicit ReferenceClassifier(const ClassifierConfig& cfg);

  std::vector<double> logits(const Tensor& x) const;
  int predict(const Tensor& x) const;
  double loss(const Tensor& x, int label) const;
  // One SGD step on the batch-mean loss; returns the mean loss before the step.
  // If correct is given, it receives the number of pre-step hits in the batch.
  double train_step(std::span<const Tensor> batch, std::span<const int> labels, double lr,
                    std::size_t* correct = nullptr);
  double accuracy(std::span<const Tensor> batch, std::span<const int> labels) const;

  const ClassifierConfig& config() const { return cfg_; }
  Network& network() { return net_; }
  const Network& network() const { return net_; }

 private:
  ClassifierConfig cfg_;
  Network net_;
};

}  // namespace spherephd
