#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spherephd/error.hpp"
#include "spherephd/nnops.hpp"
#include "spherephd/projection.hpp"

using namespace spherephd;

namespace {

const LevelTables& lv(int n) { return *TableCache::global().get(n); }

Tensor random_tensor(int c, int n, std::uint64_t seed, double lo = -1, double hi = 1) {
  Tensor t({c, int(pixel_count(n))});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data) v = u(rng);
  return t;
}

ConvParams random_params(int cin, int cout, std::uint64_t seed) {
  ConvParams p(cin, cout);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : p.weights) v = u(rng);
  for (double& v : p.bias) v = u(rng);
  return p;
}

Tensor naive_conv(const Tensor& x, const ConvTable& t, const ConvParams& p) {
  Tensor y({p.out_channels, x.dim(1)});
  for (int o = 0; o < p.out_channels; ++o)
    for (std::size_t i = 0; i < t.rows(); ++i) {
      double s = p.bias[o];
      for (int c = 0; c < p.in_channels; ++c)
        for (int k = 0; k < kConvArity; ++k) s += p.w(o, c, k) * x(c, t.row(i)[k]);
      y(o, i) = s;
    }
  return y;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

bool close(double analytic, double numeric) {
  return std::abs(analytic - numeric) <= 1e-3 * (std::abs(analytic) + std::abs(numeric)) + 1e-7;
}

// Pixel map of the half-turn symmetry through the midpoint of vertices 1 and 6.
std::vector<PixelIndex> half_turn_map(const SphereMesh& m) {
  Vec3 axis = (m.vertices()[1] + m.vertices()[6]).normalized();
  Rotation q = Rotation::about_axis(axis, std::numbers::pi);
  std::vector<PixelIndex> map(m.pixel_count());
  for (PixelIndex p = 0; p < m.pixel_count(); ++p) map[p] = m.locate(q.apply(m.centroid(p)));
  return map;
}

}  // namespace

TEST_CASE("conv: identity and averaging kernels") {
  const auto& t = *lv(3).conv;
  Tensor x = random_tensor(2, 3, 1);
  ConvParams id(2, 2);
  id.w(0, 0, 0) = 1;
  id.w(1, 1, 0) = 1;
  CHECK(conv_forward(x, t, id).data == x.data);

  Tensor c({1, int(pixel_count(3))}, 0.8);
  ConvParams avg(1, 1);
  for (int k = 0; k < kConvArity; ++k) avg.w(0, 0, k) = 0.1;
  for (double v : conv_forward(c, t, avg).data) CHECK(v == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("conv: matches a direct loop") {
  for (int n : {2, 3}) {
    const auto& t = *lv(n).conv;
    Tensor x = random_tensor(3, n, 10 + n);
    ConvParams p = random_params(3, 5, 20 + n);
    Tensor a = conv_forward(x, t, p), b = naive_conv(x, t, p);
    REQUIRE(a.shape == std::vector<int>{5, int(pixel_count(n))});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data[i] - b.data[i]) < 1e-6);
  }
}

TEST_CASE("conv: backward against central differences") {
  const int n = 2;
  const auto& t = *lv(n).conv;
  Tensor x = random_tensor(2, n, 3);
  ConvParams p = random_params(2, 3, 4);
  Tensor g = random_tensor(3, n, 5);
  auto L = [&](const Tensor& xx, const ConvParams& pp) { return dot(conv_forward(xx, t, pp), g); };
  ConvGrads gr = conv_backward(g, x, t, p);
  const double h = 1e-4;
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t i = rng() % x.size();
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    CHECK(close(gr.x.data[i], (L(xp, p) - L(xm, p)) / (2 * h)));
  }
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    ConvParams pp = p, pm = p;
    pp.weights[i] += h;
    pm.weights[i] -= h;
    CHECK(close(gr.params.weights[i], (L(x, pp) - L(x, pm)) / (2 * h)));
  }
  for (std::size_t i = 0; i < p.bias.size(); ++i) {
    ConvParams pp = p, pm = p;
    pp.bias[i] += h;
    pm.bias[i] -= h;
    CHECK(close(gr.params.bias[i], (L(x, pp) - L(x, pm)) / (2 * h)));
  }
  ConvGrads z = conv_backward(Tensor(g.shape), x, t, p);
  for (double v : z.x.data) CHECK(v == 0.0);
  for (double v : z.params.weights) CHECK(v == 0.0);
}

TEST_CASE("conv: a repeated tap accumulates its gradient") {
  ConvTable t;
  t.subdivision = 1;
  for (PixelIndex i = 0; i < pixel_count(1); ++i) {
    std::array<PixelIndex, kConvArity> r{};
    r.fill(i);
    r[1] = (i + 1) % pixel_count(1);
    t.taps.insert(t.taps.end(), r.begin(), r.end());
  }
  ConvParams p = random_params(1, 1, 7);
  Tensor x = random_tensor(1, 1, 8);
  Tensor g({1, int(pixel_count(1))}, 1.0);
  ConvGrads gr = conv_backward(g, x, t, p);
  double sum_w = 0;
  for (int k = 0; k < kConvArity; ++k) sum_w += p.w(0, 0, k);
  for (double v : gr.x.data) CHECK(v == doctest::Approx(sum_w).epsilon(1e-12));
  double s = 0;
  for (double v : x.data) s += v;
  for (int k = 0; k < kConvArity; ++k) CHECK(gr.params.w(0, 0, k) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("max pooling") {
  const int n = 3;
  const PoolTable& pool = *lv(n).pool;
  Tensor c({2, int(pixel_count(n))}, 0.25);
  auto r = max_pool(c, pool);
  CHECK(r.y.shape == std::vector<int>{2, int(pixel_count(n - 1))});
  for (auto s : r.record.slots) CHECK(s == 0);
  for (double v : r.y.data) CHECK(v == 0.25);

  Tensor idx({1, int(pixel_count(n))});
  for (std::size_t i = 0; i < idx.size(); ++i) idx.data[i] = double(i);
  auto ri = max_pool(idx, pool);
  for (std::size_t j = 0; j < pixel_count(n - 1); ++j) {
    CHECK(ri.y(0, j) == double(4 * j + 3));
    CHECK(ri.record.slots[j] == 3);
  }

  Tensor x = random_tensor(3, n, 9);
  auto rx = max_pool(x, pool);
  for (int ch = 0; ch < 3; ++ch)
    for (std::size_t j = 0; j < pool.rows(); ++j) {
      double best = -1e300;
      int slot = -1;
      for (int k = 0; k < kPoolArity; ++k)
        if (x(ch, pool.row(j)[k]) > best) {
          best = x(ch, pool.row(j)[k]);
          slot = k;
        }
      CHECK(rx.y(ch, j) == best);
      CHECK(rx.record.slots[std::size_t(ch) * pool.rows() + j] == slot);
    }

  Tensor up = max_unpool(rx.y, rx.record, pool);
  CHECK(up.shape == x.shape);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < up.size(); ++i)
    if (up.data[i] != 0) {
      ++nonzero;
      CHECK(up.data[i] == x.data[i]);
    }
  CHECK(nonzero == rx.y.size());
  Tensor g = random_tensor(3, n - 1, 10);
  CHECK(max_pool_backward(g, rx.record, pool).data == max_unpool(g, rx.record, pool).data);
}

TEST_CASE("average and global pooling") {
  const int n = 3;
  const PoolTable& pool = *lv(n).pool;
  Tensor x = random_tensor(2, n, 11);
  Tensor y = avg_pool(x, pool);
  for (std::size_t j = 0; j < pool.rows(); ++j) {
    double s = 0;
    for (auto c : pool.row(j)) s += x(1, c);
    CHECK(y(1, j) == doctest::Approx(s / 4));
  }
  Tensor g = random_tensor(2, n - 1, 12);
  CHECK(dot(y, g) == doctest::Approx(dot(x, avg_pool_backward(g, pool))).epsilon(1e-12));

  Tensor gap = global_avg_pool(x);
  REQUIRE(gap.shape == std::vector<int>{2});
  double s = 0;
  for (std::size_t i = 0; i < pixel_count(n); ++i) s += x(0, i);
  CHECK(gap.data[0] == doctest::Approx(s / pixel_count(n)));
  Tensor gb = global_avg_pool_backward(Tensor({2}, 1280.0), pixel_count(n));
  for (std::size_t i = 0; i < pixel_count(n); ++i) {
    CHECK(gb(0, i) == doctest::Approx(1.0));
    CHECK(gb(1, i) == doctest::Approx(1.0));
  }
}

TEST_CASE("relu and softmax cross entropy") {
  Tensor x({1, 4});
  x.data = {-1, 0, 2, -0.5};
  CHECK(relu(x).data == std::vector<double>{0, 0, 2, 0});
  Tensor g({1, 4}, 3.0);
  CHECK(relu_backward(g, x).data == std::vector<double>{0, 0, 3, 0});

  std::vector<double> z{1.0, 2.0, 0.5};
  auto r = softmax_cross_entropy(z, 1);
  double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(0.5));
  CHECK(r.loss == doctest::Approx(lse - 2.0));
  double sg = 0;
  for (int k = 0; k < 3; ++k) {
    sg += r.grad[k];
    CHECK(r.grad[k] == doctest::Approx(r.probabilities[k] - (k == 1)));
  }
  CHECK(std::abs(sg) < 1e-15);
  auto big = softmax_cross_entropy(std::vector<double>{1000.0, 0.0}, 1);
  CHECK(big.loss == doctest::Approx(1000.0));
  CHECK_THROWS_AS(softmax_cross_entropy(z, 3), ParameterError);
}

TEST_CASE("network: gradient check through conv, relu, max pool and global pooling") {
  std::mt19937_64 rng(13);
  Network net(2, 2);
  net.conv(4, rng).relu().max_pool().conv(3, rng).global_avg_pool();
  for (auto& l : net.layers())
    if (l.kind == LayerKind::Conv)
      for (double& b : l.params.bias) b = 0.1;
  Tensor x = random_tensor(2, 2, 14);
  const int label = 1;
  auto L = [&](const Network& nn, const Tensor& xx) {
    Tensor y = nn.forward(xx);
    return softmax_cross_entropy(y.data, label).loss;
  };
  Network::Trace tr;
  Tensor y = net.forward(x, &tr);
  auto loss = softmax_cross_entropy(y.data, label);
  Tensor gy(y.shape);
  gy.data = loss.grad;
  auto grads = net.backward(tr, gy);
  const double h = 1e-4;
  int checked = 0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].kind != LayerKind::Conv) continue;
    auto& w = net.layers()[l].params.weights;
    for (std::size_t i = 0; i < w.size(); i += 3) {
      Network np = net, nm = net;
      np.layers()[l].params.weights[i] += h;
      nm.layers()[l].params.weights[i] -= h;
      CHECK(close(grads.params[l].weights[i], (L(np, x) - L(nm, x)) / (2 * h)));
      ++checked;
    }
    for (std::size_t i = 0; i < net.layers()[l].params.bias.size(); ++i) {
      Network np = net, nm = net;
      np.layers()[l].params.bias[i] += h;
      nm.layers()[l].params.bias[i] -= h;
      CHECK(close(grads.params[l].bias[i], (L(np, x) - L(nm, x)) / (2 * h)));
    }
  }
  for (std::size_t i = 0; i < x.size(); i += 7) {
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    CHECK(close(grads.input.data[i], (L(net, xp) - L(net, xm)) / (2 * h)));
  }
  CHECK(checked > 30);
}

TEST_CASE("conv responses follow the half-turn symmetry of the mesh") {
  for (int n : {2, 3}) {
    const auto& m = lv(n).mesh;
    const auto& t = *lv(n).conv;
    auto q = half_turn_map(m);
    std::size_t fixed = 0;
    for (PixelIndex p = 0; p < m.pixel_count(); ++p) fixed += q[p] == p;
    REQUIRE(fixed < m.pixel_count() / 10);
    Tensor x = random_tensor(2, n, 15);
    Tensor xq(x.shape);
    for (int c = 0; c < 2; ++c)
      for (PixelIndex p = 0; p < m.pixel_count(); ++p) xq(c, q[p]) = x(c, p);
    ConvParams pr = random_params(2, 3, 16);
    Tensor y = conv_forward(x, t, pr), yq = conv_forward(xq, t, pr);
    for (int c = 0; c < 3; ++c)
      for (PixelIndex p = 0; p < m.pixel_count(); ++p) CHECK(std::abs(yq(c, q[p]) - y(c, p)) < 1e-12);
  }
}

TEST_CASE("reference classifier: initial loss, determinism, configuration") {
  ClassifierConfig cfg;
  ReferenceClassifier a(cfg), b(cfg);
  double mean = 0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Tensor x = random_tensor(1, 3, 100 + s, 0, 1);
    auto la = a.logits(x);
    CHECK(la == b.logits(x));
    mean += a.loss(x, int(s % 10)) / 8;
  }
  CHECK(mean == doctest::Approx(std::log(10.0)).epsilon(0.1 / std::log(10.0)));
  cfg.seed = 1;
  ReferenceClassifier c(cfg);
  Tensor x = random_tensor(1, 3, 1, 0, 1);
  CHECK(c.logits(x) != a.logits(x));

  ClassifierConfig small;
  small.subdivision = 2;
  CHECK_THROWS_AS(ReferenceClassifier{small}, ConfigurationError);
  std::mt19937_64 rng;
  Network n0(0, 1);
  CHECK_THROWS_AS(n0.conv(2, rng), ConfigurationError);
  Network g(2, 1);
  g.global_avg_pool();
  CHECK_THROWS_AS(g.relu(), ConfigurationError);
  CHECK_THROWS_AS(g.conv(2, rng), ConfigurationError);
}

TEST_CASE("reference classifier: SGD steps reduce the loss on a fixed batch") {
  ClassifierConfig cfg;
  cfg.c1 = 4;
  cfg.c2 = 8;
  cfg.classes = 3;
  ReferenceClassifier net(cfg);
  std::vector<Tensor> batch;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(random_tensor(1, 3, 200 + i, 0, 1));
    labels.push_back(i % 3);
  }
  double first = net.train_step(batch, labels, 0.5);
  double last = first;
  for (int s = 0; s < 20; ++s) last = net.train_step(batch, labels, 0.5);
  CHECK(last < first);
  std::size_t correct = 99;
  net.train_step(batch, labels, 0.0, &correct);
  CHECK(correct <= batch.size());
}

TEST_CASE("glorot initialisation range") {
  std::mt19937_64 rng(2);
  ConvParams p = glorot_conv(4, 6, rng);
  double lim = std::sqrt(6.0 / ((4 + 6) * kConvArity));
  double hi = 0;
  for (double w : p.weights) {
    CHECK(std::abs(w) <= lim);
    hi = std::max(hi, std::abs(w));
  }
  CHECK(hi > 0.9 * lim);
  for (double b : p.bias) CHECK(b == 0.0);
}
