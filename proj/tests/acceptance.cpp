// One PASS/FAIL line per acceptance criterion; exit status 1 if any gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "spherephd/cli.hpp"
#include "spherephd/formats.hpp"
#include "spherephd/irregularity.hpp"
#include "spherephd/nnops.hpp"
#include "spherephd/projection.hpp"

using namespace spherephd;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kData = SPHD_TEST_DATA_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < limit_s, "runtime " + fmt("%.1f", secs) + " s over limit " + fmt("%.0f", limit_s) + " s");
  if (!o.ok) ++failures;
  std::cout << "criterion " << id << " " << (o.ok ? "PASS" : "FAIL") << "  " << title << "  (" << fmt("%.2f", secs)
            << " s / " << fmt("%.0f", limit_s) << " s)";
  if (!o.detail.empty()) std::cout << "  " << o.detail;
  std::cout << std::endl;
}

Tensor random_tensor(int c, int n, std::uint64_t seed) {
  Tensor t({c, int(pixel_count(n))});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : t.data) v = u(rng);
  return t;
}

template <class F>
ErpImage analytic_erp(int h, int w, F f) {
  ErpImage img(h, w, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.at(r, c, 0) = f(erp_direction(h, w, r, c));
  return img;
}

bool constant(const std::vector<double>& v, double x) {
  return std::all_of(v.begin(), v.end(), [&](double y) { return y == x; });
}

Outcome mesh_invariants() {
  Outcome o;
  for (int n = 0; n <= 5; ++n) {
    const SphereMesh& m = TableCache::global().get(n)->mesh;
    std::size_t F = m.pixel_count(), V = m.vertex_count(), E = m.edge_count();
    std::string at = " at n=" + std::to_string(n);
    o.require(F == std::size_t(20) << (2 * n), "face count" + at);
    o.require(V == (std::size_t(10) << (2 * n)) + 2, "vertex count" + at);
    o.require(E == std::size_t(30) << (2 * n), "edge count" + at);
    o.require(long(V) - long(E) + long(F) == 2, "Euler characteristic" + at);
    auto deg = m.vertex_degrees();
    o.require(std::count(deg.begin(), deg.end(), 5) == 12, "degree-5 count" + at);
    o.require(std::count(deg.begin(), deg.end(), 5) + std::count(deg.begin(), deg.end(), 6) == long(V),
              "vertex degrees other than 5 or 6" + at);
    double s = 0;
    for (PixelIndex p = 0; p < F; ++p) s += m.area(p);
    o.require(std::abs(s - 4 * kPi) < 1e-9, "area sum" + at + " off by " + fmt("%.2e", s - 4 * kPi));
  }
  return o;
}

Outcome irregularity_criterion() {
  Outcome o;
  Representation reps[] = {SpherePhdRep{3}, CubeMapRep{20}, ErpRep{40, 80}};
  double score[3];
  for (int k = 0; k < 3; ++k) {
    auto res = irregularity(effective_areas(reps[k]));
    double s = 0;
    for (double d : res.d) s += d;
    o.require(std::abs(s) < 1e-9, describe(reps[k]) + " sum of d " + fmt("%.2e", s));
    score[k] = res.score;
  }
  o.require(score[0] < score[1] && score[1] < score[2], "score ordering");
  o.detail += (o.detail.empty() ? "" : "; ");
  o.detail += "scores " + fmt("%.4f", score[0]) + " < " + fmt("%.4f", score[1]) + " < " + fmt("%.4f", score[2]);

  // ERP pixels in one row share a latitude and a d value.
  const int H = 40, W = 80;
  auto res = irregularity(effective_areas(ErpRep{H, W}));
  std::vector<double> row_abs(H);
  for (int r = 0; r < H; ++r) row_abs[r] = std::abs(res.d[std::size_t(r) * W]);
  int violations = 0;
  for (int r = 0; r + 1 < H / 2; ++r)  // northern half, from the pole toward the equator
    if (!(row_abs[r] > row_abs[r + 1])) ++violations;
  for (int r = H / 2; r + 1 < H; ++r)
    if (!(row_abs[r + 1] > row_abs[r])) ++violations;
  if (violations) {
    int low = int(std::min_element(row_abs.begin(), row_abs.begin() + H / 2) - row_abs.begin());
    double lat = 90.0 - (low + 0.5) * 180.0 / H;
    o.require(false, "ERP per-latitude |d| not monotone toward the poles: " + std::to_string(violations) +
                         " of 38 steps violate it (|d| equator " + fmt("%.3f", row_abs[H / 2 - 1]) + ", minimum " +
                         fmt("%.3f", row_abs[low]) + " near lat " +
                         fmt("%.1f", lat) + ", pole " + fmt("%.3f", row_abs[0]) + ")");
  }
  return o;
}

Outcome tables_criterion() {
  Outcome o;
  for (int n = 1; n <= 3; ++n) {
    auto lt = TableCache::global().get(n);
    UnpoolTable un = build_unpool_table(n);
    TableReport rep = verify_tables(lt->mesh, *lt->conv, *lt->pool, &un);
    for (const char* name : {"conv.center", "conv.locality", "conv.oracle_equivalence", "pool.partition", "unpool.inverse"}) {
      const CheckResult* c = rep.find(name);
      o.require(c && c->passed, std::string(name) + " at n=" + std::to_string(n));
    }
    o.require(rep.all_passed(), "some table check failed at n=" + std::to_string(n));

    // scatter through the unpool table, gather through the pool table
    std::vector<double> y(un.rows()), child(pixel_count(n), -1.0);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = double(j) + 0.5;
    for (std::size_t j = 0; j < un.rows(); ++j)
      for (PixelIndex c : un.row(j)) child[c] = y[j];
    bool id = true;
    for (std::size_t j = 0; j < lt->pool->rows(); ++j)
      for (PixelIndex c : lt->pool->row(j)) id &= child[c] == y[j];
    o.require(id, "pool after unpool is not the identity at n=" + std::to_string(n));
  }
  return o;
}

Outcome gather_vs_loop() {
  Outcome o;
  const int n = 3, C = 4;
  auto lt = TableCache::global().get(n);
  const ConvTable& t = *lt->conv;
  const PoolTable& pool = *lt->pool;
  Tensor x = random_tensor(C, n, 1);
  ConvParams p(C, C);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& w : p.weights) w = u(rng);
  for (double& b : p.bias) b = u(rng);

  double worst = 0;
  Tensor y = conv_forward(x, t, p);
  for (int o_ = 0; o_ < C; ++o_)
    for (std::size_t i = 0; i < t.rows(); ++i) {
      double s = p.bias[o_];
      for (int c = 0; c < C; ++c)
        for (int k = 0; k < kConvArity; ++k) s += p.w(o_, c, k) * x(c, t.row(i)[k]);
      worst = std::max(worst, std::abs(s - y(o_, i)));
    }
  o.require(worst < 1e-6, "conv differs by " + fmt("%.2e", worst));

  double wm = 0, wa = 0;
  Tensor mx = max_pool(x, pool).y, av = avg_pool(x, pool);
  for (int c = 0; c < C; ++c)
    for (std::size_t j = 0; j < pool.rows(); ++j) {
      double best = -1e300, sum = 0;
      for (int k = 0; k < kPoolArity; ++k) {
        double v = x(c, (std::size_t(j) << 2) | k);
        best = std::max(best, v);
        sum += v;
      }
      wm = std::max(wm, std::abs(best - mx(c, j)));
      wa = std::max(wa, std::abs(sum / 4 - av(c, j)));
    }
  o.require(wm < 1e-6, "max pool differs by " + fmt("%.2e", wm));
  o.require(wa < 1e-6, "avg pool differs by " + fmt("%.2e", wa));
  o.detail = "max |diff| conv " + fmt("%.1e", worst) + ", max " + fmt("%.1e", wm) + ", avg " + fmt("%.1e", wa) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(3);
  Network net(2, 2);
  net.conv(4, rng).relu().max_pool().conv(3, rng).global_avg_pool();
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& l : net.layers())
    for (double& b : l.params.bias) b = u(rng);
  Tensor x = random_tensor(2, 2, 4);
  const int label = 2;
  auto L = [&](const Network& nn, const Tensor& xx) { return softmax_cross_entropy(nn.forward(xx).data, label).loss; };
  Network::Trace tr;
  Tensor out = net.forward(x, &tr);
  Tensor g(out.shape);
  g.data = softmax_cross_entropy(out.data, label).grad;
  auto grads = net.backward(tr, g);

  const double h = 1e-4, floor = 1e-8;
  double worst = 0;
  std::size_t checked = 0;
  auto rel = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}));
    ++checked;
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].kind != LayerKind::Conv) continue;
    for (int which = 0; which < 2; ++which) {
      std::size_t count = which ? net.layers()[l].params.bias.size() : net.layers()[l].params.weights.size();
      for (std::size_t i = 0; i < count; ++i) {
        Network np = net, nm = net;
        auto& vp = which ? np.layers()[l].params.bias : np.layers()[l].params.weights;
        auto& vm = which ? nm.layers()[l].params.bias : nm.layers()[l].params.weights;
        vp[i] += h;
        vm[i] -= h;
        double a = which ? grads.params[l].bias[i] : grads.params[l].weights[i];
        rel(a, (L(np, x) - L(nm, x)) / (2 * h));
      }
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    rel(grads.input.data[i], (L(net, xp) - L(net, xm)) / (2 * h));
  }
  o.require(worst < 1e-3, "max relative error " + fmt("%.2e", worst));
  if (o.ok) o.detail = std::to_string(checked) + " entries, max relative error " + fmt("%.2e", worst);
  return o;
}

Outcome round_trip() {
  Outcome o;
  const double v = 77.0 / 255.0;
  const SphereMesh& m3 = TableCache::global().get(3)->mesh;
  ErpImage e(40, 80, 1, v);
  CubeMap c = erp_to_cubemap(e, 20, random_rotation(1));
  o.require(constant(c.data, v), "ERP -> cube");
  SpherePhdImage s = erp_to_sphd(e, m3, random_rotation(2));
  o.require(constant(s.data, v), "ERP -> sphd");
  o.require(constant(render_sphd(make_sampler(c), 1, m3).data, v), "cube -> sphd");
  o.require(constant(sphd_to_erp(s, m3, 40, 80, 2).data, v), "sphd -> ERP");
  o.require(constant(render_cubemap(make_sampler(s, m3), 1, 20, 2).data, v), "sphd -> cube");
  o.require(constant(render_erp(make_sampler(c), 1, 40, 80, 2).data, v), "cube -> ERP");
  o.require(constant(erp_to_sphd(sphd_to_erp(s, m3, 40, 80), m3).data, v), "sphd -> ERP -> sphd");
  o.require(constant(cubemap_from_raster(cubemap_to_raster(c)).data, v), "cube -> PGM strip -> cube");
  o.require(constant(erp_from_raster(to_raster(e)).data, v), "ERP -> PGM -> ERP");

  ErpImage g = analytic_erp(80, 160, [](const Vec3& d) { return UnitVec(d).latitude() / (kPi / 2); });
  double prev = 1e300;
  std::string trace;
  for (int n : {3, 4, 5}) {
    ErpImage back = sphd_to_erp(erp_to_sphd(g, n), 80, 160, 2);
    double sq = 0;
    for (std::size_t i = 0; i < g.data.size(); ++i) sq += (g.data[i] - back.data[i]) * (g.data[i] - back.data[i]);
    double r = std::sqrt(sq / g.data.size());
    o.require(r < prev, "RMSE did not decrease at n=" + std::to_string(n));
    trace += (trace.empty() ? "" : " > ") + fmt("%.5f", r);
    prev = r;
  }
  o.detail = "latitude-gradient RMSE n=3,4,5: " + trace + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

struct Batch {
  std::vector<Tensor> x;
  std::vector<int> y;
};

Batch spherized_batch(int count, std::uint64_t seed) {
  fs::path dir = fs::temp_directory_path() / ("spherephd_acceptance_" + std::to_string(::getpid()));
  std::ostringstream out, err;
  int code = run_cli({"spherize-mnist", "--idx", (kData / "mnist-sample-images-idx3-ubyte").string(), "--labels",
                      (kData / "mnist-sample-labels-idx1-ubyte").string(), "--count", std::to_string(count), "--seed",
                      std::to_string(seed), "--out", dir.string()},
                     out, err);
  if (code != kExitOk) throw std::runtime_error("spherize-mnist failed: " + err.str());
  Batch b;
  std::ifstream csv(dir / "labels.csv");
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string file, label;
    std::getline(ss, file, ',');
    std::getline(ss, label, ',');
    auto img = read_sphi(dir / file).image;
    Tensor t({img.channels, int(img.pixels())});
    t.data = img.data;
    b.x.push_back(std::move(t));
    b.y.push_back(std::stoi(label));
  }
  fs::remove_all(dir);
  return b;
}

struct OverfitRun {
  std::vector<double> losses;
  int first_hit = -1;  // step whose pre-step training accuracy first reached 95%
  double final_accuracy = 0;
};

OverfitRun overfit(const Batch& b) {
  ClassifierConfig cfg;
  cfg.c1 = 16;
  cfg.c2 = 32;
  cfg.seed = 0;
  ReferenceClassifier net(cfg);
  OverfitRun r;
  for (int step = 0; step < 500; ++step) {
    std::size_t correct = 0;
    r.losses.push_back(net.train_step(b.x, b.y, 0.5, &correct));
    if (r.first_hit < 0 && correct >= std::size_t(std::ceil(0.95 * b.x.size()))) r.first_hit = step;
  }
  r.final_accuracy = net.accuracy(b.x, b.y);
  return r;
}

Outcome overfit_criterion() {
  Outcome o;
  Batch b = spherized_batch(32, 7);
  o.require(b.x.size() == 32, "batch has " + std::to_string(b.x.size()) + " images");
  OverfitRun a = overfit(b);
  OverfitRun c = overfit(b);
  bool reached = a.first_hit >= 0 || a.final_accuracy >= 0.95;
  o.require(reached, "training accuracy stayed below 95% (final " + fmt("%.3f", a.final_accuracy) + ")");
  o.require(a.losses == c.losses && a.final_accuracy == c.final_accuracy, "runs with the same seed differ");
  if (o.ok)
    o.detail = "95% first reached at step " + std::to_string(a.first_hit >= 0 ? a.first_hit : 500) +
               ", final training accuracy " + fmt("%.3f", a.final_accuracy) + ", loss " + fmt("%.4f", a.losses.front()) +
               " -> " + fmt("%.4f", a.losses.back()) + ", repeat run identical";
  return o;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  criterion(1, "mesh invariants n=0..5", 10, mesh_invariants);
  criterion(2, "irregularity sums, ordering and ERP latitude trend", 5, irregularity_criterion);
  criterion(3, "index tables n=1..3", 30, tables_criterion);
  criterion(4, "gather vs loop at n=3, 4 channels", 10, gather_vs_loop);
  criterion(5, "gradient check, 2-layer net at n=2", 60, gradient_check);
  criterion(6, "projection round trips", 30, round_trip);
  criterion(7, "overfit 32 spherical MNIST images in 500 SGD steps", 300, overfit_criterion);
  std::cout << "criterion 8 SKIP  full-scale MNIST run (non-gating; see README for the long-run commands)" << std::endl;
  std::cout << (failures ? "acceptance: FAIL (" + std::to_string(failures) + " gating criteria failed)"
                         : std::string("acceptance: PASS"))
            << std::endl;
  return failures ? 1 : 0;
}
