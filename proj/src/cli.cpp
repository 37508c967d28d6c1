#include "spherephd/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "spherephd/error.hpp"
#include "spherephd/formats.hpp"
#include "spherephd/geometry.hpp"
#include "spherephd/indexing.hpp"
#include "spherephd/irregularity.hpp"
#include "spherephd/nnops.hpp"
#include "spherephd/projection.hpp"

namespace fs = std::filesystem;

namespace spherephd {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_input(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("no such file: " + p.string());
}

void require_input_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw IoError("no such directory: " + p.string());
}

void prepare_output_file(const fs::path& p) {
  fs::path parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) throw IoError("output directory does not exist: " + parent.string());
}

void prepare_output_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw IoError("cannot create output directory: " + p.string());
}

// mesh-info

struct MeshInfoArgs {
  int n = 0;
};

void mesh_info(const MeshInfoArgs& a, std::ostream& out) {
  auto t = TableCache::global().get(a.n);
  const SphereMesh& m = t->mesh;
  long long f = m.pixel_count(), v = m.vertex_count(), e = m.edge_count();
  out << "faces: " << f << ", vertices: " << v << ", edges: " << e << ", euler: " << (v - e + f) << '\n';
  double lo = 1e300, hi = 0.0, sum = 0.0;
  for (PixelIndex p = 0; p < m.pixel_count(); ++p) {
    double area = m.area(p);
    lo = std::min(lo, area);
    hi = std::max(hi, area);
    sum += area;
  }
  auto deg = m.vertex_degrees();
  long deg5 = std::count(deg.begin(), deg.end(), 5);
  out << std::setprecision(10);
  out << "pixel area (sr): min " << lo << ", max " << hi << ", mean " << sum / f << ", ratio " << hi / lo << '\n';
  out << "total area (sr): " << sum << '\n';
  out << "degree-5 vertices: " << deg5 << '\n';
}

// tables

struct TablesArgs {
  int n = 1;
  fs::path out;
};

void tables(const TablesArgs& a, std::ostream& out) {
  prepare_output_dir(a.out);
  auto t = TableCache::global().get(a.n);
  ConvTable conv = *t->conv;
  PoolTable pool = *t->pool;
  UnpoolTable unpool = build_unpool_table(a.n);
  TableReport rep = verify_tables(t->mesh, conv, pool, &unpool);
  for (const auto& c : rep.checks) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.passed && c.counterexample_row) out << " (row " << *c.counterexample_row << ")";
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  if (!rep.all_passed()) throw Error("table verification failed");
  std::string suffix = "_n" + std::to_string(a.n) + ".spht";
  write_spht(a.out / ("conv" + suffix), to_spht(conv));
  write_spht(a.out / ("pool" + suffix), to_spht(pool));
  write_spht(a.out / ("unpool" + suffix), to_spht(unpool));
  out << "wrote conv, pool, unpool tables for n=" << a.n << " to " << a.out.string() << '\n';
}

// convert

struct ConvertArgs {
  std::string from, to;
  fs::path in, out;
  int n = 3;
  int height = 40, width = 80;
  int face_size = 20;
  int supersample = 1;
  std::optional<std::uint64_t> rotate_seed;
  std::vector<double> euler;  // degrees
  std::string dtype = "f32";
};

void convert(const ConvertArgs& a, std::ostream& out) {
  require_input(a.in);
  prepare_output_file(a.out);
  Rotation rot;
  if (a.rotate_seed) rot = random_rotation(*a.rotate_seed);
  if (!a.euler.empty()) rot = Rotation::from_euler(a.euler[0] * kDeg, a.euler[1] * kDeg, a.euler[2] * kDeg);

  ErpImage erp;
  CubeMap cube;
  SphiImage sphd;
  std::shared_ptr<const LevelTables> src_tables;
  Sampler sampler;
  int channels = 1;
  if (a.from == "erp") {
    erp = erp_from_raster(read_pnm(a.in));
    sampler = make_sampler(erp);
    channels = erp.channels;
  } else if (a.from == "cube") {
    cube = cubemap_from_raster(read_pnm(a.in));
    sampler = make_sampler(cube);
    channels = cube.channels;
  } else {
    sphd = read_sphi(a.in);
    src_tables = TableCache::global().get(sphd.image.subdivision);
    sampler = make_sampler(sphd.image, src_tables->mesh);
    channels = sphd.image.channels;
  }

  if (a.to == "erp") {
    write_pnm(a.out, to_raster(render_erp(sampler, channels, a.height, a.width, a.supersample, rot)));
  } else if (a.to == "cube") {
    write_pnm(a.out, cubemap_to_raster(render_cubemap(sampler, channels, a.face_size, a.supersample, rot)));
  } else {
    auto t = TableCache::global().get(a.n);
    write_sphi(a.out, render_sphd(sampler, channels, t->mesh, rot), a.dtype == "u8" ? Dtype::U8 : Dtype::F32);
  }
  out << "converted " << a.from << " -> " << a.to << ": " << a.out.string() << '\n';
}

// irregularity

struct IrregularityArgs {
  std::string rep;
  int n = 3;
  int face_size = 20;
  int height = 40, width = 80;
  int lat_bins = 36, lon_bins = 36;
  std::optional<fs::path> csv;
};

void write_irregularity_csv(std::ostream& os, const std::string& name, const IrregularityResult& r,
                            const IrregularityProfile& prof) {
  os << "representation,N,score,axis,bin,lower_deg,upper_deg,count,mean_abs_d,max_abs_d,mean_d\n";
  os << std::setprecision(12);
  double mean_abs = 0.0, max_abs = 0.0;
  for (double d : r.d) {
    mean_abs += std::abs(d);
    max_abs = std::max(max_abs, std::abs(d));
  }
  mean_abs /= r.d.size();
  auto head = [&] { os << name << ',' << r.d.size() << ',' << r.score << ','; };
  head();
  os << "all,0,-90,90," << r.d.size() << ',' << mean_abs << ',' << max_abs << ",0\n";
  auto rows = [&](const char* axis, const std::vector<Bin>& bins) {
    for (std::size_t b = 0; b < bins.size(); ++b) {
      head();
      const Bin& x = bins[b];
      os << axis << ',' << b << ',' << x.lower << ',' << x.upper << ',' << x.count << ',' << x.mean_abs_d << ','
         << x.max_abs_d << ',' << x.mean_d << '\n';
    }
  };
  rows("latitude", prof.latitude);
  rows("longitude", prof.longitude);
}

void irregularity_cmd(const IrregularityArgs& a, std::ostream& out) {
  if (a.csv) prepare_output_file(*a.csv);
  Representation rep;
  if (a.rep == "sphd") {
    rep = SpherePhdRep{a.n};
  } else if (a.rep == "cube") {
    rep = CubeMapRep{a.face_size};
  } else {
    rep = ErpRep{a.height, a.width};
  }
  auto areas = effective_areas(rep);
  auto res = irregularity(areas);
  auto prof = binned_irregularity(res.d, pixel_directions(rep), a.lat_bins, a.lon_bins);
  if (a.csv) {
    std::ofstream os(*a.csv);
    if (!os) throw IoError("cannot open for writing: " + a.csv->string());
    write_irregularity_csv(os, a.rep, res, prof);
    os.flush();
    if (!os) throw IoError("write failed: " + a.csv->string());
    out << describe(rep) << " N=" << res.d.size() << " score=" << std::setprecision(10) << res.score << '\n';
  } else {
    write_irregularity_csv(out, a.rep, res, prof);
  }
}

// spherize-mnist

struct SpherizeArgs {
  fs::path idx;
  std::optional<fs::path> labels;
  int n = 3;
  int count = -1;
  int offset = 0;
  std::uint64_t seed = 0;
  double angular_width = 60.0;  // degrees
  std::string dtype = "f32";
  fs::path out;
};

fs::path sibling_labels(const fs::path& images) {
  std::string name = images.filename().string();
  auto pos = name.find("images-idx3");
  if (pos == std::string::npos) throw UsageError("cannot derive the label file name; pass --labels");
  name.replace(pos, 11, "labels-idx1");
  return images.parent_path() / name;
}

// Uniform position and in-plane orientation for image `index` under `seed`.
StampPlacement random_placement(std::uint64_t seed, std::uint64_t index, double angular_width) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StampPlacement p;
  p.lat = std::asin(u(rng));
  p.lon = std::numbers::pi * u(rng);
  p.roll = std::numbers::pi * u(rng);
  p.angular_width = angular_width;
  return p;
}

void spherize(const SpherizeArgs& a, std::ostream& out) {
  fs::path labels_path = a.labels ? *a.labels : sibling_labels(a.idx);
  require_input(a.idx);
  require_input(labels_path);
  prepare_output_dir(a.out);
  if (!(a.angular_width > 0.0 && a.angular_width < 120.0)) throw UsageError("--angular-width must lie in (0, 120)");
  IdxImages images = read_idx_images(a.idx);
  auto labels = read_idx_labels(labels_path);
  if (labels.size() != static_cast<std::size_t>(images.count))
    throw InvalidContent("image and label files differ in count");
  if (a.offset < 0 || a.offset > images.count) throw UsageError("--offset beyond the image count");
  int count = a.count < 0 ? images.count - a.offset : std::min(a.count, images.count - a.offset);
  auto t = TableCache::global().get(a.n);
  std::ofstream csv(a.out / "labels.csv");
  if (!csv) throw IoError("cannot open labels.csv for writing");
  csv << "file,label,index,lat_deg,lon_deg,roll_deg\n" << std::setprecision(10);
  SpherePhdImage blank(a.n, 1);
  for (int k = 0; k < count; ++k) {
    int i = a.offset + k;
    StampPlacement where = random_placement(a.seed, i, a.angular_width * kDeg);
    SpherePhdImage img = gnomonic_stamp(blank, t->mesh, images.image(i), where);
    char name[32];
    std::snprintf(name, sizeof name, "img_%06d.sphi", i);
    write_sphi(a.out / name, img, a.dtype == "u8" ? Dtype::U8 : Dtype::F32);
    csv << name << ',' << int(labels[i]) << ',' << i << ',' << where.lat / kDeg << ',' << where.lon / kDeg << ','
        << where.roll / kDeg << '\n';
  }
  csv.flush();
  if (!csv) throw IoError("write failed: labels.csv");
  out << "wrote " << count << " images at n=" << a.n << " to " << a.out.string() << '\n';
}

// render-net

struct P2 {
  double x, y;
};

struct RenderNetArgs {
  fs::path in, out;
  int scale = 64;  // base-face edge length in raster pixels
  int channel = 0;
  double lo = 0.0, hi = 1.0;
};

void render_net(const RenderNetArgs& a, std::ostream& out) {
  require_input(a.in);
  prepare_output_file(a.out);
  if (a.scale < 4) throw UsageError("--scale must be at least 4");
  if (!(a.hi > a.lo)) throw UsageError("--hi must exceed --lo");
  SphiImage file = read_sphi(a.in);
  const SpherePhdImage& img = file.image;
  if (a.channel < 0 || (a.channel >= img.channels && img.channels != 3))
    throw UsageError("--channel out of range for this image");
  auto t = TableCache::global().get(img.subdivision);
  const SphereMesh& mesh = t->mesh;
  const double s = a.scale, h = s * std::sqrt(3.0) / 2;
  Raster r{static_cast<int>(std::ceil(5.5 * s)) + 1, static_cast<int>(std::ceil(3 * h)) + 1, 3, {}, {}};
  r.comments.push_back("spherephd unfolded net, n=" + std::to_string(img.subdivision));
  r.data.assign(std::size_t(r.width) * r.height * 3, 40);
  const int n = img.subdivision;
  const bool rgb = img.channels == 3;
  auto shade = [&](int ch, PixelIndex p) {
    double v = (img.at(ch, p) - a.lo) / (a.hi - a.lo);
    return static_cast<std::uint8_t>(std::clamp(std::round(255.0 * v), 0.0, 255.0));
  };
  for (PixelIndex p = 0; p < mesh.pixel_count(); ++p) {
    int base = static_cast<int>(p >> (2 * n));
    auto bary = barycentric_corners(p, n);
    std::array<P2, 3> q;
    for (int v = 0; v < 3; ++v) {
      auto xy = net_point(mesh, base, bary[v]);
      q[v] = {xy[0] * s, xy[1] * h};
    }
    std::array<std::uint8_t, 3> color;
    for (int c = 0; c < 3; ++c) color[c] = shade(rgb ? c : a.channel, p);
    int x0 = std::max(0, static_cast<int>(std::floor(std::min({q[0].x, q[1].x, q[2].x}))));
    int x1 = std::min(r.width - 1, static_cast<int>(std::ceil(std::max({q[0].x, q[1].x, q[2].x}))));
    int y0 = std::max(0, static_cast<int>(std::floor(std::min({q[0].y, q[1].y, q[2].y}))));
    int y1 = std::min(r.height - 1, static_cast<int>(std::ceil(std::max({q[0].y, q[1].y, q[2].y}))));
    auto edge = [](const P2& a, const P2& b, double x, double y) {
      return (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
    };
    double area = edge(q[0], q[1], q[2].x, q[2].y);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double cx = x + 0.5, cy = y + 0.5;
        double w0 = edge(q[1], q[2], cx, cy) / area, w1 = edge(q[2], q[0], cx, cy) / area,
               w2 = edge(q[0], q[1], cx, cy) / area;
        if (w0 < -1e-9 || w1 < -1e-9 || w2 < -1e-9) continue;
        std::copy(color.begin(), color.end(), &r.data[(std::size_t(y) * r.width + x) * 3]);
      }
  }
  write_pnm(a.out, r);
  out << "rendered " << mesh.pixel_count() << " pixels to " << a.out.string() << " (" << r.width << "x" << r.height
      << ")\n";
}

// train-demo

struct TrainArgs {
  fs::path data;
  std::optional<fs::path> eval;
  int epochs = 1;
  int batch = 64;
  double lr = 0.01;
  int c1 = 32, c2 = 64;
  std::uint64_t seed = 0;
  int limit = 0;
  std::optional<fs::path> checkpoint;
};

struct Dataset {
  std::vector<Tensor> x;
  std::vector<int> y;
  int subdivision = -1;
  int channels = 0;
};

Dataset load_dataset(const fs::path& dir, int limit) {
  require_input_dir(dir);
  require_input(dir / "labels.csv");
  std::ifstream csv(dir / "labels.csv");
  std::string line;
  if (!std::getline(csv, line) || line.rfind("file,label", 0) != 0) throw InvalidContent("labels.csv: bad header");
  Dataset d;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (limit > 0 && static_cast<int>(d.x.size()) >= limit) break;
    std::stringstream ss(line);
    std::string file, label;
    std::getline(ss, file, ',');
    std::getline(ss, label, ',');
    int y = 0;
    try {
      y = std::stoi(label);
    } catch (const std::exception&) {
      throw InvalidContent("labels.csv: bad label in line: " + line);
    }
    auto img = read_sphi(dir / file).image;
    if (d.subdivision < 0) {
      d.subdivision = img.subdivision;
      d.channels = img.channels;
    } else if (img.subdivision != d.subdivision || img.channels != d.channels) {
      throw InvalidContent("images in " + dir.string() + " differ in shape");
    }
    Tensor t({img.channels, static_cast<int>(img.pixels())});
    t.data = std::move(img.data);
    d.x.push_back(std::move(t));
    d.y.push_back(y);
  }
  if (d.x.empty()) throw InvalidContent("no images listed in " + (dir / "labels.csv").string());
  return d;
}

void train_demo(const TrainArgs& a, std::ostream& out) {
  if (a.checkpoint) prepare_output_file(*a.checkpoint);
  Dataset train = load_dataset(a.data, a.limit);
  std::optional<Dataset> test;
  if (a.eval) test = load_dataset(*a.eval, 0);
  int classes = 1 + *std::max_element(train.y.begin(), train.y.end());
  classes = std::max(classes, 10);
  for (int y : train.y)
    if (y < 0) throw InvalidContent("negative label");
  ClassifierConfig cfg{train.subdivision, train.channels, a.c1, a.c2, classes, a.seed};
  ReferenceClassifier net(cfg);
  std::mt19937_64 shuffle_rng(a.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(train.x.size());
  out << std::fixed << std::setprecision(4);
  for (int e = 1; e <= a.epochs; ++e) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < order.size(); start += a.batch) {
      std::size_t end = std::min(order.size(), start + a.batch);
      std::vector<Tensor> bx;
      std::vector<int> by;
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(train.x[order[k]]);
        by.push_back(train.y[order[k]]);
      }
      std::size_t correct = 0;
      loss_sum += net.train_step(bx, by, a.lr, &correct) * bx.size();
      hits += correct;
    }
    out << "epoch " << e << ": loss " << loss_sum / order.size() << ", accuracy "
        << static_cast<double>(hits) / order.size() << '\n';
  }
  if (test) {
    if (test->subdivision != train.subdivision || test->channels != train.channels)
      throw InvalidContent("evaluation images differ in shape from training images");
    out << "test accuracy: " << net.accuracy(test->x, test->y) << " on " << test->x.size() << " images\n";
  }
  if (a.checkpoint) {
    write_checkpoint(*a.checkpoint, net.network());
    out << "checkpoint: " << a.checkpoint->string() << '\n';
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spherephd: icosahedral spherical image toolkit"};
  app.name("spherephd");
  app.require_subcommand(1);
  app.fallthrough(false);

  const std::vector<std::string> reps = {"erp", "cube", "sphd"};
  const std::vector<std::string> dtypes = {"f32", "u8"};

  MeshInfoArgs mi;
  auto* c_mesh = app.add_subcommand("mesh-info", "Mesh counts, areas and vertex degrees");
  c_mesh->add_option("--subdivision,-n", mi.n, "Subdivision level")->required()->check(CLI::Range(0, 8));

  TablesArgs ta;
  auto* c_tables = app.add_subcommand("tables", "Compile and verify conv/pool/unpool tables as SPHT files");
  c_tables->add_option("--subdivision,-n", ta.n, "Subdivision level")->required()->check(CLI::Range(1, 8));
  c_tables->add_option("--out", ta.out, "Output directory")->required();

  ConvertArgs ca;
  auto* c_conv = app.add_subcommand("convert", "Convert between ERP, cubemap and SpherePHD images");
  c_conv->add_option("--from", ca.from, "Input representation")->required()->check(CLI::IsMember(reps));
  c_conv->add_option("--to", ca.to, "Output representation")->required()->check(CLI::IsMember(reps));
  c_conv->add_option("--in", ca.in, "Input file (PGM/PPM or SPHI)")->required();
  c_conv->add_option("--out", ca.out, "Output file (PGM/PPM or SPHI)")->required();
  c_conv->add_option("--subdivision,-n", ca.n, "SpherePHD output level")->check(CLI::Range(0, 8));
  c_conv->add_option("--height", ca.height, "ERP output height")->check(CLI::PositiveNumber);
  c_conv->add_option("--width", ca.width, "ERP output width")->check(CLI::PositiveNumber);
  c_conv->add_option("--face-size", ca.face_size, "Cubemap output face size")->check(CLI::PositiveNumber);
  c_conv->add_option("--supersample", ca.supersample, "Sub-samples per axis for ERP/cube output")
      ->check(CLI::Range(1, 16));
  auto* o_seed = c_conv->add_option("--rotate-seed", ca.rotate_seed, "Apply a random rotation drawn from this seed");
  auto* o_euler = c_conv->add_option("--euler", ca.euler, "Rotation as yaw pitch roll in degrees")->expected(3);
  o_seed->excludes(o_euler);
  c_conv->add_option("--dtype", ca.dtype, "SPHI payload type")->check(CLI::IsMember(dtypes));

  IrregularityArgs ia;
  auto* c_irr = app.add_subcommand("irregularity", "Area irregularity report as CSV");
  c_irr->add_option("--rep", ia.rep, "Representation")->required()->check(CLI::IsMember({"sphd", "cube", "erp"}));
  c_irr->add_option("--subdivision,-n", ia.n, "SpherePHD level")->check(CLI::Range(0, 8));
  c_irr->add_option("--face-size", ia.face_size, "Cubemap face size")->check(CLI::PositiveNumber);
  c_irr->add_option("--height", ia.height, "ERP height")->check(CLI::PositiveNumber);
  c_irr->add_option("--width", ia.width, "ERP width")->check(CLI::PositiveNumber);
  c_irr->add_option("--lat-bins", ia.lat_bins, "Latitude bins")->check(CLI::Range(1, 3600));
  c_irr->add_option("--lon-bins", ia.lon_bins, "Longitude bins")->check(CLI::Range(1, 3600));
  c_irr->add_option("--csv", ia.csv, "Output CSV path (default: stdout)");

  SpherizeArgs sa;
  auto* c_sph = app.add_subcommand("spherize-mnist", "Project MNIST digits onto SpherePHD images");
  c_sph->add_option("--idx", sa.idx, "IDX image file")->required();
  c_sph->add_option("--labels", sa.labels, "IDX label file (default: derived from --idx)");
  c_sph->add_option("--subdivision,-n", sa.n, "SpherePHD level")->check(CLI::Range(1, 8));
  c_sph->add_option("--count", sa.count, "Number of images (default: all)")->check(CLI::NonNegativeNumber);
  c_sph->add_option("--offset", sa.offset, "Index of the first image")->check(CLI::NonNegativeNumber);
  c_sph->add_option("--seed", sa.seed, "Seed for positions and orientations");
  c_sph->add_option("--angular-width", sa.angular_width, "Digit width in degrees");
  c_sph->add_option("--dtype", sa.dtype, "SPHI payload type")->check(CLI::IsMember(dtypes));
  c_sph->add_option("--out", sa.out, "Output directory")->required();

  RenderNetArgs ra;
  auto* c_net = app.add_subcommand("render-net", "Draw a SpherePHD image on the unfolded icosahedron net");
  c_net->add_option("--in", ra.in, "SPHI image")->required();
  c_net->add_option("--out", ra.out, "Output PPM")->required();
  c_net->add_option("--scale", ra.scale, "Base-face edge length in pixels")->check(CLI::Range(4, 4096));
  c_net->add_option("--channel", ra.channel, "Channel to draw (RGB images draw all three)");
  c_net->add_option("--lo", ra.lo, "Value drawn black");
  c_net->add_option("--hi", ra.hi, "Value drawn white");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train-demo", "Train the reference classifier on a directory of SPHI images");
  c_train->add_option("--data", tr.data, "Directory with SPHI images and labels.csv")->required();
  c_train->add_option("--eval", tr.eval, "Optional evaluation directory");
  c_train->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::Range(1, 100000));
  c_train->add_option("--batch", tr.batch, "Batch size")->check(CLI::Range(1, 1 << 20));
  c_train->add_option("--lr", tr.lr, "SGD learning rate")->check(CLI::PositiveNumber);
  c_train->add_option("--c1", tr.c1, "First conv width")->check(CLI::Range(1, 4096));
  c_train->add_option("--c2", tr.c2, "Second conv width")->check(CLI::Range(1, 4096));
  c_train->add_option("--seed", tr.seed, "Initialization and shuffling seed");
  c_train->add_option("--limit", tr.limit, "Use at most this many training images (0: all)")
      ->check(CLI::NonNegativeNumber);
  c_train->add_option("--checkpoint", tr.checkpoint, "Write trained weights (SPHT weights blocks)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string help;
    for (auto* sub : app.get_subcommands()) help = sub->help();
    err << "usage error: " << e.what() << '\n';
    if (!help.empty()) err << help;
    return kExitUsage;
  }

  try {
    if (*c_mesh) mesh_info(mi, out);
    else if (*c_tables) tables(ta, out);
    else if (*c_conv) convert(ca, out);
    else if (*c_irr) irregularity_cmd(ia, out);
    else if (*c_sph) spherize(sa, out);
    else if (*c_net) render_net(ra, out);
    else if (*c_train) train_demo(tr, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace spherephd
