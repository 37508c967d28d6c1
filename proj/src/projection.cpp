#include "spherephd/projection.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "spherephd/error.hpp"
#include "spherephd/indexing.hpp"

namespace spherephd {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(int v, const char* what) {
  if (v <= 0) throw ParameterError(std::string(what) + " must be positive");
}

void require_out(std::span<double> out, int channels) {
  if (static_cast<int>(out.size()) != channels) throw ShapeError("output span does not match channel count");
}

double clamp_index(double x, int n) { return std::clamp(x, 0.0, static_cast<double>(n - 1)); }

// Exact when a == b, so constant images stay constant.
double lerp(double a, double b, double t) { return a + t * (b - a); }

// Running mean over sub-samples; also exact on constants.
void mean_update(double& m, double v, int k) { m += (v - m) / (k + 1); }

}  // namespace

ErpImage::ErpImage(int h, int w, int c, double fill) : height(h), width(w), channels(c) {
  require_positive(h, "height");
  require_positive(w, "width");
  require_positive(c, "channels");
  data.assign(std::size_t(h) * w * c, fill);
}

CubeMap::CubeMap(int f, int c, double fill) : face_size(f), channels(c) {
  require_positive(f, "face size");
  require_positive(c, "channels");
  data.assign(std::size_t(6) * f * f * c, fill);
}

SpherePhdImage::SpherePhdImage(int n, int c, double fill) : subdivision(n), channels(c) {
  if (n < 0 || n > kMaxSubdivision) throw UnsupportedSubdivision("subdivision out of range");
  require_positive(c, "channels");
  data.assign(std::size_t(c) * spherephd::pixel_count(n), fill);
}

Rotation::Rotation(const std::array<double, 9>& m) : m_(m) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += m[i * 3 + k] * m[j * 3 + k];
      if (std::abs(d - (i == j ? 1.0 : 0.0)) > 1e-9) throw ParameterError("matrix is not orthonormal");
    }
  }
  Vec3 r0{m[0], m[1], m[2]}, r1{m[3], m[4], m[5]}, r2{m[6], m[7], m[8]};
  if (std::abs(triple(r0, r1, r2) - 1.0) > 1e-9) throw ParameterError("matrix is a reflection");
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  if (axis.norm() == 0.0) throw ParameterError("rotation axis is zero");
  Vec3 a = axis.normalized();
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Rotation r;
  r.m_ = {t * a.x * a.x + c,       t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y,
          t * a.x * a.y + s * a.z, t * a.y * a.y + c,       t * a.y * a.z - s * a.x,
          t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c};
  return r;
}

Rotation Rotation::from_euler(double yaw, double pitch, double roll) {
  return about_axis({0, 0, 1}, yaw) * about_axis({0, 1, 0}, pitch) * about_axis({1, 0, 0}, roll);
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) throw ParameterError("quaternion has zero or invalid norm");
  w /= n, x /= n, y /= n, z /= n;
  Rotation r;
  r.m_ = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return r;
}

Vec3 Rotation::apply(const Vec3& v) const {
  return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
          m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
}

Rotation Rotation::operator*(const Rotation& o) const {
  Rotation r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m_[i * 3 + k] * o.m_[k * 3 + j];
      r.m_[i * 3 + j] = s;
    }
  return r;
}

Rotation Rotation::transposed() const {
  Rotation r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m_[i * 3 + j] = m_[j * 3 + i];
  return r;
}

Rotation random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double q[4];
  do {
    for (double& v : q) v = normal(rng);
  } while (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3] < 1e-12);
  return Rotation::from_quaternion(q[0], q[1], q[2], q[3]);
}

const std::array<CubeFaceFrame, 6>& cube_face_frames() {
  static const std::array<CubeFaceFrame, 6> frames = [] {
    const std::array<std::pair<Vec3, Vec3>, 6> fu = {{{{1, 0, 0}, {0, 0, 1}},
                                                      {{-1, 0, 0}, {0, 0, 1}},
                                                      {{0, 1, 0}, {0, 0, 1}},
                                                      {{0, -1, 0}, {0, 0, 1}},
                                                      {{0, 0, 1}, {-1, 0, 0}},
                                                      {{0, 0, -1}, {1, 0, 0}}}};
    std::array<CubeFaceFrame, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = {fu[i].first, fu[i].first.cross(fu[i].second), fu[i].second};
    return out;
  }();
  return frames;
}

int cube_face_of(const Vec3& d) {
  double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
  if (ax >= ay && ax >= az) return d.x >= 0 ? 0 : 1;
  if (ay >= az) return d.y >= 0 ? 2 : 3;
  return d.z >= 0 ? 4 : 5;
}

Vec3 erp_direction(int height, int width, double row, double col) {
  double lat = kPi / 2 - (row + 0.5) * kPi / height;
  double lon = -kPi + (col + 0.5) * 2 * kPi / width;
  return UnitVec::from_lat_lon(lat, lon).vec();
}

Vec3 cube_direction(int face_size, int face, double row, double col) {
  const auto& f = cube_face_frames().at(face);
  double u = 2.0 * (col + 0.5) / face_size - 1.0;
  double v = 1.0 - 2.0 * (row + 0.5) / face_size;
  return (f.forward + f.right * u + f.up * v).normalized();
}

double gnomonic_rectangle_solid_angle(double u0, double u1, double v0, double v1) {
  auto F = [](double u, double v) { return std::atan(u * v / std::sqrt(1 + u * u + v * v)); };
  return F(u1, v1) - F(u0, v1) - F(u1, v0) + F(u0, v0);
}

void erp_sample(const ErpImage& erp, const Vec3& dir, std::span<double> out) {
  require_out(out, erp.channels);
  UnitVec u(dir);
  double row = (kPi / 2 - u.latitude()) / kPi * erp.height - 0.5;
  double col = (u.longitude() + kPi) / (2 * kPi) * erp.width - 0.5;
  row = clamp_index(row, erp.height);
  int r0 = static_cast<int>(std::floor(row));
  int r1 = std::min(r0 + 1, erp.height - 1);
  double fr = row - r0;
  double cf = std::floor(col);
  double fc = col - cf;
  int c0 = ((static_cast<int>(cf) % erp.width) + erp.width) % erp.width;
  int c1 = (c0 + 1) % erp.width;
  for (int ch = 0; ch < erp.channels; ++ch) {
    double top = lerp(erp.at(r0, c0, ch), erp.at(r0, c1, ch), fc);
    double bot = lerp(erp.at(r1, c0, ch), erp.at(r1, c1, ch), fc);
    out[ch] = lerp(top, bot, fr);
  }
}

std::vector<double> erp_sample(const ErpImage& erp, const Vec3& dir) {
  std::vector<double> out(erp.channels);
  erp_sample(erp, dir, out);
  return out;
}

void cubemap_sample(const CubeMap& cm, const Vec3& dir, std::span<double> out) {
  require_out(out, cm.channels);
  int face = cube_face_of(dir);
  const auto& f = cube_face_frames()[face];
  double depth = dir.dot(f.forward);
  double u = dir.dot(f.right) / depth, v = dir.dot(f.up) / depth;
  int n = cm.face_size;
  double col = clamp_index((u + 1) / 2 * n - 0.5, n);
  double row = clamp_index((1 - v) / 2 * n - 0.5, n);
  int r0 = static_cast<int>(std::floor(row)), c0 = static_cast<int>(std::floor(col));
  int r1 = std::min(r0 + 1, n - 1), c1 = std::min(c0 + 1, n - 1);
  double fr = row - r0, fc = col - c0;
  for (int ch = 0; ch < cm.channels; ++ch) {
    double top = lerp(cm.at(face, r0, c0, ch), cm.at(face, r0, c1, ch), fc);
    double bot = lerp(cm.at(face, r1, c0, ch), cm.at(face, r1, c1, ch), fc);
    out[ch] = lerp(top, bot, fr);
  }
}

std::vector<double> cubemap_sample(const CubeMap& cm, const Vec3& dir) {
  std::vector<double> out(cm.channels);
  cubemap_sample(cm, dir, out);
  return out;
}

void sphd_sample(const SpherePhdImage& img, const SphereMesh& mesh, const Vec3& dir, std::span<double> out) {
  if (img.subdivision != mesh.subdivision()) throw ShapeError("image and mesh subdivision differ");
  require_out(out, img.channels);
  PixelIndex p = mesh.locate(dir);
  for (int ch = 0; ch < img.channels; ++ch) out[ch] = img.at(ch, p);
}

Sampler make_sampler(const ErpImage& erp) {
  return [&erp](const Vec3& d, std::span<double> out) { erp_sample(erp, d, out); };
}

Sampler make_sampler(const CubeMap& cm) {
  return [&cm](const Vec3& d, std::span<double> out) { cubemap_sample(cm, d, out); };
}

Sampler make_sampler(const SpherePhdImage& img, const SphereMesh& mesh) {
  return [&img, &mesh](const Vec3& d, std::span<double> out) { sphd_sample(img, mesh, d, out); };
}

SpherePhdImage render_sphd(const Sampler& src, int channels, const SphereMesh& mesh, const Rotation& rot) {
  SpherePhdImage img(mesh.subdivision(), channels);
  std::vector<double> buf(channels);
  for (PixelIndex p = 0; p < mesh.pixel_count(); ++p) {
    src(rot.apply(mesh.centroid(p)), buf);
    for (int ch = 0; ch < channels; ++ch) img.at(ch, p) = buf[ch];
  }
  return img;
}

ErpImage render_erp(const Sampler& src, int channels, int height, int width, int supersample,
                    const Rotation& rot) {
  require_positive(supersample, "supersample");
  ErpImage img(height, width, channels);
  std::vector<double> buf(channels);
  const double step = 1.0 / supersample;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int a = 0, k = 0; a < supersample; ++a)
        for (int b = 0; b < supersample; ++b, ++k) {
          double rr = r - 0.5 + (a + 0.5) * step, cc = c - 0.5 + (b + 0.5) * step;
          src(rot.apply(erp_direction(height, width, rr, cc)), buf);
          for (int ch = 0; ch < channels; ++ch) mean_update(img.at(r, c, ch), buf[ch], k);
        }
  return img;
}

CubeMap render_cubemap(const Sampler& src, int channels, int face_size, int supersample, const Rotation& rot) {
  require_positive(supersample, "supersample");
  CubeMap cm(face_size, channels);
  std::vector<double> buf(channels);
  const double step = 1.0 / supersample;
  for (int f = 0; f < 6; ++f)
    for (int r = 0; r < face_size; ++r)
      for (int c = 0; c < face_size; ++c)
        for (int a = 0, k = 0; a < supersample; ++a)
          for (int b = 0; b < supersample; ++b, ++k) {
            double rr = r - 0.5 + (a + 0.5) * step, cc = c - 0.5 + (b + 0.5) * step;
            src(rot.apply(cube_direction(face_size, f, rr, cc)), buf);
            for (int ch = 0; ch < channels; ++ch) mean_update(cm.at(f, r, c, ch), buf[ch], k);
          }
  return cm;
}

SpherePhdImage erp_to_sphd(const ErpImage& erp, int n, const Rotation& rot) {
  auto tables = TableCache::global().get(n);
  return erp_to_sphd(erp, tables->mesh, rot);
}

SpherePhdImage erp_to_sphd(const ErpImage& erp, const SphereMesh& mesh, const Rotation& rot) {
  return render_sphd(make_sampler(erp), erp.channels, mesh, rot);
}

ErpImage sphd_to_erp(const SpherePhdImage& img, int height, int width, int supersample) {
  auto tables = TableCache::global().get(img.subdivision);
  return sphd_to_erp(img, tables->mesh, height, width, supersample);
}

ErpImage sphd_to_erp(const SpherePhdImage& img, const SphereMesh& mesh, int height, int width, int supersample) {
  return render_erp(make_sampler(img, mesh), img.channels, height, width, supersample);
}

CubeMap erp_to_cubemap(const ErpImage& erp, int face_size, const Rotation& rot) {
  return render_cubemap(make_sampler(erp), erp.channels, face_size, 1, rot);
}

std::optional<double> gnomonic_lookup(const PlanarImage& digit, const StampPlacement& where, const Vec3& dir) {
  if (!(where.angular_width > 0.0 && where.angular_width < 2 * kPi / 3))
    throw ParameterError("angular width must lie in (0, 120) degrees");
  if (digit.height <= 0 || digit.width <= 0) throw ShapeError("empty digit image");
  Vec3 c = UnitVec::from_lat_lon(where.lat, where.lon).vec();
  Vec3 east{-std::sin(where.lon), std::cos(where.lon), 0.0};
  Vec3 north = c.cross(east);
  double cr = std::cos(where.roll), sr = std::sin(where.roll);
  Vec3 ax = east * cr + north * sr;
  Vec3 ay = east * (-sr) + north * cr;
  Vec3 d = dir.normalized();
  double depth = d.dot(c);
  if (depth <= 0.0) return std::nullopt;
  double t = std::tan(where.angular_width / 2);
  double x = d.dot(ax) / depth / t, y = d.dot(ay) / depth / t;
  if (std::abs(x) > 1.0 || std::abs(y) > 1.0) return std::nullopt;
  double col = clamp_index((x + 1) / 2 * digit.width - 0.5, digit.width);
  double row = clamp_index((1 - y) / 2 * digit.height - 0.5, digit.height);
  int r0 = static_cast<int>(std::floor(row)), c0 = static_cast<int>(std::floor(col));
  int r1 = std::min(r0 + 1, digit.height - 1), c1 = std::min(c0 + 1, digit.width - 1);
  double fr = row - r0, fc = col - c0;
  return lerp(lerp(digit.at(r0, c0), digit.at(r0, c1), fc), lerp(digit.at(r1, c0), digit.at(r1, c1), fc), fr);
}

SpherePhdImage gnomonic_stamp(const SpherePhdImage& canvas, const SphereMesh& mesh, const PlanarImage& digit,
                              const StampPlacement& where) {
  if (canvas.subdivision != mesh.subdivision()) throw ShapeError("image and mesh subdivision differ");
  SpherePhdImage out = canvas;
  for (PixelIndex p = 0; p < mesh.pixel_count(); ++p) {
    auto v = gnomonic_lookup(digit, where, mesh.centroid(p));
    if (!v) continue;
    for (int ch = 0; ch < out.channels; ++ch) out.at(ch, p) = *v;
  }
  return out;
}

ErpImage gnomonic_stamp(const ErpImage& canvas, const PlanarImage& digit, const StampPlacement& where) {
  ErpImage out = canvas;
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c) {
      auto v = gnomonic_lookup(digit, where, erp_direction(out.height, out.width, r, c));
      if (!v) continue;
      for (int ch = 0; ch < out.channels; ++ch) out.at(r, c, ch) = *v;
    }
  return out;
}

double stamp_footprint_solid_angle(double angular_width) {
  if (!(angular_width > 0.0 && angular_width < 2 * kPi / 3))
    throw ParameterError("angular width must lie in (0, 120) degrees");
  double t = std::tan(angular_width / 2);
  return 4.0 * std::atan(t * t / std::sqrt(1 + 2 * t * t));
}

}  // namespace spherephd
