#include "spherephd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "spherephd/error.hpp"

namespace spherephd {

namespace {

std::uint64_t edge_key(VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

double longitude_0_2pi(const Vec3& v) {
  double lon = std::atan2(v.y, v.x);
  if (lon < 0.0) lon += 2.0 * std::numbers::pi;
  return lon;
}

}  // namespace

PixelPath decode(PixelIndex idx, int subdivision) {
  if (subdivision < 0 || subdivision > kMaxSubdivision || idx >= spherephd::pixel_count(subdivision)) {
    throw IndexOutOfRange("pixel index " + std::to_string(idx) + " out of range at subdivision " +
                          std::to_string(subdivision));
  }
  PixelPath path;
  path.base_face = static_cast<int>(idx >> (2 * subdivision));
  path.codes.resize(subdivision);
  for (int k = 0; k < subdivision; ++k) {
    path.codes[k] = static_cast<std::uint8_t>((idx >> (2 * (subdivision - 1 - k))) & 3u);
  }
  return path;
}

PixelIndex encode(const PixelPath& path) {
  if (path.base_face < 0 || path.base_face >= kBaseFaces ||
      path.codes.size() > static_cast<std::size_t>(kMaxSubdivision)) {
    throw IndexOutOfRange("invalid pixel path");
  }
  PixelIndex idx = static_cast<PixelIndex>(path.base_face);
  for (auto code : path.codes) {
    if (code > 3) throw IndexOutOfRange("child code " + std::to_string(code) + " out of range");
    idx = (idx << 2) | code;
  }
  return idx;
}

SphereMesh SphereMesh::icosahedron() {
  SphereMesh mesh;
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  const double deg = std::numbers::pi / 180.0;

  // 0: north pole, 1-5: upper ring, 6-10: lower ring, 11: south pole.
  // Ring longitudes are offset so that no face centroid falls on the +-180 or
  // 0/360 longitude cut, which keeps the per-band ordering unambiguous.
  mesh.vertices_.push_back({0.0, 0.0, 1.0});
  for (int k = 0; k < 5; ++k) {
    const double lon = (18.0 + 72.0 * k) * deg;
    mesh.vertices_.push_back({r * std::cos(lon), r * std::sin(lon), z});
  }
  for (int k = 0; k < 5; ++k) {
    const double lon = (54.0 + 72.0 * k) * deg;
    mesh.vertices_.push_back({r * std::cos(lon), r * std::sin(lon), -z});
  }
  mesh.vertices_.push_back({0.0, 0.0, -1.0});

  auto upper = [](int k) { return static_cast<VertexId>(1 + (k % 5)); };
  auto lower = [](int k) { return static_cast<VertexId>(6 + (k % 5)); };

  struct Entry {
    Face face;
    Orientation orientation;
    BaseFaceInfo info;
  };
  std::vector<Entry> north, band, south;
  for (int k = 0; k < 5; ++k) {
    north.push_back({{0, upper(k), upper(k + 1)}, Orientation::Up, {Band::NorthCap, k, false}});
    band.push_back({{lower(k), upper(k + 1), upper(k)}, Orientation::Down, {Band::Equatorial, k, true}});
    band.push_back({{upper(k + 1), lower(k), lower(k + 1)}, Orientation::Up, {Band::Equatorial, k, false}});
    south.push_back({{11, lower(k + 1), lower(k)}, Orientation::Down, {Band::SouthCap, k, false}});
  }

  auto centroid_lon = [&](const Entry& e) {
    const auto& v = mesh.vertices_;
    return longitude_0_2pi(v[e.face[0]] + v[e.face[1]] + v[e.face[2]]);
  };
  auto by_lon = [&](const Entry& a, const Entry& b) { return centroid_lon(a) < centroid_lon(b); };
  std::sort(north.begin(), north.end(), by_lon);
  std::sort(band.begin(), band.end(), by_lon);
  std::sort(south.begin(), south.end(), by_lon);

  mesh.levels_.emplace_back();
  mesh.orient_.emplace_back();
  int f = 0;
  for (const auto* group : {&north, &band, &south}) {
    for (const auto& e : *group) {
      mesh.levels_[0].push_back(e.face);
      mesh.orient_[0].push_back(e.orientation);
      mesh.base_info_[f++] = e.info;
    }
  }
  mesh.build_adjacency();
  return mesh;
}

SphereMesh SphereMesh::build(int n) {
  if (n < 0 || n > kMaxSubdivision) {
    throw UnsupportedSubdivision("subdivision " + std::to_string(n) + " outside [0, " +
                                 std::to_string(kMaxSubdivision) + "]");
  }
  SphereMesh mesh = icosahedron();
  for (int k = 0; k < n; ++k) mesh = mesh.subdivided();
  return mesh;
}

SphereMesh SphereMesh::subdivided() const {
  if (subdivision() >= kMaxSubdivision) {
    throw UnsupportedSubdivision("cannot subdivide beyond level " + std::to_string(kMaxSubdivision));
  }
  SphereMesh out;
  out.vertices_ = vertices_;
  out.levels_ = levels_;
  out.orient_ = orient_;
  out.base_info_ = base_info_;

  const auto& parents = levels_.back();
  const auto& parent_orient = orient_.back();
  out.vertices_.reserve(vertices_.size() + edge_count());
  std::unordered_map<std::uint64_t, VertexId> midpoints;
  midpoints.reserve(edge_count());
  auto midpoint = [&](VertexId a, VertexId b) {
    auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), 0);
    if (inserted) {
      it->second = static_cast<VertexId>(out.vertices_.size());
      out.vertices_.push_back((out.vertices_[a] + out.vertices_[b]).normalized());
    }
    return it->second;
  };

  std::vector<Face> children;
  std::vector<Orientation> child_orient;
  children.reserve(parents.size() * 4);
  child_orient.reserve(parents.size() * 4);
  for (std::size_t p = 0; p < parents.size(); ++p) {
    const auto [v0, v1, v2] = parents[p];
    const VertexId m01 = midpoint(v0, v1);
    const VertexId m12 = midpoint(v1, v2);
    const VertexId m20 = midpoint(v2, v0);
    const Orientation o = parent_orient[p];
    children.push_back({m12, m20, m01});
    child_orient.push_back(flipped(o));
    children.push_back({v0, m01, m20});
    child_orient.push_back(o);
    children.push_back({m01, v1, m12});
    child_orient.push_back(o);
    children.push_back({m20, m12, v2});
    child_orient.push_back(o);
  }
  out.levels_.push_back(std::move(children));
  out.orient_.push_back(std::move(child_orient));
  out.build_adjacency();
  return out;
}

void SphereMesh::build_adjacency() {
  const auto& faces = levels_.back();
  adjacency_.assign(faces.size(), {0, 0, 0});
  // edge -> (face << 2 | slot) of the first face seen
  std::unordered_map<std::uint64_t, std::uint64_t> open;
  open.reserve(faces.size() * 3 / 2);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int slot = 0; slot < 3; ++slot) {
      const VertexId a = faces[f][(slot + 1) % 3];
      const VertexId b = faces[f][(slot + 2) % 3];
      const std::uint64_t mine = (std::uint64_t{f} << 2) | static_cast<std::uint64_t>(slot);
      auto [it, inserted] = open.try_emplace(edge_key(a, b), mine);
      if (!inserted) {
        const std::uint64_t other = it->second;
        adjacency_[f][slot] = static_cast<PixelIndex>(other >> 2);
        adjacency_[other >> 2][other & 3] = static_cast<PixelIndex>(f);
        open.erase(it);
      }
    }
  }
}

void SphereMesh::check(PixelIndex idx) const {
  if (idx >= pixel_count()) {
    throw IndexOutOfRange("pixel index " + std::to_string(idx) + " >= " + std::to_string(pixel_count()));
  }
}

const Face& SphereMesh::face(PixelIndex idx) const {
  check(idx);
  return levels_.back()[idx];
}

Orientation SphereMesh::orientation(PixelIndex idx) const {
  check(idx);
  return orient_.back()[idx];
}

const std::array<PixelIndex, 3>& SphereMesh::adjacency(PixelIndex idx) const {
  check(idx);
  return adjacency_[idx];
}

std::vector<int> SphereMesh::vertex_degrees() const {
  std::vector<int> degree(vertices_.size(), 0);
  for (const auto& f : levels_.back()) {
    for (auto v : f) ++degree[v];
  }
  return degree;
}

UnitVec SphereMesh::centroid(PixelIndex idx) const {
  const Face& f = face(idx);
  return UnitVec(vertices_[f[0]] + vertices_[f[1]] + vertices_[f[2]]);
}

double SphereMesh::area(PixelIndex idx) const {
  const Face& f = face(idx);
  return spherical_triangle_area(vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]);
}

PixelIndex SphereMesh::locate(const Vec3& dir) const {
  // First candidate with a non-negative margin wins; otherwise the largest
  // margin (the point sits within rounding of a shared edge).
  auto pick = [&](const std::vector<Face>& faces, PixelIndex first, PixelIndex count) {
    PixelIndex best = first;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (PixelIndex c = first; c < first + count; ++c) {
      const Face& f = faces[c];
      const double m = containment_margin(vertices_[f[0]], vertices_[f[1]], vertices_[f[2]], dir);
      if (m >= 0.0) return c;
      if (m > best_margin) {
        best_margin = m;
        best = c;
      }
    }
    return best;
  };

  PixelIndex idx = pick(levels_[0], 0, kBaseFaces);
  for (std::size_t level = 1; level < levels_.size(); ++level) {
    idx = pick(levels_[level], idx * 4, 4);
  }
  return idx;
}

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  // Van Oosterom & Strackee: tan(E/2) = |a.(b x c)| / (1 + a.b + b.c + c.a)
  const double numerator = std::abs(triple(a, b, c));
  const double denominator = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(numerator, denominator);
}

double containment_margin(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& dir) {
  auto side = [&](const Vec3& p, const Vec3& q) {
    const Vec3 n = p.cross(q);
    return n.dot(dir) / n.norm();
  };
  return std::min({side(a, b), side(b, c), side(c, a)});
}

std::array<std::array<double, 3>, 3> barycentric_corners(PixelIndex idx, int subdivision) {
  using Bary = std::array<double, 3>;
  const PixelPath path = decode(idx, subdivision);
  std::array<Bary, 3> c{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}};
  auto mid = [](const Bary& a, const Bary& b) {
    return Bary{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
  };
  for (auto code : path.codes) {
    const Bary m01 = mid(c[0], c[1]), m12 = mid(c[1], c[2]), m20 = mid(c[2], c[0]);
    switch (code) {
      case 0: c = {m12, m20, m01}; break;
      case 1: c = {c[0], m01, m20}; break;
      case 2: c = {m01, c[1], m12}; break;
      default: c = {m20, m12, c[2]}; break;
    }
  }
  return c;
}

PixelIndex antipodal_pixel(const SphereMesh& mesh, PixelIndex idx) {
  return mesh.locate(-mesh.centroid(idx).vec());
}

SphereMesh build_base_icosahedron() { return SphereMesh::icosahedron(); }
SphereMesh subdivide(const SphereMesh& mesh) { return mesh.subdivided(); }
UnitVec pixel_centroid(const SphereMesh& mesh, PixelIndex idx) { return mesh.centroid(idx); }
double pixel_area(const SphereMesh& mesh, PixelIndex idx) { return mesh.area(idx); }
PixelIndex locate(const SphereMesh& mesh, const Vec3& dir) { return mesh.locate(dir); }

std::array<std::array<double, 2>, 3> net_corners(const SphereMesh& mesh, int base_face) {
  const BaseFaceInfo& info = mesh.base_face_info(base_face);
  const double k = info.sector;
  switch (info.band) {
    case Band::NorthCap:
      return {{{k + 0.5, 0}, {k, 1}, {k + 1, 1}}};
    case Band::SouthCap:
      return {{{k + 1, 3}, {k + 1.5, 2}, {k + 0.5, 2}}};
    case Band::Equatorial:
      break;
  }
  if (info.upper_half) return {{{k + 0.5, 2}, {k + 1, 1}, {k, 1}}};
  return {{{k + 1, 1}, {k + 0.5, 2}, {k + 1.5, 2}}};
}

std::array<double, 2> net_point(const SphereMesh& mesh, int base_face, const std::array<double, 3>& bary) {
  auto c = net_corners(mesh, base_face);
  return {bary[0] * c[0][0] + bary[1] * c[1][0] + bary[2] * c[2][0],
          bary[0] * c[0][1] + bary[1] * c[1][1] + bary[2] * c[2][1]};
}

}  // namespace spherephd
