#pragma once

// Pole-aligned geodesic icosahedron and its hierarchical subdivision.
//
// Pixel indices are hierarchical: a level-n index is
//   base_face << 2n | code_1 << 2(n-1) | ... | code_n
// where code_k is the child chosen at subdivision k:
//   0      center child (orientation flipped)
//   1,2,3  corner child at the parent's 1st/2nd/3rd vertex
//
// Every face stores its vertices counter-clockwise seen from outside, starting
// with the apex: the vertex pointing north for Up pixels, south for Down
// pixels. Up and Down faces are therefore labelled as 180-degree rotations of
// each other, which is what the kernel tables rely on.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spherephd/vec3.hpp"

namespace spherephd {

using PixelIndex = std::uint32_t;
using VertexId = std::uint32_t;
using Face = std::array<VertexId, 3>;

inline constexpr int kMaxSubdivision = 10;
inline constexpr int kBaseFaces = 20;

enum class Orientation : std::uint8_t { Up = 0, Down = 1 };

inline constexpr Orientation flipped(Orientation o) {
  return o == Orientation::Up ? Orientation::Down : Orientation::Up;
}

constexpr std::size_t pixel_count(int n) { return std::size_t{20} << (2 * n); }
constexpr std::size_t vertex_count(int n) { return (std::size_t{10} << (2 * n)) + 2; }
constexpr std::size_t edge_count(int n) { return std::size_t{30} << (2 * n); }

// Decomposed PixelIndex.
struct PixelPath {
  int base_face = 0;
  std::vector<std::uint8_t> codes;  // codes[0] is the first subdivision

  bool operator==(const PixelPath&) const = default;
};

PixelPath decode(PixelIndex idx, int subdivision);
PixelIndex encode(const PixelPath& path);

// Where a base face sits in the canonical layout.
enum class Band : std::uint8_t { NorthCap, Equatorial, SouthCap };

struct BaseFaceInfo {
  Band band;
  int sector;       // 0..4 around the polar axis
  bool upper_half;  // equatorial band only: true for faces with two upper-ring vertices
};

class SphereMesh {
 public:
  // Subdivision-0 mesh.
  static SphereMesh icosahedron();
  // Mesh at subdivision n, 0 <= n <= kMaxSubdivision.
  static SphereMesh build(int n);

  SphereMesh subdivided() const;

  int subdivision() const { return static_cast<int>(levels_.size()) - 1; }
  std::size_t pixel_count() const { return levels_.back().size(); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return pixel_count() * 3 / 2; }

  std::span<const Vec3> vertices() const { return vertices_; }
  std::span<const Face> faces() const { return levels_.back(); }
  // Faces of an ancestor level; vertex ids are shared with this mesh.
  std::span<const Face> faces_at(int level) const { return levels_.at(level); }

  const Face& face(PixelIndex idx) const;
  Orientation orientation(PixelIndex idx) const;
  std::array<VertexId, 2> pole_vertex_ids() const { return {0, 11}; }
  const BaseFaceInfo& base_face_info(int base_face) const { return base_info_.at(base_face); }

  // Edge-adjacent pixels ordered by the edge opposite vertex 0, 1, 2.
  const std::array<PixelIndex, 3>& adjacency(PixelIndex idx) const;

  // Number of faces incident to each vertex.
  std::vector<int> vertex_degrees() const;

  UnitVec centroid(PixelIndex idx) const;
  double area(PixelIndex idx) const;
  PixelIndex locate(const Vec3& dir) const;

 private:
  SphereMesh() = default;
  void check(PixelIndex idx) const;
  void build_adjacency();

  std::vector<Vec3> vertices_;
  std::vector<std::vector<Face>> levels_;           // levels_[k] = faces at subdivision k
  std::vector<std::vector<Orientation>> orient_;    // parallel to levels_
  std::vector<std::array<PixelIndex, 3>> adjacency_;
  std::array<BaseFaceInfo, kBaseFaces> base_info_{};
};

SphereMesh build_base_icosahedron();
SphereMesh subdivide(const SphereMesh& mesh);
UnitVec pixel_centroid(const SphereMesh& mesh, PixelIndex idx);
double pixel_area(const SphereMesh& mesh, PixelIndex idx);
PixelIndex locate(const SphereMesh& mesh, const Vec3& dir);

// Solid angle of the spherical triangle (a, b, c), by spherical excess.
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Signed containment margin of dir against the CCW spherical triangle (a,b,c):
// the smallest sine of the angular distance to the three great-circle edges,
// negative outside.
double containment_margin(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& dir);

// Corners of pixel idx in barycentric coordinates of its base face, in the
// pixel's stored vertex order. This is the flat lattice of the unfolded net.
std::array<std::array<double, 3>, 3> barycentric_corners(PixelIndex idx, int subdivision);

// Planar positions of a base face's stored vertices in the unfolded net:
// north caps on top, the equatorial band in the middle, south caps at the
// bottom. Units are (edge length, triangle height); the net is 5.5 x 3.
std::array<std::array<double, 2>, 3> net_corners(const SphereMesh& mesh, int base_face);

// Net position of a point given in barycentric coordinates of its base face.
std::array<double, 2> net_point(const SphereMesh& mesh, int base_face, const std::array<double, 3>& bary);

// Pixel whose centroid is the antipode of idx's centroid.
PixelIndex antipodal_pixel(const SphereMesh& mesh, PixelIndex idx);

}  // namespace spherephd
