#pragma once

// Conversions between equirectangular (ERP), cubemap and SpherePHD images.
//
// Direction convention: x = cos(lat) cos(lon), y = cos(lat) sin(lon),
// z = sin(lat). ERP row 0 is the northernmost row; column 0 starts at
// longitude -180 degrees. Cubemap faces are ordered +x, -x, +y, -y, +z, -z;
// see cube_face_frames().

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spherephd/geometry.hpp"
#include "spherephd/vec3.hpp"

namespace spherephd {

// Interleaved samples: data[(row * width + col) * channels + ch].
struct ErpImage {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  ErpImage() = default;
  ErpImage(int h, int w, int c, double fill = 0.0);

  double& at(int row, int col, int ch) { return data[(std::size_t(row) * width + col) * channels + ch]; }
  double at(int row, int col, int ch) const { return data[(std::size_t(row) * width + col) * channels + ch]; }
};

// data[((face * size + row) * size + col) * channels + ch].
struct CubeMap {
  int face_size = 0;
  int channels = 1;
  std::vector<double> data;

  CubeMap() = default;
  CubeMap(int f, int c, double fill = 0.0);

  double& at(int face, int row, int col, int ch) {
    return data[((std::size_t(face) * face_size + row) * face_size + col) * channels + ch];
  }
  double at(int face, int row, int col, int ch) const {
    return data[((std::size_t(face) * face_size + row) * face_size + col) * channels + ch];
  }
};

// Channel-planar: data[ch * pixel_count(subdivision) + pixel].
struct SpherePhdImage {
  int subdivision = 0;
  int channels = 1;
  std::vector<double> data;

  SpherePhdImage() = default;
  SpherePhdImage(int n, int c, double fill = 0.0);

  std::size_t pixels() const { return spherephd::pixel_count(subdivision); }
  double& at(int ch, PixelIndex p) { return data[std::size_t(ch) * pixels() + p]; }
  double at(int ch, PixelIndex p) const { return data[std::size_t(ch) * pixels() + p]; }
};

// Single-channel planar raster, row 0 at the top.
struct PlanarImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int row, int col) const { return data[std::size_t(row) * width + col]; }
};

class Rotation {
 public:
  Rotation() = default;  // identity
  // Throws ParameterError unless m is orthonormal with determinant +1 (1e-9).
  explicit Rotation(const std::array<double, 9>& m);

  static Rotation about_axis(const Vec3& axis, double angle);
  static Rotation about_z(double angle) { return about_axis({0, 0, 1}, angle); }
  // R = Rz(yaw) * Ry(pitch) * Rx(roll), radians.
  static Rotation from_euler(double yaw, double pitch, double roll);
  static Rotation from_quaternion(double w, double x, double y, double z);

  Vec3 apply(const Vec3& v) const;
  Vec3 operator*(const Vec3& v) const { return apply(v); }
  Rotation operator*(const Rotation& o) const;
  Rotation transposed() const;
  const std::array<double, 9>& matrix() const { return m_; }

 private:
  std::array<double, 9> m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

// Uniform over SO(3): unit quaternion from four standard normals.
Rotation random_rotation(std::uint64_t seed);

struct CubeFaceFrame {
  Vec3 forward;
  Vec3 right;  // +u, increasing column
  Vec3 up;     // +v, decreasing row
};
const std::array<CubeFaceFrame, 6>& cube_face_frames();

// Face chosen by the dominant axis; ties go to the lower face index.
int cube_face_of(const Vec3& dir);

// Directions of pixel-center coordinates (fractional values allowed).
Vec3 erp_direction(int height, int width, double row, double col);
Vec3 cube_direction(int face_size, int face, double row, double col);

// Solid angle of the gnomonic cube-face rectangle [u0,u1] x [v0,v1] at unit distance.
double gnomonic_rectangle_solid_angle(double u0, double u1, double v0, double v1);

// Bilinear in (latitude, longitude): longitude wraps, latitude clamps.
void erp_sample(const ErpImage& erp, const Vec3& dir, std::span<double> out);
std::vector<double> erp_sample(const ErpImage& erp, const Vec3& dir);

// Face selection, then bilinear inside the face with edge clamping.
void cubemap_sample(const CubeMap& cm, const Vec3& dir, std::span<double> out);
std::vector<double> cubemap_sample(const CubeMap& cm, const Vec3& dir);

// Value of the pixel containing dir.
void sphd_sample(const SpherePhdImage& img, const SphereMesh& mesh, const Vec3& dir, std::span<double> out);

// A function of direction writing one value per channel.
using Sampler = std::function<void(const Vec3&, std::span<double>)>;

Sampler make_sampler(const ErpImage& erp);
Sampler make_sampler(const CubeMap& cm);
Sampler make_sampler(const SpherePhdImage& img, const SphereMesh& mesh);

// Each output pixel reads src(rot * direction); ERP and cube outputs average
// supersample x supersample sub-directions.
SpherePhdImage render_sphd(const Sampler& src, int channels, const SphereMesh& mesh,
                           const Rotation& rot = {});
ErpImage render_erp(const Sampler& src, int channels, int height, int width, int supersample = 1,
                    const Rotation& rot = {});
CubeMap render_cubemap(const Sampler& src, int channels, int face_size, int supersample = 1,
                       const Rotation& rot = {});

SpherePhdImage erp_to_sphd(const ErpImage& erp, int n, const Rotation& rot = {});
SpherePhdImage erp_to_sphd(const ErpImage& erp, const SphereMesh& mesh, const Rotation& rot = {});
ErpImage sphd_to_erp(const SpherePhdImage& img, int height, int width, int supersample = 1);
ErpImage sphd_to_erp(const SpherePhdImage& img, const SphereMesh& mesh, int height, int width,
                     int supersample = 1);
CubeMap erp_to_cubemap(const ErpImage& erp, int face_size, const Rotation& rot = {});

// Placement of a planar image on the sphere. Angles in radians;
// angular_width is the full width of the image seen from the sphere center.
struct StampPlacement {
  double lat = 0.0;
  double lon = 0.0;
  double roll = 0.0;
  double angular_width = 60.0 * 3.14159265358979323846 / 180.0;
};

// Digit value seen along dir, or nullopt outside the footprint.
std::optional<double> gnomonic_lookup(const PlanarImage& digit, const StampPlacement& where, const Vec3& dir);

// Pixels whose sample direction falls inside the footprint take the digit
// value on every channel; the rest keep the canvas value.
SpherePhdImage gnomonic_stamp(const SpherePhdImage& canvas, const SphereMesh& mesh, const PlanarImage& digit,
                              const StampPlacement& where);
ErpImage gnomonic_stamp(const ErpImage& canvas, const PlanarImage& digit, const StampPlacement& where);

// Solid angle covered by the square footprint of a stamp.
double stamp_footprint_solid_angle(double angular_width);

}  // namespace spherephd
