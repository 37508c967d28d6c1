#pragma once

// Binary containers (SPHI images, SPHT tables and weights), MNIST IDX files
// and binary PGM/PPM rasters. Byte layouts are documented in FORMATS.md.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spherephd/indexing.hpp"
#include "spherephd/nnops.hpp"
#include "spherephd/projection.hpp"

namespace spherephd {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kSphiHeaderSize = 12;
inline constexpr std::size_t kSphtHeaderSize = 14;

enum class Dtype : std::uint8_t { F32 = 0, U8 = 1 };

struct SphiImage {
  SpherePhdImage image;
  Dtype dtype = Dtype::F32;
};

// U8 payloads store clamp(round(255 v)); reading returns byte / 255.
void write_sphi(std::ostream& os, const SpherePhdImage& img, Dtype dtype = Dtype::F32);
void write_sphi(const std::filesystem::path& path, const SpherePhdImage& img, Dtype dtype = Dtype::F32);
SphiImage read_sphi(std::istream& is);
SphiImage read_sphi(const std::filesystem::path& path);

enum class TableKind : std::uint8_t { Conv = 0, Pool = 1, Unpool = 2, Weights = 3 };

struct SphtBlock {
  TableKind kind = TableKind::Conv;
  std::uint8_t subdivision = 0;
  std::uint16_t arity = 0;
  std::uint32_t rows = 0;
  std::vector<std::uint32_t> indices;  // conv/pool/unpool
  std::vector<float> values;           // weights
};

void write_spht(std::ostream& os, const SphtBlock& block);
SphtBlock read_spht(std::istream& is);  // reads exactly one block
void write_spht(const std::filesystem::path& path, const SphtBlock& block);
SphtBlock read_spht(const std::filesystem::path& path);  // the file must hold exactly one block

SphtBlock to_spht(const ConvTable& t);
SphtBlock to_spht(const PoolTable& t);
SphtBlock to_spht(const UnpoolTable& t);
// Rows are output channels; each row holds in_channels * 10 weights then the bias.
SphtBlock to_spht(const ConvParams& p, int subdivision);

ConvTable conv_table_from(const SphtBlock& b);
PoolTable pool_table_from(const SphtBlock& b);
UnpoolTable unpool_table_from(const SphtBlock& b);
ConvParams conv_params_from(const SphtBlock& b);

// One weights block per convolution layer, in layer order.
void write_checkpoint(const std::filesystem::path& path, const Network& net);
void read_checkpoint(const std::filesystem::path& path, Network& net);

struct IdxImages {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;

  // Image i scaled to [0, 1].
  PlanarImage image(int i) const;
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

// Binary PGM (1 channel) or PPM (3 channels), maxval 255.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;  // interleaved, row-major
  std::vector<std::string> comments;
};

void write_pnm(std::ostream& os, const Raster& r);
void write_pnm(const std::filesystem::path& path, const Raster& r);
Raster read_pnm(std::istream& is);
Raster read_pnm(const std::filesystem::path& path);

// Value v maps to clamp(round(255 v)) and back to byte / 255.
Raster to_raster(const ErpImage& img);
ErpImage erp_from_raster(const Raster& r);

// Vertical strip of six faces in cube_face_frames() order, 6F rows tall.
Raster cubemap_to_raster(const CubeMap& cm);
CubeMap cubemap_from_raster(const Raster& r);
inline constexpr const char* kCubeStripComment = "spherephd cubemap strip faces: +x -x +y -y +z -z";

}  // namespace spherephd
