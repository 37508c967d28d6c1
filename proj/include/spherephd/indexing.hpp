#pragma once

// Gather tables for convolution, pooling and unpooling on SpherePHD images.
//
// Convolution rows have 10 taps:
//   0       the pixel itself
//   1..3    edge neighbours across the edge opposite face vertex 0, 1, 2
//   4..9    for the neighbour opposite frame vertex g (g = 0, 1, 2), its two
//           other edge neighbours: first the one touching frame vertex g+1,
//           then the one touching g+2 (mod 3)
// Up pixels enumerate that rule in their (apex, left, right) frame. Down
// pixels enumerate it in the same screen-aligned frame and then have their
// slots permuted by KernelLayout::down_permutation, so a single weight vector
// is applied to Down pixels rotated by 180 degrees.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spherephd/geometry.hpp"

namespace spherephd {

inline constexpr int kConvArity = 10;
inline constexpr int kPoolArity = 4;

// One slot of the tap-selection rule, in the center's (apex, left, right) frame.
struct TapRule {
  int edge = -1;    // neighbour across the edge opposite frame vertex `edge`; -1 = center
  int vertex = -1;  // outer tap: that neighbour's neighbour touching frame vertex `vertex`
};

struct KernelLayout {
  std::array<TapRule, kConvArity> up_offsets;
  // Slot k of the Up enumeration lands in slot down_permutation[k] for Down pixels.
  std::array<int, kConvArity> down_permutation;

  static const KernelLayout& standard();
};

struct ConvTable {
  int subdivision = 0;
  std::vector<PixelIndex> taps;  // rows() x kConvArity, row-major

  std::size_t rows() const { return taps.size() / kConvArity; }
  std::span<const PixelIndex, kConvArity> row(std::size_t i) const {
    return std::span<const PixelIndex, kConvArity>(taps.data() + i * kConvArity, kConvArity);
  }
  bool operator==(const ConvTable&) const = default;
};

// Row j lists the 4 level-n children of level-(n-1) parent j.
struct PoolTable {
  int subdivision = 0;  // level of the children
  std::vector<PixelIndex> children;

  std::size_t rows() const { return children.size() / kPoolArity; }
  std::span<const PixelIndex, kPoolArity> row(std::size_t j) const {
    return std::span<const PixelIndex, kPoolArity>(children.data() + j * kPoolArity, kPoolArity);
  }
  bool operator==(const PoolTable&) const = default;
};

// Same relation as PoolTable, consumed in the scatter direction.
struct UnpoolTable {
  int subdivision = 0;
  std::vector<PixelIndex> children;

  std::size_t rows() const { return children.size() / kPoolArity; }
  std::span<const PixelIndex, kPoolArity> row(std::size_t j) const {
    return std::span<const PixelIndex, kPoolArity>(children.data() + j * kPoolArity, kPoolArity);
  }
  bool operator==(const UnpoolTable&) const = default;
};

std::array<PixelIndex, 3> edge_neighbors(const SphereMesh& mesh, PixelIndex idx);

// Face vertices in the screen-aligned (apex, left, right) frame.
Face lattice_frame(const SphereMesh& mesh, PixelIndex idx);

ConvTable build_conv_table(const SphereMesh& mesh);
PoolTable build_pool_table(int n);
UnpoolTable build_unpool_table(int n);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::optional<std::size_t> counterexample_row;
  std::string detail;
};

struct TableReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
};

// Checks every table invariant against brute-force oracles that do not share
// code with the builders. Failures are reported, never thrown.
TableReport verify_tables(const SphereMesh& mesh, const ConvTable& conv, const PoolTable& pool,
                          const UnpoolTable* unpool = nullptr);

// Pixels within max_depth steps of src in the edge-adjacency graph, with their
// distances (breadth-first search over SphereMesh::adjacency).
std::map<PixelIndex, int> edge_graph_ball(const SphereMesh& mesh, PixelIndex src, int max_depth);

// Mesh and tables for one subdivision level, compiled once.
struct LevelTables {
  SphereMesh mesh;
  std::optional<ConvTable> conv;  // absent at n = 0
  std::optional<PoolTable> pool;  // children at n, absent at n = 0
};

class TableCache {
 public:
  static TableCache& global();
  std::shared_ptr<const LevelTables> get(int n);

 private:
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const LevelTables>> levels_;
};

}  // namespace spherephd
