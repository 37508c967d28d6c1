#include "spherephd/indexing.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "spherephd/error.hpp"

namespace spherephd {

namespace {

int slot_of(const Face& f, VertexId v) {
  for (int s = 0; s < 3; ++s) {
    if (f[s] == v) return s;
  }
  return -1;
}

bool contains(const Face& f, VertexId v) { return slot_of(f, v) >= 0; }

}  // namespace

const KernelLayout& KernelLayout::standard() {
  static const KernelLayout layout = [] {
    KernelLayout k;
    k.up_offsets[0] = {-1, -1};
    for (int g = 0; g < 3; ++g) {
      k.up_offsets[1 + g] = {g, -1};
      k.up_offsets[4 + 2 * g] = {g, (g + 1) % 3};
      k.up_offsets[5 + 2 * g] = {g, (g + 2) % 3};
    }
    // Swapping the left/right frame vertices: edge groups 1 and 2 trade places
    // and every outer pair is re-anchored.
    k.down_permutation = {0, 1, 3, 2, 5, 4, 9, 8, 7, 6};
    return k;
  }();
  return layout;
}

std::array<PixelIndex, 3> edge_neighbors(const SphereMesh& mesh, PixelIndex idx) {
  return mesh.adjacency(idx);
}

Face lattice_frame(const SphereMesh& mesh, PixelIndex idx) {
  const Face& f = mesh.face(idx);
  if (mesh.orientation(idx) == Orientation::Up) return f;
  return {f[0], f[2], f[1]};
}

ConvTable build_conv_table(const SphereMesh& mesh) {
  if (mesh.subdivision() < 1) {
    throw UnsupportedSubdivision("convolution tables need subdivision >= 1");
  }
  const KernelLayout& layout = KernelLayout::standard();
  const auto faces = mesh.faces();
  ConvTable table;
  table.subdivision = mesh.subdivision();
  table.taps.resize(faces.size() * kConvArity);

  for (PixelIndex i = 0; i < faces.size(); ++i) {
    const Face frame = lattice_frame(mesh, i);
    const Face& stored = faces[i];
    const auto& adj = mesh.adjacency(i);

    std::array<PixelIndex, 3> nb{};
    for (int g = 0; g < 3; ++g) nb[g] = adj[slot_of(stored, frame[g])];

    std::array<PixelIndex, kConvArity> raw{};
    for (int k = 0; k < kConvArity; ++k) {
      const TapRule rule = layout.up_offsets[k];
      if (rule.edge < 0) {
        raw[k] = i;
      } else if (rule.vertex < 0) {
        raw[k] = nb[rule.edge];
      } else {
        // The outer tap touching frame vertex `vertex` lies across the
        // neighbour's edge opposite the other shared vertex.
        const PixelIndex n = nb[rule.edge];
        const int other = 3 - rule.edge - rule.vertex;
        raw[k] = mesh.adjacency(n)[slot_of(faces[n], frame[other])];
      }
    }

    PixelIndex* row = table.taps.data() + std::size_t{i} * kConvArity;
    if (mesh.orientation(i) == Orientation::Up) {
      std::copy(raw.begin(), raw.end(), row);
    } else {
      for (int k = 0; k < kConvArity; ++k) row[layout.down_permutation[k]] = raw[k];
    }
  }
  return table;
}

PoolTable build_pool_table(int n) {
  if (n < 1 || n > kMaxSubdivision) {
    throw UnsupportedSubdivision("pool tables need 1 <= n <= " + std::to_string(kMaxSubdivision));
  }
  PoolTable table;
  table.subdivision = n;
  table.children.resize(pixel_count(n));
  for (PixelIndex c = 0; c < table.children.size(); ++c) table.children[c] = c;
  return table;
}

UnpoolTable build_unpool_table(int n) {
  const PoolTable pool = build_pool_table(n);
  return UnpoolTable{pool.subdivision, pool.children};
}

bool TableReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* TableReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::map<PixelIndex, int> edge_graph_ball(const SphereMesh& mesh, PixelIndex src, int max_depth) {
  std::map<PixelIndex, int> dist{{src, 0}};
  std::deque<PixelIndex> queue{src};
  while (!queue.empty()) {
    const PixelIndex p = queue.front();
    queue.pop_front();
    const int d = dist[p];
    if (d == max_depth) continue;
    for (PixelIndex q : mesh.adjacency(p)) {
      if (dist.emplace(q, d + 1).second) queue.push_back(q);
    }
  }
  return dist;
}

TableReport verify_tables(const SphereMesh& mesh, const ConvTable& conv, const PoolTable& pool,
                          const UnpoolTable* unpool) {
  TableReport report;
  const auto faces = mesh.faces();
  const std::size_t n_pix = faces.size();
  const int n = mesh.subdivision();

  auto fail = [](CheckResult& c, std::size_t row, std::string detail) {
    if (!c.passed) return;
    c.passed = false;
    c.counterexample_row = row;
    c.detail = std::move(detail);
  };

  // Oracle adjacency rebuilt from vertex incidence: two faces are neighbours
  // iff they share exactly two vertices. oracle_nb[i][s] is across the edge
  // opposite stored vertex s.
  std::vector<std::vector<PixelIndex>> incident(mesh.vertex_count());
  for (PixelIndex f = 0; f < n_pix; ++f) {
    for (VertexId v : faces[f]) incident[v].push_back(f);
  }
  const auto degrees = mesh.vertex_degrees();
  std::vector<std::array<PixelIndex, 3>> oracle_nb(n_pix);
  bool oracle_ok = true;
  for (PixelIndex i = 0; i < n_pix; ++i) {
    constexpr PixelIndex kUnset = ~PixelIndex{0};
    std::array<int, 3> found{0, 0, 0};
    oracle_nb[i] = {kUnset, kUnset, kUnset};
    for (VertexId v : faces[i]) {
      for (PixelIndex j : incident[v]) {
        if (j == i) continue;
        int shared = 0, missing = -1;
        for (int s = 0; s < 3; ++s) {
          if (contains(faces[j], faces[i][s])) {
            ++shared;
          } else {
            missing = s;
          }
        }
        if (shared != 2 || oracle_nb[i][missing] == j) continue;
        if (oracle_nb[i][missing] == kUnset) oracle_nb[i][missing] = j;
        ++found[missing];
      }
    }
    if (found != std::array<int, 3>{1, 1, 1}) oracle_ok = false;
  }

  CheckResult shape{"conv.shape"};
  if (conv.subdivision != n || conv.rows() != n_pix || conv.taps.size() != n_pix * kConvArity) {
    fail(shape, 0, "expected " + std::to_string(n_pix) + " rows of " + std::to_string(kConvArity));
  }
  report.checks.push_back(shape);
  if (!shape.passed) return report;

  CheckResult adjacency{"mesh.adjacency_oracle"};
  if (!oracle_ok) fail(adjacency, 0, "incidence scan did not find exactly 3 edge neighbours per face");
  for (PixelIndex i = 0; i < n_pix && adjacency.passed; ++i) {
    if (mesh.adjacency(i) != oracle_nb[i]) fail(adjacency, i, "edge_neighbors differs from incidence scan");
  }
  if (!oracle_ok) {
    report.checks.push_back(adjacency);
    return report;
  }

  CheckResult center{"conv.center"};
  CheckResult valid{"conv.valid_index"};
  CheckResult shares{"conv.shares_vertex"};
  CheckResult locality{"conv.locality"};
  CheckResult equivalence{"conv.oracle_equivalence"};
  CheckResult duplicates{"conv.duplicates"};
  CheckResult distances{"conv.orientation_consistency"};
  const std::multiset<int> expected_distances{0, 1, 1, 1, 2, 2, 2, 2, 2, 2};

  for (PixelIndex i = 0; i < n_pix; ++i) {
    const auto row = conv.row(i);
    if (row[0] != i) fail(center, i, "tap 0 = " + std::to_string(row[0]));

    bool row_valid = true;
    for (PixelIndex t : row) {
      if (t >= n_pix) {
        fail(valid, i, "tap " + std::to_string(t) + " out of range");
        row_valid = false;
      }
    }
    if (!row_valid) continue;

    for (PixelIndex t : row) {
      const bool touches = std::any_of(faces[t].begin(), faces[t].end(),
                                       [&](VertexId v) { return contains(faces[i], v); });
      if (!touches) fail(shares, i, "tap " + std::to_string(t) + " shares no vertex with the center");
    }

    // Breadth-first distances over the oracle adjacency.
    std::map<PixelIndex, int> dist{{i, 0}};
    for (PixelIndex a : oracle_nb[i]) dist.emplace(a, 1);
    for (PixelIndex a : oracle_nb[i]) {
      for (PixelIndex b : oracle_nb[a]) dist.emplace(b, 2);
    }
    std::multiset<int> row_distances;
    for (PixelIndex t : row) {
      auto it = dist.find(t);
      if (it == dist.end()) {
        fail(locality, i, "tap " + std::to_string(t) + " farther than 2 edge steps");
        row_distances.insert(99);
      } else {
        row_distances.insert(it->second);
      }
    }
    if (row_distances != expected_distances) fail(distances, i, "tap distance multiset differs");

    // Expected row in the stored counter-clockwise frame, which is the same
    // for Up and Down pixels once the Down permutation has been applied.
    const Face& f = faces[i];
    std::array<PixelIndex, kConvArity> expect{};
    expect[0] = i;
    for (int g = 0; g < 3; ++g) {
      const PixelIndex nb = oracle_nb[i][g];
      expect[1 + g] = nb;
      for (int h = 0; h < 2; ++h) {
        const VertexId anchor = f[(g + 1 + h) % 3];
        for (PixelIndex outer : oracle_nb[nb]) {
          if (outer != i && contains(faces[outer], anchor)) expect[4 + 2 * g + h] = outer;
        }
      }
    }
    if (!std::equal(row.begin(), row.end(), expect.begin())) {
      fail(equivalence, i, "row differs from the brute-force kernel patch");
    }

    std::set<PixelIndex> distinct(row.begin(), row.end());
    const std::size_t dup = kConvArity - distinct.size();
    if (dup > 0) {
      bool near_degree5 = false;
      for (PixelIndex t : row) {
        for (VertexId v : faces[t]) near_degree5 |= degrees[v] == 5;
      }
      if (dup > 2) fail(duplicates, i, std::to_string(dup) + " duplicate taps");
      if (!near_degree5) fail(duplicates, i, "duplicate tap away from the degree-5 vertices");
    }
  }
  for (auto* c : {&adjacency, &center, &valid, &shares, &locality, &equivalence, &duplicates, &distances}) {
    report.checks.push_back(*c);
  }

  CheckResult pshape{"pool.shape"};
  CheckResult partition{"pool.partition"};
  CheckResult prefix{"pool.prefix"};
  if (pool.subdivision != n || pool.rows() * kPoolArity != n_pix || pool.children.size() != n_pix) {
    fail(pshape, 0, "expected " + std::to_string(n_pix / kPoolArity) + " rows of 4");
  } else {
    std::vector<int> seen(n_pix, 0);
    for (std::size_t j = 0; j < pool.rows(); ++j) {
      for (PixelIndex c : pool.row(j)) {
        if (c >= n_pix) {
          fail(partition, j, "child " + std::to_string(c) + " out of range");
          continue;
        }
        if (++seen[c] > 1) fail(partition, j, "child " + std::to_string(c) + " appears twice");
        if ((c >> 2) != j) fail(prefix, j, "child " + std::to_string(c) + " does not extend the parent path");
      }
    }
    for (std::size_t c = 0; c < n_pix; ++c) {
      if (seen[c] == 0) fail(partition, c / kPoolArity, "child " + std::to_string(c) + " never pooled");
    }
  }
  report.checks.push_back(pshape);
  report.checks.push_back(partition);
  report.checks.push_back(prefix);

  if (unpool != nullptr) {
    CheckResult inverse{"unpool.inverse"};
    if (unpool->subdivision != n || unpool->children.size() != pool.children.size()) {
      fail(inverse, 0, "unpool table shape differs from the pool table");
    } else {
      std::vector<std::size_t> parent_of(n_pix, n_pix);
      for (std::size_t j = 0; j < pool.rows(); ++j) {
        for (PixelIndex c : pool.row(j)) {
          if (c < n_pix) parent_of[c] = j;
        }
      }
      for (std::size_t j = 0; j < unpool->rows(); ++j) {
        for (PixelIndex c : unpool->row(j)) {
          if (c >= n_pix || parent_of[c] != j) fail(inverse, j, "pool(unpool(j)) != j");
        }
      }
    }
    report.checks.push_back(inverse);
  }
  return report;
}

TableCache& TableCache::global() {
  static TableCache cache;
  return cache;
}

std::shared_ptr<const LevelTables> TableCache::get(int n) {
  std::lock_guard lock(mutex_);
  auto it = levels_.find(n);
  if (it != levels_.end()) return it->second;
  auto level = std::make_shared<LevelTables>(LevelTables{SphereMesh::build(n), std::nullopt, std::nullopt});
  if (n >= 1) {
    level->conv = build_conv_table(level->mesh);
    level->pool = build_pool_table(n);
  }
  levels_.emplace(n, level);
  return level;
}

}  // namespace spherephd
