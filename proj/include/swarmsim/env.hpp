#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsim/rng.hpp"

namespace swarmsim {

// Binary tile floor, row-major, tiles[r * cols + c]; 1 = vibrating.
struct TileGrid {
  int rows = 0;
  int cols = 0;
  double tile_size_mm = 200.0;
  std::vector<std::uint8_t> tiles;

  int tile_count() const { return rows * cols; }
  double arena_width_mm() const { return cols * tile_size_mm; }
  double arena_height_mm() const { return rows * tile_size_mm; }
  std::uint8_t at(int r, int c) const {
    return tiles[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  int ones() const { return std::accumulate(tiles.begin(), tiles.end(), 0); }
  double fill_ratio() const {
    return tile_count() > 0 ? static_cast<double>(ones()) / tile_count() : 0.0;
  }
};

inline void validate_grid(const TileGrid& g) {
  if (g.rows < 1 || g.cols < 1) throw std::invalid_argument("grid: rows and cols must be >= 1");
  if (!(g.tile_size_mm > 0.0)) throw std::invalid_argument("grid: tile_size_mm must be positive");
  if (g.tiles.size() != static_cast<std::size_t>(g.tile_count()))
    throw std::invalid_argument("grid: tiles size does not match rows*cols");
  for (auto t : g.tiles)
    if (t > 1) throw std::invalid_argument("grid: tiles must be 0 or 1");
}

// Maps a position to its tile bit. Cells are half-open, so a point on a tile
// boundary belongs to the higher-index tile; the arena itself is half-open,
// positions at or past the far edge are out of range.
inline std::uint8_t tile_at(const TileGrid& g, double x_mm, double y_mm) {
  if (!(x_mm >= 0.0 && x_mm < g.arena_width_mm() && y_mm >= 0.0 && y_mm < g.arena_height_mm()))
    throw std::out_of_range("tile_at: position outside arena");
  int c = std::min(static_cast<int>(x_mm / g.tile_size_mm), g.cols - 1);
  int r = std::min(static_cast<int>(y_mm / g.tile_size_mm), g.rows - 1);
  return g.at(r, c);
}

// Spatial autocorrelation with rook (4-neighbour) weights, no wraparound.
inline double moran_index(const TileGrid& g) {
  validate_grid(g);
  const int n = g.tile_count();
  const int ones = g.ones();
  if (ones == 0 || ones == n) throw std::domain_error("moran_index: undefined for zero variance");
  const double mean = static_cast<double>(ones) / n;
  double num = 0.0, denom = 0.0;
  long long links = 0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const double d = g.at(r, c) - mean;
      denom += d * d;
      if (c + 1 < g.cols) {
        num += 2.0 * d * (g.at(r, c + 1) - mean);
        links += 2;
      }
      if (r + 1 < g.rows) {
        num += 2.0 * d * (g.at(r + 1, c) - mean);
        links += 2;
      }
    }
  }
  return (static_cast<double>(n) / static_cast<double>(links)) * (num / denom);
}

namespace detail {

// Sizes of 4-connected clusters of vibrating tiles.
inline std::vector<int> cluster_sizes(const TileGrid& g) {
  std::vector<char> seen(g.tiles.size(), 0);
  std::vector<int> sizes;
  std::vector<int> stack;
  for (int start = 0; start < g.tile_count(); ++start) {
    if (!g.tiles[start] || seen[start]) continue;
    int size = 0;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      ++size;
      const int r = idx / g.cols, c = idx % g.cols;
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (auto& nb : nbr) {
        if (nb[0] < 0 || nb[0] >= g.rows || nb[1] < 0 || nb[1] >= g.cols) continue;
        const int j = nb[0] * g.cols + nb[1];
        if (g.tiles[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(size);
  }
  return sizes;
}

}  // namespace detail

// Normalized cluster-entropy deficit in [0, 1]: 1 when all vibrating tiles
// form one cluster, 0 when every vibrating tile is isolated.
inline double entropy(const TileGrid& g) {
  validate_grid(g);
  const int nv = g.ones();
  if (nv == 0) throw std::domain_error("entropy: undefined with no vibrating tiles");
  if (nv == 1) return 1.0;
  double hc = 0.0;
  for (int s : detail::cluster_sizes(g)) {
    const double p = static_cast<double>(s) / nv;
    hc -= p * std::log2(p);
  }
  const double hmax = std::log2(static_cast<double>(nv));
  return std::min(1.0, std::max(0.0, (hmax - hc) / hmax));
}

namespace detail {

inline int target_count(int rows, int cols, double fill_target) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid generator: rows and cols must be >= 1");
  if (!(fill_target >= 0.0 && fill_target <= 1.0))
    throw std::invalid_argument("grid generator: fill_target must be in [0, 1]");
  return static_cast<int>(std::llround(static_cast<double>(rows) * cols * fill_target));
}

inline double default_tile_size(int cols, double tile_size_mm) {
  if (tile_size_mm > 0.0) return tile_size_mm;
  return 1000.0 / cols;  // keeps a 1 m-wide arena when unspecified
}

}  // namespace detail

// Uniform random placement of exactly round(rows*cols*fill_target) ones.
inline TileGrid gen_random(int rows, int cols, double fill_target, Rng& rng,
                           double tile_size_mm = 0.0) {
  const int n = detail::target_count(rows, cols, fill_target);
  const int total = rows * cols;
  TileGrid g{rows, cols, detail::default_tile_size(cols, tile_size_mm),
             std::vector<std::uint8_t>(static_cast<std::size_t>(total), 0)};
  std::vector<int> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n; ++i) {
    int j = i + static_cast<int>(rng.uniform01() * (total - i));
    j = std::min(j, total - 1);
    std::swap(idx[i], idx[j]);
    g.tiles[static_cast<std::size_t>(idx[i])] = 1;
  }
  return g;
}

enum class PatternKind { Diagonal, Stripe, BlockDiagonal, Alternating };

inline PatternKind pattern_kind_from_string(const std::string& s) {
  if (s == "diagonal") return PatternKind::Diagonal;
  if (s == "stripe") return PatternKind::Stripe;
  if (s == "block_diagonal") return PatternKind::BlockDiagonal;
  if (s == "alternating") return PatternKind::Alternating;
  throw std::invalid_argument("unknown pattern kind: " + s);
}

inline std::string to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Diagonal: return "diagonal";
    case PatternKind::Stripe: return "stripe";
    case PatternKind::BlockDiagonal: return "block_diagonal";
    case PatternKind::Alternating: return "alternating";
  }
  return "?";
}

namespace detail {

inline std::vector<std::pair<int, int>> pattern_cells(PatternKind kind, int rows, int cols, int n) {
  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<std::size_t>(rows) * cols);
  switch (kind) {
    case PatternKind::Stripe: {
      // Whole columns, then a partial column from the top.
      for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) cells.emplace_back(r, c);
      break;
    }
    case PatternKind::Diagonal: {
      // Successive diagonals outward from the main diagonal: offsets
      // 0, +1, -1, +2, -2, ...
      const int span = std::max(rows, cols);
      for (int step = 0; step <= 2 * span; ++step) {
        const int k = (step % 2 == 1) ? (step + 1) / 2 : -(step / 2);
        for (int r = 0; r < rows; ++r) {
          const int c = r - k;
          if (c >= 0 && c < cols) cells.emplace_back(r, c);
        }
      }
      break;
    }
    case PatternKind::BlockDiagonal: {
      // Smallest block size whose diagonal blocks can hold n cells.
      int b = 1;
      for (; b <= rows; ++b) {
        long long cap = 0;
        for (int k = 0; k < rows && k < cols; k += b)
          cap += static_cast<long long>(std::min(b, rows - k)) * std::min(b, cols - k);
        if (cap >= n) break;
      }
      b = std::min(b, rows);
      for (int k = 0; k < rows && k < cols; k += b)
        for (int r = k; r < std::min(k + b, rows); ++r)
          for (int c = k; c < std::min(k + b, cols); ++c) cells.emplace_back(r, c);
      break;
    }
    case PatternKind::Alternating: {
      // Checkerboard; deficits drop even-parity cells edge-first, surpluses
      // add odd-parity cells edge-first.
      auto edge_dist = [&](int r, int c) {
        return std::min(std::min(r, rows - 1 - r), std::min(c, cols - 1 - c));
      };
      std::vector<std::pair<int, int>> even, odd;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) ((r + c) % 2 == 0 ? even : odd).emplace_back(r, c);
      std::stable_sort(even.begin(), even.end(), [&](auto& a, auto& b) {
        return edge_dist(a.first, a.second) > edge_dist(b.first, b.second);
      });
      std::stable_sort(odd.begin(), odd.end(), [&](auto& a, auto& b) {
        return edge_dist(a.first, a.second) < edge_dist(b.first, b.second);
      });
      cells = even;
      cells.insert(cells.end(), odd.begin(), odd.end());
      break;
    }
  }
  return cells;
}

}  // namespace detail

// Deterministic structured patterns; exactly round(rows*cols*fill_target) ones.
inline TileGrid gen_pattern(PatternKind kind, int rows, int cols, double fill_target,
                            double tile_size_mm = 0.0) {
  const int n = detail::target_count(rows, cols, fill_target);
  TileGrid g{rows, cols, detail::default_tile_size(cols, tile_size_mm),
             std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols, 0)};
  const auto cells = detail::pattern_cells(kind, rows, cols, n);
  if (static_cast<int>(cells.size()) < n)
    throw std::invalid_argument("gen_pattern: pattern cannot hold requested fill");
  for (int i = 0; i < n; ++i)
    g.tiles[static_cast<std::size_t>(cells[i].first) * cols + cells[i].second] = 1;
  return g;
}

}  // namespace swarmsim
