#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gridmap/geometry.hpp"
#include "gridmap/gridfit.hpp"
#include "gridmap/network.hpp"

namespace gridmap {

struct QualityReport {
  double c_location = 0.0;     // mean centroid-to-cell distance, input units
  double c_adjacent = 0.0;     // preserved adjacency ratio
  double c_orientation = 0.0;  // mean link angle difference, degrees
  double c_shape = 0.0;        // outline similarity
};

enum class GridAdjacency { rook, queen };
enum class LocationReference { transformed, original };

struct ShapeParams {
  std::size_t samples = 256;
  std::size_t harmonics = 32;
};

struct QualityOptions {
  GridAdjacency adjacency = GridAdjacency::rook;
  LocationReference location = LocationReference::transformed;
  ShapeParams shape;
};

/// Mean distance from each centroid to the center of its assigned cell.
double metric_location(std::span<const Point> centroids, const GridLayout& layout);

/// Share of adjacent region pairs whose cells touch on the lattice. 1 for no pairs.
double metric_adjacency(std::span<const RegionPair> adjacency, const GridLayout& layout,
                        GridAdjacency mode = GridAdjacency::rook);

/// Mean absolute difference, in [0, 180] degrees, between the direction of each
/// centroid-centroid network link in the original map and in the grid.
double metric_orientation(std::span<const Point> original_centroids, const LinearNetwork& net,
                          const GridLayout& layout);

/// Unit-norm magnitude spectrum (harmonics 1..h) of the centroid-distance signature
/// of the outline resampled at equal arc length.
std::vector<double> shape_spectrum(const Polygon& outline, const ShapeParams& params = {});

/// 1 - |F_a - F_b| / 2 over the spectra above.
double metric_shape(const Polygon& a, const Polygon& b, const ShapeParams& params = {});

QualityReport evaluate_layout(const RegionSet& rs, const LinearNetwork& original_net,
                              std::span<const Point> transformed_centroids,
                              const GridLayout& layout, const QualityOptions& opts = {});

/// Displaces each centroid by an isotropic Gaussian with per-axis standard
/// deviation md times its mean distance to its network neighbours.
std::vector<Point> gaussian_noise(std::span<const Point> centroids, double md,
                                  const LinearNetwork& net, std::uint64_t seed);

/// Origin shifts in fractions of the cell size.
std::vector<Point> candidate_origins();

using TopsisWeights = std::array<double, 4>;  // location, adjacent, orientation, shape
inline constexpr TopsisWeights kEqualWeights{0.25, 0.25, 0.25, 0.25};

struct TopsisResult {
  std::size_t chosen = 0;
  std::vector<double> closeness;
};

/// Vector-normalised TOPSIS. Adjacency and shape are benefits, location and
/// orientation are costs. Constant columns are skipped. Ties go to the lowest index.
TopsisResult topsis_select(std::span<const QualityReport> reports,
                           const TopsisWeights& weights = kEqualWeights);

}  // namespace gridmap
