#pragma once
// Synthetic maps for tests and the acceptance run.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridmap/geometry.hpp"
#include "gridmap/network.hpp"

namespace gridmap::testing {

/// rows x cols squares of side `cell` with the lower-left corner at the origin.
/// Region ids are "r<row>_<col>", regions ordered row-major from the bottom.
RegionSet tiling(int rows, int cols, double cell = 1.0);

struct PerturbedLattice {
  RegionSet regions;       // unit tiling
  LinearNetwork network;   // built on centroids moved up to amplitude * S
  std::vector<Point> start;
};

/// Unit tiling whose network centroids are displaced uniformly in a disc of radius
/// amplitude * S (S = 1 here).
PerturbedLattice perturbed_lattice(int rows, int cols, double amplitude, std::mt19937_64& rng);

/// Three large squares in a row with a 2 x 3 block of six small squares against
/// the far end.
RegionSet non_uniform_map(double big = 8.0, double small = 0.2);

/// `sectors` wedges of a disc whose rim carries `rim_vertices` points with a
/// small sinusoidal wiggle.
RegionSet wiggly_disc(int sectors, int rim_vertices, double radius = 10.0);

/// FeatureCollection with properties.id.
std::string to_geojson(const RegionSet& rs);

}  // namespace gridmap::testing
