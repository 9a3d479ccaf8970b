#pragma once

#include <string>
#include <vector>

#include "gridmap/geometry.hpp"
#include "gridmap/gridfit.hpp"
#include "gridmap/network.hpp"

namespace gridmap {

/// Standalone SVG documents. Coordinates are mapped into a fixed-width canvas with
/// y flipped; output depends only on the inputs.

/// Region polygons with their ids at the centroids, and the outer boundary.
std::string render_regions_svg(const RegionSet& rs);

/// One <line class="edge"> per network edge, the boundary ring on top, centroids as dots.
std::string render_network_svg(const LinearNetwork& net);

/// One labelled square per assigned cell and the grid outline.
std::string render_grid_svg(const GridLayout& layout, const std::vector<std::string>& region_ids);

}  // namespace gridmap
