#pragma once

#include <cstdint>

#include "meshpde/graph.hpp"

namespace meshpde {

struct PointSet {
    std::vector<Vec2> points;
    std::vector<uint8_t> boundary_flag;
};

/// Deterministic boundary nodes (arclength-equispaced per segment, spacing
/// close to the mean interior spacing sqrt(area/n)) followed by n_interior
/// uniform random interior points. Periodic domains get interior points only.
/// Same (domain, n_interior, seed) gives bit-identical output.
PointSet sample_points(const Domain& domain, size_t n_interior, uint64_t seed);

/// Delaunay triangulation of a raw point set (original index order kept).
/// Cocircular ties are resolved toward the diagonal touching the
/// lexicographically smallest corner of the tie quad, which makes the result
/// independent of input order. Throws on all-collinear input.
std::vector<std::array<uint64_t, 3>> delaunay_triangles(const std::vector<Vec2>& points);

/// Delaunay triangulation restricted to the domain (triangles with centroid
/// outside a non-convex domain are dropped), symmetrized edge list.
Graph triangulate(const PointSet& points, const Domain& domain);

/// Re-triangulates the 3x3 tiling of a periodic cell and keeps one canonical
/// wrapped edge per node pair. Edge shifts are the minimum-image lattice
/// correction, antisymmetric across edge directions.
Graph stitch_periodic(const Graph& g, const Domain& domain);

/// (divisions+1)^2 structured grid points on the unit square, boundary flagged.
PointSet structured_unit_square_points(int divisions);

}  // namespace meshpde
