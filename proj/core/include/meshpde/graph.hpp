#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "meshpde/domain.hpp"

namespace meshpde {

/// Discretized domain: node positions, boundary flags, symmetric directed
/// edge list from the Delaunay triangulation, and per-edge periodic shifts
/// (zero on non-periodic domains). Edges are sorted by (i, j).
struct Graph {
    std::vector<Vec2> positions;
    std::vector<uint8_t> boundary_flag;
    std::vector<std::pair<uint64_t, uint64_t>> edges;
    std::vector<Vec2> edge_shift;
    std::vector<std::array<uint64_t, 3>> triangles;

    size_t node_count() const { return positions.size(); }
    size_t edge_count() const { return edges.size(); }

    /// Wrapped displacement x_j + shift - x_i for edge slot e.
    Vec2 edge_displacement(size_t e) const {
        const auto [i, j] = edges[e];
        return positions[j] + edge_shift[e] - positions[i];
    }
};

double mean_edge_length(const Graph& g);

/// "PGN1" binary format round trip (little-endian, trailing crc32).
void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

/// Structural invariant audit used by tests and the validate subcommand.
/// Returns human-readable violation descriptions; empty means clean.
std::vector<std::string> graph_violations(const Graph& g);

}  // namespace meshpde
