#include "meshpde/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "meshpde/io.hpp"

namespace meshpde {

double mean_edge_length(const Graph& g) {
    if (g.edges.empty()) throw GeometryError("mean_edge_length: graph has no edges");
    double acc = 0.0;
    for (size_t e = 0; e < g.edges.size(); ++e) acc += g.edge_displacement(e).norm();
    return acc / static_cast<double>(g.edges.size());
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
    io::Writer w;
    w.magic("PGN1");
    w.u64(g.node_count());
    w.u64(g.edge_count());
    w.u64(g.triangles.size());
    for (const Vec2 p : g.positions) {
        w.f64(p.x);
        w.f64(p.y);
    }
    for (const uint8_t f : g.boundary_flag) w.u8(f);
    for (const auto& [i, j] : g.edges) {
        w.u64(i);
        w.u64(j);
    }
    for (const Vec2 s : g.edge_shift) {
        w.f64(s.x);
        w.f64(s.y);
    }
    for (const auto& t : g.triangles) {
        w.u64(t[0]);
        w.u64(t[1]);
        w.u64(t[2]);
    }
    w.finish_with_crc();
    io::write_file_atomic(path, w.buffer());
}

Graph load_graph(const std::filesystem::path& path) {
    io::Reader r(io::read_file(path));
    r.check_crc("graph " + path.string());
    r.expect_magic("PGN1", "graph " + path.string());
    const uint64_t n = r.u64();
    const uint64_t m = r.u64();
    const uint64_t t = r.u64();
    Graph g;
    g.positions.resize(n);
    for (auto& p : g.positions) {
        p.x = r.f64();
        p.y = r.f64();
    }
    g.boundary_flag.resize(n);
    for (auto& f : g.boundary_flag) f = r.u8();
    g.edges.resize(m);
    for (auto& e : g.edges) {
        e.first = r.u64();
        e.second = r.u64();
    }
    g.edge_shift.resize(m);
    for (auto& s : g.edge_shift) {
        s.x = r.f64();
        s.y = r.f64();
    }
    g.triangles.resize(t);
    for (auto& tri : g.triangles) {
        tri[0] = r.u64();
        tri[1] = r.u64();
        tri[2] = r.u64();
    }
    return g;
}

std::vector<std::string> graph_violations(const Graph& g) {
    std::vector<std::string> out;
    const uint64_t n = g.node_count();

    if (g.boundary_flag.size() != n) out.push_back("boundary flag count != node count");
    if (g.edge_shift.size() != g.edges.size()) out.push_back("edge shift count != edge count");
    for (const uint8_t f : g.boundary_flag) {
        if (f > 1) {
            out.push_back("boundary flag outside {0,1}");
            break;
        }
    }

    std::map<std::pair<uint64_t, uint64_t>, Vec2> shift_of;
    bool dup = false, self_loop = false, oob = false;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        const auto key = g.edges[e];
        if (key.first >= n || key.second >= n) oob = true;
        if (key.first == key.second) self_loop = true;
        if (!shift_of.emplace(key, g.edge_shift[e]).second) dup = true;
    }
    if (oob) out.push_back("edge index out of range");
    if (self_loop) out.push_back("self-loop edge");
    if (dup) out.push_back("duplicate edge");

    for (const auto& [key, shift] : shift_of) {
        const auto rev = shift_of.find({key.second, key.first});
        if (rev == shift_of.end()) {
            out.push_back("asymmetric edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ") has no reverse");
            break;
        }
        if (std::abs(rev->second.x + shift.x) > 1e-12 ||
            std::abs(rev->second.y + shift.y) > 1e-12) {
            out.push_back("edge shift not antisymmetric for (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ")");
            break;
        }
    }

    std::set<std::pair<uint64_t, uint64_t>> tri_edges;
    for (const auto& t : g.triangles) {
        if (t[0] >= n || t[1] >= n || t[2] >= n) {
            out.push_back("triangle index out of range");
            break;
        }
        for (int k = 0; k < 3; ++k) {
            tri_edges.emplace(t[k], t[(k + 1) % 3]);
            tri_edges.emplace(t[(k + 1) % 3], t[k]);
        }
    }
    if (!g.triangles.empty()) {
        for (const auto& [key, shift] : shift_of) {
            if (!tri_edges.count(key)) {
                out.push_back("edge (" + std::to_string(key.first) + "," +
                              std::to_string(key.second) + ") not part of any triangle");
                break;
            }
        }
    }
    return out;
}

}  // namespace meshpde
