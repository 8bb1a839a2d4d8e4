#include "meshpde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "meshpde/rng.hpp"

namespace meshpde {

namespace {

constexpr double kRelEps = 1e-12;

// Signed doubled area of (a,b,c); positive when counterclockwise.
double orient2d(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

// In-circumcircle determinant for CCW triangle (a,b,c) against p, together
// with a magnitude estimate used for a relative zero test.
double incircle_det(Vec2 a, Vec2 b, Vec2 c, Vec2 p, double& scale) {
    const double adx = a.x - p.x, ady = a.y - p.y;
    const double bdx = b.x - p.x, bdy = b.y - p.y;
    const double cdx = c.x - p.x, cdy = c.y - p.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * clift - cdy * blift) - ady * (bdx * clift - cdx * blift) +
                       alift * (bdx * cdy - cdx * bdy);
    scale = std::abs(adx) * (std::abs(bdy) * clift + std::abs(cdy) * blift) +
            std::abs(ady) * (std::abs(bdx) * clift + std::abs(cdx) * blift) +
            alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy));
    return det;
}

bool strictly_in_circumcircle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    double scale;
    const double det = incircle_det(a, b, c, p, scale);
    return det > kRelEps * scale;
}

bool cocircular(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    double scale;
    const double det = incircle_det(a, b, c, p, scale);
    return std::abs(det) <= kRelEps * scale;
}

struct Tri {
    uint64_t v[3];
};

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Flip pass helper: collects (triangle, triangle) pairs sharing each edge.
using EdgeKey = std::pair<uint64_t, uint64_t>;
EdgeKey make_edge_key(uint64_t a, uint64_t b) { return {std::min(a, b), std::max(a, b)}; }

int opposite_vertex(const Tri& t, uint64_t a, uint64_t b) {
    for (int k = 0; k < 3; ++k) {
        if (t.v[k] != a && t.v[k] != b) return k;
    }
    return -1;
}

// One sweep of edge flips. `should_flip` gets the CCW quad (u, z, v, w) where
// (u,v) is the current diagonal, w/z the opposite vertices. Returns flip count.
template <typename Pred>
size_t flip_sweep(const std::vector<Vec2>& pts, std::vector<Tri>& tris, Pred should_flip) {
    std::map<EdgeKey, std::vector<size_t>> edge_tris;
    for (size_t t = 0; t < tris.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            edge_tris[make_edge_key(tris[t].v[k], tris[t].v[(k + 1) % 3])].push_back(t);
        }
    }
    std::vector<bool> dead(tris.size(), false);
    size_t flips = 0;
    for (const auto& [key, owners] : edge_tris) {
        if (owners.size() != 2) continue;
        const size_t t1 = owners[0], t2 = owners[1];
        if (dead[t1] || dead[t2]) continue;
        const auto [u, v] = key;
        const int w_k = opposite_vertex(tris[t1], u, v);
        const int z_k = opposite_vertex(tris[t2], u, v);
        if (w_k < 0 || z_k < 0) continue;
        const uint64_t w = tris[t1].v[w_k], z = tris[t2].v[z_k];
        if (!should_flip(u, v, w, z)) continue;
        // only flip strictly convex quads
        if (orient2d(pts[u], pts[z], pts[w]) <= 0 || orient2d(pts[z], pts[v], pts[w]) <= 0)
            continue;
        tris[t1] = Tri{{u, z, w}};
        tris[t2] = Tri{{z, v, w}};
        dead[t1] = dead[t2] = true;  // re-examined on the next sweep
        ++flips;
    }
    return flips;
}

}  // namespace

std::vector<std::array<uint64_t, 3>> delaunay_triangles(const std::vector<Vec2>& points) {
    const size_t n = points.size();
    if (n < 3) throw GeometryError("degenerate point set: need at least 3 points");

    // insertion in lexicographic order makes the result independent of input order
    std::vector<uint64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](uint64_t a, uint64_t b) {
        if (points[a].x != points[b].x) return points[a].x < points[b].x;
        if (points[a].y != points[b].y) return points[a].y < points[b].y;
        return a < b;
    });
    for (size_t i = 1; i < n; ++i) {
        if (points[order[i]] == points[order[i - 1]]) {
            throw GeometryError("degenerate point set: duplicate point");
        }
    }

    Vec2 lo = points[0], hi = points[0];
    for (const Vec2 p : points) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    const Vec2 center{(lo.x + hi.x) / 2, (lo.y + hi.y) / 2};
    const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1.0});

    std::vector<Vec2> pts = points;
    pts.push_back({center.x - 64.0 * span, center.y - 32.0 * span});
    pts.push_back({center.x + 64.0 * span, center.y - 32.0 * span});
    pts.push_back({center.x, center.y + 64.0 * span});
    const uint64_t s0 = n, s1 = n + 1, s2 = n + 2;

    std::vector<Tri> tris{Tri{{s0, s1, s2}}};
    std::vector<size_t> bad;
    std::map<EdgeKey, std::pair<EdgeKey, int>> cavity;  // key -> (directed edge, count)

    for (const uint64_t idx : order) {
        const Vec2 p = pts[idx];
        bad.clear();
        for (size_t t = 0; t < tris.size(); ++t) {
            const auto& tr = tris[t];
            double scale;
            const double det = incircle_det(pts[tr.v[0]], pts[tr.v[1]], pts[tr.v[2]], p, scale);
            // non-strict here: a point on the circle must still open the cavity
            if (det >= -kRelEps * scale) bad.push_back(t);
        }
        if (bad.empty()) throw GeometryError("triangulation failed: point outside all cavities");

        cavity.clear();
        for (const size_t t : bad) {
            for (int k = 0; k < 3; ++k) {
                const uint64_t a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
                auto& entry = cavity[make_edge_key(a, b)];
                if (entry.second == 0) entry.first = {a, b};
                ++entry.second;
            }
        }
        for (auto it = bad.rbegin(); it != bad.rend(); ++it) {
            tris[*it] = tris.back();
            tris.pop_back();
        }
        for (const auto& [key, entry] : cavity) {
            if (entry.second != 1) continue;  // interior to the cavity
            const auto [a, b] = entry.first;
            if (orient2d(pts[a], pts[b], p) <= 0) continue;  // degenerate sliver
            tris.push_back(Tri{{a, b, idx}});
        }
    }

    // drop super-triangle attachments and exact degenerates
    std::vector<Tri> kept;
    for (const auto& t : tris) {
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        const double area2 = orient2d(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
        if (area2 <= 0) continue;
        kept.push_back(t);
    }
    if (kept.empty()) throw GeometryError("degenerate point set: no valid triangles");

    // Lawson correction for any boundary artifacts of the finite super triangle
    for (int pass = 0; pass < 64; ++pass) {
        const size_t flips = flip_sweep(pts, kept, [&](uint64_t u, uint64_t v, uint64_t w, uint64_t z) {
            (void)u;
            (void)v;
            return strictly_in_circumcircle(pts[u], pts[v], pts[w], pts[z]);
        });
        if (flips == 0) break;
    }

    // canonical diagonal for cocircular quads: keep the one touching the
    // lexicographically smallest corner (translation covariant, so structured
    // grids triangulate uniformly)
    for (int pass = 0; pass < 64; ++pass) {
        const size_t flips = flip_sweep(pts, kept, [&](uint64_t u, uint64_t v, uint64_t w, uint64_t z) {
            if (!cocircular(pts[u], pts[v], pts[w], pts[z])) return false;
            uint64_t best = u;
            for (const uint64_t cand : {v, w, z}) {
                if (lex_less(pts[cand], pts[best])) best = cand;
            }
            return best == w || best == z;  // smallest corner must be on the diagonal
        });
        if (flips == 0) break;
    }

    std::vector<std::array<uint64_t, 3>> out;
    out.reserve(kept.size());
    for (const auto& t : kept) {
        // rotate smallest index first, orientation preserved
        int s = 0;
        for (int k = 1; k < 3; ++k) {
            if (t.v[k] < t.v[s]) s = k;
        }
        out.push_back({t.v[s], t.v[(s + 1) % 3], t.v[(s + 2) % 3]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

PointSet sample_points(const Domain& domain, size_t n_interior, uint64_t seed) {
    if (!domain.closed_loop()) {
        throw GeometryError("sample_points: boundary descriptor is not a closed loop");
    }
    Rng rng(seed);
    PointSet ps;

    if (domain.periodic()) {
        ps.points.reserve(n_interior);
        for (size_t i = 0; i < n_interior; ++i) {
            ps.points.push_back({rng.uniform(0.0, domain.side), rng.uniform(0.0, domain.side)});
        }
        ps.boundary_flag.assign(n_interior, 0);
        return ps;
    }

    const double area = domain.area();
    const double spacing = std::sqrt(area / static_cast<double>(std::max<size_t>(n_interior, 1)));

    // boundary nodes: arclength-equispaced per segment, start corner included
    for (const auto& seg : domain.segments) {
        const auto poly = seg.polyline();
        std::vector<double> cum(poly.size(), 0.0);
        for (size_t i = 1; i < poly.size(); ++i) {
            cum[i] = cum[i - 1] + (poly[i] - poly[i - 1]).norm();
        }
        const double len = cum.back();
        const int k = std::max(1, static_cast<int>(std::llround(len / spacing)));
        size_t cursor = 1;
        for (int i = 0; i < k; ++i) {
            const double target = len * static_cast<double>(i) / k;
            while (cursor < poly.size() - 1 && cum[cursor] < target) ++cursor;
            const double t0 = cum[cursor - 1], t1 = cum[cursor];
            const double f = (t1 > t0) ? (target - t0) / (t1 - t0) : 0.0;
            ps.points.push_back(poly[cursor - 1] + (poly[cursor] - poly[cursor - 1]) * f);
            ps.boundary_flag.push_back(1);
        }
    }

    // interior nodes: uniform rejection sampling, kept away from the boundary
    // so flags stay an exact geometric predicate and triangles stay usable
    Vec2 lo, hi;
    domain.bounding_box(lo, hi);
    const double margin = 0.3 * spacing;
    size_t accepted = 0, attempts = 0;
    const size_t max_attempts = 1000 * (n_interior + 1);
    while (accepted < n_interior) {
        if (++attempts > max_attempts) {
            throw GeometryError("sample_points: rejection sampling failed to place points");
        }
        const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (!domain.contains(p)) continue;
        if (domain.boundary_distance(p) <= margin) continue;
        ps.points.push_back(p);
        ps.boundary_flag.push_back(0);
        ++accepted;
    }
    return ps;
}

Graph triangulate(const PointSet& points, const Domain& domain) {
    auto tris = delaunay_triangles(points.points);

    Graph g;
    g.positions = points.points;
    g.boundary_flag = points.boundary_flag;

    for (const auto& t : tris) {
        const Vec2 centroid = (points.points[t[0]] + points.points[t[1]] + points.points[t[2]]) *
                              (1.0 / 3.0);
        if (!domain.periodic() && !domain.contains(centroid)) continue;
        g.triangles.push_back(t);
    }
    if (g.triangles.empty()) throw GeometryError("triangulate: no triangles inside the domain");

    std::set<std::pair<uint64_t, uint64_t>> edge_set;
    for (const auto& t : g.triangles) {
        for (int k = 0; k < 3; ++k) {
            edge_set.emplace(t[k], t[(k + 1) % 3]);
            edge_set.emplace(t[(k + 1) % 3], t[k]);
        }
    }
    g.edges.assign(edge_set.begin(), edge_set.end());
    g.edge_shift.assign(g.edges.size(), Vec2{0.0, 0.0});
    return g;
}

Graph stitch_periodic(const Graph& g, const Domain& domain) {
    if (!domain.periodic()) throw GeometryError("stitch_periodic requires a periodic domain");
    const double side = domain.side;
    const size_t n = g.node_count();

    std::vector<Vec2> tiled;
    tiled.reserve(9 * n);
    std::vector<std::pair<int, int>> copy_offset;
    for (int ay = -1; ay <= 1; ++ay) {
        for (int ax = -1; ax <= 1; ++ax) {
            copy_offset.emplace_back(ax, ay);
            for (const Vec2 p : g.positions) {
                tiled.push_back({p.x + ax * side, p.y + ay * side});
            }
        }
    }
    const size_t center_copy = 4;  // (ax, ay) == (0, 0)

    const auto tris = delaunay_triangles(tiled);

    const auto copy_of = [n](uint64_t idx) { return idx / n; };
    const auto orig_of = [n](uint64_t idx) { return idx % n; };

    std::set<std::pair<uint64_t, uint64_t>> pairs;
    std::set<std::array<uint64_t, 3>> tri_set;
    for (const auto& t : tris) {
        const bool central = copy_of(t[0]) == center_copy || copy_of(t[1]) == center_copy ||
                             copy_of(t[2]) == center_copy;
        if (!central) continue;
        for (int k = 0; k < 3; ++k) {
            const uint64_t p = t[k], q = t[(k + 1) % 3];
            if (copy_of(p) != center_copy && copy_of(q) != center_copy) continue;
            const uint64_t i = orig_of(p), j = orig_of(q);
            if (i == j) continue;  // a node meeting its own periodic image; drop
            pairs.emplace(std::min(i, j), std::max(i, j));
        }
        std::array<uint64_t, 3> key{orig_of(t[0]), orig_of(t[1]), orig_of(t[2])};
        // rotate smallest first, orientation preserved
        int s = 0;
        for (int k = 1; k < 3; ++k) {
            if (key[k] < key[s]) s = k;
        }
        if (key[0] == key[1] || key[1] == key[2] || key[0] == key[2]) continue;
        tri_set.insert({key[s], key[(s + 1) % 3], key[(s + 2) % 3]});
    }

    Graph out;
    out.positions = g.positions;
    out.boundary_flag.assign(n, 0);
    out.triangles.assign(tri_set.begin(), tri_set.end());

    // each kept pair gets the minimum-image shift; ties resolved lexicographically
    const auto min_image_shift = [&](uint64_t i, uint64_t j) {
        const Vec2 d0 = g.positions[j] - g.positions[i];
        Vec2 best{0, 0};
        double best_norm = std::numeric_limits<double>::max();
        for (int ay = -1; ay <= 1; ++ay) {
            for (int ax = -1; ax <= 1; ++ax) {
                const Vec2 s{ax * side, ay * side};
                const double nrm = (d0 + s).norm();
                if (nrm < best_norm - 1e-15 ||
                    (std::abs(nrm - best_norm) <= 1e-15 &&
                     (s.x < best.x || (s.x == best.x && s.y < best.y)))) {
                    best_norm = nrm;
                    best = s;
                }
            }
        }
        return best;
    };

    std::vector<std::pair<uint64_t, uint64_t>> edges;
    std::vector<Vec2> shifts;
    for (const auto& [i, j] : pairs) {
        const Vec2 s = min_image_shift(i, j);
        edges.emplace_back(i, j);
        shifts.push_back(s);
        edges.emplace_back(j, i);
        shifts.push_back({-s.x, -s.y});
    }
    std::vector<size_t> idx(edges.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return edges[a] < edges[b]; });
    out.edges.reserve(edges.size());
    out.edge_shift.reserve(edges.size());
    for (const size_t k : idx) {
        out.edges.push_back(edges[k]);
        out.edge_shift.push_back(shifts[k]);
    }
    return out;
}

PointSet structured_unit_square_points(int divisions) {
    PointSet ps;
    const int np = divisions + 1;
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            ps.points.push_back(
                {static_cast<double>(i) / divisions, static_cast<double>(j) / divisions});
            ps.boundary_flag.push_back(i == 0 || j == 0 || i == divisions || j == divisions ? 1
                                                                                            : 0);
        }
    }
    return ps;
}

}  // namespace meshpde
