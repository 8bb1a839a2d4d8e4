#include "meshpde/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "meshpde/io.hpp"

namespace meshpde::raster {

RasterImage rasterize_field(const Graph& g, const Eigen::VectorXd& field, int width, int height) {
    if (field.size() != static_cast<Eigen::Index>(g.node_count())) {
        throw RasterError("field length " + std::to_string(field.size()) + " != node count " +
                          std::to_string(g.node_count()));
    }
    if (width < 1 || height < 1) throw RasterError("raster size must be positive");
    if (g.triangles.empty()) throw RasterError("graph has no triangles to rasterize");

    RasterImage img;
    img.width = width;
    img.height = height;
    img.values = Eigen::MatrixXd::Zero(height, width);
    img.covered.setZero(height, width);
    img.lo = img.hi = g.positions[0];
    for (const Vec2 p : g.positions) {
        img.lo.x = std::min(img.lo.x, p.x);
        img.lo.y = std::min(img.lo.y, p.y);
        img.hi.x = std::max(img.hi.x, p.x);
        img.hi.y = std::max(img.hi.y, p.y);
    }

    const double dx = (img.hi.x - img.lo.x) / width;
    const double dy = (img.hi.y - img.lo.y) / height;

    for (const auto& tri : g.triangles) {
        const Vec2 a = g.positions[tri[0]], b = g.positions[tri[1]], c = g.positions[tri[2]];
        const double area2 = cross(b - a, c - a);
        if (area2 == 0.0) continue;

        // pixel-rows/cols overlapped by the triangle bounding box
        const double min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
        const double min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
        const int c0 = std::clamp(static_cast<int>((min_x - img.lo.x) / dx - 1), 0, width - 1);
        const int c1 = std::clamp(static_cast<int>((max_x - img.lo.x) / dx + 1), 0, width - 1);
        const int r0 = std::clamp(static_cast<int>((img.hi.y - max_y) / dy - 1), 0, height - 1);
        const int r1 = std::clamp(static_cast<int>((img.hi.y - min_y) / dy + 1), 0, height - 1);

        for (int r = r0; r <= r1; ++r) {
            for (int col = c0; col <= c1; ++col) {
                const Vec2 p = img.pixel_center(r, col);
                const double wa = cross(b - p, c - p) / area2;
                const double wb = cross(c - p, a - p) / area2;
                const double wc = cross(a - p, b - p) / area2;
                const double eps = -1e-12;
                if (wa < eps || wb < eps || wc < eps) continue;
                img.values(r, col) = wa * field[static_cast<Eigen::Index>(tri[0])] +
                                     wb * field[static_cast<Eigen::Index>(tri[1])] +
                                     wc * field[static_cast<Eigen::Index>(tri[2])];
                img.covered(r, col) = 1;
            }
        }
    }
    return img;
}

std::array<uint8_t, 3> colormap(double t) {
    // five fixed stops, linear interpolation; kept byte-exact so images diff
    // cleanly in tests
    static constexpr std::array<std::array<double, 3>, 5> stops = {{
        {0.0, 0.0, 0.5},   // dark blue
        {0.0, 0.5, 1.0},   // blue
        {0.0, 0.8, 0.3},   // green
        {1.0, 0.9, 0.0},   // yellow
        {0.9, 0.1, 0.0},   // red
    }};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * (stops.size() - 1);
    const auto i = std::min(static_cast<size_t>(pos), stops.size() - 2);
    const double f = pos - static_cast<double>(i);
    std::array<uint8_t, 3> out{};
    for (int ch = 0; ch < 3; ++ch) {
        const double v = stops[i][ch] * (1.0 - f) + stops[i + 1][ch] * f;
        out[ch] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    return out;
}

void write_ppm(const RasterImage& img, double vmin, double vmax,
               const std::filesystem::path& path) {
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                         "\n255\n";
    std::vector<uint8_t> data(header.begin(), header.end());
    data.reserve(data.size() + static_cast<size_t>(img.width) * img.height * 3);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            std::array<uint8_t, 3> px{0, 0, 0};
            if (img.covered(r, c)) px = colormap((img.values(r, c) - vmin) / span);
            data.insert(data.end(), px.begin(), px.end());
        }
    }
    io::write_file_atomic(path, data);
}

void write_field_csv(const RasterImage& img, const std::filesystem::path& path) {
    std::string out = "x,y,value\n";
    char buf[96];
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            if (!img.covered(r, c)) continue;
            const Vec2 p = img.pixel_center(r, c);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x, p.y, img.values(r, c));
            out += buf;
        }
    }
    io::write_text_atomic(path, out);
}

RasterImage triptych(const RasterImage& prediction, const RasterImage& truth) {
    if (prediction.width != truth.width || prediction.height != truth.height) {
        throw RasterError("triptych: panel size mismatch");
    }
    RasterImage out;
    out.width = prediction.width * 3;
    out.height = prediction.height;
    out.lo = prediction.lo;
    out.hi = prediction.hi;
    out.values = Eigen::MatrixXd::Zero(out.height, out.width);
    out.covered.setZero(out.height, out.width);
    for (int r = 0; r < out.height; ++r) {
        for (int c = 0; c < prediction.width; ++c) {
            out.values(r, c) = prediction.values(r, c);
            out.covered(r, c) = prediction.covered(r, c);
            out.values(r, c + prediction.width) = truth.values(r, c);
            out.covered(r, c + prediction.width) = truth.covered(r, c);
            const bool both = prediction.covered(r, c) && truth.covered(r, c);
            out.values(r, c + 2 * prediction.width) =
                both ? std::abs(prediction.values(r, c) - truth.values(r, c)) : 0.0;
            out.covered(r, c + 2 * prediction.width) = both ? 1 : 0;
        }
    }
    return out;
}

}  // namespace meshpde::raster
