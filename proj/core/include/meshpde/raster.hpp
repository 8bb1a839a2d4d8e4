#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "meshpde/graph.hpp"

namespace meshpde::raster {

struct RasterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nodal field sampled onto a regular pixel grid via barycentric
/// interpolation over the graph triangles. Pixels outside every triangle are
/// flagged in `covered`. Pixel (row, col) covers the point
/// (lo + (col + 0.5) dx, hi_y - (row + 0.5) dy), image rows top-down.
struct RasterImage {
    int width = 0, height = 0;
    Eigen::MatrixXd values;                  // height x width
    Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> covered;
    Vec2 lo, hi;                             // world-space extent

    Vec2 pixel_center(int row, int col) const {
        const double dx = (hi.x - lo.x) / width;
        const double dy = (hi.y - lo.y) / height;
        return {lo.x + (col + 0.5) * dx, hi.y - (row + 0.5) * dy};
    }
};

RasterImage rasterize_field(const Graph& g, const Eigen::VectorXd& field, int width, int height);

/// Fixed five-stop colormap (documented in the README): dark blue, blue,
/// green, yellow, red over [vmin, vmax]; uncovered pixels are black.
void write_ppm(const RasterImage& img, double vmin, double vmax,
               const std::filesystem::path& path);

/// x,y,value rows for covered pixels.
void write_field_csv(const RasterImage& img, const std::filesystem::path& path);

/// Side-by-side prediction | truth | absolute error panels sharing the
/// prediction/truth color scale; the error panel is scaled to its own max.
RasterImage triptych(const RasterImage& prediction, const RasterImage& truth);

std::array<uint8_t, 3> colormap(double t);  // t in [0,1]

}  // namespace meshpde::raster
