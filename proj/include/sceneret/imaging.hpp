#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sceneret {

/// One image channel, H rows by W columns, row-major.
template <typename Scalar>
using PlaneT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Plane = PlaneT<double>;

/// Decoded raster: 1 (grey) or 3 (RGB) planes with samples in [0,1].
template <typename Scalar>
struct BasicImage {
    int width = 0;
    int height = 0;
    std::vector<PlaneT<Scalar>> planes;

    int channels() const { return static_cast<int>(planes.size()); }
    bool is_grey() const { return planes.size() == 1; }
};
using Image = BasicImage<double>;

/// Hue in [0,1), saturation and value in [0,1].
struct HsvImage {
    int width = 0;
    int height = 0;
    Plane hue;
    Plane saturation;
    Plane value;
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1). `level` is the pyramid
/// level for pyramid cells and -1 for plain grid cells.
struct CellBounds {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    int level = -1;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long area() const { return static_cast<long>(width()) * height(); }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    /// Membership of a continuous position, by the pixel that contains it.
    bool contains(double x, double y) const;

    bool operator==(const CellBounds&) const = default;
};

enum class Half : std::uint8_t { Upper, Lower };

Image make_image(int width, int height, int channels, double fill = 0.0);

/// Decodes PNG or JPEG bytes; 8-bit samples map to v/255.
Image decode_image(std::span<const unsigned char> bytes);
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (grey or RGB), rounding samples to v*255.
void write_png(const Image& img, const std::filesystem::path& path);

HsvImage to_hsv(const Image& img);

/// The V plane of an RGB image, or the grey plane itself.
Image grey_of(const Image& img);

/// rows x cols cells, row-major. Each axis uses a base size of dim/n with
/// the remainder handed out one pixel each to the last cells.
std::vector<CellBounds> grid_partition(int width, int height, int rows, int cols);

/// Cells of levels 0..max_level (max_level in {0,1,2}); level l is a
/// 2^l x 2^l grid. Ordered by level, then row-major.
std::vector<CellBounds> pyramid_cells(int width, int height, int max_level);

constexpr int pyramid_cell_count(int max_level) {
    int n = 0;
    for (int l = 0; l <= max_level; ++l) n += (1 << l) * (1 << l);
    return n;
}

/// Upper iff y < floor(H/2).
Half half_of(int y, int height);

/// A grid cell lies in the upper half iff it ends at or above the midline.
Half half_of_cell(const CellBounds& cell, int height);

}  // namespace sceneret
