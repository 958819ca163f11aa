#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sceneret/imaging.hpp"
#include "sceneret/io_util.hpp"

namespace sceneret {

enum class BlockKind : std::uint8_t {
    ColHist,
    ColMom,
    DWT,
    PColMom_L0,
    PColMom_L1,
    PColMom_L2,
    WPColMom_L0,
    WPColMom_L1,
    WPColMom_L2,
};

std::string_view block_kind_name(BlockKind kind);
/// Pyramid level of a (weighted) pyramidal kind, -1 for the others.
int block_pyramid_level(BlockKind kind);

/// A raw (unnormalized) colour or texture descriptor.
struct FeatureBlock {
    BlockKind kind = BlockKind::ColHist;
    Eigen::VectorXd values;

    Eigen::Index dim() const { return values.size(); }
};

/// Colour source for the extractors: three HSV planes or one grey plane.
/// Grey inputs drop hue and saturation entirely rather than zero-filling.
class ColorPlanes {
public:
    explicit ColorPlanes(const HsvImage& hsv);
    /// `grey` must have exactly one channel.
    explicit ColorPlanes(const Image& grey);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return static_cast<int>(planes_.size()); }
    bool is_hsv() const { return planes_.size() == 3; }
    const Plane& plane(int c) const { return *planes_[static_cast<std::size_t>(c)]; }

private:
    int width_;
    int height_;
    std::vector<const Plane*> planes_;
};

inline constexpr int kHueBins = 36;
inline constexpr int kSaturationBins = 32;
inline constexpr int kValueBins = 16;
inline constexpr int kGreyBins = 36;

/// Per-channel bin counts over the cell: 36 hue + 32 saturation + 16 value
/// (84-D), or 36 intensity bins for grey.
FeatureBlock color_histogram(const ColorPlanes& img, const CellBounds& bounds);

/// (mean, population std) per channel: 6-D for HSV, 2-D for grey.
FeatureBlock color_moments(const ColorPlanes& img, const CellBounds& bounds);

/// One-level 2-D Haar transform per channel with (mean |c|, std c) for the
/// LH, HL and HH detail bands: 18-D for HSV, 6-D for grey. Odd-sized
/// regions are padded by replicating their last row/column.
FeatureBlock dwt_texture(const ColorPlanes& img, const CellBounds& bounds);

/// Color moments of every pyramid cell up to max_level, concatenated in
/// pyramid_cells order.
FeatureBlock pyramidal_color_moments(const ColorPlanes& img, int max_level);

/// Scales each cell's sub-vector of a pyramidal block by its level weight.
/// The result has the weighted kind and the same dimension.
FeatureBlock weight_pyramid(const FeatureBlock& block, std::span<const double> level_weights);

/// Default level weights (1/4, 1/4, 1/2) for a level-2 pyramid.
std::vector<double> default_pyramid_weights(int max_level);

/// Expected block dimension for a kind and channel count (1 or 3).
int block_dim(BlockKind kind, int channels);

/// Haar detail coefficients of one region, exposed for testing.
struct HaarBands {
    Eigen::MatrixXd lh;  // vertical differences (responds to horizontal edges)
    Eigen::MatrixXd hl;  // horizontal differences (responds to vertical edges)
    Eigen::MatrixXd hh;  // diagonal differences
};

/// Orthonormal one-level Haar analysis of `region` (replicate-padded to even size).
template <typename Derived>
HaarBands haar_details(const Eigen::MatrixBase<Derived>& region) {
    const Eigen::Index rows = region.rows();
    const Eigen::Index cols = region.cols();
    const Eigen::Index hr = (rows + 1) / 2;
    const Eigen::Index hc = (cols + 1) / 2;
    auto px = [&](Eigen::Index r, Eigen::Index c) -> double {
        return static_cast<double>(region(std::min(r, rows - 1), std::min(c, cols - 1)));
    };
    HaarBands out{Eigen::MatrixXd(hr, hc), Eigen::MatrixXd(hr, hc), Eigen::MatrixXd(hr, hc)};
    for (Eigen::Index i = 0; i < hr; ++i) {
        for (Eigen::Index j = 0; j < hc; ++j) {
            const double a = px(2 * i, 2 * j), b = px(2 * i, 2 * j + 1);
            const double c = px(2 * i + 1, 2 * j), d = px(2 * i + 1, 2 * j + 1);
            out.lh(i, j) = (a + b - c - d) / 2.0;
            out.hl(i, j) = (a - b + c - d) / 2.0;
            out.hh(i, j) = (a - b - c + d) / 2.0;
        }
    }
    return out;
}

/// Binary record `(kind u8, dim u32, dim x f64)`, little-endian.
void write_block(io::ByteWriter& out, const FeatureBlock& block);
FeatureBlock read_block(io::ByteReader& in);

}  // namespace sceneret
