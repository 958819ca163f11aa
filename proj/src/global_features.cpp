#include "sceneret/global_features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sceneret/error.hpp"

namespace sceneret {

std::string_view block_kind_name(BlockKind kind) {
    switch (kind) {
        case BlockKind::ColHist: return "ColHist";
        case BlockKind::ColMom: return "ColMom";
        case BlockKind::DWT: return "DWT";
        case BlockKind::PColMom_L0: return "PColMom_L0";
        case BlockKind::PColMom_L1: return "PColMom_L1";
        case BlockKind::PColMom_L2: return "PColMom_L2";
        case BlockKind::WPColMom_L0: return "WPColMom_L0";
        case BlockKind::WPColMom_L1: return "WPColMom_L1";
        case BlockKind::WPColMom_L2: return "WPColMom_L2";
    }
    return "?";
}

int block_pyramid_level(BlockKind kind) {
    switch (kind) {
        case BlockKind::PColMom_L0:
        case BlockKind::WPColMom_L0: return 0;
        case BlockKind::PColMom_L1:
        case BlockKind::WPColMom_L1: return 1;
        case BlockKind::PColMom_L2:
        case BlockKind::WPColMom_L2: return 2;
        default: return -1;
    }
}

int block_dim(BlockKind kind, int channels) {
    const bool hsv = channels == 3;
    switch (kind) {
        case BlockKind::ColHist: return hsv ? kHueBins + kSaturationBins + kValueBins : kGreyBins;
        case BlockKind::ColMom: return 2 * channels;
        case BlockKind::DWT: return 6 * channels;
        default: return 2 * channels * pyramid_cell_count(block_pyramid_level(kind));
    }
}

ColorPlanes::ColorPlanes(const HsvImage& hsv)
    : width_(hsv.width), height_(hsv.height), planes_{&hsv.hue, &hsv.saturation, &hsv.value} {}

ColorPlanes::ColorPlanes(const Image& grey) : width_(grey.width), height_(grey.height) {
    if (grey.channels() != 1) throw Error("ColorPlanes: colour images must be converted to HSV first");
    planes_.push_back(&grey.planes[0]);
}

namespace {

void check_bounds(const ColorPlanes& img, const CellBounds& b) {
    if (b.empty()) throw Error("empty region");
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > img.width() || b.y1 > img.height()) throw Error("region outside image");
}

auto region_of(const Plane& p, const CellBounds& b) { return p.block(b.y0, b.x0, b.height(), b.width()); }

}  // namespace

FeatureBlock color_histogram(const ColorPlanes& img, const CellBounds& bounds) {
    check_bounds(img, bounds);
    std::vector<int> bins = img.is_hsv() ? std::vector<int>{kHueBins, kSaturationBins, kValueBins}
                                         : std::vector<int>{kGreyBins};
    FeatureBlock out{BlockKind::ColHist, Eigen::VectorXd::Zero(block_dim(BlockKind::ColHist, img.channels()))};
    int offset = 0;
    for (int c = 0; c < img.channels(); ++c) {
        const int n = bins[static_cast<std::size_t>(c)];
        const auto region = region_of(img.plane(c), bounds);
        for (Eigen::Index y = 0; y < region.rows(); ++y)
            for (Eigen::Index x = 0; x < region.cols(); ++x) {
                const int bin = std::clamp(static_cast<int>(std::floor(region(y, x) * n)), 0, n - 1);
                out.values[offset + bin] += 1.0;
            }
        offset += n;
    }
    return out;
}

FeatureBlock color_moments(const ColorPlanes& img, const CellBounds& bounds) {
    check_bounds(img, bounds);
    FeatureBlock out{BlockKind::ColMom, Eigen::VectorXd(2 * img.channels())};
    const double n = static_cast<double>(bounds.area());
    for (int c = 0; c < img.channels(); ++c) {
        const auto region = region_of(img.plane(c), bounds);
        const double mean = region.sum() / n;
        const double var = (region.array() - mean).square().sum() / n;
        out.values[2 * c] = mean;
        out.values[2 * c + 1] = std::sqrt(var);
    }
    return out;
}

FeatureBlock dwt_texture(const ColorPlanes& img, const CellBounds& bounds) {
    check_bounds(img, bounds);
    if (bounds.width() < 2 || bounds.height() < 2) throw Error("DWT region smaller than 2x2");
    FeatureBlock out{BlockKind::DWT, Eigen::VectorXd(6 * img.channels())};
    for (int c = 0; c < img.channels(); ++c) {
        const HaarBands bands = haar_details(region_of(img.plane(c), bounds));
        int k = 6 * c;
        for (const Eigen::MatrixXd* band : {&bands.lh, &bands.hl, &bands.hh}) {
            const double n = static_cast<double>(band->size());
            const double mean = band->sum() / n;
            out.values[k++] = band->cwiseAbs().sum() / n;
            out.values[k++] = std::sqrt((band->array() - mean).square().sum() / n);
        }
    }
    return out;
}

FeatureBlock pyramidal_color_moments(const ColorPlanes& img, int max_level) {
    const auto cells = pyramid_cells(img.width(), img.height(), max_level);
    const int per_cell = 2 * img.channels();
    FeatureBlock out;
    out.kind = max_level == 0 ? BlockKind::PColMom_L0 : max_level == 1 ? BlockKind::PColMom_L1 : BlockKind::PColMom_L2;
    out.values.resize(static_cast<Eigen::Index>(cells.size()) * per_cell);
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.values.segment(static_cast<Eigen::Index>(i) * per_cell, per_cell) = color_moments(img, cells[i]).values;
    return out;
}

FeatureBlock weight_pyramid(const FeatureBlock& block, std::span<const double> level_weights) {
    const int level = block_pyramid_level(block.kind);
    if (level < 0) throw Error("weight_pyramid needs a pyramidal block, got " + std::string(block_kind_name(block.kind)));
    if (static_cast<int>(level_weights.size()) != level + 1)
        throw Error("weight_pyramid: expected " + std::to_string(level + 1) + " level weights, got " +
                    std::to_string(level_weights.size()));
    const int cells = pyramid_cell_count(level);
    if (block.dim() % cells != 0) throw Error("weight_pyramid: block dimension not divisible by cell count");
    const Eigen::Index per_cell = block.dim() / cells;

    FeatureBlock out = block;
    out.kind = static_cast<BlockKind>(static_cast<int>(BlockKind::WPColMom_L0) + level);
    Eigen::Index cell = 0;
    for (int l = 0; l <= level; ++l) {
        const int n = (1 << l) * (1 << l);
        for (int i = 0; i < n; ++i, ++cell) out.values.segment(cell * per_cell, per_cell) *= level_weights[static_cast<std::size_t>(l)];
    }
    return out;
}

std::vector<double> default_pyramid_weights(int max_level) {
    if (max_level < 0 || max_level > 2) throw Error("unsupported pyramid level " + std::to_string(max_level));
    // Spatial-pyramid-matching weights: level 0 gets 1/2^L, level l gets 1/2^(L-l+1).
    std::vector<double> w;
    for (int l = 0; l <= max_level; ++l)
        w.push_back(l == 0 ? 1.0 / (1 << max_level) : 1.0 / (1 << (max_level - l + 1)));
    return w;
}

void write_block(io::ByteWriter& out, const FeatureBlock& block) {
    out.u8(static_cast<std::uint8_t>(block.kind));
    out.u32(static_cast<std::uint32_t>(block.dim()));
    for (Eigen::Index i = 0; i < block.dim(); ++i) out.f64(block.values[i]);
}

FeatureBlock read_block(io::ByteReader& in) {
    const std::uint8_t tag = in.u8();
    if (tag > static_cast<std::uint8_t>(BlockKind::WPColMom_L2)) throw Error("unknown feature block tag " + std::to_string(tag));
    FeatureBlock block;
    block.kind = static_cast<BlockKind>(tag);
    const std::uint32_t dim = in.u32();
    block.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) block.values[i] = in.f64();
    return block;
}

}  // namespace sceneret
