#include "sceneret/keypoints.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "sceneret/error.hpp"

namespace sceneret {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBorder = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescriptorWidth = 4;
constexpr int kDescriptorBins = 8;
constexpr double kDescriptorScaleFactor = 3.0;
constexpr double kDescriptorClamp = 0.2;

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

Plane downsample(const Plane& src) {
    const Eigen::Index h = (src.rows() + 1) / 2;
    const Eigen::Index w = (src.cols() + 1) / 2;
    Plane out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) out(y, x) = src(2 * y, 2 * x);
    return out;
}

Plane upsample_bilinear(const Plane& src) {
    const Eigen::Index h = src.rows() * 2;
    const Eigen::Index w = src.cols() * 2;
    Plane out(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        const double fy = std::min<double>(y * 0.5, static_cast<double>(src.rows() - 1));
        const Eigen::Index y0 = static_cast<Eigen::Index>(fy);
        const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, src.rows() - 1);
        const double ty = fy - static_cast<double>(y0);
        for (Eigen::Index x = 0; x < w; ++x) {
            const double fx = std::min<double>(x * 0.5, static_cast<double>(src.cols() - 1));
            const Eigen::Index x0 = static_cast<Eigen::Index>(fx);
            const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, src.cols() - 1);
            const double tx = fx - static_cast<double>(x0);
            out(y, x) = (1 - ty) * ((1 - tx) * src(y0, x0) + tx * src(y0, x1)) +
                        ty * ((1 - tx) * src(y1, x0) + tx * src(y1, x1));
        }
    }
    return out;
}

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a -= kTwoPi;
    return a;
}

}  // namespace

Plane gaussian_blur(const Plane& src, double sigma) {
    if (sigma <= 0.0) return src;
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * i * i / (sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        total += v;
    }
    for (auto& v : kernel) v /= total;

    const int h = static_cast<int>(src.rows());
    const int w = static_cast<int>(src.cols());
    Plane tmp(h, w);
    std::vector<double> line;
    line.resize(static_cast<std::size_t>(w + 2 * radius));
    for (int y = 0; y < h; ++y) {
        for (int x = -radius; x < w + radius; ++x) line[static_cast<std::size_t>(x + radius)] = src(y, reflect101(x, w));
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) acc += kernel[static_cast<std::size_t>(k)] * line[static_cast<std::size_t>(x + k)];
            tmp(y, x) = acc;
        }
    }
    Plane out(h, w);
    line.resize(static_cast<std::size_t>(h + 2 * radius));
    for (int x = 0; x < w; ++x) {
        for (int y = -radius; y < h + radius; ++y) line[static_cast<std::size_t>(y + radius)] = tmp(reflect101(y, h), x);
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) acc += kernel[static_cast<std::size_t>(k)] * line[static_cast<std::size_t>(y + k)];
            out(y, x) = acc;
        }
    }
    return out;
}

ScaleSpace::ScaleSpace(const Image& grey, const DetectorParams& params)
    : params_(params), width_(grey.width), height_(grey.height) {
    if (grey.channels() != 1) throw Error("scale space requires a grey image");
    if (params.intervals < 1) throw Error("detector needs at least one interval per octave");
    if (params.sigma <= params.assumed_blur) throw Error("detector sigma must exceed the assumed input blur");
    if (std::min(grey.width, grey.height) < params.min_octave_size) return;

    Plane base = grey.planes[0];
    double input_blur = params.assumed_blur;
    if (params.double_image) {
        base = upsample_bilinear(base);
        input_blur *= 2.0;
    }
    base = gaussian_blur(base, std::sqrt(params.sigma * params.sigma - input_blur * input_blur));

    const int min_dim = static_cast<int>(std::min(base.rows(), base.cols()));
    const int n_octaves =
        static_cast<int>(std::floor(std::log2(static_cast<double>(min_dim) / params.min_octave_size))) + 1;

    const int S = params.intervals;
    const double k = std::pow(2.0, 1.0 / S);
    std::vector<double> increments(static_cast<std::size_t>(S + 3), 0.0);
    for (int i = 1; i < S + 3; ++i) {
        const double prev = params.sigma * std::pow(k, i - 1);
        increments[static_cast<std::size_t>(i)] = prev * std::sqrt(k * k - 1.0);
    }

    for (int o = 0; o < n_octaves; ++o) {
        std::vector<Plane> layers;
        layers.reserve(static_cast<std::size_t>(S + 3));
        layers.push_back(o == 0 ? base : downsample(gaussians_.back()[static_cast<std::size_t>(S)]));
        for (int i = 1; i < S + 3; ++i)
            layers.push_back(gaussian_blur(layers.back(), increments[static_cast<std::size_t>(i)]));
        std::vector<Plane> dogs;
        dogs.reserve(static_cast<std::size_t>(S + 2));
        for (int i = 0; i < S + 2; ++i) dogs.push_back(layers[static_cast<std::size_t>(i + 1)] - layers[static_cast<std::size_t>(i)]);
        gaussians_.push_back(std::move(layers));
        dogs_.push_back(std::move(dogs));
    }
}

const Plane& ScaleSpace::gaussian(int octave, int layer) const {
    return gaussians_.at(static_cast<std::size_t>(octave)).at(static_cast<std::size_t>(layer));
}

const Plane& ScaleSpace::dog(int octave, int layer) const {
    return dogs_.at(static_cast<std::size_t>(octave)).at(static_cast<std::size_t>(layer));
}

double ScaleSpace::octave_step(int octave) const {
    return std::ldexp(1.0, octave) * (params_.double_image ? 0.5 : 1.0);
}

namespace {

bool is_extremum(const ScaleSpace& space, int o, int s, int y, int x) {
    const double v = space.dog(o, s)(y, x);
    const bool maximum = v > 0.0;
    for (int ds = -1; ds <= 1; ++ds) {
        const Plane& d = space.dog(o, s + ds);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (ds == 0 && dy == 0 && dx == 0) continue;
                const double n = d(y + dy, x + dx);
                if (maximum ? n >= v : n <= v) return false;
            }
    }
    return true;
}

// Quadratic sub-pixel/sub-scale refinement; returns false when the fit
// diverges, leaves the valid region, or fails the contrast/edge tests.
bool refine(const ScaleSpace& space, int o, int& s, int& y, int& x, Eigen::Vector3d& offset, double& contrast) {
    const DetectorParams& p = space.params();
    const int S = p.intervals;
    const Plane& first = space.dog(o, 0);
    const int h = static_cast<int>(first.rows());
    const int w = static_cast<int>(first.cols());

    int step = 0;
    Eigen::Vector3d grad;
    for (; step < p.max_refine_steps; ++step) {
        const Plane& prev = space.dog(o, s - 1);
        const Plane& cur = space.dog(o, s);
        const Plane& next = space.dog(o, s + 1);
        const double v2 = 2.0 * cur(y, x);
        grad << (cur(y, x + 1) - cur(y, x - 1)) * 0.5, (cur(y + 1, x) - cur(y - 1, x)) * 0.5,
            (next(y, x) - prev(y, x)) * 0.5;
        const double dxx = cur(y, x + 1) + cur(y, x - 1) - v2;
        const double dyy = cur(y + 1, x) + cur(y - 1, x) - v2;
        const double dss = next(y, x) + prev(y, x) - v2;
        const double dxy = (cur(y + 1, x + 1) - cur(y + 1, x - 1) - cur(y - 1, x + 1) + cur(y - 1, x - 1)) * 0.25;
        const double dxs = (next(y, x + 1) - next(y, x - 1) - prev(y, x + 1) + prev(y, x - 1)) * 0.25;
        const double dys = (next(y + 1, x) - next(y - 1, x) - prev(y + 1, x) + prev(y - 1, x)) * 0.25;
        Eigen::Matrix3d H;
        H << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
        Eigen::FullPivLU<Eigen::Matrix3d> lu(H);
        if (!lu.isInvertible()) return false;
        offset = -lu.solve(grad);
        if (offset.cwiseAbs().maxCoeff() < 0.5) break;
        if (offset.cwiseAbs().maxCoeff() > 1e6) return false;
        x += static_cast<int>(std::lround(offset[0]));
        y += static_cast<int>(std::lround(offset[1]));
        s += static_cast<int>(std::lround(offset[2]));
        if (s < 1 || s > S || x < kBorder || x >= w - kBorder || y < kBorder || y >= h - kBorder) return false;
    }
    if (step >= p.max_refine_steps) return false;

    const Plane& cur = space.dog(o, s);
    contrast = cur(y, x) + 0.5 * grad.dot(offset);
    if (std::abs(contrast) < p.contrast_threshold) return false;

    const double v2 = 2.0 * cur(y, x);
    const double dxx = cur(y, x + 1) + cur(y, x - 1) - v2;
    const double dyy = cur(y + 1, x) + cur(y - 1, x) - v2;
    const double dxy = (cur(y + 1, x + 1) - cur(y + 1, x - 1) - cur(y - 1, x + 1) + cur(y - 1, x - 1)) * 0.25;
    const double tr = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    const double r = p.edge_ratio;
    if (det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det) return false;
    return true;
}

std::vector<double> dominant_orientations(const Plane& img, int px, int py, double octave_scale) {
    const double sigma = kOrientationSigmaFactor * octave_scale;
    const int radius = static_cast<int>(std::lround(3.0 * sigma));
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    std::array<double, kOrientationBins> hist{};
    for (int i = -radius; i <= radius; ++i) {
        const int y = py + i;
        if (y <= 0 || y >= h - 1) continue;
        for (int j = -radius; j <= radius; ++j) {
            const int x = px + j;
            if (x <= 0 || x >= w - 1) continue;
            const double dx = img(y, x + 1) - img(y, x - 1);
            const double dy = img(y + 1, x) - img(y - 1, x);
            const double weight = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
            const double angle = wrap_angle(std::atan2(dy, dx));
            int bin = static_cast<int>(std::lround(angle * kOrientationBins / kTwoPi));
            if (bin >= kOrientationBins) bin -= kOrientationBins;
            hist[static_cast<std::size_t>(bin)] += weight * std::hypot(dx, dy);
        }
    }
    std::array<double, kOrientationBins> smooth{};
    for (int b = 0; b < kOrientationBins; ++b) {
        auto at = [&](int k) { return hist[static_cast<std::size_t>((k + kOrientationBins) % kOrientationBins)]; };
        smooth[static_cast<std::size_t>(b)] =
            (at(b - 2) + at(b + 2)) * (1.0 / 16) + (at(b - 1) + at(b + 1)) * (4.0 / 16) + at(b) * (6.0 / 16);
    }
    const double peak = *std::max_element(smooth.begin(), smooth.end());
    std::vector<double> out;
    if (peak <= 0.0) return out;
    for (int b = 0; b < kOrientationBins; ++b) {
        const double l = smooth[static_cast<std::size_t>((b + kOrientationBins - 1) % kOrientationBins)];
        const double c = smooth[static_cast<std::size_t>(b)];
        const double r = smooth[static_cast<std::size_t>((b + 1) % kOrientationBins)];
        if (c > l && c > r && c >= kOrientationPeakRatio * peak) {
            const double shift = 0.5 * (l - r) / (l - 2.0 * c + r);
            out.push_back(wrap_angle((b + shift) * kTwoPi / kOrientationBins));
        }
    }
    return out;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const ScaleSpace& space) {
    const DetectorParams& p = space.params();
    const int S = p.intervals;
    const double prethreshold = 0.5 * p.contrast_threshold;
    std::vector<Keypoint> out;
    for (int o = 0; o < space.octaves(); ++o) {
        const int h = static_cast<int>(space.dog(o, 0).rows());
        const int w = static_cast<int>(space.dog(o, 0).cols());
        for (int s = 1; s <= S; ++s) {
            const Plane& d = space.dog(o, s);
            for (int y = kBorder; y < h - kBorder; ++y) {
                for (int x = kBorder; x < w - kBorder; ++x) {
                    if (std::abs(d(y, x)) <= prethreshold || !is_extremum(space, o, s, y, x)) continue;
                    int rs = s, ry = y, rx = x;
                    Eigen::Vector3d offset;
                    double contrast = 0.0;
                    if (!refine(space, o, rs, ry, rx, offset, contrast)) continue;

                    Keypoint kp;
                    const double step = space.octave_step(o);
                    kp.x = (rx + offset[0]) * step;
                    kp.y = (ry + offset[1]) * step;
                    if (kp.x < 0.0 || kp.y < 0.0 || kp.x >= space.image_width() || kp.y >= space.image_height()) continue;
                    kp.octave = o;
                    kp.layer = rs;
                    kp.octave_scale = p.sigma * std::pow(2.0, (rs + offset[2]) / S);
                    kp.scale = kp.octave_scale * step;
                    kp.response = std::abs(contrast);
                    for (double angle : dominant_orientations(space.gaussian(o, rs), rx, ry, kp.octave_scale)) {
                        kp.orientation = angle;
                        out.push_back(kp);
                    }
                }
            }
        }
    }
    return out;
}

std::vector<Keypoint> detect_keypoints(const Image& grey, const DetectorParams& params) {
    return detect_keypoints(ScaleSpace(grey, params));
}

Keypoint keypoint_frame(double x, double y, double scale, double orientation, const DetectorParams& params) {
    if (scale <= 0.0) throw Error("keypoint scale must be positive");
    Keypoint kp;
    kp.x = x;
    kp.y = y;
    kp.scale = scale;
    kp.orientation = wrap_angle(orientation);
    const int S = params.intervals;
    const double base = params.double_image ? 0.5 : 1.0;
    // Fractional position in the stack of layers: octave*S + layer.
    const double position = S * std::log2(scale / (params.sigma * base));
    int octave = static_cast<int>(std::floor((position - 0.5) / S));
    octave = std::max(octave, 0);
    int layer = static_cast<int>(std::lround(position - octave * S));
    layer = std::clamp(layer, 1, S);
    kp.octave = octave;
    kp.layer = layer;
    kp.octave_scale = scale / (std::ldexp(1.0, octave) * base);
    return kp;
}

std::optional<Descriptor> describe(const ScaleSpace& space, const Keypoint& kp) {
    if (kp.octave < 0 || kp.octave >= space.octaves()) return std::nullopt;
    if (kp.layer < 0 || kp.layer > space.params().intervals + 2) return std::nullopt;
    const Plane& img = space.gaussian(kp.octave, kp.layer);
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    const double step = space.octave_step(kp.octave);
    const int px = static_cast<int>(std::lround(kp.x / step));
    const int py = static_cast<int>(std::lround(kp.y / step));

    constexpr int d = kDescriptorWidth;
    constexpr int n = kDescriptorBins;
    const double hist_width = kDescriptorScaleFactor * kp.octave_scale;
    const int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
    if (px - radius < 1 || px + radius > w - 2 || py - radius < 1 || py + radius > h - 2) return std::nullopt;

    const double cos_t = std::cos(kp.orientation) / hist_width;
    const double sin_t = std::sin(kp.orientation) / hist_width;
    const double exp_scale = -1.0 / (d * d * 0.5);
    const double bins_per_rad = n / kTwoPi;

    std::array<double, d * d * n> hist{};
    for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            const double c_rot = j * cos_t + i * sin_t;
            const double r_rot = -j * sin_t + i * cos_t;
            const double rbin = r_rot + d / 2.0 - 0.5;
            const double cbin = c_rot + d / 2.0 - 0.5;
            if (rbin <= -1.0 || rbin >= d || cbin <= -1.0 || cbin >= d) continue;
            const int y = py + i;
            const int x = px + j;
            const double dx = img(y, x + 1) - img(y, x - 1);
            const double dy = img(y + 1, x) - img(y - 1, x);
            const double mag = std::hypot(dx, dy) * std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
            if (mag == 0.0) continue;
            const double obin = wrap_angle(std::atan2(dy, dx) - kp.orientation) * bins_per_rad;

            const int r0 = static_cast<int>(std::floor(rbin));
            const int c0 = static_cast<int>(std::floor(cbin));
            int o0 = static_cast<int>(std::floor(obin));
            const double fr = rbin - r0;
            const double fc = cbin - c0;
            const double fo = obin - o0;
            if (o0 >= n) o0 -= n;
            for (int dr = 0; dr <= 1; ++dr) {
                const int r = r0 + dr;
                if (r < 0 || r >= d) continue;
                const double wr = dr ? fr : 1.0 - fr;
                for (int dc = 0; dc <= 1; ++dc) {
                    const int c = c0 + dc;
                    if (c < 0 || c >= d) continue;
                    const double wc = dc ? fc : 1.0 - fc;
                    for (int dob = 0; dob <= 1; ++dob) {
                        const int o = (o0 + dob) % n;
                        const double wo = dob ? fo : 1.0 - fo;
                        hist[static_cast<std::size_t>((r * d + c) * n + o)] += mag * wr * wc * wo;
                    }
                }
            }
        }
    }

    Descriptor desc = Eigen::Map<const Descriptor>(hist.data());
    const double norm = desc.norm();
    if (!(norm > 0.0)) return std::nullopt;
    desc /= norm;
    desc = desc.cwiseMin(kDescriptorClamp);
    desc /= desc.norm();
    return desc;
}

std::optional<Descriptor> describe(const Image& grey, const Keypoint& kp, const DetectorParams& params) {
    return describe(ScaleSpace(grey, params), kp);
}

LocalFeatures extract_local_features(const Image& img, const DetectorParams& params) {
    const Image grey = grey_of(img);
    const ScaleSpace space(grey, params);
    const std::vector<Keypoint> candidates = detect_keypoints(space);
    LocalFeatures out;
    std::vector<Descriptor> descs;
    for (const auto& kp : candidates) {
        if (auto desc = describe(space, kp)) {
            out.keypoints.push_back(kp);
            descs.push_back(*desc);
        }
    }
    out.descriptors.resize(kDescriptorDim, static_cast<Eigen::Index>(descs.size()));
    for (std::size_t i = 0; i < descs.size(); ++i) out.descriptors.col(static_cast<Eigen::Index>(i)) = descs[i];
    return out;
}

}  // namespace sceneret
