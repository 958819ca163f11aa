#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sceneret/imaging.hpp"

namespace sceneret {

/// Difference-of-Gaussian detector settings. Defaults follow Lowe's
/// published values with intensities on [0,1].
struct DetectorParams {
    int intervals = 3;
    double sigma = 1.6;
    double contrast_threshold = 0.03;
    double edge_ratio = 10.0;
    bool double_image = false;
    double assumed_blur = 0.5;
    int max_refine_steps = 5;
    int min_octave_size = 16;

    bool operator==(const DetectorParams&) const = default;
};

/// Scale-space interest point in input-image pixel coordinates.
/// `orientation` is the dominant gradient direction, atan2(dy, dx) with y
/// pointing down, in [0, 2*pi).
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double scale = 1.0;
    double orientation = 0.0;
    // Location inside the pyramid, needed to sample the descriptor.
    int octave = 0;
    int layer = 1;
    double octave_scale = 1.0;
    double response = 0.0;
};

inline constexpr int kDescriptorDim = 128;
using Descriptor = Eigen::Matrix<double, kDescriptorDim, 1>;
using DescriptorMatrix = Eigen::Matrix<double, kDescriptorDim, Eigen::Dynamic>;

/// Gaussian and DoG pyramids of one grey image.
class ScaleSpace {
public:
    ScaleSpace(const Image& grey, const DetectorParams& params);

    const DetectorParams& params() const { return params_; }
    int octaves() const { return static_cast<int>(gaussians_.size()); }
    /// Layers 0 .. intervals+2.
    const Plane& gaussian(int octave, int layer) const;
    /// Layers 0 .. intervals+1.
    const Plane& dog(int octave, int layer) const;
    /// Input-image pixels per octave pixel.
    double octave_step(int octave) const;
    int image_width() const { return width_; }
    int image_height() const { return height_; }

private:
    DetectorParams params_;
    int width_;
    int height_;
    std::vector<std::vector<Plane>> gaussians_;
    std::vector<std::vector<Plane>> dogs_;
};

/// Separable Gaussian blur with reflect-101 borders.
Plane gaussian_blur(const Plane& src, double sigma);

std::vector<Keypoint> detect_keypoints(const ScaleSpace& space);

/// Requires a 1-channel image; images smaller than the minimum octave
/// size yield no keypoints.
std::vector<Keypoint> detect_keypoints(const Image& grey, const DetectorParams& params = {});

/// Builds a keypoint frame at an arbitrary position and scale, resolving
/// the pyramid octave/layer the detector would have used.
Keypoint keypoint_frame(double x, double y, double scale, double orientation, const DetectorParams& params = {});

/// 4x4x8 gradient-orientation histogram around the keypoint, normalized,
/// clamped at 0.2 and renormalized. Empty when the sampling window leaves
/// the image or the patch has no gradient.
std::optional<Descriptor> describe(const ScaleSpace& space, const Keypoint& kp);
std::optional<Descriptor> describe(const Image& grey, const Keypoint& kp, const DetectorParams& params = {});

/// Keypoints paired column-for-column with their descriptors.
struct LocalFeatures {
    std::vector<Keypoint> keypoints;
    DescriptorMatrix descriptors{kDescriptorDim, 0};

    std::size_t size() const { return keypoints.size(); }
};

/// Detects and describes keypoints on the grey version of `img` (the HSV
/// value plane for colour input). Keypoints whose descriptor is skipped are
/// dropped.
LocalFeatures extract_local_features(const Image& img, const DetectorParams& params = {});

}  // namespace sceneret
