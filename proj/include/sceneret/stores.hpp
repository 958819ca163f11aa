#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sceneret/keypoints.hpp"
#include "sceneret/representation.hpp"

namespace sceneret {

/// image_id -> vector, one representation per store.
using VectorStore = std::map<std::string, Eigen::VectorXd>;

/// Vectors of one representation keyed by image id. On disk the values are
/// f32; loading restores the representation's normalization in double
/// (unit L2 norm for whole-image vectors, unit sum for concept occurrence
/// vectors) so the stored contracts hold to double precision.
struct FeatureStore {
    Representation representation;
    VectorStore vectors;

    bool contains(const std::string& image_id) const { return vectors.count(image_id) != 0; }
};

std::vector<char> serialize_feature_store(const FeatureStore& store);
FeatureStore deserialize_feature_store(std::span<const char> bytes);
void save_feature_store(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore load_feature_store(const std::filesystem::path& path);

/// Applies the f32 round trip and renormalization of a save/load cycle, so
/// freshly computed vectors compare equal to stored ones.
Eigen::VectorXd as_stored(Representation rep, const Eigen::VectorXd& values);

/// Keypoints and f32 descriptors of one image, with the image size.
struct StoredImage {
    int width = 0;
    int height = 0;
    std::vector<Keypoint> keypoints;  // x, y, scale, orientation only
    Eigen::Matrix<float, kDescriptorDim, Eigen::Dynamic> descriptors;

    std::size_t size() const { return keypoints.size(); }
    LocalFeatures features() const;
};

/// Cached local features per image, tagged with the detector parameters
/// that produced them.
struct DescriptorStore {
    DetectorParams params;
    std::map<std::string, StoredImage> images;
};

StoredImage to_stored(int width, int height, const LocalFeatures& features);

std::vector<char> serialize_descriptor_store(const DescriptorStore& store);
DescriptorStore deserialize_descriptor_store(std::span<const char> bytes);
void save_descriptor_store(const DescriptorStore& store, const std::filesystem::path& path);
DescriptorStore load_descriptor_store(const std::filesystem::path& path);


}  // namespace sceneret
