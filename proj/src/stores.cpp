#include "sceneret/stores.hpp"

#include <cmath>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"

namespace sceneret {

namespace {

constexpr std::string_view kFeatureMagic = "FSTR";
constexpr std::string_view kDescriptorMagic = "DSCR";
constexpr std::uint16_t kVersion = 1;

Eigen::VectorXd renormalize(Representation rep, Eigen::VectorXd v) {
    if (rep.is_cov()) {
        const double s = v.sum();
        if (s > 0.0) v /= s;
    } else {
        const double n = v.norm();
        if (n > 0.0) v /= n;
    }
    return v;
}

Eigen::VectorXd round_f32(const Eigen::VectorXd& v) { return v.cast<float>().cast<double>(); }

void expect_magic(io::ByteReader& in, std::string_view magic, const char* what) {
    if (in.bytes(magic.size()) != magic) throw Error(std::string("not a ") + what + " file");
    const std::uint16_t version = in.u16();
    if (version != kVersion) throw Error(std::string("unsupported ") + what + " version " + std::to_string(version));
}

}  // namespace

Eigen::VectorXd as_stored(Representation rep, const Eigen::VectorXd& values) { return renormalize(rep, round_f32(values)); }

std::vector<char> serialize_feature_store(const FeatureStore& store) {
    io::ByteWriter out;
    out.bytes(kFeatureMagic);
    out.u16(kVersion);
    out.u8(store.representation.tag);
    out.u32(static_cast<std::uint32_t>(store.vectors.size()));
    std::vector<std::size_t> offset_slots;
    for (const auto& [id, v] : store.vectors) {
        out.str(id);
        offset_slots.push_back(out.size());
        out.u64(0);
    }
    std::size_t i = 0;
    for (const auto& [id, v] : store.vectors) {
        out.patch_u64(offset_slots[i++], out.size());
        out.str(id);
        out.u8(store.representation.tag);
        out.u32(static_cast<std::uint32_t>(v.size()));
        for (Eigen::Index j = 0; j < v.size(); ++j) out.f32(static_cast<float>(v[j]));
    }
    return std::move(out.buffer());
}

FeatureStore deserialize_feature_store(std::span<const char> bytes) {
    io::ByteReader in(bytes, "feature store");
    expect_magic(in, kFeatureMagic, "feature store");
    const auto rep = Representation::from_tag(in.u8());
    if (!rep) throw Error("feature store: unknown representation tag");
    FeatureStore store{*rep, {}};
    const std::uint32_t count = in.u32();
    std::vector<std::pair<std::string, std::uint64_t>> index;
    index.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id = in.str();
        index.emplace_back(std::move(id), in.u64());
    }
    for (const auto& [id, offset] : index) {
        in.seek(offset);
        if (in.str() != id) throw Error("feature store: index does not match record for " + id);
        if (in.u8() != rep->tag) throw Error("feature store: mixed representations in record " + id);
        const std::uint32_t dim = in.u32();
        Eigen::VectorXd v(dim);
        for (std::uint32_t j = 0; j < dim; ++j) v[j] = in.f32();
        store.vectors.emplace(id, renormalize(*rep, std::move(v)));
    }
    return store;
}

void save_feature_store(const FeatureStore& store, const std::filesystem::path& path) {
    const auto bytes = serialize_feature_store(store);
    io::write_file_atomic(path, bytes);
}

FeatureStore load_feature_store(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    try {
        return deserialize_feature_store(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

namespace {

void write_params(io::ByteWriter& out, const DetectorParams& p) {
    out.u32(static_cast<std::uint32_t>(p.intervals));
    out.f64(p.sigma);
    out.f64(p.contrast_threshold);
    out.f64(p.edge_ratio);
    out.u8(p.double_image ? 1 : 0);
    out.f64(p.assumed_blur);
    out.u32(static_cast<std::uint32_t>(p.max_refine_steps));
    out.u32(static_cast<std::uint32_t>(p.min_octave_size));
}

DetectorParams read_params(io::ByteReader& in) {
    DetectorParams p;
    p.intervals = static_cast<int>(in.u32());
    p.sigma = in.f64();
    p.contrast_threshold = in.f64();
    p.edge_ratio = in.f64();
    p.double_image = in.u8() != 0;
    p.assumed_blur = in.f64();
    p.max_refine_steps = static_cast<int>(in.u32());
    p.min_octave_size = static_cast<int>(in.u32());
    return p;
}

}  // namespace

LocalFeatures StoredImage::features() const {
    LocalFeatures out;
    out.keypoints = keypoints;
    out.descriptors = descriptors.cast<double>();
    return out;
}

StoredImage to_stored(int width, int height, const LocalFeatures& features) {
    StoredImage out;
    out.width = width;
    out.height = height;
    out.keypoints.reserve(features.size());
    for (const Keypoint& kp : features.keypoints) {
        Keypoint k;
        k.x = static_cast<float>(kp.x);
        k.y = static_cast<float>(kp.y);
        k.scale = static_cast<float>(kp.scale);
        k.orientation = static_cast<float>(kp.orientation);
        out.keypoints.push_back(k);
    }
    out.descriptors = features.descriptors.cast<float>();
    return out;
}

std::vector<char> serialize_descriptor_store(const DescriptorStore& store) {
    io::ByteWriter out;
    out.bytes(kDescriptorMagic);
    out.u16(kVersion);
    write_params(out, store.params);
    out.u32(static_cast<std::uint32_t>(store.images.size()));
    for (const auto& [id, f] : store.images) {
        out.str(id);
        out.u32(static_cast<std::uint32_t>(f.size()));
        for (const Keypoint& kp : f.keypoints) {
            out.f32(static_cast<float>(kp.x));
            out.f32(static_cast<float>(kp.y));
            out.f32(static_cast<float>(kp.scale));
            out.f32(static_cast<float>(kp.orientation));
        }
        for (Eigen::Index c = 0; c < f.descriptors.cols(); ++c)
            for (Eigen::Index r = 0; r < kDescriptorDim; ++r) out.f32(f.descriptors(r, c));
    }
    // Image sizes trail the records, in record order.
    for (const auto& [id, f] : store.images) {
        out.u32(static_cast<std::uint32_t>(f.width));
        out.u32(static_cast<std::uint32_t>(f.height));
    }
    return std::move(out.buffer());
}

DescriptorStore deserialize_descriptor_store(std::span<const char> bytes) {
    io::ByteReader in(bytes, "descriptor store");
    expect_magic(in, kDescriptorMagic, "descriptor store");
    DescriptorStore store;
    store.params = read_params(in);
    const std::uint32_t count = in.u32();
    std::vector<StoredImage*> order;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id = in.str();
        StoredImage f;
        const std::uint32_t n = in.u32();
        f.keypoints.resize(n);
        for (Keypoint& kp : f.keypoints) {
            kp.x = in.f32();
            kp.y = in.f32();
            kp.scale = in.f32();
            kp.orientation = in.f32();
        }
        f.descriptors.resize(kDescriptorDim, n);
        for (std::uint32_t c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < kDescriptorDim; ++r) f.descriptors(r, c) = in.f32();
        order.push_back(&store.images.emplace(std::move(id), std::move(f)).first->second);
    }
    for (StoredImage* f : order) {
        f->width = static_cast<int>(in.u32());
        f->height = static_cast<int>(in.u32());
    }
    if (!in.at_end()) throw Error("descriptor store: trailing data");
    return store;
}

void save_descriptor_store(const DescriptorStore& store, const std::filesystem::path& path) {
    const auto bytes = serialize_descriptor_store(store);
    io::write_file_atomic(path, bytes);
}

DescriptorStore load_descriptor_store(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    try {
        return deserialize_descriptor_store(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace sceneret
