#include "sceneret/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "sceneret/io_util.hpp"
#include "sceneret/parallel.hpp"

namespace sceneret {

RetrievalIndex build_index(Representation rep, std::vector<IndexedVector> items) {
    if (items.empty()) throw Error("cannot build an index from no vectors");
    const Eigen::Index dim = items.front().values.size();
    std::set<std::string> seen;
    RetrievalIndex index;
    index.rep_ = rep;
    index.vectors_.resize(dim, static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        IndexedVector& item = items[i];
        if (item.values.size() != dim)
            throw Error("index entry " + item.image_id + " has dimension " + std::to_string(item.values.size()) +
                        ", expected " + std::to_string(dim));
        if (!seen.insert(item.image_id).second) throw Error("duplicate image id in index: " + item.image_id);
        index.vectors_.col(static_cast<Eigen::Index>(i)) = item.values;
        index.ids_.push_back(std::move(item.image_id));
        index.categories_.push_back(std::move(item.category));
    }
    return index;
}

RankedList query(const RetrievalIndex& index, const Eigen::Ref<const Eigen::VectorXd>& q, std::optional<std::size_t> top,
                 unsigned threads, std::string query_id) {
    if (q.size() != index.dim())
        throw Error("query has dimension " + std::to_string(q.size()) + ", index has " + std::to_string(index.dim()));
    const std::size_t n = index.size();
    std::vector<double> dist(n);
    parallel_for(n, threads, [&](std::size_t i) { dist[i] = euclidean(index.vectors().col(static_cast<Eigen::Index>(i)), q); });
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& ids = index.image_ids();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return ids[a] < ids[b];
    });
    if (top && *top < n) order.resize(*top);
    RankedList out;
    out.query_id = std::move(query_id);
    out.items.reserve(order.size());
    for (std::size_t i : order) out.items.push_back({ids[i], index.categories()[i], dist[i]});
    return out;
}

std::string format_ranked_list(const RankedList& list) {
    std::string out;
    for (std::size_t r = 0; r < list.items.size(); ++r) {
        const RankedItem& item = list.items[r];
        out += std::to_string(r + 1) + '\t' + item.image_id + '\t' + item.category + '\t' + io::fixed(item.distance, 9) + '\n';
    }
    return out;
}

namespace {
constexpr std::string_view kIndexMagic = "RIDX";
constexpr std::uint16_t kIndexVersion = 1;
}  // namespace

std::vector<char> serialize_index(const RetrievalIndex& index) {
    io::ByteWriter out;
    out.bytes(kIndexMagic);
    out.u16(kIndexVersion);
    out.u8(index.representation().tag);
    out.u32(static_cast<std::uint32_t>(index.dim()));
    out.u32(static_cast<std::uint32_t>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.str(index.image_ids()[i]);
        out.str(index.categories()[i]);
        const auto col = index.vectors().col(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 0; j < index.dim(); ++j) out.f64(col[j]);
    }
    return std::move(out.buffer());
}

RetrievalIndex deserialize_index(std::span<const char> bytes) {
    io::ByteReader in(bytes, "index");
    if (in.bytes(kIndexMagic.size()) != kIndexMagic) throw Error("not an index file");
    if (in.u16() != kIndexVersion) throw Error("unsupported index version");
    const auto rep = Representation::from_tag(in.u8());
    if (!rep) throw Error("index: unknown representation tag");
    const std::uint32_t dim = in.u32();
    const std::uint32_t n = in.u32();
    std::vector<IndexedVector> items(n);
    for (IndexedVector& item : items) {
        item.image_id = in.str();
        item.category = in.str();
        item.values.resize(dim);
        for (std::uint32_t j = 0; j < dim; ++j) item.values[j] = in.f64();
    }
    if (!in.at_end()) throw Error("index: trailing data");
    return build_index(*rep, std::move(items));
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    const auto bytes = serialize_index(index);
    io::write_file_atomic(path, bytes);
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    try {
        return deserialize_index(bytes);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace sceneret
