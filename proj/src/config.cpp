#include "sceneret/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"

namespace sceneret {

namespace {

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw UsageError("config key " + std::string(key) + ": not an integer: " + std::string(v));
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    const std::string s(v);
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double out = 0.0;
    in >> out;
    if (in.fail() || !in.eof()) throw UsageError("config key " + std::string(key) + ": not a number: " + s);
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("config key " + std::string(key) + ": expected true or false");
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

}  // namespace

std::string format_config(const RunConfig& c) {
    std::vector<std::string> weights;
    for (double w : c.level_weights) weights.push_back(exact(w));
    std::string out;
    auto put = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + '\n'; };
    put("dataset", c.dataset.string());
    put("annotations", c.annotations.string());
    put("out", c.out.string());
    put("grid_rows", std::to_string(c.grid.rows));
    put("grid_cols", std::to_string(c.grid.cols));
    put("words_per_category", std::to_string(c.words_per_category));
    put("pyramid_level", std::to_string(c.pyramid_level));
    put("level_weights", join(weights));
    put("detector.intervals", std::to_string(c.detector.intervals));
    put("detector.sigma", exact(c.detector.sigma));
    put("detector.contrast_threshold", exact(c.detector.contrast_threshold));
    put("detector.edge_ratio", exact(c.detector.edge_ratio));
    put("detector.double_image", c.detector.double_image ? "true" : "false");
    put("detector.assumed_blur", exact(c.detector.assumed_blur));
    put("detector.max_refine_steps", std::to_string(c.detector.max_refine_steps));
    put("detector.min_octave_size", std::to_string(c.detector.min_octave_size));
    put("knn_k", std::to_string(c.knn_k));
    put("annotator", std::string(annotator_kind_name(c.annotator)));
    put("region_approach", std::string(region_approach_name(c.region_approach)));
    put("seed", std::to_string(c.seed));
    put("approaches", join(c.approaches));
    put("folds", std::to_string(c.folds));
    put("threads", std::to_string(c.threads));
    put("max_descriptors", std::to_string(c.max_descriptors));
    put("kmeans_max_iter", std::to_string(c.kmeans_max_iter));
    put("kmeans_rel_tol", exact(c.kmeans_rel_tol));
    return out;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    if (key == "dataset") c.dataset = v;
    else if (key == "annotations") c.annotations = v;
    else if (key == "out") c.out = v;
    else if (key == "grid_rows") c.grid.rows = parse_integer<int>(key, v);
    else if (key == "grid_cols") c.grid.cols = parse_integer<int>(key, v);
    else if (key == "words_per_category") c.words_per_category = parse_integer<int>(key, v);
    else if (key == "pyramid_level") c.pyramid_level = parse_integer<int>(key, v);
    else if (key == "level_weights") {
        c.level_weights.clear();
        for (const std::string& w : split_list(v)) c.level_weights.push_back(parse_real(key, w));
    } else if (key == "detector.intervals") c.detector.intervals = parse_integer<int>(key, v);
    else if (key == "detector.sigma") c.detector.sigma = parse_real(key, v);
    else if (key == "detector.contrast_threshold") c.detector.contrast_threshold = parse_real(key, v);
    else if (key == "detector.edge_ratio") c.detector.edge_ratio = parse_real(key, v);
    else if (key == "detector.double_image") c.detector.double_image = parse_bool(key, v);
    else if (key == "detector.assumed_blur") c.detector.assumed_blur = parse_real(key, v);
    else if (key == "detector.max_refine_steps") c.detector.max_refine_steps = parse_integer<int>(key, v);
    else if (key == "detector.min_octave_size") c.detector.min_octave_size = parse_integer<int>(key, v);
    else if (key == "knn_k") c.knn_k = parse_integer<int>(key, v);
    else if (key == "annotator") {
        const auto kind = parse_annotator_kind(v);
        if (!kind) throw UsageError("unknown annotator '" + v + "' (knn, nearest-centroid)");
        c.annotator = *kind;
    } else if (key == "region_approach") {
        const auto r = parse_region_approach(v);
        if (!r) throw UsageError("unknown region approach '" + v + "'");
        c.region_approach = *r;
    } else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, v);
    else if (key == "approaches") c.approaches = split_list(v);
    else if (key == "folds") c.folds = parse_integer<int>(key, v);
    else if (key == "threads") c.threads = parse_integer<unsigned>(key, v);
    else if (key == "max_descriptors") c.max_descriptors = parse_integer<std::size_t>(key, v);
    else if (key == "kmeans_max_iter") c.kmeans_max_iter = parse_integer<int>(key, v);
    else if (key == "kmeans_rel_tol") c.kmeans_rel_tol = parse_real(key, v);
    else throw UsageError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        set_config_value(base, trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
    return parse_config(io::read_text_file(path), std::move(base));
}

void validate_config(const RunConfig& c) {
    if (c.grid.rows < 1 || c.grid.cols < 1) throw UsageError("grid must have at least one row and column");
    if (c.words_per_category < 1) throw UsageError("words per category must be at least 1");
    // Approach names fix their own levels (_L1, _L2); the weighted colour
    // pyramid is always level 2.
    if (c.pyramid_level != 2) throw UsageError("pyramid_level must be 2 (the weighted colour pyramid is level 2)");
    if (c.level_weights.size() != static_cast<std::size_t>(c.pyramid_level + 1))
        throw UsageError("level_weights needs one weight per pyramid level");
    if (c.knn_k < 1) throw UsageError("knn_k must be at least 1");
    if (c.folds < 2) throw UsageError("folds must be at least 2");
    if (c.kmeans_max_iter < 1) throw UsageError("kmeans_max_iter must be at least 1");
    if (c.detector.intervals < 1 || c.detector.sigma <= 0.0) throw UsageError("invalid detector parameters");
    requested_representations(c);
}

std::vector<Representation> requested_representations(const RunConfig& c) {
    std::vector<Representation> out;
    if (c.approaches.empty() || (c.approaches.size() == 1 && c.approaches[0] == "all")) {
        for (Approach a : kAllApproaches) out.push_back(Representation::of(a));
        return out;
    }
    for (const std::string& name : c.approaches) {
        const auto rep = Representation::parse(name);
        if (!rep) {
            std::string valid;
            for (Approach a : kAllApproaches) valid += std::string(valid.empty() ? "" : ", ") + std::string(approach_name(a));
            throw UsageError("unknown approach '" + name + "'; valid names: " + valid + ", COV, COV:<region approach>");
        }
        out.push_back(*rep);
    }
    return out;
}

}  // namespace sceneret
