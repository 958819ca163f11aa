#include "sceneret/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <tuple>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"
#include "sceneret/rng.hpp"

namespace sceneret {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

DatasetManifest read_manifest_tsv(const fs::path& root, const fs::path& file) {
    std::string text;
    try {
        text = io::read_text_file(file);
    } catch (const Error&) {
        throw Error("unreadable manifest file " + file.string());
    }
    std::vector<ManifestEntry> entries;
    int line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            fields.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
            throw Error("manifest.tsv line " + std::to_string(line_no) + ": expected image_id<TAB>path<TAB>category");
        fs::path p(fields[1]);
        if (p.is_relative()) p = root / p;
        entries.push_back({fields[0], p, fields[2]});
    }
    return make_manifest(std::move(entries));
}

}  // namespace

std::size_t DatasetManifest::category_index(std::string_view category) const {
    auto it = std::lower_bound(categories.begin(), categories.end(), category);
    if (it == categories.end() || *it != category) throw Error("unknown category '" + std::string(category) + "'");
    return static_cast<std::size_t>(it - categories.begin());
}

std::vector<const ManifestEntry*> DatasetManifest::members(std::string_view category) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.category == category) out.push_back(&e);
    return out;
}

const ManifestEntry& DatasetManifest::find(std::string_view image_id) const {
    for (const auto& e : entries)
        if (e.image_id == image_id) return e;
    throw Error("unknown image_id '" + std::string(image_id) + "'");
}

DatasetManifest make_manifest(std::vector<ManifestEntry> entries) {
    std::set<std::string> ids;
    std::set<std::string> cats;
    for (const auto& e : entries) {
        if (!ids.insert(e.image_id).second) throw Error("duplicate image_id '" + e.image_id + "'");
        cats.insert(e.category);
    }
    if (cats.empty()) throw Error("no categories found");
    if (cats.size() < 2) throw Error("a dataset needs at least 2 categories, found 1");
    std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
        return std::tie(a.category, a.image_id) < std::tie(b.category, b.image_id);
    });
    DatasetManifest m;
    m.entries = std::move(entries);
    m.categories.assign(cats.begin(), cats.end());
    return m;
}

DatasetManifest load_manifest(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error("dataset root does not exist: " + root.string());
    const fs::path manifest_file = root / "manifest.tsv";
    if (fs::exists(manifest_file)) return read_manifest_tsv(root, manifest_file);

    std::vector<fs::path> dirs;
    for (const auto& d : fs::directory_iterator(root))
        if (d.is_directory()) dirs.push_back(d.path());
    if (dirs.empty()) throw Error("no categories found under " + root.string());
    std::sort(dirs.begin(), dirs.end());

    std::vector<ManifestEntry> entries;
    for (const auto& dir : dirs) {
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(dir))
            if (f.is_regular_file() && is_image_file(f.path())) files.push_back(f.path());
        if (files.empty()) throw Error("empty category '" + dir.filename().string() + "'");
        std::sort(files.begin(), files.end());
        for (const auto& f : files) entries.push_back({f.stem().string(), f, dir.filename().string()});
    }
    return make_manifest(std::move(entries));
}

// ---------------------------------------------------------------------------

RegionAnnotation parse_region_annotation(std::string_view text, GridShape grid) {
    if (grid.rows < 1 || grid.cols < 1) throw Error("annotation grid must be at least 1x1");
    std::vector<std::string_view> lines = split_lines(text);
    while (!lines.empty() && split_ws(lines.back()).empty()) lines.pop_back();
    if (static_cast<int>(lines.size()) != grid.rows)
        throw Error("annotation has " + std::to_string(lines.size()) + " rows, expected " + std::to_string(grid.rows));

    RegionAnnotation out;
    out.grid = grid;
    out.cells.reserve(static_cast<std::size_t>(grid.rows * grid.cols));
    for (int r = 0; r < grid.rows; ++r) {
        std::vector<std::string> tokens = split_ws(lines[static_cast<std::size_t>(r)]);
        if (static_cast<int>(tokens.size()) != grid.cols)
            throw Error("annotation row " + std::to_string(r) + " has " + std::to_string(tokens.size()) +
                        " columns, expected " + std::to_string(grid.cols));
        for (const auto& tok : tokens) {
            CellAnnotation cell;
            std::size_t slash = tok.find('/');
            if (slash == std::string::npos) {
                auto c = parse_concept(tok);
                if (!c) throw Error("unknown concept '" + tok + "'");
                cell.weights.emplace_back(*c, 1.0);
            } else {
                std::string a = tok.substr(0, slash);
                std::string b = tok.substr(slash + 1);
                if (a.empty() || b.empty() || b.find('/') != std::string::npos)
                    throw Error("malformed split token '" + tok + "'");
                auto ca = parse_concept(a);
                auto cb = parse_concept(b);
                if (!ca) throw Error("unknown concept '" + a + "'");
                if (!cb) throw Error("unknown concept '" + b + "'");
                if (*ca == *cb) {
                    cell.weights.emplace_back(*ca, 1.0);
                } else {
                    cell.weights.emplace_back(*ca, 0.5);
                    cell.weights.emplace_back(*cb, 0.5);
                }
            }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

std::string format_region_annotation(const RegionAnnotation& annotation) {
    std::string out;
    for (int r = 0; r < annotation.grid.rows; ++r) {
        for (int c = 0; c < annotation.grid.cols; ++c) {
            if (c > 0) out += ' ';
            const auto& cell = annotation.at(r, c);
            for (std::size_t i = 0; i < cell.weights.size(); ++i) {
                if (i > 0) out += '/';
                out += concept_name(cell.weights[i].first);
            }
        }
        out += '\n';
    }
    return out;
}

RegionAnnotationMap load_region_annotations(const fs::path& dir, GridShape grid) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error("annotation directory does not exist: " + dir.string());
    RegionAnnotationMap out;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir)) {
        const std::string name = f.path().filename().string();
        if (f.is_regular_file() && name.size() > kRegionsSuffix.size() && name.ends_with(kRegionsSuffix))
            files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const std::string name = f.filename().string();
        const std::string id = name.substr(0, name.size() - kRegionsSuffix.size());
        try {
            out.emplace(id, parse_region_annotation(io::read_text_file(f), grid));
        } catch (const Error& e) {
            throw Error(f.string() + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

FoldPlan split_folds(const DatasetManifest& manifest, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw Error("n_folds must be at least 2");
    FoldPlan plan;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(n_folds));

    for (const auto& category : manifest.categories) {
        std::vector<std::string> ids;
        for (const auto* e : manifest.members(category)) ids.push_back(e->image_id);
        if (static_cast<int>(ids.size()) < n_folds)
            throw Error("category '" + category + "' has " + std::to_string(ids.size()) + " images, fewer than " +
                        std::to_string(n_folds) + " folds");
        Rng rng(derive_seed(seed, "folds/" + category));
        rng.shuffle(ids);

        const std::size_t n = ids.size();
        const std::size_t base = n / static_cast<std::size_t>(n_folds);
        const std::size_t extra = n % static_cast<std::size_t>(n_folds);
        std::size_t begin = 0;
        std::vector<std::pair<std::size_t, std::size_t>> parts;
        for (std::size_t f = 0; f < static_cast<std::size_t>(n_folds); ++f) {
            const std::size_t len = base + (f < extra ? 1 : 0);
            parts.emplace_back(begin, begin + len);
            begin += len;
        }
        for (std::size_t f = 0; f < parts.size(); ++f) {
            FoldCategory fc;
            fc.category = category;
            for (std::size_t i = 0; i < n; ++i) {
                if (i >= parts[f].first && i < parts[f].second)
                    fc.queries.push_back(ids[i]);
                else
                    fc.database.push_back(ids[i]);
            }
            plan.folds[f].categories.push_back(std::move(fc));
        }
    }
    return plan;
}

std::string format_fold_plan(const FoldPlan& plan) {
    std::ostringstream out;
    out << "# seed " << plan.seed << ", folds " << plan.folds.size() << '\n';
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        for (const auto& fc : plan.folds[f].categories) {
            for (const auto& id : fc.queries) out << f << '\t' << fc.category << "\tquery\t" << id << '\n';
            for (const auto& id : fc.database) out << f << '\t' << fc.category << "\tdb\t" << id << '\n';
        }
    }
    return out.str();
}

}  // namespace sceneret
