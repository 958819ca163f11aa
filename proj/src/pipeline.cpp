#include "sceneret/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "sceneret/bow.hpp"
#include "sceneret/concepts.hpp"
#include "sceneret/error.hpp"
#include "sceneret/evaluation.hpp"
#include "sceneret/io_util.hpp"
#include "sceneret/parallel.hpp"
#include "sceneret/retrieval.hpp"
#include "sceneret/rng.hpp"

namespace sceneret {

namespace fs = std::filesystem;

fs::path OutputLayout::vocabulary(VocabularyKind kind) const {
    return root / "vocab" / (std::string(vocabulary_kind_name(kind)) + ".vocb");
}

fs::path OutputLayout::feature_store(Representation rep) const {
    return root / "features" / (curve_file_stem(rep.name()) + ".fst");
}

fs::path OutputLayout::index(Representation rep) const { return root / "index" / (curve_file_stem(rep.name()) + ".idx"); }

fs::path OutputLayout::cov_text(Representation rep) const { return root / "cov" / (curve_file_stem(rep.name()) + ".txt"); }

fs::path OutputLayout::predicted_annotations(RegionApproach approach) const {
    return root / "annotations" / curve_file_stem(region_approach_name(approach));
}

namespace {

DatasetManifest require_manifest(const RunConfig& config) {
    if (config.dataset.empty()) throw UsageError("no dataset given (--dataset)");
    if (!fs::is_directory(config.dataset)) throw UsageError("dataset root not found: " + config.dataset.string());
    return load_manifest(config.dataset);
}

VocabularyOptions vocabulary_options(const RunConfig& config) {
    VocabularyOptions o;
    o.words_per_category = config.words_per_category;
    o.seed = config.seed;
    o.max_descriptors = config.max_descriptors;
    o.kmeans.max_iter = config.kmeans_max_iter;
    o.kmeans.rel_tol = config.kmeans_rel_tol;
    o.kmeans.threads = config.threads;
    return o;
}

Vocabulary require_vocabulary(const OutputLayout& layout, VocabularyKind kind, const DatasetManifest& manifest) {
    const fs::path path = layout.vocabulary(kind);
    if (!fs::exists(path))
        throw Error("missing " + std::string(vocabulary_kind_name(kind)) + " vocabulary " + path.string() +
                    " (run build-vocab first)");
    Vocabulary vocab = load_vocabulary(path);
    if (kind != VocabularyKind::Universal && vocab.category_order() != manifest.categories)
        throw Error(path.string() + ": vocabulary categories do not match the dataset");
    return vocab;
}

struct ColumnRef {
    const StoredImage* image;
    Eigen::Index col;
};

/// The same columns subsample_columns would keep, gathered without first
/// materializing every descriptor.
Eigen::MatrixXd gather(const std::vector<ColumnRef>& refs, const VocabularyOptions& options) {
    const auto idx = subsample_indices(refs.size(), options.max_descriptors, derive_seed(options.seed, "subsample"));
    Eigen::MatrixXd out(kDescriptorDim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = refs[idx[i]].image->descriptors.col(refs[idx[i]].col).cast<double>();
    return out;
}

bool in_upper_half(const Keypoint& kp, int height) {
    return half_of(static_cast<int>(std::floor(kp.y)), height) == Half::Upper;
}

void log_vocabulary(std::ostream& log, const Vocabulary& v, const fs::path& path) {
    log << vocabulary_kind_name(v.kind()) << " vocabulary: " << v.size() << " words -> " << path.string() << '\n';
}

}  // namespace

DescriptorStore ensure_descriptors(const RunConfig& config, const DatasetManifest& manifest, std::ostream& log) {
    const OutputLayout layout{config.out};
    DescriptorStore store;
    bool changed = false;
    if (fs::exists(layout.descriptors())) {
        store = load_descriptor_store(layout.descriptors());
        if (!(store.params == config.detector)) {
            log << "detector parameters changed; re-extracting descriptors\n";
            store = {};
            changed = true;
        }
    }
    store.params = config.detector;
    std::set<std::string> listed;
    for (const ManifestEntry& e : manifest.entries) listed.insert(e.image_id);
    for (auto it = store.images.begin(); it != store.images.end();) {
        if (listed.count(it->first)) {
            ++it;
        } else {
            it = store.images.erase(it);
            changed = true;
        }
    }
    std::vector<const ManifestEntry*> todo;
    for (const ManifestEntry& e : manifest.entries)
        if (!store.images.count(e.image_id)) todo.push_back(&e);
    if (!todo.empty()) {
        log << "extracting local features from " << todo.size() << " images\n";
        std::vector<std::optional<StoredImage>> results(todo.size());
        std::vector<std::string> errors(todo.size());
        parallel_for(todo.size(), config.threads, [&](std::size_t i) {
            try {
                const Image img = read_image(todo[i]->path);
                results[i] = to_stored(img.width, img.height, extract_local_features(img, config.detector));
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < todo.size(); ++i) {
            if (results[i]) {
                store.images.emplace(todo[i]->image_id, std::move(*results[i]));
                changed = true;
            } else {
                log << "skipping " << todo[i]->image_id << ": " << errors[i] << '\n';
            }
        }
    }
    if (store.images.empty()) throw Error("no image in the dataset could be decoded");
    if (changed) save_descriptor_store(store, layout.descriptors());
    return store;
}

// ---------------------------------------------------------------------------

void cmd_build_vocab(const RunConfig& config, std::string_view kind, std::ostream& log) {
    const bool universal = kind == "universal" || kind == "all";
    const bool integrated = kind == "integrated" || kind == "all";
    const bool halves = kind == "halves" || kind == "upper" || kind == "lower" || kind == "all";
    if (!universal && !integrated && !halves)
        throw UsageError("unknown vocabulary kind '" + std::string(kind) + "' (universal, integrated, halves, all)");
    validate_config(config);
    const DatasetManifest manifest = require_manifest(config);
    const DescriptorStore store = ensure_descriptors(config, manifest, log);
    const OutputLayout layout{config.out};
    const VocabularyOptions options = vocabulary_options(config);

    auto refs_of = [&](const std::string* category, int half) {  // half: -1 any, 0 upper, 1 lower
        std::vector<ColumnRef> refs;
        for (const ManifestEntry& e : manifest.entries) {
            if (category && e.category != *category) continue;
            auto it = store.images.find(e.image_id);
            if (it == store.images.end()) continue;
            const StoredImage& img = it->second;
            for (std::size_t k = 0; k < img.size(); ++k) {
                if (half >= 0 && in_upper_half(img.keypoints[k], img.height) != (half == 0)) continue;
                refs.push_back({&img, static_cast<Eigen::Index>(k)});
            }
        }
        return refs;
    };

    if (universal) {
        const Vocabulary v = build_universal_vocabulary(gather(refs_of(nullptr, -1), options), options);
        save_vocabulary(v, layout.vocabulary(VocabularyKind::Universal));
        log_vocabulary(log, v, layout.vocabulary(VocabularyKind::Universal));
    }
    if (integrated) {
        std::map<std::string, Eigen::MatrixXd> per_category;
        for (const std::string& c : manifest.categories) per_category.emplace(c, gather(refs_of(&c, -1), options));
        const Vocabulary v = build_integrated_vocabulary(per_category, options);
        save_vocabulary(v, layout.vocabulary(VocabularyKind::Integrated));
        log_vocabulary(log, v, layout.vocabulary(VocabularyKind::Integrated));
    }
    if (halves) {
        std::map<std::string, HalfDescriptors> per_category;
        for (const std::string& c : manifest.categories)
            per_category.emplace(c, HalfDescriptors{gather(refs_of(&c, 0), options), gather(refs_of(&c, 1), options)});
        const auto [upper, lower] = build_half_vocabularies(per_category, options);
        save_vocabulary(upper, layout.vocabulary(VocabularyKind::UpperIntegrated));
        save_vocabulary(lower, layout.vocabulary(VocabularyKind::LowerIntegrated));
        log_vocabulary(log, upper, layout.vocabulary(VocabularyKind::UpperIntegrated));
        log_vocabulary(log, lower, layout.vocabulary(VocabularyKind::LowerIntegrated));
    }
}

// ---------------------------------------------------------------------------

void cmd_encode(const RunConfig& config, std::ostream& log) {
    validate_config(config);
    const std::vector<Representation> reps = requested_representations(config);
    std::vector<Approach> approaches;
    for (Representation rep : reps) {
        if (rep.is_cov()) throw UsageError(rep.name() + " vectors are produced by the annotate command");
        approaches.push_back(*rep.approach());
    }
    const DatasetManifest manifest = require_manifest(config);
    const OutputLayout layout{config.out};

    bool need_universal = false, need_integrated = false;
    for (Approach a : approaches) {
        need_universal = need_universal || approach_uses(a, VocabularyKind::Universal);
        need_integrated = need_integrated || approach_uses(a, VocabularyKind::Integrated);
    }
    std::optional<Vocabulary> universal, integrated;
    if (need_universal) universal = require_vocabulary(layout, VocabularyKind::Universal, manifest);
    if (need_integrated) integrated = require_vocabulary(layout, VocabularyKind::Integrated, manifest);
    VocabularySet vocabs;
    vocabs.universal = universal ? &*universal : nullptr;
    vocabs.integrated = integrated ? &*integrated : nullptr;
    const DescriptorStore descriptors = ensure_descriptors(config, manifest, log);
    ComposeOptions compose;
    compose.level_weights = config.level_weights;

    std::vector<FeatureStore> stores;
    for (Approach a : approaches) {
        const fs::path path = layout.feature_store(Representation::of(a));
        FeatureStore s{Representation::of(a), {}};
        if (fs::exists(path)) {
            s = load_feature_store(path);
            if (!(s.representation == Representation::of(a)))
                throw Error(path.string() + " holds " + s.representation.name() + " vectors");
        }
        stores.push_back(std::move(s));
    }

    struct Job {
        const ManifestEntry* entry;
        const StoredImage* features;
        std::vector<std::size_t> approaches;  // indices into `approaches`
    };
    std::vector<Job> jobs;
    for (const ManifestEntry& e : manifest.entries) {
        auto it = descriptors.images.find(e.image_id);
        if (it == descriptors.images.end()) continue;
        Job job{&e, &it->second, {}};
        for (std::size_t a = 0; a < approaches.size(); ++a)
            if (!stores[a].contains(e.image_id)) job.approaches.push_back(a);
        if (!job.approaches.empty()) jobs.push_back(std::move(job));
    }

    std::vector<std::vector<Eigen::VectorXd>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
        try {
            const ImageData data = prepare_image(read_image(jobs[j].entry->path), jobs[j].features->features());
            for (std::size_t a : jobs[j].approaches)
                results[j].push_back(encode_image(approaches[a], data, vocabs, compose).values);
        } catch (const Error& e) {
            errors[j] = e.what();
            results[j].clear();
        }
    });

    std::size_t failed = 0;
    std::vector<std::size_t> added(approaches.size(), 0);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (results[j].empty()) {
            log << "skipping " << jobs[j].entry->image_id << ": " << errors[j] << '\n';
            ++failed;
            continue;
        }
        for (std::size_t i = 0; i < jobs[j].approaches.size(); ++i) {
            const std::size_t a = jobs[j].approaches[i];
            stores[a].vectors.emplace(jobs[j].entry->image_id, std::move(results[j][i]));
            ++added[a];
        }
    }
    if (!jobs.empty() && failed == jobs.size()) throw Error("no image could be encoded");
    for (std::size_t a = 0; a < approaches.size(); ++a) {
        const fs::path path = layout.feature_store(stores[a].representation);
        if (added[a] > 0 || !fs::exists(path)) save_feature_store(stores[a], path);
        log << approach_name(approaches[a]) << ": " << added[a] << " new, " << stores[a].vectors.size() << " total -> "
            << path.string() << '\n';
    }
}

// ---------------------------------------------------------------------------

namespace {

RegionAnnotationMap require_annotations(const RunConfig& config, const DatasetManifest& manifest) {
    const fs::path dir = config.annotation_dir();
    if (!fs::is_directory(dir)) throw Error("annotation directory not found: " + dir.string());
    RegionAnnotationMap annotations = load_region_annotations(dir, config.grid);
    for (const ManifestEntry& e : manifest.entries)
        if (!annotations.count(e.image_id)) throw Error("missing region annotation for image " + e.image_id);
    return annotations;
}

/// Region vectors of one image's grid cells, row-major, kept as f32.
struct ImageRegions {
    Eigen::MatrixXf vectors;  // dim x cells
    std::vector<Half> halves;
    int channels = 0;
};

ImageRegions compute_regions(const ImageData& data, RegionApproach approach, const RegionVocabularies& vocabs,
                             GridShape grid) {
    const RegionEncoder encoder(data, approach, vocabs);
    const auto cells = grid_partition(data.width(), data.height(), grid.rows, grid.cols);
    ImageRegions out;
    out.channels = data.channels();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Half half = half_of_cell(cells[i], data.height());
        const Eigen::VectorXd v = encoder.encode(cells[i], half);
        if (i == 0) out.vectors.resize(v.size(), static_cast<Eigen::Index>(cells.size()));
        out.vectors.col(static_cast<Eigen::Index>(i)) = v.cast<float>();
        out.halves.push_back(half);
    }
    return out;
}

struct RegionVocabularyHolder {
    std::optional<Vocabulary> universal, upper, lower;

    RegionVocabularies view() const {
        return {universal ? &*universal : nullptr, upper ? &*upper : nullptr, lower ? &*lower : nullptr};
    }
};

RegionVocabularyHolder load_region_vocabularies(const OutputLayout& layout, RegionApproach approach,
                                                const DatasetManifest& manifest) {
    RegionVocabularyHolder h;
    if (region_approach_uses_universal(approach)) h.universal = require_vocabulary(layout, VocabularyKind::Universal, manifest);
    if (region_approach_uses_halves(approach)) {
        h.upper = require_vocabulary(layout, VocabularyKind::UpperIntegrated, manifest);
        h.lower = require_vocabulary(layout, VocabularyKind::LowerIntegrated, manifest);
    }
    return h;
}

/// Trains the upper and lower annotators on the given images' regions.
std::pair<AnnotatorModel, AnnotatorModel> train_half_models(const RunConfig& config,
                                                            const std::vector<const ImageRegions*>& regions,
                                                            const std::vector<const RegionAnnotation*>& labels,
                                                            std::ostream& log, const std::string& context) {
    std::vector<LabeledRegion> upper, lower;
    std::array<bool, kConceptCount> seen{};
    int channels = 0;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const ImageRegions& r = *regions[i];
        if (channels != 0 && channels != r.channels) throw Error("training images mix grey and colour inputs");
        channels = r.channels;
        for (std::size_t c = 0; c < r.halves.size(); ++c) {
            const ConceptLabel label = labels[i]->cells[c].primary();
            seen[concept_index(label)] = true;
            LabeledRegion lr{r.vectors.col(static_cast<Eigen::Index>(c)).cast<double>(), label};
            (r.halves[c] == Half::Upper ? upper : lower).push_back(std::move(lr));
        }
    }
    std::string missing;
    for (std::size_t c = 0; c < kConceptCount; ++c)
        if (!seen[c]) missing += (missing.empty() ? "" : ", ") + std::string(kConceptNames[c]);
    if (!missing.empty()) log << "warning: " << context << ": no training regions for " << missing << '\n';
    return {train_annotator(upper, Half::Upper, config.region_approach, config.knn_k, config.annotator, channels),
            train_annotator(lower, Half::Lower, config.region_approach, config.knn_k, config.annotator, channels)};
}

LabelGrid predict_grid(const ImageRegions& r, const AnnotatorModel& upper, const AnnotatorModel& lower, GridShape grid) {
    for (const AnnotatorModel* m : {&upper, &lower})
        if (m->channels != r.channels)
            throw Error("annotator was trained on " + std::to_string(m->channels) + "-channel images, got " +
                        std::to_string(r.channels) + " channels");
    LabelGrid out;
    out.grid = grid;
    for (std::size_t c = 0; c < r.halves.size(); ++c) {
        const AnnotatorModel& m = r.halves[c] == Half::Upper ? upper : lower;
        out.labels.push_back(m.predict(r.vectors.col(static_cast<Eigen::Index>(c)).cast<double>()));
    }
    return out;
}

void save_covs(const OutputLayout& layout, Representation rep, const std::map<std::string, ConceptOccurrenceVector>& covs,
               std::ostream& log) {
    io::write_file_atomic(layout.cov_text(rep), format_covs(covs));
    FeatureStore store{rep, {}};
    for (const auto& [id, cov] : covs) store.vectors.emplace(id, Eigen::VectorXd(cov));
    save_feature_store(store, layout.feature_store(rep));
    log << rep.name() << ": " << covs.size() << " vectors -> " << layout.feature_store(rep).string() << '\n';
}

}  // namespace

void cmd_annotate(const RunConfig& config, bool use_ground_truth, std::ostream& log) {
    validate_config(config);
    const DatasetManifest manifest = require_manifest(config);
    const OutputLayout layout{config.out};
    const RegionAnnotationMap annotations = require_annotations(config, manifest);

    if (use_ground_truth) {
        std::map<std::string, ConceptOccurrenceVector> covs;
        for (const ManifestEntry& e : manifest.entries) covs[e.image_id] = cov_from_annotations(annotations.at(e.image_id));
        save_covs(layout, Representation::ground_truth_cov(), covs, log);
        return;
    }

    const RegionApproach approach = config.region_approach;
    const RegionVocabularyHolder vocabs = load_region_vocabularies(layout, approach, manifest);
    const DescriptorStore descriptors = ensure_descriptors(config, manifest, log);
    for (const ManifestEntry& e : manifest.entries)
        if (!descriptors.images.count(e.image_id)) throw Error("image " + e.image_id + " could not be decoded");

    log << "representing grid regions with " << region_approach_name(approach) << '\n';
    std::vector<ImageRegions> regions(manifest.entries.size());
    parallel_for(manifest.entries.size(), config.threads, [&](std::size_t i) {
        const ManifestEntry& e = manifest.entries[i];
        const ImageData data = prepare_image(read_image(e.path), descriptors.images.at(e.image_id).features());
        regions[i] = compute_regions(data, approach, vocabs.view(), config.grid);
    });
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) position[manifest.entries[i].image_id] = i;

    const FoldPlan plan = split_folds(manifest, config.folds, config.seed);
    std::map<std::string, LabelGrid> predicted;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        std::set<std::string> held_out;
        for (const FoldCategory& fc : plan.folds[f].categories) held_out.insert(fc.queries.begin(), fc.queries.end());
        std::vector<const ImageRegions*> train;
        std::vector<const RegionAnnotation*> labels;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            if (held_out.count(manifest.entries[i].image_id)) continue;
            train.push_back(&regions[i]);
            labels.push_back(&annotations.at(manifest.entries[i].image_id));
        }
        const auto [upper, lower] = train_half_models(config, train, labels, log, "fold " + std::to_string(f));
        const std::vector<std::string> queries(held_out.begin(), held_out.end());
        std::vector<LabelGrid> grids(queries.size());
        parallel_for(queries.size(), config.threads,
                     [&](std::size_t q) { grids[q] = predict_grid(regions[position.at(queries[q])], upper, lower, config.grid); });
        for (std::size_t q = 0; q < queries.size(); ++q) predicted[queries[q]] = std::move(grids[q]);
    }

    const fs::path dir = layout.predicted_annotations(approach);
    std::map<std::string, ConceptOccurrenceVector> covs;
    for (const auto& [id, grid] : predicted) {
        io::write_file_atomic(dir / (id + std::string(kRegionsSuffix)), format_region_annotation(to_annotation(grid)));
        covs[id] = cov_from_annotations(grid);
    }
    save_covs(layout, Representation::predicted_cov(approach), covs, log);
}

// ---------------------------------------------------------------------------

namespace {

FeatureStore require_store(const OutputLayout& layout, Representation rep) {
    const fs::path path = layout.feature_store(rep);
    if (!fs::exists(path)) {
        const char* hint = rep.is_cov() ? "annotate" : "encode";
        throw Error("missing feature store for " + rep.name() + ": " + path.string() + " (run " + hint + " first)");
    }
    FeatureStore store = load_feature_store(path);
    if (!(store.representation == rep)) throw Error(path.string() + " holds " + store.representation.name() + " vectors");
    return store;
}

RetrievalIndex index_from_store(const FeatureStore& store, const DatasetManifest& manifest) {
    std::vector<IndexedVector> items;
    for (const ManifestEntry& e : manifest.entries) {
        auto it = store.vectors.find(e.image_id);
        if (it != store.vectors.end()) items.push_back({e.image_id, e.category, it->second});
    }
    return build_index(store.representation, std::move(items));
}

}  // namespace

void cmd_index(const RunConfig& config, std::ostream& log) {
    validate_config(config);
    const DatasetManifest manifest = require_manifest(config);
    const OutputLayout layout{config.out};
    for (Representation rep : requested_representations(config)) {
        const RetrievalIndex index = index_from_store(require_store(layout, rep), manifest);
        save_index(index, layout.index(rep));
        log << rep.name() << ": " << index.size() << " entries, dim " << index.dim() << " -> " << layout.index(rep).string()
            << '\n';
    }
}

void cmd_query(const RunConfig& config, const QueryRequest& request, std::ostream& out, std::ostream& log) {
    validate_config(config);
    const auto rep = Representation::parse(request.approach);
    if (!rep) {
        RunConfig probe = config;
        probe.approaches = {request.approach};
        requested_representations(probe);  // throws the usage error listing valid names
    }
    if (request.image.empty() && !(rep->is_ground_truth_cov() && !request.regions.empty()))
        throw UsageError("no query image given (--image)");
    const DatasetManifest manifest = require_manifest(config);
    const OutputLayout layout{config.out};

    RetrievalIndex index;
    if (fs::exists(layout.index(*rep))) {
        index = load_index(layout.index(*rep));
    } else {
        index = index_from_store(require_store(layout, *rep), manifest);
    }
    if (!(index.representation() == *rep))
        throw Error("approach mismatch: the index holds " + index.representation().name() + " vectors, the query is " +
                    rep->name());

    Eigen::VectorXd q;
    if (rep->is_ground_truth_cov()) {
        if (request.regions.empty()) throw UsageError("COV queries need the query image's annotation (--regions)");
        q = cov_from_annotations(parse_region_annotation(io::read_text_file(request.regions), config.grid));
    } else {
        const Image img = read_image(request.image);
        const LocalFeatures features = to_stored(img.width, img.height, extract_local_features(img, config.detector)).features();
        const ImageData data = prepare_image(img, features);
        if (auto approach = rep->approach()) {
            std::optional<Vocabulary> universal, integrated;
            if (approach_uses(*approach, VocabularyKind::Universal))
                universal = require_vocabulary(layout, VocabularyKind::Universal, manifest);
            if (approach_uses(*approach, VocabularyKind::Integrated))
                integrated = require_vocabulary(layout, VocabularyKind::Integrated, manifest);
            VocabularySet vocabs;
            vocabs.universal = universal ? &*universal : nullptr;
            vocabs.integrated = integrated ? &*integrated : nullptr;
            ComposeOptions compose;
            compose.level_weights = config.level_weights;
            q = encode_image(*approach, data, vocabs, compose).values;
        } else {
            // Predicted concept occurrences: annotators trained on every annotated dataset image.
            const RegionApproach region = *rep->region_approach();
            RunConfig trained = config;
            trained.region_approach = region;
            const RegionAnnotationMap annotations = require_annotations(config, manifest);
            const RegionVocabularyHolder vocabs = load_region_vocabularies(layout, region, manifest);
            const DescriptorStore descriptors = ensure_descriptors(config, manifest, log);
            std::vector<ImageRegions> regions(manifest.entries.size());
            parallel_for(manifest.entries.size(), config.threads, [&](std::size_t i) {
                const ManifestEntry& e = manifest.entries[i];
                const ImageData d = prepare_image(read_image(e.path), descriptors.images.at(e.image_id).features());
                regions[i] = compute_regions(d, region, vocabs.view(), config.grid);
            });
            std::vector<const ImageRegions*> train;
            std::vector<const RegionAnnotation*> labels;
            for (std::size_t i = 0; i < regions.size(); ++i) {
                train.push_back(&regions[i]);
                labels.push_back(&annotations.at(manifest.entries[i].image_id));
            }
            const auto [upper, lower] = train_half_models(trained, train, labels, log, "query annotators");
            const LabelGrid grid = predict_grid(compute_regions(data, region, vocabs.view(), config.grid), upper, lower, config.grid);
            q = cov_from_annotations(grid);
        }
    }
    q = as_stored(*rep, q);
    const std::string query_id = request.image.empty() ? request.regions.stem().string() : request.image.stem().string();
    out << format_ranked_list(query(index, q, request.top, config.threads, query_id));
}

// ---------------------------------------------------------------------------

void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& log) {
    validate_config(config);
    const DatasetManifest manifest = require_manifest(config);
    const OutputLayout layout{config.out};
    const std::vector<Representation> reps = requested_representations(config);
    std::vector<FeatureStore> stores;
    for (Representation rep : reps) stores.push_back(require_store(layout, rep));
    std::vector<BenchmarkInput> inputs;
    for (const FeatureStore& s : stores) inputs.push_back({s.representation.name(), &s.vectors});

    const FoldPlan plan = split_folds(manifest, config.folds, config.seed);
    log << "evaluating " << inputs.size() << " representations over " << plan.folds.size() << " folds\n";
    EvalReport report = run_benchmark(plan, inputs, config.threads);
    report.metadata["seed"] = std::to_string(config.seed);
    report.metadata["folds"] = std::to_string(config.folds);
    report.metadata["words_per_category"] = std::to_string(config.words_per_category);
    report.metadata["categories"] = std::to_string(manifest.category_count());
    report.metadata["annotator"] = std::string(annotator_kind_name(config.annotator));
    report.metadata["knn_k"] = std::to_string(config.knn_k);

    export_report(report, layout.report());
    io::write_file_atomic(layout.report() / "config.txt", format_config(config));
    io::write_file_atomic(layout.report() / "folds.tsv", format_fold_plan(plan));
    for (const ApproachReport& ar : report.approaches) out << ar.name << '\t' << io::fixed(ar.accuracy, 4) << '\n';
    log << "report -> " << layout.report().string() << '\n';
}

void cmd_export_pr(const RunConfig& config, const fs::path& report_dir, std::ostream& log) {
    const fs::path dir = report_dir.empty() ? OutputLayout{config.out}.report() : report_dir;
    const fs::path json = dir / "report.json";
    if (!fs::exists(json)) throw Error("no report at " + json.string() + " (run evaluate first)");
    const EvalReport report = report_from_json(io::read_text_file(json));
    export_pr_curves(report, dir);
    log << "PR curves -> " << (dir / "pr").string() << '\n';
}

}  // namespace sceneret
