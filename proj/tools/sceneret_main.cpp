#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sceneret/config.hpp"
#include "sceneret/error.hpp"
#include "sceneret/pipeline.hpp"

using namespace sceneret;

namespace {

struct CommonFlags {
    std::optional<std::string> dataset;
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--dataset", f.dataset, "Dataset root (category sub-directories or manifest.tsv)");
    cmd->add_option("--config", f.config, "Run configuration file (key = value lines)");
    cmd->add_option("--seed", f.seed, "Seed for fold shuffles, k-means and subsampling");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--set", f.set, "Override a config key, e.g. --set detector.sigma=1.6")->take_all();
}

RunConfig resolve(const CommonFlags& f) {
    RunConfig c;
    if (f.config) c = load_config(*f.config, c);
    if (f.dataset) c.dataset = *f.dataset;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (f.out) c.out = *f.out;
    for (const std::string& kv : f.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene image retrieval with bags of visual words and concept occurrence vectors"};
    app.require_subcommand(1);

    CommonFlags common;

    auto* vocab = app.add_subcommand("build-vocab", "Cluster SIFT descriptors into visual vocabularies");
    std::string vocab_kind = "all";
    std::optional<int> vocab_k;
    vocab->add_option("--kind", vocab_kind, "universal, integrated, halves or all")->capture_default_str();
    vocab->add_option("--k", vocab_k, "Words per category");
    add_common(vocab, common);

    auto* encode = app.add_subcommand("encode", "Encode every dataset image into feature stores");
    std::vector<std::string> encode_approaches;
    encode->add_option("--approach", encode_approaches, "Approach name(s); default all fourteen")->delimiter(',');
    add_common(encode, common);

    auto* annotate = app.add_subcommand("annotate", "Build concept occurrence vectors");
    std::optional<std::string> region_approach, annotator, annotations;
    std::optional<int> knn_k;
    bool use_ground_truth = false;
    annotate->add_option("--approach", region_approach, "Region representation, e.g. ibow+colhist");
    annotate->add_flag("--use-ground-truth", use_ground_truth, "Use the annotation files directly, no classifier");
    annotate->add_option("--annotator", annotator, "knn or nearest-centroid");
    annotate->add_option("--knn-k", knn_k, "Neighbours per vote");
    annotate->add_option("--annotations", annotations, "Directory of <image_id>.regions.txt files");
    add_common(annotate, common);

    auto* index = app.add_subcommand("index", "Build retrieval index files from feature stores");
    std::vector<std::string> index_approaches;
    index->add_option("--approach", index_approaches, "Representation name(s)")->delimiter(',');
    add_common(index, common);

    auto* query = app.add_subcommand("query", "Rank the dataset against one query image");
    QueryRequest request;
    std::optional<std::size_t> top;
    std::string query_image, query_regions;
    query->add_option("--image", query_image, "Query image");
    query->add_option("--approach", request.approach, "Representation name")->required();
    query->add_option("--top", top, "Print only the first N results");
    query->add_option("--regions", query_regions, "Query annotation (.regions.txt) for COV queries");
    add_common(query, common);

    auto* evaluate = app.add_subcommand("evaluate", "Run the fold protocol and write MAP tables and PR curves");
    std::vector<std::string> eval_approaches;
    std::optional<int> folds;
    evaluate->add_option("--approaches,--approach", eval_approaches, "Representation names (COV included)")->delimiter(',');
    evaluate->add_option("--folds", folds, "Number of folds");
    add_common(evaluate, common);

    auto* export_pr = app.add_subcommand("export-pr", "Rewrite PR-curve files from a saved report");
    std::string report_dir;
    export_pr->add_option("--report", report_dir, "Report directory (default <out>/report)");
    add_common(export_pr, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig config = resolve(common);
        if (vocab->parsed()) {
            if (vocab_k) config.words_per_category = *vocab_k;
            cmd_build_vocab(config, vocab_kind, std::cerr);
        } else if (encode->parsed()) {
            if (!encode_approaches.empty()) config.approaches = encode_approaches;
            cmd_encode(config, std::cerr);
        } else if (annotate->parsed()) {
            if (region_approach) set_config_value(config, "region_approach", *region_approach);
            if (annotator) set_config_value(config, "annotator", *annotator);
            if (knn_k) config.knn_k = *knn_k;
            if (annotations) config.annotations = *annotations;
            cmd_annotate(config, use_ground_truth, std::cerr);
        } else if (index->parsed()) {
            if (!index_approaches.empty()) config.approaches = index_approaches;
            cmd_index(config, std::cerr);
        } else if (query->parsed()) {
            request.image = query_image;
            request.regions = query_regions;
            request.top = top;
            cmd_query(config, request, std::cout, std::cerr);
        } else if (evaluate->parsed()) {
            if (!eval_approaches.empty()) config.approaches = eval_approaches;
            if (folds) config.folds = *folds;
            cmd_evaluate(config, std::cout, std::cerr);
        } else if (export_pr->parsed()) {
            cmd_export_pr(config, report_dir, std::cerr);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
