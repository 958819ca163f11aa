#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sceneret/dataset.hpp"
#include "sceneret/stores.hpp"

namespace sceneret {

/// Precision and recall after the first Y retrieved images.
struct PrecisionRecallPoint {
    long Y = 0;  // retrieved
    long Z = 0;  // relevant among the retrieved
    long X = 0;  // relevant in the database
    double P = 0.0;
    double R = 0.0;
};

/// One point per rank. `X` must equal the number of relevant flags.
std::vector<PrecisionRecallPoint> precision_recall_curve(const std::vector<bool>& relevance, long X);

/// Mean of the precisions at the ranks of relevant items, divided by X.
double average_precision(const std::vector<bool>& relevance, long X);

/// (recall, precision) pairs.
using PrCurve = std::vector<std::pair<double, double>>;

/// Per-rank mean over curves, truncated to the shortest.
PrCurve average_curves(const std::vector<PrCurve>& curves);

struct CategoryResult {
    std::string category;
    double map = 0.0;
    std::size_t queries = 0;
    PrCurve curve;
};

struct FoldCategoryMap {
    int fold = 0;
    std::string category;
    double map = 0.0;
};

struct ApproachReport {
    std::string name;
    std::vector<CategoryResult> categories;  // report category order
    double accuracy = 0.0;                   // mean of the category MAPs
    PrCurve curve;                           // averaged over every query
    std::vector<FoldCategoryMap> per_fold;
};

struct EvalReport {
    std::vector<std::string> categories;
    std::vector<ApproachReport> approaches;
    std::map<std::string, std::string> metadata;
};

struct BenchmarkInput {
    std::string name;
    const VectorStore* vectors = nullptr;
};

/// For every fold, input and query: ranks the fold's database, scores AP
/// against same-category relevance. Category MAPs pool queries across folds.
EvalReport run_benchmark(const FoldPlan& plan, std::span<const BenchmarkInput> inputs, unsigned threads = 1);

/// Tab-separated MAP table: `approach`, one column per category, `accuracy`.
std::string format_map_table(const EvalReport& report);

/// Writes map_table.tsv, report.json and the PR curves (see export_pr_curves).
void export_report(const EvalReport& report, const std::filesystem::path& out);
/// pr/<approach>/<category>.tsv and pr/<approach>.tsv, `recall<TAB>precision`.
void export_pr_curves(const EvalReport& report, const std::filesystem::path& out);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);

/// File name used for an approach's curve files.
std::string curve_file_stem(std::string_view approach_name);

}  // namespace sceneret
