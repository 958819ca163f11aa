#include "sceneret/evaluation.hpp"

#include <algorithm>

#include <json.hpp>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"
#include "sceneret/parallel.hpp"
#include "sceneret/retrieval.hpp"

namespace sceneret {

namespace {

long count_relevant(const std::vector<bool>& relevance) {
    return static_cast<long>(std::count(relevance.begin(), relevance.end(), true));
}

}  // namespace

std::vector<PrecisionRecallPoint> precision_recall_curve(const std::vector<bool>& relevance, long X) {
    if (X < 1) throw Error("precision/recall need at least one relevant item");
    if (count_relevant(relevance) != X)
        throw Error("relevant count " + std::to_string(X) + " does not match the ranking (" +
                    std::to_string(count_relevant(relevance)) + " relevant flags)");
    std::vector<PrecisionRecallPoint> out;
    out.reserve(relevance.size());
    long z = 0;
    for (std::size_t i = 0; i < relevance.size(); ++i) {
        if (relevance[i]) ++z;
        const long y = static_cast<long>(i) + 1;
        out.push_back({y, z, X, static_cast<double>(z) / static_cast<double>(y), static_cast<double>(z) / static_cast<double>(X)});
    }
    return out;
}

double average_precision(const std::vector<bool>& relevance, long X) {
    if (X < 1) throw Error("average precision needs at least one relevant item");
    if (count_relevant(relevance) != X)
        throw Error("relevant count " + std::to_string(X) + " does not match the ranking");
    double sum = 0.0;
    long z = 0;
    for (std::size_t i = 0; i < relevance.size(); ++i) {
        if (!relevance[i]) continue;
        ++z;
        sum += static_cast<double>(z) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(X);
}

PrCurve average_curves(const std::vector<PrCurve>& curves) {
    if (curves.empty()) return {};
    std::size_t len = curves.front().size();
    for (const PrCurve& c : curves) len = std::min(len, c.size());
    PrCurve out(len, {0.0, 0.0});
    for (const PrCurve& c : curves)
        for (std::size_t i = 0; i < len; ++i) {
            out[i].first += c[i].first;
            out[i].second += c[i].second;
        }
    const double n = static_cast<double>(curves.size());
    for (auto& p : out) {
        p.first /= n;
        p.second /= n;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct QueryResult {
    double ap = 0.0;
    PrCurve curve;
};

const Eigen::VectorXd& lookup(const BenchmarkInput& input, const std::string& id) {
    auto it = input.vectors->find(id);
    if (it == input.vectors->end()) throw Error("no " + input.name + " vector for image " + id);
    return it->second;
}

}  // namespace

EvalReport run_benchmark(const FoldPlan& plan, std::span<const BenchmarkInput> inputs, unsigned threads) {
    if (plan.folds.empty()) throw Error("fold plan has no folds");
    if (inputs.empty()) throw Error("no approaches to evaluate");
    EvalReport report;
    for (const FoldCategory& fc : plan.folds.front().categories) report.categories.push_back(fc.category);
    const std::size_t n_cat = report.categories.size();

    for (const BenchmarkInput& input : inputs) {
        if (!input.vectors) throw Error("no feature store for " + input.name);
        ApproachReport ar;
        ar.name = input.name;
        std::vector<std::vector<double>> aps(n_cat);
        std::vector<std::vector<PrCurve>> curves(n_cat);

        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            const Fold& fold = plan.folds[f];
            if (fold.categories.size() != n_cat) throw Error("folds disagree on the category list");
            std::vector<IndexedVector> db;
            struct Query {
                std::size_t category;
                const std::string* id;
            };
            std::vector<Query> queries;
            for (std::size_t c = 0; c < n_cat; ++c) {
                const FoldCategory& fc = fold.categories[c];
                if (fc.category != report.categories[c]) throw Error("folds disagree on the category order");
                for (const std::string& id : fc.database) db.push_back({id, fc.category, lookup(input, id)});
                for (const std::string& id : fc.queries) queries.push_back({c, &id});
            }
            if (db.empty() || queries.empty()) throw Error("fold " + std::to_string(f) + " is empty");
            const RetrievalIndex index = build_index(Representation{}, std::move(db));
            std::vector<long> relevant_in_db(n_cat, 0);
            for (const std::string& cat : index.categories())
                ++relevant_in_db[static_cast<std::size_t>(
                    std::find(report.categories.begin(), report.categories.end(), cat) - report.categories.begin())];

            std::vector<QueryResult> results(queries.size());
            parallel_for(queries.size(), threads, [&](std::size_t q) {
                const std::string& cat = report.categories[queries[q].category];
                const RankedList ranked = query(index, lookup(input, *queries[q].id));
                std::vector<bool> relevance;
                relevance.reserve(ranked.items.size());
                for (const RankedItem& item : ranked.items) relevance.push_back(item.category == cat);
                const long X = relevant_in_db[queries[q].category];
                results[q].ap = average_precision(relevance, X);
                for (const PrecisionRecallPoint& p : precision_recall_curve(relevance, X))
                    results[q].curve.emplace_back(p.R, p.P);
            });

            std::vector<double> fold_sum(n_cat, 0.0);
            std::vector<std::size_t> fold_count(n_cat, 0);
            for (std::size_t q = 0; q < queries.size(); ++q) {
                const std::size_t c = queries[q].category;
                aps[c].push_back(results[q].ap);
                curves[c].push_back(std::move(results[q].curve));
                fold_sum[c] += results[q].ap;
                ++fold_count[c];
            }
            for (std::size_t c = 0; c < n_cat; ++c)
                if (fold_count[c] > 0)
                    ar.per_fold.push_back({static_cast<int>(f), report.categories[c], fold_sum[c] / static_cast<double>(fold_count[c])});
        }

        std::vector<PrCurve> all_curves;
        double map_sum = 0.0;
        for (std::size_t c = 0; c < n_cat; ++c) {
            if (aps[c].empty()) throw Error("category " + report.categories[c] + " has no queries");
            CategoryResult cr;
            cr.category = report.categories[c];
            double sum = 0.0;
            for (double ap : aps[c]) sum += ap;
            cr.queries = aps[c].size();
            cr.map = sum / static_cast<double>(cr.queries);
            cr.curve = average_curves(curves[c]);
            map_sum += cr.map;
            for (PrCurve& curve : curves[c]) all_curves.push_back(std::move(curve));
            ar.categories.push_back(std::move(cr));
        }
        ar.accuracy = map_sum / static_cast<double>(n_cat);
        ar.curve = average_curves(all_curves);
        report.approaches.push_back(std::move(ar));
    }
    return report;
}

// ---------------------------------------------------------------------------

std::string format_map_table(const EvalReport& report) {
    std::string out = "approach";
    for (const std::string& c : report.categories) out += '\t' + c;
    out += "\taccuracy\n";
    for (const ApproachReport& ar : report.approaches) {
        out += ar.name;
        for (const CategoryResult& cr : ar.categories) out += '\t' + io::fixed(cr.map, 4);
        out += '\t' + io::fixed(ar.accuracy, 4) + '\n';
    }
    return out;
}

std::string curve_file_stem(std::string_view approach_name) {
    std::string out(approach_name);
    for (char& ch : out) {
        const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                        ch == '+' || ch == '-' || ch == '.';
        if (!ok) ch = '_';
    }
    return out;
}

namespace {

std::string format_curve(const PrCurve& curve) {
    std::string out = "recall\tprecision\n";
    for (const auto& [r, p] : curve) out += io::fixed(r, 9) + '\t' + io::fixed(p, 9) + '\n';
    return out;
}

using nlohmann::ordered_json;

ordered_json curve_json(const PrCurve& curve) {
    ordered_json out = ordered_json::array();
    for (const auto& [r, p] : curve) out.push_back({r, p});
    return out;
}

PrCurve curve_from_json(const ordered_json& j) {
    PrCurve out;
    for (const auto& p : j) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return out;
}

}  // namespace

void export_pr_curves(const EvalReport& report, const std::filesystem::path& out) {
    for (const ApproachReport& ar : report.approaches) {
        const std::string stem = curve_file_stem(ar.name);
        for (const CategoryResult& cr : ar.categories)
            io::write_file_atomic(out / "pr" / stem / (curve_file_stem(cr.category) + ".tsv"), format_curve(cr.curve));
        io::write_file_atomic(out / "pr" / (stem + ".tsv"), format_curve(ar.curve));
    }
}

void export_report(const EvalReport& report, const std::filesystem::path& out) {
    if (report.approaches.empty()) throw Error("report has no approaches");
    io::write_file_atomic(out / "map_table.tsv", format_map_table(report));
    io::write_file_atomic(out / "report.json", report_to_json(report));
    export_pr_curves(report, out);
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["metadata"] = ordered_json::object();
    for (const auto& [k, v] : report.metadata) j["metadata"][k] = v;
    j["categories"] = report.categories;
    j["approaches"] = ordered_json::array();
    for (const ApproachReport& ar : report.approaches) {
        ordered_json a;
        a["name"] = ar.name;
        a["accuracy"] = ar.accuracy;
        a["categories"] = ordered_json::array();
        for (const CategoryResult& cr : ar.categories)
            a["categories"].push_back(
                {{"category", cr.category}, {"map", cr.map}, {"queries", cr.queries}, {"curve", curve_json(cr.curve)}});
        a["curve"] = curve_json(ar.curve);
        a["per_fold"] = ordered_json::array();
        for (const FoldCategoryMap& fm : ar.per_fold)
            a["per_fold"].push_back({{"fold", fm.fold}, {"category", fm.category}, {"map", fm.map}});
        j["approaches"].push_back(std::move(a));
    }
    return j.dump(1) + '\n';
}

EvalReport report_from_json(std::string_view text) {
    EvalReport report;
    try {
        const ordered_json j = ordered_json::parse(text);
        for (const auto& [k, v] : j.at("metadata").items()) report.metadata[k] = v.get<std::string>();
        report.categories = j.at("categories").get<std::vector<std::string>>();
        for (const auto& a : j.at("approaches")) {
            ApproachReport ar;
            ar.name = a.at("name").get<std::string>();
            ar.accuracy = a.at("accuracy").get<double>();
            for (const auto& c : a.at("categories"))
                ar.categories.push_back({c.at("category").get<std::string>(), c.at("map").get<double>(),
                                         c.at("queries").get<std::size_t>(), curve_from_json(c.at("curve"))});
            ar.curve = curve_from_json(a.at("curve"));
            for (const auto& f : a.at("per_fold"))
                ar.per_fold.push_back({f.at("fold").get<int>(), f.at("category").get<std::string>(), f.at("map").get<double>()});
            report.approaches.push_back(std::move(ar));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
    return report;
}

}  // namespace sceneret
