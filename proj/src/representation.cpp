#include "sceneret/representation.hpp"

#include <algorithm>
#include <cctype>

namespace sceneret {

namespace {

constexpr std::array<std::string_view, 14> kApproachNames = {
    "ColHist",  "PColMom_L0", "DWT",      "ColHist+DWT",         "PColMom_L2",          "UBOW",
    "IBOW",     "PUBOW_L1",   "PUBOW_L2", "PUBOW_L2+PColMom_L2", "PIBOW_L1",            "PIBOW_L2",
    "PIBOW_L2+PColMom_L2",    "PIBOW_L2+WPColMom_L2",
};

constexpr std::array<std::string_view, 14> kRegionApproachNames = {
    "ColHist",      "ColMom",      "DWT",      "ColHist+DWT",      "UBOW",         "IBOW",        "UBOW+ColHist",
    "UBOW+ColMom",  "UBOW+DWT",    "UBOW+ColHist+DWT", "IBOW+ColHist", "IBOW+ColMom", "IBOW+DWT", "IBOW+ColHist+DWT",
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

constexpr std::string_view kCovName = "COV";

}  // namespace

std::string_view approach_name(Approach a) { return kApproachNames.at(static_cast<std::size_t>(a)); }

std::optional<Approach> parse_approach(std::string_view name) {
    for (std::size_t i = 0; i < kApproachNames.size(); ++i)
        if (iequals(name, kApproachNames[i])) return static_cast<Approach>(i);
    return std::nullopt;
}

std::string_view region_approach_name(RegionApproach a) {
    return kRegionApproachNames.at(static_cast<std::size_t>(a) - 1);
}

std::optional<RegionApproach> parse_region_approach(std::string_view name) {
    for (std::size_t i = 0; i < kRegionApproachNames.size(); ++i)
        if (iequals(name, kRegionApproachNames[i])) return static_cast<RegionApproach>(i + 1);
    return std::nullopt;
}

std::optional<Approach> Representation::approach() const {
    if (tag < kApproachNames.size()) return static_cast<Approach>(tag);
    return std::nullopt;
}

std::optional<RegionApproach> Representation::region_approach() const {
    if (tag > kCovBase && tag <= kCovBase + kRegionApproachNames.size()) return static_cast<RegionApproach>(tag - kCovBase);
    return std::nullopt;
}

std::string Representation::name() const {
    if (auto a = approach()) return std::string(approach_name(*a));
    if (is_ground_truth_cov()) return std::string(kCovName);
    if (auto r = region_approach()) return std::string(kCovName) + ":" + std::string(region_approach_name(*r));
    return "tag" + std::to_string(tag);
}

std::optional<Representation> Representation::from_tag(std::uint8_t tag) {
    Representation r{tag};
    if (r.approach() || r.is_ground_truth_cov() || r.region_approach()) return r;
    return std::nullopt;
}

std::optional<Representation> Representation::parse(std::string_view name) {
    if (auto a = parse_approach(name)) return of(*a);
    if (iequals(name, kCovName)) return ground_truth_cov();
    if (name.size() > kCovName.size() + 1 && iequals(name.substr(0, kCovName.size()), kCovName) &&
        name[kCovName.size()] == ':')
        if (auto r = parse_region_approach(name.substr(kCovName.size() + 1))) return predicted_cov(*r);
    return std::nullopt;
}

}  // namespace sceneret
