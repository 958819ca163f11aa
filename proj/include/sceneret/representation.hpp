#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sceneret {

/// The fourteen whole-image representations. Enumerator values are the
/// on-disk approach tags.
enum class Approach : std::uint8_t {
    ColHist,
    PColMom_L0,
    DWT,
    ColHist_DWT,
    PColMom_L2,
    UBOW,
    IBOW,
    PUBOW_L1,
    PUBOW_L2,
    PUBOW_L2_PColMom_L2,
    PIBOW_L1,
    PIBOW_L2,
    PIBOW_L2_PColMom_L2,
    PIBOW_L2_WPColMom_L2,
};

inline constexpr std::array<Approach, 14> kAllApproaches = {
    Approach::ColHist,     Approach::PColMom_L0,          Approach::DWT,      Approach::ColHist_DWT,
    Approach::PColMom_L2,  Approach::UBOW,                Approach::IBOW,     Approach::PUBOW_L1,
    Approach::PUBOW_L2,    Approach::PUBOW_L2_PColMom_L2, Approach::PIBOW_L1, Approach::PIBOW_L2,
    Approach::PIBOW_L2_PColMom_L2, Approach::PIBOW_L2_WPColMom_L2,
};

std::string_view approach_name(Approach a);
/// Case-insensitive; accepts the canonical names ("PIBOW_L2+WPColMom_L2").
std::optional<Approach> parse_approach(std::string_view name);

/// The fourteen region representations used to train concept annotators.
enum class RegionApproach : std::uint8_t {
    ColHist = 1,
    ColMom,
    DWT,
    ColHist_DWT,
    UBOW,
    IBOW,
    UBOW_ColHist,
    UBOW_ColMom,
    UBOW_DWT,
    UBOW_ColHist_DWT,
    IBOW_ColHist,
    IBOW_ColMom,
    IBOW_DWT,
    IBOW_ColHist_DWT,
};

inline constexpr std::array<RegionApproach, 14> kAllRegionApproaches = {
    RegionApproach::ColHist,      RegionApproach::ColMom,           RegionApproach::DWT,
    RegionApproach::ColHist_DWT,  RegionApproach::UBOW,             RegionApproach::IBOW,
    RegionApproach::UBOW_ColHist, RegionApproach::UBOW_ColMom,      RegionApproach::UBOW_DWT,
    RegionApproach::UBOW_ColHist_DWT, RegionApproach::IBOW_ColHist, RegionApproach::IBOW_ColMom,
    RegionApproach::IBOW_DWT,     RegionApproach::IBOW_ColHist_DWT,
};

std::string_view region_approach_name(RegionApproach a);
/// Case-insensitive, e.g. "ibow+colhist".
std::optional<RegionApproach> parse_region_approach(std::string_view name);

/// Tag identifying what a stored vector represents: a whole-image approach
/// (0..13), the ground-truth concept occurrence vector (100), or a concept
/// occurrence vector predicted with a region approach (100 + its number).
struct Representation {
    std::uint8_t tag = 0;

    static Representation of(Approach a) { return {static_cast<std::uint8_t>(a)}; }
    static Representation ground_truth_cov() { return {kCovBase}; }
    static Representation predicted_cov(RegionApproach r) {
        return {static_cast<std::uint8_t>(kCovBase + static_cast<std::uint8_t>(r))};
    }

    bool is_cov() const { return tag >= kCovBase; }
    bool is_ground_truth_cov() const { return tag == kCovBase; }
    std::optional<Approach> approach() const;
    std::optional<RegionApproach> region_approach() const;
    std::string name() const;
    /// Validates a raw on-disk tag.
    static std::optional<Representation> from_tag(std::uint8_t tag);
    /// "ColHist", "COV", "COV:IBOW+ColHist", ...
    static std::optional<Representation> parse(std::string_view name);

    bool operator==(const Representation&) const = default;

    static constexpr std::uint8_t kCovBase = 100;
};

}  // namespace sceneret
