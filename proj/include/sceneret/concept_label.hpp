#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace sceneret {

/// The nine local semantic concepts used to label grid regions of natural
/// scenes. The enumerator order fixes the component order of concept
/// occurrence vectors.
enum class ConceptLabel : std::uint8_t {
    Sky,
    Water,
    Grass,
    Trunks,
    Foliage,
    Field,
    Rocks,
    Flowers,
    Sand,
};

inline constexpr std::size_t kConceptCount = 9;

inline constexpr std::array<std::string_view, kConceptCount> kConceptNames = {
    "sky", "water", "grass", "trunks", "foliage", "field", "rocks", "flowers", "sand"};

constexpr std::string_view concept_name(ConceptLabel c) {
    return kConceptNames[static_cast<std::size_t>(c)];
}

constexpr std::optional<ConceptLabel> parse_concept(std::string_view token) {
    for (std::size_t i = 0; i < kConceptCount; ++i)
        if (kConceptNames[i] == token) return static_cast<ConceptLabel>(i);
    return std::nullopt;
}

constexpr std::size_t concept_index(ConceptLabel c) { return static_cast<std::size_t>(c); }

}  // namespace sceneret
