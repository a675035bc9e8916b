#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "errors.hpp"

namespace bpdhar {

/// The seven annotated behaviours, in canonical order.
enum class Label : int {
    apathy = 0,
    restlessness = 1,
    mannerisms = 2,
    pacing = 3,
    aggression = 4,
    locomotion_intent = 5,
    normal = 6,
};

inline constexpr std::size_t kLabelCount = 7;

inline constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "apathy", "restlessness", "mannerisms", "pacing", "aggression", "locomotion_intent", "normal",
};

inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::apathy,     Label::restlessness,      Label::mannerisms, Label::pacing,
    Label::aggression, Label::locomotion_intent, Label::normal,
};

constexpr int index_of(Label l) noexcept { return static_cast<int>(l); }

constexpr Label label_from_index(int i) {
    if (i < 0 || i >= static_cast<int>(kLabelCount))
        throw ArgumentError("label index out of range: " + std::to_string(i));
    return static_cast<Label>(i);
}

constexpr std::string_view name_of(Label l) noexcept { return kLabelNames[static_cast<std::size_t>(l)]; }

constexpr std::optional<Label> parse_label(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kLabelCount; ++i)
        if (kLabelNames[i] == name) return static_cast<Label>(i);
    return std::nullopt;
}

using LabelCounts = std::array<std::size_t, kLabelCount>;
using LabelProbs = std::array<double, kLabelCount>;

}  // namespace bpdhar
