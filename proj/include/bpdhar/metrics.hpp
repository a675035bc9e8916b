#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>

#include "labels.hpp"

namespace bpdhar {

/// counts[true][predicted], canonical label order on both axes.
using ConfusionMatrix = std::array<std::array<std::size_t, kLabelCount>, kLabelCount>;

inline ConfusionMatrix confusion_matrix(std::span<const std::pair<Label, Label>> pairs) {
    ConfusionMatrix m{};
    for (const auto& [truth, predicted] : pairs)
        ++m[static_cast<std::size_t>(index_of(truth))][static_cast<std::size_t>(index_of(predicted))];
    return m;
}

inline std::size_t total(const ConfusionMatrix& m) {
    std::size_t n = 0;
    for (const auto& row : m)
        for (std::size_t v : row) n += v;
    return n;
}

struct F1Scores {
    /// Mean per-class F1 over classes that occur in the true labels; 0 when none do.
    double macro = 0.0;
    std::array<double, kLabelCount> per_class{};
    std::array<bool, kLabelCount> present{};
};

inline F1Scores f1_macro(const ConfusionMatrix& m) {
    F1Scores out;
    double sum = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
        std::size_t tp = m[c][c], fn = 0, fp = 0;
        for (std::size_t j = 0; j < kLabelCount; ++j) {
            if (j == c) continue;
            fn += m[c][j];
            fp += m[j][c];
        }
        // 2PR/(P+R) == 2TP/(2TP+FP+FN); 0/0 counts as 0.
        const std::size_t denom = 2 * tp + fp + fn;
        out.per_class[c] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        out.present[c] = tp + fn > 0;
        if (out.present[c]) {
            sum += out.per_class[c];
            ++present;
        }
    }
    out.macro = present == 0 ? 0.0 : sum / present;
    return out;
}

}  // namespace bpdhar
