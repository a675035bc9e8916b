#pragma once

// Behavioural predispositions: per-segment annotation histograms, grouped
// either by k-means over the histograms or by time of day.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "labels.hpp"
#include "random.hpp"

namespace bpdhar {

struct AnnotationHistogram {
    SegmentKey segment;
    LabelProbs probs{};
    LabelCounts counts{};
    std::size_t count = 0;
};

/// One histogram per segment with at least one annotation, in segment order.
inline std::vector<AnnotationHistogram> build_histograms(std::span<const TimeSegment> segments,
                                                         std::span<const AnnotationRecord> annotations) {
    std::vector<AnnotationHistogram> out;
    for (const auto& seg : segments) {
        if (seg.slots.empty()) continue;
        AnnotationHistogram h;
        h.segment = seg.key();
        for (std::size_t i : seg.slots) ++h.counts[static_cast<std::size_t>(index_of(annotations[i].label))];
        h.count = seg.slots.size();
        for (std::size_t c = 0; c < kLabelCount; ++c)
            h.probs[c] = static_cast<double>(h.counts[c]) / static_cast<double>(h.count);
        out.push_back(h);
    }
    return out;
}

// ---------------------------------------------------------------------------
// k-means (Lloyd with k-means++ seeding)

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
double squared_distance(const Point<D>& a, const Point<D>& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    /// Single-point (Hartigan) moves once Lloyd stalls.
    bool refine = true;
};

template <std::size_t D>
struct KMeansRun {
    std::vector<Point<D>> centroids;
    std::vector<int> assignment;
    double sse = 0.0;
    /// SSE after every Lloyd iteration or refinement pass.
    std::vector<double> sse_trace;
    int iterations = 0;
    bool converged = false;
};

template <std::size_t D>
struct KMeansResult {
    KMeansRun<D> best;
    std::size_t best_restart = 0;
    std::vector<std::vector<double>> restart_traces;
};

namespace detail {

template <std::size_t D>
std::vector<Point<D>> kmeanspp_seed(std::span<const Point<D>> points, int k, Rng& rng) {
    const std::size_t n = points.size();
    std::vector<Point<D>> centers;
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    centers.push_back(points[first]);
    chosen[first] = true;
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick;
        if (total > 0.0) {
            pick = rng.categorical(d2);
        } else {
            // Every point coincides with a centre: pick uniformly among unused indices.
            std::vector<std::size_t> unused;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) unused.push_back(i);
            pick = unused[static_cast<std::size_t>(rng.below(unused.size()))];
        }
        chosen[pick] = true;
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
    return centers;
}

template <std::size_t D>
double sse_of(std::span<const Point<D>> points, const std::vector<Point<D>>& centroids,
              const std::vector<int>& assignment) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        s += squared_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])]);
    return s;
}

template <std::size_t D>
void recompute_centroids(std::span<const Point<D>> points, const std::vector<int>& assignment, int k,
                         std::vector<Point<D>>& centroids, std::vector<std::size_t>& sizes) {
    std::vector<Point<D>> sums(static_cast<std::size_t>(k), Point<D>{});
    sizes.assign(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        ++sizes[c];
        for (std::size_t j = 0; j < D; ++j) sums[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (sizes[c] == 0) continue;  // left for repair
        for (std::size_t j = 0; j < D; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(sizes[c]);
    }
}

template <std::size_t D>
Point<D> mean_of_cluster(std::span<const Point<D>> points, const std::vector<int>& assignment, int cluster) {
    Point<D> sum{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (assignment[i] != cluster) continue;
        ++n;
        for (std::size_t j = 0; j < D; ++j) sum[j] += points[i][j];
    }
    for (double& v : sum) v /= static_cast<double>(n);
    return sum;
}

/// One pass of single-point moves: a point leaves cluster a for b when
/// n_b/(n_b+1) |x-c_b|^2 < n_a/(n_a-1) |x-c_a|^2, which lowers the SSE by the
/// difference. Centroids and sizes are kept current. Returns whether any point moved.
template <std::size_t D>
bool hartigan_pass(std::span<const Point<D>> points, std::vector<int>& assignment, std::vector<Point<D>>& centroids,
                   std::vector<std::size_t>& sizes) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto a = static_cast<std::size_t>(assignment[i]);
        if (sizes[a] < 2) continue;
        const double na = static_cast<double>(sizes[a]);
        const double leave = na / (na - 1.0) * squared_distance(points[i], centroids[a]);
        std::size_t best = a;
        double best_cost = leave * (1.0 - 1e-12);
        for (std::size_t b = 0; b < centroids.size(); ++b) {
            if (b == a) continue;
            const double nb = static_cast<double>(sizes[b]);
            const double join = nb / (nb + 1.0) * squared_distance(points[i], centroids[b]);
            if (join < best_cost) {
                best_cost = join;
                best = b;
            }
        }
        if (best == a) continue;
        const double nb = static_cast<double>(sizes[best]);
        for (std::size_t j = 0; j < D; ++j) {
            centroids[a][j] = (centroids[a][j] * na - points[i][j]) / (na - 1.0);
            centroids[best][j] = (centroids[best][j] * nb + points[i][j]) / (nb + 1.0);
        }
        --sizes[a];
        ++sizes[best];
        assignment[i] = static_cast<int>(best);
        moved = true;
    }
    return moved;
}

}  // namespace detail

/// One Lloyd run from a k-means++ seeding drawn from `rng`.
///
/// Assignment ties keep the current cluster, otherwise the lowest index wins.
/// An empty cluster is reseeded with the point farthest from its centroid among
/// clusters that have at least two members; this never increases the SSE.
/// With `refine`, a stalled run tries single-point moves and resumes Lloyd if
/// any point moved, so the result is a fixed point of both.
template <std::size_t D>
KMeansRun<D> lloyd(std::span<const Point<D>> points, int k, Rng& rng, int max_iterations = 300, bool refine = true) {
    const std::size_t n = points.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw ArgumentError("k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    KMeansRun<D> run;
    run.centroids = detail::kmeanspp_seed(points, k, rng);
    run.assignment.assign(n, -1);
    std::vector<std::size_t> sizes;
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int current = run.assignment[i];
            int best = current;
            double best_d = current >= 0 ? squared_distance(points[i], run.centroids[static_cast<std::size_t>(current)])
                                         : std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(points[i], run.centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (best != current) {
                run.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed) {
            if (refine && detail::hartigan_pass(points, run.assignment, run.centroids, sizes)) {
                detail::recompute_centroids(points, run.assignment, k, run.centroids, sizes);
                run.iterations = iter + 1;
                run.sse_trace.push_back(detail::sse_of(points, run.centroids, run.assignment));
                continue;
            }
            run.converged = true;
            break;
        }
        run.iterations = iter + 1;
        detail::recompute_centroids(points, run.assignment, k, run.centroids, sizes);
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const int owner = run.assignment[i];
                if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
                const double d = squared_distance(points[i], run.centroids[static_cast<std::size_t>(owner)]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            const int donor = run.assignment[far];
            run.assignment[far] = c;
            --sizes[static_cast<std::size_t>(donor)];
            sizes[static_cast<std::size_t>(c)] = 1;
            run.centroids[static_cast<std::size_t>(c)] = points[far];
            run.centroids[static_cast<std::size_t>(donor)] = detail::mean_of_cluster(points, run.assignment, donor);
        }
        run.sse_trace.push_back(detail::sse_of(points, run.centroids, run.assignment));
    }
    run.sse = detail::sse_of(points, run.centroids, run.assignment);
    return run;
}

/// Multi-restart k-means; returns the restart with the lowest SSE (earliest on ties).
template <std::size_t D>
KMeansResult<D> kmeans(std::span<const Point<D>> points, int k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    if (k < 1 || static_cast<std::size_t>(k) > points.size())
        throw ArgumentError("k must lie in [1, " + std::to_string(points.size()) + "], got " + std::to_string(k));
    KMeansResult<D> result;
    for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        Rng rng(derive_seed(seed, "kmeans-restart", static_cast<std::uint64_t>(r)));
        auto run = lloyd(points, k, rng, opt.max_iterations, opt.refine);
        result.restart_traces.push_back(run.sse_trace);
        if (r == 0 || run.sse < result.best.sse) {
            result.best = std::move(run);
            result.best_restart = static_cast<std::size_t>(r);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// BPD models

enum class Strategy { kmeans, time_based };

inline constexpr std::string_view name_of(Strategy s) noexcept {
    return s == Strategy::kmeans ? "kmeans" : "time_based";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
    if (s == "kmeans") return Strategy::kmeans;
    if (s == "time_based") return Strategy::time_based;
    return std::nullopt;
}

struct BpdModel {
    Strategy strategy = Strategy::kmeans;
    int k = 1;
    int segment_minutes = 30;
    /// k x 7; each row is the behaviour distribution of one BPD (k-means only).
    std::vector<LabelProbs> centroids;
    std::map<SegmentKey, int> assignment;
    /// Within-cluster SSE (k-means only).
    double sse = 0.0;

    std::optional<int> bpd_of(const SegmentKey& key) const {
        auto it = assignment.find(key);
        if (it == assignment.end()) return std::nullopt;
        return it->second;
    }
};

/// Clusters histograms; `segment_minutes` is recorded on the model for export.
inline BpdModel kmeans_cluster(std::span<const AnnotationHistogram> histograms, int k, std::uint64_t seed,
                               int segment_minutes = 0, const KMeansOptions& opt = {}) {
    if (k < 1) throw ArgumentError("k must be positive");
    if (static_cast<std::size_t>(k) > histograms.size())
        throw ArgumentError("k = " + std::to_string(k) + " exceeds the number of histograms (" +
                            std::to_string(histograms.size()) + ")");
    std::vector<LabelProbs> points;
    points.reserve(histograms.size());
    for (const auto& h : histograms) points.push_back(h.probs);
    auto result = kmeans<kLabelCount>(std::span<const LabelProbs>(points), k, seed, opt);

    BpdModel model;
    model.strategy = Strategy::kmeans;
    model.k = k;
    model.segment_minutes = segment_minutes;
    model.centroids = result.best.centroids;
    model.sse = result.best.sse;
    for (std::size_t i = 0; i < histograms.size(); ++i)
        model.assignment[histograms[i].segment] = result.best.assignment[i];
    return model;
}

/// Part of the day window (of k equal parts, last absorbing the remainder) containing `start_minute`.
constexpr int time_part(int start_minute, int k) noexcept {
    const int part_len = kDayWindowMinutes / k;
    return std::min((start_minute - kDayStartMinute) / part_len, k - 1);
}

inline BpdModel time_based_assign(std::span<const TimeSegment> segments, int k) {
    if (k < 1 || k > kSlotsPerDay)
        throw ArgumentError("time-based k must lie in [1, 120], got " + std::to_string(k));
    BpdModel model;
    model.strategy = Strategy::time_based;
    model.k = k;
    model.segment_minutes = segments.empty() ? 0 : segments.front().end_minute - segments.front().start_minute;
    for (const auto& s : segments) model.assignment[s.key()] = time_part(s.start_minute, k);
    return model;
}

struct WindowBpdLabels {
    /// Indices of the feature vectors that received a BPD.
    std::vector<std::size_t> kept;
    /// BPD of each kept window, parallel to `kept`.
    std::vector<int> bpd;
    std::size_t dropped = 0;
};

/// Attaches the oracle BPD of each window's segment; windows whose segment has
/// no BPD are dropped and counted.
inline WindowBpdLabels label_windows(const BpdModel& model, std::span<const FeatureVector> features) {
    WindowBpdLabels out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto d = model.bpd_of(features[i].segment);
        if (!d) {
            ++out.dropped;
            continue;
        }
        out.kept.push_back(i);
        out.bpd.push_back(*d);
    }
    return out;
}

/// Adjusted Rand index between two labelings of the same items. Returns 1 when
/// both partitions put everything into one block (no chance correction possible).
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw ArgumentError("partitions differ in size");
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, m] : joint) index += pairs(m);
    for (const auto& [key, m] : rows) sum_rows += pairs(m);
    for (const auto& [key, m] : cols) sum_cols += pairs(m);
    const double expected = sum_rows * sum_cols / pairs(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

inline void write_bpd_assignment_csv(std::ostream& out, const BpdModel& model) {
    out << "segment_id,date,start_minute,bpd\n";
    for (const auto& [key, d] : model.assignment)
        out << key.to_string() << ',' << key.day.to_string() << ',' << key.start_minute << ',' << d << '\n';
}

inline void write_bpd_centroid_csv(std::ostream& out, const BpdModel& model) {
    out << "bpd";
    for (std::size_t i = 0; i < kLabelCount; ++i) out << ",p" << i;
    out << '\n';
    for (std::size_t d = 0; d < model.centroids.size(); ++d) {
        out << d;
        for (double p : model.centroids[d]) out << ',' << text::format_double(p);
        out << '\n';
    }
}

}  // namespace bpdhar
