#pragma once

// Shared fixtures and test-side oracles. Nothing here calls the code under
// test to compute an expected value.

#include <bpdhar/bpdhar.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace support {

using namespace bpdhar;

inline const Date kMonday = Date::from_ymd(2020, 1, 6);

/// Annotation-only recording; `days[d][slot]` is the label of slot `slot`
/// (08:00 + 5 min * slot) on day `kMonday + d`.
inline Recording annotated_days(const std::vector<std::vector<Label>>& days, std::string id = "S01") {
    Recording r;
    r.subject_id = std::move(id);
    for (std::size_t d = 0; d < days.size(); ++d)
        for (std::size_t s = 0; s < days[d].size(); ++s)
            r.annotations.push_back({Date{kMonday.days + static_cast<int>(d)}, kDayStartMinute + 5 * static_cast<int>(s),
                                     days[d][s]});
    return r;
}

/// A fully sampled 08:00-18:00 day at `rate` Hz. `f(t_seconds_since_0800)` gives (ax, ay, az).
template <typename F>
Recording sampled_day(F f, double rate = 50.0, Date day = kMonday) {
    Recording r;
    r.subject_id = "S01";
    r.sample_rate_hz = rate;
    const auto n = static_cast<std::size_t>(std::llround(kDayWindowMinutes * 60.0 * rate));
    r.reserve_samples(n);
    const std::int64_t t0 = day.midnight_ms() + std::int64_t{kDayStartMinute} * 60'000;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const auto [x, y, z] = f(t);
        r.push_sample(t0 + static_cast<std::int64_t>(std::llround(t * 1000.0)), x, y, z);
    }
    return r;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bpdhar_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// Clustering oracles

inline double sse_of_partition(const std::vector<LabelProbs>& pts, const std::vector<int>& part, int k) {
    double sse = 0.0;
    for (int c = 0; c < k; ++c) {
        LabelProbs mean{};
        int n = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (part[i] == c) {
                ++n;
                for (std::size_t j = 0; j < kLabelCount; ++j) mean[j] += pts[i][j];
            }
        if (n == 0) continue;
        for (auto& v : mean) v /= n;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (part[i] == c)
                for (std::size_t j = 0; j < kLabelCount; ++j) sse += (pts[i][j] - mean[j]) * (pts[i][j] - mean[j]);
    }
    return sse;
}

/// Minimum within-cluster SSE over all partitions into at most k blocks,
/// enumerated as restricted growth strings.
inline double brute_force_min_sse(const std::vector<LabelProbs>& pts, int k) {
    const std::size_t n = pts.size();
    std::vector<int> a(n, 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
            best = std::min(best, sse_of_partition(pts, a, k));
            return;
        }
        for (int c = 0; c <= std::min(used, k - 1); ++c) {
            a[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return best;
}

/// Two labelings describe the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

/// Random points on the 7-simplex, a mix of sparse and spread histograms.
inline std::vector<LabelProbs> random_histograms(std::mt19937_64& gen, std::size_t n) {
    std::vector<LabelProbs> out(n);
    std::uniform_int_distribution<int> slots(1, 12);
    std::uniform_int_distribution<int> label(0, kLabelCount - 1);
    for (auto& p : out) {
        const int m = slots(gen);
        p.fill(0.0);
        for (int s = 0; s < m; ++s) p[static_cast<std::size_t>(label(gen))] += 1.0 / m;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometry oracle for 2-D separability: two finite point sets are strictly
// linearly separable iff their convex hulls are disjoint, which for convex
// polygons is decided exactly by the separating axis test over hull edges.

using P2 = std::array<double, 2>;

inline double cross(const P2& o, const P2& a, const P2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline std::vector<P2> convex_hull(std::vector<P2> p) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<P2> h(2 * p.size());
    std::size_t k = 0;
    for (const auto& q : p) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], q) <= 0) --k;
        h[k++] = q;
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

inline bool strictly_separable(const std::vector<P2>& a, const std::vector<P2>& b) {
    const auto ha = convex_hull(a), hb = convex_hull(b);
    const auto separated_along = [&](const P2& axis) {
        double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
        for (const auto& p : ha) {
            const double v = p[0] * axis[0] + p[1] * axis[1];
            amin = std::min(amin, v), amax = std::max(amax, v);
        }
        for (const auto& p : hb) {
            const double v = p[0] * axis[0] + p[1] * axis[1];
            bmin = std::min(bmin, v), bmax = std::max(bmax, v);
        }
        return amax < bmin || bmax < amin;
    };
    for (const auto* h : {&ha, &hb})
        for (std::size_t i = 0; i < h->size(); ++i) {
            const auto& p = (*h)[i];
            const auto& q = (*h)[(i + 1) % h->size()];
            if (separated_along({q[1] - p[1], p[0] - q[0]})) return true;
        }
    return false;
}

/// Two Gaussian blobs in 2-D, `per_class` points each, labels apathy / pacing.
inline std::pair<Matrix, std::vector<Label>> blobs(std::uint64_t seed, std::size_t per_class = 100,
                                                  double spread = 0.3, double offset = 4.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<std::vector<double>> rows;
    std::vector<Label> y;
    for (std::size_t i = 0; i < per_class; ++i) {
        rows.push_back({-offset + noise(gen), 1.0 + noise(gen)});
        y.push_back(Label::apathy);
        rows.push_back({offset + noise(gen), -1.0 + noise(gen)});
        y.push_back(Label::pacing);
    }
    return {Matrix::from_rows(rows), y};
}

// ---------------------------------------------------------------------------
// Feature-level subjects for fast experiment tests: feature vectors are drawn
// directly from label-dependent Gaussians instead of featurizing a signal.

inline SubjectData feature_subject(const Recording& annotated, std::uint64_t seed, double separation = 3.0,
                                   int windows_per_slot = 2) {
    SubjectData s;
    s.subject_id = annotated.subject_id;
    s.annotations = annotated.annotations;
    s.days = annotated.days();
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (const auto& a : annotated.annotations) {
        for (int w = 0; w < windows_per_slot; ++w) {
            FeatureVector f;
            f.label = a.label;
            f.window_start_ms = a.day.midnight_ms() + std::int64_t{a.start_minute} * 60'000 + w * 120'000;
            f.segment = {a.day, a.start_minute};
            for (std::size_t j = 0; j < kFeatureCount; ++j)
                f.values[j] = noise(gen) + (j % kLabelCount == static_cast<std::size_t>(index_of(a.label)) ? separation : 0.0);
            s.features.push_back(f);
        }
    }
    return s;
}

}  // namespace support
