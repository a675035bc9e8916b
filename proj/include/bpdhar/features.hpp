#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <map>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "labels.hpp"
#include "parallel.hpp"
#include "spectrum.hpp"

namespace bpdhar {

struct WindowSpec {
    int window_seconds = 60;
    double overlap_fraction = 0.5;

    /// Throws ArgumentError unless the stride is a positive whole number of seconds.
    int stride_seconds() const {
        if (window_seconds <= 0) throw ArgumentError("window_seconds must be positive");
        if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
            throw ArgumentError("overlap_fraction must lie in [0, 1)");
        const double stride = window_seconds * (1.0 - overlap_fraction);
        const double rounded = std::round(stride);
        if (rounded < 1.0 || std::abs(stride - rounded) > 1e-9)
            throw ArgumentError("window stride must be a positive whole number of seconds");
        return static_cast<int>(rounded);
    }
};

/// A window over a recording: `length` consecutive samples from `first_sample`.
struct WindowRef {
    std::int64_t start_ms;
    std::size_t first_sample;
    std::size_t length;
};

struct WindowingResult {
    std::vector<WindowRef> windows;
    /// Window positions dropped because samples were missing or off-rate.
    std::size_t dropped = 0;
    /// Days whose window does not fit even once.
    std::size_t too_short_warnings = 0;
};

/// Three axis views of one window.
struct RawWindow {
    std::span<const double> x, y, z;
    std::int64_t start_ms = 0;
};

inline RawWindow view(const Recording& r, const WindowRef& w) {
    return {std::span(r.ax).subspan(w.first_sample, w.length), std::span(r.ay).subspan(w.first_sample, w.length),
            std::span(r.az).subspan(w.first_sample, w.length), w.start_ms};
}

/// Slides windows over each recorded day, anchored at 08:00. Windows never
/// cross the day boundary; positions that are not fully sampled at the nominal
/// rate are dropped and counted.
inline WindowingResult window_signal(const Recording& r, const WindowSpec& spec) {
    const int stride_s = spec.stride_seconds();
    WindowingResult out;
    const double period = nominal_period_ms(r.sample_rate_hz);
    const auto per_window = static_cast<std::size_t>(std::llround(spec.window_seconds * r.sample_rate_hz));
    const std::int64_t window_ms = std::int64_t{spec.window_seconds} * 1000;
    const std::int64_t stride_ms = std::int64_t{stride_s} * 1000;
    const auto& ts = r.timestamp_ms;

    for (const Date day : r.days()) {
        const std::int64_t day_begin = day.midnight_ms() + std::int64_t{kDayStartMinute} * 60'000;
        const std::int64_t day_end = day.midnight_ms() + std::int64_t{kDayEndMinute} * 60'000;
        if (day_begin + window_ms > day_end) {
            ++out.too_short_warnings;
            continue;
        }
        for (std::int64_t start = day_begin; start + window_ms <= day_end; start += stride_ms) {
            const auto lo = std::lower_bound(ts.begin(), ts.end(), start);
            const auto first = static_cast<std::size_t>(lo - ts.begin());
            bool ok = first + per_window <= ts.size() && static_cast<double>(ts[first] - start) < 0.5 * period;
            if (ok) {
                const std::size_t last = first + per_window - 1;
                ok = ts[last] < start + window_ms &&
                     std::abs(static_cast<double>(ts[last] - ts[first]) -
                              period * static_cast<double>(per_window - 1)) < 0.5 * period;
                for (std::size_t i = first + 1; ok && i <= last; ++i)
                    if (std::abs(static_cast<double>(ts[i] - ts[i - 1]) - period) >= 0.5 * period) ok = false;
            }
            if (ok)
                out.windows.push_back({start, first, per_window});
            else
                ++out.dropped;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature catalog

inline constexpr std::size_t kFeatureCount = 39;
using FeatureValues = std::array<double, kFeatureCount>;

/// Per-axis statistics, in order, occupying indices axis*10 + i.
inline constexpr std::array<std::string_view, 10> kAxisStatNames = {
    "mean", "std", "min", "max", "median", "iqr", "skewness", "kurtosis", "rms", "zcr"};

/// Column names: x_mean .. z_zcr, corr_xy, corr_xz, corr_yz, x_domfreq, x_entropy, ..., z_entropy.
inline std::array<std::string, kFeatureCount> feature_names() {
    std::array<std::string, kFeatureCount> names;
    const char axes[3] = {'x', 'y', 'z'};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < kAxisStatNames.size(); ++i)
            names[a * 10 + i] = std::string(1, axes[a]) + "_" + std::string(kAxisStatNames[i]);
    names[30] = "corr_xy";
    names[31] = "corr_xz";
    names[32] = "corr_yz";
    for (std::size_t a = 0; a < 3; ++a) {
        names[33 + 2 * a] = std::string(1, axes[a]) + "_domfreq";
        names[34 + 2 * a] = std::string(1, axes[a]) + "_entropy";
    }
    return names;
}

namespace detail {

/// Linear-interpolation quantile (numpy's default rule). Reorders `data`.
inline double quantile_inplace(std::vector<double>& data, double q) {
    if (data.empty()) return 0.0;
    const double pos = q * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto lo_it = data.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(data.begin(), lo_it, data.end());
    const double lo_v = *lo_it;
    if (lo + 1 >= data.size()) return lo_v;
    const double hi_v = *std::min_element(lo_it + 1, data.end());
    return lo_v + (pos - static_cast<double>(lo)) * (hi_v - lo_v);
}

inline double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline void axis_statistics(std::span<const double> x, std::vector<double>& scratch, double* out) {
    const auto n = static_cast<double>(x.size());
    const double mean = mean_of(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, sq = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        sq += v * v;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    scratch.assign(x.begin(), x.end());
    const double median = quantile_inplace(scratch, 0.5);
    const double q1 = quantile_inplace(scratch, 0.25);
    const double q3 = quantile_inplace(scratch, 0.75);

    std::size_t crossings = 0;
    int prev_sign = 0;
    for (double v : x) {
        const double d = v - mean;
        const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (prev_sign != 0 && s != prev_sign) ++crossings;
        prev_sign = s;
    }

    out[0] = mean;
    out[1] = std::sqrt(m2);
    out[2] = *lo_it;
    out[3] = *hi_it;
    out[4] = median;
    out[5] = q3 - q1;
    // Shape statistics are 0 for a constant axis.
    out[6] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    out[7] = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    out[8] = std::sqrt(sq / n);
    out[9] = x.size() > 1 ? static_cast<double>(crossings) / (n - 1.0) : 0.0;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace detail

/// Mean-removed, Hann-windowed axis signal; the input of the frequency features.
inline std::vector<double> tapered_axis(std::span<const double> x) {
    const double mean = detail::mean_of(x);
    const auto& w = cached_hann_window(x.size());
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * w[i];
    return out;
}

/// Dominant nonzero frequency (Hz) and normalized spectral entropy over the
/// nonzero bins. Both are 0 for a signal without energy outside DC.
inline std::pair<double, double> frequency_features(std::span<const double> x, double rate_hz) {
    const auto tapered = tapered_axis(x);
    const auto spec = power_spectrum(tapered, rate_hz);
    if (spec.power.size() < 2) return {0.0, 0.0};
    double total = 0.0;
    std::size_t best = 1;
    for (std::size_t k = 1; k < spec.power.size(); ++k) {
        total += spec.power[k];
        if (spec.power[k] > spec.power[best]) best = k;
    }
    // Scale-aware zero test: residual energy of a constant window is rounding noise.
    double energy_in = 0.0;
    for (double v : x) energy_in += v * v;
    if (total <= 1e-24 * std::max(1.0, energy_in)) return {0.0, 0.0};
    const std::size_t bins = spec.power.size() - 1;
    double h = 0.0;
    for (std::size_t k = 1; k < spec.power.size(); ++k) {
        const double p = spec.power[k] / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    const double entropy = bins > 1 ? h / std::log(static_cast<double>(bins)) : 0.0;
    return {static_cast<double>(best) * spec.bin_hz, entropy};
}

/// Computes the 39-entry feature vector of a complete window.
inline FeatureValues extract_features(const RawWindow& w, double rate_hz) {
    const std::size_t n = w.x.size();
    if (n == 0 || w.y.size() != n || w.z.size() != n) throw ArgumentError("window axes must be non-empty and equal length");
    const std::array<std::span<const double>, 3> axes = {w.x, w.y, w.z};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(axes[a][i]))
                throw ValidationError("non-finite value on axis " + std::string(1, "xyz"[a]) + " at sample index " +
                                      std::to_string(i));
    FeatureValues f{};
    std::vector<double> scratch;
    scratch.reserve(n);
    for (std::size_t a = 0; a < 3; ++a) detail::axis_statistics(axes[a], scratch, f.data() + a * 10);
    f[30] = detail::pearson(w.x, w.y);
    f[31] = detail::pearson(w.x, w.z);
    f[32] = detail::pearson(w.y, w.z);
    for (std::size_t a = 0; a < 3; ++a) {
        const auto [dom, ent] = frequency_features(axes[a], rate_hz);
        f[33 + 2 * a] = dom;
        f[34 + 2 * a] = ent;
    }
    return f;
}

struct FeatureVector {
    FeatureValues values{};
    std::int64_t window_start_ms = 0;
    Label label = Label::normal;
    /// Segment containing the window centre.
    SegmentKey segment;
};

struct FeaturizeResult {
    std::vector<FeatureVector> features;
    std::size_t dropped_windows = 0;
    std::size_t unlabeled_windows = 0;
};

/// Windows, featurizes and labels a recording. Each window takes the label of
/// the annotation slot containing its centre and is tagged with the segment
/// (of `segment_minutes`) containing that centre; windows whose centre slot is
/// unannotated are dropped.
inline FeaturizeResult featurize_recording(const Recording& r, const WindowSpec& spec, int segment_minutes,
                                           unsigned jobs = 1) {
    check_segment_minutes(segment_minutes);
    const auto windowing = window_signal(r, spec);
    std::map<SegmentKey, Label> slot_label;
    for (const auto& a : r.annotations) slot_label[{a.day, a.start_minute}] = a.label;

    FeaturizeResult out;
    out.dropped_windows = windowing.dropped;
    struct Pending {
        std::size_t window;
        Label label;
        SegmentKey segment;
    };
    std::vector<Pending> pending;
    const std::int64_t half_ms = std::int64_t{spec.window_seconds} * 500;
    for (std::size_t i = 0; i < windowing.windows.size(); ++i) {
        const auto& w = windowing.windows[i];
        const std::int64_t centre = w.start_ms + half_ms;
        const Date day = Date::of_timestamp(centre);
        const std::int64_t ms_of_day = centre - day.midnight_ms();
        const int minute = static_cast<int>(ms_of_day / 60'000);
        const int slot = minute - minute % kSlotMinutes;
        auto it = slot_label.find({day, slot});
        if (it == slot_label.end()) {
            ++out.unlabeled_windows;
            continue;
        }
        pending.push_back({i, it->second, {day, segment_start(minute, segment_minutes)}});
    }
    out.features.resize(pending.size());
    parallel_for(pending.size(), jobs, [&](std::size_t i) {
        const auto& p = pending[i];
        const auto& w = windowing.windows[p.window];
        out.features[i] = {extract_features(view(r, w), r.sample_rate_hz), w.start_ms, p.label, p.segment};
    });
    return out;
}

/// Overload taking segments from segment_day; their length sets the tagging grid.
inline FeaturizeResult featurize_recording(const Recording& r, const WindowSpec& spec,
                                           std::span<const TimeSegment> segments, unsigned jobs = 1) {
    const int len = segments.empty() ? kDayWindowMinutes : segments.front().end_minute - segments.front().start_minute;
    return featurize_recording(r, spec, len, jobs);
}

/// Re-tags feature vectors with the segment of a different length.
inline void retag_segments(std::span<FeatureVector> features, int segment_minutes, int window_seconds) {
    check_segment_minutes(segment_minutes);
    const std::int64_t half_ms = std::int64_t{window_seconds} * 500;
    for (auto& f : features) {
        const std::int64_t centre = f.window_start_ms + half_ms;
        const Date day = Date::of_timestamp(centre);
        const int minute = static_cast<int>((centre - day.midnight_ms()) / 60'000);
        f.segment = {day, segment_start(minute, segment_minutes)};
    }
}

inline void write_feature_csv(std::ostream& out, std::span<const FeatureVector> features) {
    out << "window_start_ms,segment_id,label";
    for (std::size_t i = 0; i < kFeatureCount; ++i) out << ",f" << (i < 10 ? "0" : "") << i;
    out << '\n';
    std::string line;
    for (const auto& f : features) {
        line = std::to_string(f.window_start_ms);
        line += ',';
        line += f.segment.to_string();
        line += ',';
        line += name_of(f.label);
        for (double v : f.values) {
            line += ',';
            line += text::format_double(v);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace bpdhar
