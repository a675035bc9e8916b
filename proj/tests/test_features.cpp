#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace bpdhar;
using support::kMonday;

namespace {

using Xyz = std::array<double, 3>;
constexpr double kPi = std::numbers::pi;

struct OwnedWindow {
    std::vector<double> x, y, z;
    RawWindow view() const { return {x, y, z, 0}; }
};

OwnedWindow make_window(std::size_t n, const std::function<Xyz(std::size_t)>& f) {
    OwnedWindow w;
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = f(i);
        w.x.push_back(v[0]);
        w.y.push_back(v[1]);
        w.z.push_back(v[2]);
    }
    return w;
}

// Naive statistics oracle: two-pass moments, sort-based linear quantiles.
std::array<double, 10> naive_axis_stats(std::vector<double> x) {
    const double n = static_cast<double>(x.size());
    long double s = 0;
    for (double v : x) s += v;
    const double mean = static_cast<double>(s / n);
    long double m2 = 0, m3 = 0, m4 = 0, sq = 0;
    for (double v : x) {
        const long double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        sq += static_cast<long double>(v) * v;
    }
    m2 /= n, m3 /= n, m4 /= n;
    int crossings = 0, prev = 0;
    for (double v : x) {
        const int sgn = (v - mean > 0) - (v - mean < 0);
        if (sgn == 0) continue;
        if (prev != 0 && sgn != prev) ++crossings;
        prev = sgn;
    }
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const auto q = [&](double p) {
        const double pos = p * (n - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        return lo + 1 < sorted.size() ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
    };
    return {mean,
            std::sqrt(static_cast<double>(m2)),
            sorted.front(),
            sorted.back(),
            q(0.5),
            q(0.75) - q(0.25),
            static_cast<double>(m3 / std::pow(m2, 1.5L)),
            static_cast<double>(m4 / (m2 * m2) - 3),
            std::sqrt(static_cast<double>(sq / n)),
            crossings / (n - 1)};
}

// O(n^2) DFT oracle for the one-sided power spectrum.
std::vector<double> naive_power(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> p(n / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double a = -2.0L * std::numbers::pi_v<long double> * k * t / n;
            re += x[t] * std::cos(a);
            im += x[t] * std::sin(a);
        }
        double v = static_cast<double>((re * re + im * im) / n);
        if (k != 0 && !(n % 2 == 0 && k == n / 2)) v *= 2;
        p[k] = v;
    }
    return p;
}

Recording labeled_day(const std::vector<Label>& slots, double rate = 10.0) {
    auto r = support::sampled_day([](double t) { return Xyz{std::sin(t), 0.1 * t, 9.81}; }, rate);
    r.annotations = support::annotated_days({slots}).annotations;
    return r;
}

}  // namespace

TEST(Windowing, FullDayHas1199Windows) {
    const auto r = support::sampled_day([](double) { return Xyz{0, 0, 9.81}; }, 10.0);
    // Oracle: positions k*30 s with k*30 + 60 <= 36000 s.
    int expected = 0;
    for (int k = 0; k * 30 + 60 <= 36000; ++k) ++expected;
    ASSERT_EQ(expected, 1199);
    const auto w = window_signal(r, WindowSpec{});
    EXPECT_EQ(w.windows.size(), 1199u);
    EXPECT_EQ(w.dropped, 0u);
    EXPECT_EQ(w.windows.front().start_ms, kMonday.midnight_ms() + 480LL * 60'000);
    EXPECT_EQ(w.windows[1].start_ms - w.windows[0].start_ms, 30'000);
    for (const auto& ref : w.windows) ASSERT_EQ(ref.length, 600u);
}

TEST(Windowing, NoOverlapTilesTheDay) {
    const auto r = support::sampled_day([](double) { return Xyz{0, 0, 9.81}; }, 10.0);
    const auto w = window_signal(r, WindowSpec{60, 0.0});
    EXPECT_EQ(w.windows.size(), 600u);
    EXPECT_EQ(w.windows[1].start_ms - w.windows[0].start_ms, 60'000);
}

TEST(Windowing, WindowsTouchingAGapAreDropped) {
    const auto full = support::sampled_day([](double t) { return Xyz{t, 0, 9.81}; }, 10.0);
    const std::int64_t day0 = kMonday.midnight_ms() + 480LL * 60'000;
    const std::int64_t gap_begin = day0 + 3'610'000, gap_end = gap_begin + 120'000;  // 09:00:10 - 09:02:10
    Recording r;
    r.sample_rate_hz = full.sample_rate_hz;
    for (std::size_t i = 0; i < full.sample_count(); ++i)
        if (full.timestamp_ms[i] < gap_begin || full.timestamp_ms[i] >= gap_end)
            r.push_sample(full.timestamp_ms[i], full.ax[i], full.ay[i], full.az[i]);
    const auto w = window_signal(r, WindowSpec{});
    std::set<std::int64_t> got;
    for (const auto& ref : w.windows) got.insert(ref.start_ms);
    std::set<std::int64_t> want;
    std::size_t dropped = 0;
    for (std::int64_t s = day0; s + 60'000 <= day0 + 36'000'000; s += 30'000) {
        if (s < gap_end && s + 60'000 > gap_begin) ++dropped;
        else want.insert(s);
    }
    EXPECT_EQ(got, want);
    EXPECT_EQ(w.dropped, dropped);
    EXPECT_EQ(dropped, 6u);
    // Surviving windows hold contiguous samples of the right instant.
    for (const auto& ref : w.windows) ASSERT_EQ(r.timestamp_ms[ref.first_sample], ref.start_ms);
}

TEST(Windowing, InvalidSpecsThrow) {
    EXPECT_THROW((WindowSpec{0, 0.5}).stride_seconds(), ArgumentError);
    EXPECT_THROW((WindowSpec{60, 1.0}).stride_seconds(), ArgumentError);
    EXPECT_THROW((WindowSpec{61, 0.5}).stride_seconds(), ArgumentError);
    EXPECT_EQ((WindowSpec{60, 0.75}).stride_seconds(), 15);
}

TEST(Features, CatalogHas39Names) {
    const auto names = feature_names();
    EXPECT_EQ(names.size(), 39u);
    EXPECT_EQ(names[0], "x_mean");
    EXPECT_EQ(names[29], "z_zcr");
    EXPECT_EQ(names[30], "corr_xy");
    EXPECT_EQ(names[38], "z_entropy");
    std::set<std::string> unique(names.begin(), names.end());
    EXPECT_EQ(unique.size(), 39u);
}

TEST(Features, ConstantWindow) {
    const auto w = make_window(3000, [](std::size_t) { return Xyz{1, 0, 0}; });
    const auto f = extract_features(w.view(), 50.0);
    EXPECT_EQ(f[0], 1.0);
    EXPECT_EQ(f[10], 0.0);
    EXPECT_EQ(f[20], 0.0);
    for (std::size_t a = 0; a < 3; ++a) {
        EXPECT_EQ(f[a * 10 + 1], 0.0) << a;  // std
        EXPECT_EQ(f[a * 10 + 5], 0.0) << a;  // IQR
        EXPECT_EQ(f[a * 10 + 9], 0.0) << a;  // zero crossings
        EXPECT_EQ(f[33 + 2 * a], 0.0) << a;  // dominant frequency
        EXPECT_EQ(f[34 + 2 * a], 0.0) << a;  // spectral entropy
    }
    for (double v : f) EXPECT_TRUE(std::isfinite(v));
}

TEST(Features, TwoHertzToneHasDominantFrequencyTwo) {
    const auto w = make_window(3000, [](std::size_t i) { return Xyz{std::sin(2 * kPi * 2.0 * i / 50.0), 0, 9.81}; });
    const auto f = extract_features(w.view(), 50.0);
    EXPECT_NEAR(f[33], 2.0, 1e-12);
    EXPECT_LT(f[34], 0.2);  // a pure tone concentrates its energy
}

TEST(Features, IdenticalAxesCorrelatePerfectly) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> x(3000);
    for (auto& v : x) v = n(gen);
    const auto w = make_window(3000, [&](std::size_t i) { return Xyz{x[i], x[i], -x[i]}; });
    const auto f = extract_features(w.view(), 50.0);
    EXPECT_NEAR(f[30], 1.0, 1e-12);
    EXPECT_NEAR(f[31], -1.0, 1e-12);
}

TEST(Features, AxisStatisticsMatchNaiveOracle) {
    std::mt19937_64 gen(17);
    std::gamma_distribution<double> skewed(2.0, 1.5);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (std::size_t n : {3000u, 301u, 2u}) {
        const auto w = make_window(n, [&](std::size_t i) { return Xyz{skewed(gen), normal(gen), std::sin(0.1 * i)}; });
        const auto f = extract_features(w.view(), 50.0);
        const std::array<const std::vector<double>*, 3> axes = {&w.x, &w.y, &w.z};
        for (std::size_t a = 0; a < 3; ++a) {
            const auto want = naive_axis_stats(*axes[a]);
            for (std::size_t i = 0; i < 10; ++i)
                EXPECT_NEAR(f[a * 10 + i], want[i], 1e-9 * std::max(1.0, std::abs(want[i])))
                    << "n=" << n << " axis " << a << " stat " << kAxisStatNames[i];
        }
    }
}

TEST(Features, ScaleEquivariance) {
    std::mt19937_64 gen(23);
    std::normal_distribution<double> n(0.5, 1.0);
    const auto w = make_window(3000, [&](std::size_t) { return Xyz{n(gen), n(gen), n(gen)}; });
    const auto f = extract_features(w.view(), 50.0);
    for (double c : {0.5, 3.0, 100.0}) {
        OwnedWindow s = w;
        for (auto* axis : {&s.x, &s.y, &s.z})
            for (double& v : *axis) v *= c;
        const auto g = extract_features(s.view(), 50.0);
        for (std::size_t a = 0; a < 3; ++a) {
            EXPECT_NEAR(g[a * 10], c * f[a * 10], 1e-9 * c);
            EXPECT_NEAR(g[a * 10 + 1], c * f[a * 10 + 1], 1e-9 * c);
            EXPECT_EQ(g[a * 10 + 9], f[a * 10 + 9]);
            EXPECT_NEAR(g[a * 10 + 6], f[a * 10 + 6], 1e-9);  // skewness is scale free
            EXPECT_EQ(g[33 + 2 * a], f[33 + 2 * a]);
        }
    }
}

TEST(Features, NonFiniteSamplesAreReportedWithIndex) {
    auto w = make_window(100, [](std::size_t) { return Xyz{0, 0, 0}; });
    w.y[42] = std::nan("");
    try {
        extract_features(w.view(), 50.0);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
    }
}

TEST(Spectrum, MatchesNaiveDft) {
    std::mt19937_64 gen(29);
    std::normal_distribution<double> n(0, 1);
    for (std::size_t len : {64u, 200u, 201u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = n(gen);
        const auto fast = power_spectrum(x, 50.0);
        const auto slow = naive_power(x);
        ASSERT_EQ(fast.power.size(), slow.size());
        EXPECT_DOUBLE_EQ(fast.bin_hz, 50.0 / static_cast<double>(len));
        for (std::size_t k = 0; k < slow.size(); ++k) EXPECT_NEAR(fast.power[k], slow[k], 1e-9 * len) << k;
    }
}

TEST(Spectrum, ParsevalOnMeanRemovedSignals) {
    // Energy outside DC equals n * variance (within 1e-6 relative).
    std::mt19937_64 gen(31);
    std::normal_distribution<double> n(2.0, 3.0);
    for (std::size_t len : {3000u, 1001u, 4096u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = n(gen) + 5 * std::sin(0.3 * static_cast<double>(&v - x.data()));
        double mean = 0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(len);
        double var_energy = 0;
        for (double& v : x) {
            v -= mean;
            var_energy += v * v;
        }
        const auto p = power_spectrum(x, 50.0);
        double spec = 0;
        for (std::size_t k = 1; k < p.power.size(); ++k) spec += p.power[k];
        EXPECT_NEAR(spec / var_energy, 1.0, 1e-6) << len;
    }
}

TEST(Spectrum, HannWindowShape) {
    const auto w = hann_window(5);
    ASSERT_EQ(w.size(), 5u);
    EXPECT_NEAR(w[0], 0.0, 1e-15);
    EXPECT_NEAR(w[2], 1.0, 1e-15);
    EXPECT_NEAR(w[1], 0.5, 1e-15);
}

TEST(Featurize, SingleClassDayLabelsEveryWindow) {
    const auto r = labeled_day(std::vector<Label>(120, Label::apathy));
    const auto f = featurize_recording(r, WindowSpec{}, 30);
    ASSERT_EQ(f.features.size(), 1199u);
    for (const auto& v : f.features) ASSERT_EQ(v.label, Label::apathy);
}

TEST(Featurize, WindowCentreSelectsTheSlot) {
    std::vector<Label> slots(120, Label::normal);
    slots[0] = Label::apathy;  // 08:00-08:05
    slots[1] = Label::pacing;  // 08:05-08:10
    const auto r = labeled_day(slots);
    const auto f = featurize_recording(r, WindowSpec{}, 30);
    const std::int64_t t0 = kMonday.midnight_ms() + 480LL * 60'000;
    std::map<std::int64_t, Label> by_start;
    for (const auto& v : f.features) by_start[v.window_start_ms] = v.label;
    EXPECT_EQ(by_start.at(t0 + 120'000), Label::apathy);  // centre 482.5 min
    EXPECT_EQ(by_start.at(t0 + 240'000), Label::apathy);  // centre 484.5
    EXPECT_EQ(by_start.at(t0 + 270'000), Label::pacing);  // centre 485.0 belongs to the 485 slot
    EXPECT_EQ(by_start.at(t0 + 540'000), Label::pacing);  // centre 489.5
    EXPECT_EQ(by_start.at(t0 + 570'000), Label::normal);  // centre 490.0
}

TEST(Featurize, WindowsOverUnannotatedSlotsAreDropped) {
    auto r = labeled_day(std::vector<Label>(120, Label::normal));
    r.annotations.erase(r.annotations.begin() + 10);  // 08:50-08:55
    const auto f = featurize_recording(r, WindowSpec{}, 30);
    // Centres inside [530, 535) min: starts 529.5 .. 534.0 step 0.5 -> 10 windows.
    EXPECT_EQ(f.features.size(), 1199u - 10u);
    EXPECT_EQ(f.unlabeled_windows, 10u);
}

TEST(Featurize, SegmentTagsFollowTheWindowCentre) {
    const auto r = labeled_day(std::vector<Label>(120, Label::normal));
    auto f = featurize_recording(r, WindowSpec{}, 30);
    for (const auto& v : f.features) {
        const auto centre_min = (v.window_start_ms + 30'000 - kMonday.midnight_ms()) / 60'000;
        ASSERT_EQ(v.segment.start_minute, 480 + ((centre_min - 480) / 30) * 30);
    }
    retag_segments(f.features, 120, 60);
    for (const auto& v : f.features) ASSERT_EQ((v.segment.start_minute - 480) % 120, 0);
}

TEST(Featurize, PacingDaysMoveMoreThanApathyDays) {
    const auto std_mean = [](Label l) {
        const auto s = generate_synthetic_recording({{0, one_hot(l), 1.0}}, {{480, 1080, 0}}, 1, 5);
        const auto f = featurize_recording(s.recording, WindowSpec{}, 30);
        double sum = 0;
        for (const auto& v : f.features) sum += v.values[1] + v.values[11] + v.values[21];
        return sum / (3.0 * static_cast<double>(f.features.size()));
    };
    EXPECT_GT(std_mean(Label::pacing), std_mean(Label::apathy));
}

TEST(Featurize, ParallelismDoesNotChangeOutput) {
    const auto s = generate_synthetic_recording({{0, detail::normalized({1, 1, 1, 1, 1, 1, 1}), 1.0}}, {{480, 1080, 0}}, 1, 6);
    const auto a = featurize_recording(s.recording, WindowSpec{}, 30, 1);
    const auto b = featurize_recording(s.recording, WindowSpec{}, 30, 4);
    std::ostringstream sa, sb;
    write_feature_csv(sa, a.features);
    write_feature_csv(sb, b.features);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().substr(0, 40), "window_start_ms,segment_id,label,f00,f01");
}
