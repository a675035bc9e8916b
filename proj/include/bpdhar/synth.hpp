#pragma once

// Synthetic recordings with known behavioural regimes.
//
// Each subject has a set of regimes (a behaviour distribution plus a Dirichlet
// concentration) and a fixed daily schedule mapping parts of the day to
// regimes. Every day, each scheduled interval draws its own behaviour mix from
// Dirichlet(concentration * distribution); each 5-minute slot then draws one
// label from that mix and emits a 3-axis signal from the label's signal model.

#include <algorithm>
#include <array>
#include <set>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "errors.hpp"
#include "labels.hpp"
#include "random.hpp"

namespace bpdhar {

struct RegimeSpec {
    int regime_id = 0;
    LabelProbs behavior_distribution{};
    double dirichlet_concentration = 1.0;
};

struct ScheduleEntry {
    int start_minute;
    int end_minute;
    int regime_id;
};

struct SubjectSpec {
    std::string subject_id;
    std::vector<RegimeSpec> regimes;
    std::vector<ScheduleEntry> schedule;
};

/// Signal model parameters. Amplitudes in m/s^2, frequencies in Hz.
struct SignalModel {
    double gravity = 9.81;
    double sensor_noise = 0.05;
    double normal_noise = 0.3;
    double normal_bursts_per_minute = 1.0;
    double normal_burst_amplitude = 1.5;
    double walk_frequency = 2.0;
    double pacing_amplitude = 2.0;
    double locomotion_amplitude = 1.2;
    double walk_noise = 0.5;
    double restless_low = 0.5;
    double restless_high = 4.0;
    double restless_sigma = 0.8;
    double mannerism_frequency = 1.0;
    double mannerism_amplitude = 1.5;
    double aggression_spike = 8.0;
    double aggression_spike_rate = 0.004;
    double aggression_noise = 0.3;
    /// Log-normal sigma of a per-slot gain on the behaviour component.
    double slot_gain_sigma = 0.7;
    /// Output is rounded to this resolution.
    double quantum = 1e-4;
};

struct SynthesisSpec {
    std::vector<SubjectSpec> subjects;
    int n_days = 10;
    Date start_date = Date::from_ymd(2019, 6, 3);
    std::uint64_t seed = 1;
    double sample_rate_hz = kDefaultSampleRateHz;
    SignalModel signal{};
};

struct GroundTruthRecord {
    Date day;
    int start_minute;
    int regime_id;

    friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

struct SyntheticRecording {
    Recording recording;
    std::vector<GroundTruthRecord> ground_truth;
};

inline void validate(const RegimeSpec& r) {
    double total = 0.0;
    for (double p : r.behavior_distribution) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ValidationError("regime " + std::to_string(r.regime_id) + ": negative or non-finite probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("regime " + std::to_string(r.regime_id) + ": behaviour distribution sums to " +
                              std::to_string(total));
    if (!(r.dirichlet_concentration > 0.0))
        throw ValidationError("regime " + std::to_string(r.regime_id) + ": concentration must be positive");
}

inline void validate(const SubjectSpec& s) {
    if (s.regimes.empty()) throw ValidationError(s.subject_id + ": no regimes");
    std::map<int, const RegimeSpec*> ids;
    for (const auto& r : s.regimes) {
        validate(r);
        if (!ids.emplace(r.regime_id, &r).second)
            throw ValidationError(s.subject_id + ": duplicate regime id " + std::to_string(r.regime_id));
    }
    auto sched = s.schedule;
    std::sort(sched.begin(), sched.end(), [](auto& a, auto& b) { return a.start_minute < b.start_minute; });
    int cursor = kDayStartMinute;
    for (const auto& e : sched) {
        if (e.start_minute % kSlotMinutes != 0 || e.end_minute % kSlotMinutes != 0)
            throw ValidationError(s.subject_id + ": schedule boundary off the 5-minute grid");
        if (e.end_minute <= e.start_minute)
            throw ValidationError(s.subject_id + ": empty schedule interval at minute " +
                                  std::to_string(e.start_minute));
        if (e.start_minute > cursor)
            throw ValidationError(s.subject_id + ": schedule gap between minute " + std::to_string(cursor) +
                                  " and " + std::to_string(e.start_minute));
        if (e.start_minute < cursor)
            throw ValidationError(s.subject_id + ": overlapping schedule intervals at minute " +
                                  std::to_string(e.start_minute));
        if (!ids.contains(e.regime_id))
            throw ValidationError(s.subject_id + ": schedule references unknown regime " +
                                  std::to_string(e.regime_id));
        cursor = e.end_minute;
    }
    if (cursor != kDayEndMinute)
        throw ValidationError(s.subject_id + ": schedule gap between minute " + std::to_string(cursor) + " and " +
                              std::to_string(kDayEndMinute));
}

inline void validate(const SynthesisSpec& spec) {
    if (spec.n_days < 1) throw ValidationError("n_days must be at least 1");
    if (!(spec.sample_rate_hz > 0.0)) throw ValidationError("sample rate must be positive");
    if (spec.subjects.empty()) throw ValidationError("no subjects");
    std::set<std::string> names;
    for (const auto& s : spec.subjects) {
        if (s.subject_id.empty()) throw ValidationError("empty subject id");
        if (!names.insert(s.subject_id).second) throw ValidationError("duplicate subject " + s.subject_id);
        validate(s);
    }
}

namespace detail {

inline double quantize(double v, double quantum) {
    return quantum > 0.0 ? std::round(v / quantum) * quantum : v;
}

/// Appends one 5-minute slot of signal for `label`, starting at `t0_ms`.
inline void emit_slot(Recording& out, Label label, std::int64_t t0_ms, double rate_hz, const SignalModel& m,
                      Rng& rng) {
    const auto n = static_cast<std::size_t>(std::llround(kSlotMinutes * 60.0 * rate_hz));
    const double period_ms = 1000.0 / rate_hz;
    const double two_pi = 2.0 * std::numbers::pi;
    const double gain = std::exp(m.slot_gain_sigma * rng.normal());

    std::vector<double> x(n, 0.0), y(n, 0.0), z(n, m.gravity);
    auto add_noise = [&](double sigma) {
        for (std::size_t j = 0; j < n; ++j) {
            x[j] += rng.normal(0.0, sigma);
            y[j] += rng.normal(0.0, sigma);
            z[j] += rng.normal(0.0, sigma);
        }
    };
    auto time_of = [&](std::size_t j) { return static_cast<double>(j) / rate_hz; };

    switch (label) {
        case Label::apathy:
            add_noise(m.sensor_noise * gain);
            break;
        case Label::normal: {
            add_noise(m.normal_noise * gain);
            const int bursts = rng.poisson(m.normal_bursts_per_minute * kSlotMinutes);
            const auto burst_len = static_cast<std::size_t>(std::llround(rate_hz));
            for (int b = 0; b < bursts; ++b) {
                const std::size_t start = static_cast<std::size_t>(rng.below(n - burst_len));
                const int axis = static_cast<int>(rng.below(3));
                const double phase = rng.uniform(0.0, two_pi);
                auto& col = axis == 0 ? x : axis == 1 ? y : z;
                for (std::size_t j = 0; j < burst_len; ++j)
                    col[start + j] += gain * m.normal_burst_amplitude *
                                      std::sin(two_pi * 3.0 * time_of(j) + phase);
            }
            break;
        }
        case Label::pacing:
        case Label::locomotion_intent: {
            const double amp =
                gain * (label == Label::pacing ? m.pacing_amplitude : m.locomotion_amplitude);
            const double phase = rng.uniform(0.0, two_pi);
            for (std::size_t j = 0; j < n; ++j) {
                const double w = two_pi * m.walk_frequency * time_of(j) + phase;
                x[j] += amp * std::sin(w);
                z[j] += 0.5 * amp * std::cos(w);
            }
            add_noise(m.walk_noise);
            break;
        }
        case Label::restlessness: {
            // Band-limited noise as a sum of random-phase tones in [low, high].
            constexpr int kTones = 16;
            const double tone_amp = gain * m.restless_sigma * std::sqrt(2.0 / kTones);
            for (auto* col : {&x, &y, &z}) {
                for (int k = 0; k < kTones; ++k) {
                    const double f = rng.uniform(m.restless_low, m.restless_high);
                    const double phase = rng.uniform(0.0, two_pi);
                    for (std::size_t j = 0; j < n; ++j) (*col)[j] += tone_amp * std::sin(two_pi * f * time_of(j) + phase);
                }
            }
            add_noise(m.sensor_noise);
            break;
        }
        case Label::mannerisms: {
            const double phase = rng.uniform(0.0, two_pi);
            for (std::size_t j = 0; j < n; ++j)
                y[j] += gain * m.mannerism_amplitude * std::sin(two_pi * m.mannerism_frequency * time_of(j) + phase);
            add_noise(m.sensor_noise);
            break;
        }
        case Label::aggression: {
            add_noise(m.aggression_noise * gain);
            for (std::size_t j = 0; j < n; ++j) {
                if (rng.uniform() >= m.aggression_spike_rate) continue;
                const int axis = static_cast<int>(rng.below(3));
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                (axis == 0 ? x : axis == 1 ? y : z)[j] += sign * m.aggression_spike;
            }
            break;
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        const auto t = t0_ms + static_cast<std::int64_t>(std::llround(static_cast<double>(j) * period_ms));
        out.push_sample(t, quantize(x[j], m.quantum), quantize(y[j], m.quantum), quantize(z[j], m.quantum));
    }
}

}  // namespace detail

/// One synthetic day (day_index counted from spec.start_date). Days are
/// generated from independent seeded streams, so concatenating days yields the
/// same bytes as generating the whole recording at once. Labels do not depend
/// on the signal streams; `with_signal = false` yields the same annotations
/// without samples.
inline SyntheticRecording generate_synthetic_day(const SubjectSpec& subject, const SynthesisSpec& spec,
                                                 int day_index, bool with_signal = true) {
    SyntheticRecording out;
    out.recording.subject_id = subject.subject_id;
    out.recording.sample_rate_hz = spec.sample_rate_hz;
    const Date day{spec.start_date.days + day_index};
    const std::uint64_t subject_seed = derive_seed(spec.seed, subject.subject_id);

    std::map<int, const RegimeSpec*> regimes;
    for (const auto& r : subject.regimes) regimes[r.regime_id] = &r;
    auto schedule = subject.schedule;
    std::sort(schedule.begin(), schedule.end(), [](auto& a, auto& b) { return a.start_minute < b.start_minute; });

    Rng label_rng(derive_seed(subject_seed, "labels", static_cast<std::uint64_t>(day_index)));
    if (with_signal)
        out.recording.reserve_samples(
            static_cast<std::size_t>(std::llround(kDayWindowMinutes * 60.0 * spec.sample_rate_hz)));
    for (const auto& entry : schedule) {
        const RegimeSpec& regime = *regimes.at(entry.regime_id);
        std::vector<double> alpha(kLabelCount);
        for (std::size_t i = 0; i < kLabelCount; ++i)
            alpha[i] = regime.dirichlet_concentration * regime.behavior_distribution[i];
        const auto day_mix = label_rng.dirichlet(alpha);
        for (int m = entry.start_minute; m < entry.end_minute; m += kSlotMinutes) {
            const Label label = label_from_index(static_cast<int>(label_rng.categorical(day_mix)));
            out.recording.annotations.push_back({day, m, label});
            out.ground_truth.push_back({day, m, entry.regime_id});
            if (!with_signal) continue;
            Rng signal_rng(derive_seed(subject_seed, "signal", static_cast<std::uint64_t>(day_index),
                                       static_cast<std::uint64_t>(m)));
            detail::emit_slot(out.recording, label, day.midnight_ms() + std::int64_t{m} * 60'000,
                              spec.sample_rate_hz, spec.signal, signal_rng);
        }
    }
    return out;
}

inline SyntheticRecording generate_synthetic_recording(const SubjectSpec& subject, const SynthesisSpec& spec,
                                                       bool with_signal = true) {
    validate(subject);
    if (spec.n_days < 1) throw ValidationError("n_days must be at least 1");
    SyntheticRecording out;
    out.recording.subject_id = subject.subject_id;
    out.recording.sample_rate_hz = spec.sample_rate_hz;
    for (int d = 0; d < spec.n_days; ++d) {
        auto day = generate_synthetic_day(subject, spec, d, with_signal);
        out.recording.append(day.recording);
        out.ground_truth.insert(out.ground_truth.end(), day.ground_truth.begin(), day.ground_truth.end());
    }
    return out;
}

/// Convenience form taking the regimes and schedule directly.
inline SyntheticRecording generate_synthetic_recording(std::vector<RegimeSpec> regimes,
                                                       std::vector<ScheduleEntry> schedule, int n_days,
                                                       std::uint64_t seed, std::string subject_id = "S01",
                                                       bool with_signal = true) {
    SynthesisSpec spec;
    spec.n_days = n_days;
    spec.seed = seed;
    SubjectSpec subject{std::move(subject_id), std::move(regimes), std::move(schedule)};
    return generate_synthetic_recording(subject, spec, with_signal);
}

inline LabelProbs one_hot(Label l) {
    LabelProbs p{};
    p[static_cast<std::size_t>(index_of(l))] = 1.0;
    return p;
}

// ---------------------------------------------------------------------------
// Default dataset: eight subjects with four regimes each.

namespace detail {

inline LabelProbs normalized(LabelProbs p) {
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
}

}  // namespace detail

/// Eight subjects, each with four regimes on a morning / late morning /
/// afternoon / evening schedule. The regime mixes differ per subject, echoing
/// the spread of per-subject behaviour mixes in the source recordings.
inline SynthesisSpec default_synthesis_spec(std::uint64_t seed = 20190603, double concentration = 1.0) {
    SynthesisSpec spec;
    spec.seed = seed;
    spec.n_days = 10;
    const std::array<std::string, 8> ids = {"X110", "X111", "X113", "X114", "X121", "X122", "X124", "X126"};
    // Dominant behaviours of the four regimes per subject (canonical indices).
    const std::array<std::array<int, 4>, 8> dominant = {{
        {0, 6, 3, 1},
        {3, 0, 5, 6},
        {0, 2, 6, 4},
        {6, 3, 0, 2},
        {2, 0, 1, 6},
        {0, 6, 5, 3},
        {1, 6, 0, 2},
        {0, 2, 6, 3},
    }};
    // Regimes recur within a day so that time of day alone does not identify them.
    const std::array<std::array<int, 3>, 6> schedule = {{
        {480, 570, 0}, {570, 690, 1}, {690, 780, 2}, {780, 870, 0}, {870, 990, 3}, {990, 1080, 1},
    }};
    for (std::size_t s = 0; s < ids.size(); ++s) {
        SubjectSpec subject;
        subject.subject_id = ids[s];
        for (int r = 0; r < 4; ++r) {
            const int main_label = dominant[s][static_cast<std::size_t>(r)];
            const int second_label = dominant[s][static_cast<std::size_t>((r + 1) % 4)];
            LabelProbs p;
            p.fill(0.02);
            p[static_cast<std::size_t>(main_label)] += 0.6;
            p[static_cast<std::size_t>(second_label)] += 0.2;
            subject.regimes.push_back({r, detail::normalized(p), concentration});
        }
        for (const auto& e : schedule) subject.schedule.push_back({e[0], e[1], e[2]});
        spec.subjects.push_back(std::move(subject));
    }
    return spec;
}

// ---------------------------------------------------------------------------
// JSON spec files and ground-truth CSV

inline nlohmann::json to_json(const SynthesisSpec& spec) {
    nlohmann::json j;
    j["n_days"] = spec.n_days;
    j["start_date"] = spec.start_date.to_string();
    j["seed"] = spec.seed;
    j["sample_rate_hz"] = spec.sample_rate_hz;
    auto& subjects = j["subjects"] = nlohmann::json::array();
    for (const auto& s : spec.subjects) {
        nlohmann::json js;
        js["subject_id"] = s.subject_id;
        for (const auto& r : s.regimes) {
            nlohmann::json dist = nlohmann::json::object();
            for (std::size_t i = 0; i < kLabelCount; ++i)
                if (r.behavior_distribution[i] > 0.0) dist[std::string(kLabelNames[i])] = r.behavior_distribution[i];
            js["regimes"].push_back(
                {{"regime_id", r.regime_id}, {"distribution", dist}, {"concentration", r.dirichlet_concentration}});
        }
        for (const auto& e : s.schedule)
            js["schedule"].push_back({{"start_minute", e.start_minute}, {"end_minute", e.end_minute},
                                      {"regime_id", e.regime_id}});
        subjects.push_back(std::move(js));
    }
    return j;
}

inline SynthesisSpec synthesis_spec_from_json(const nlohmann::json& j) {
    try {
        SynthesisSpec spec;
        spec.n_days = j.value("n_days", spec.n_days);
        if (j.contains("start_date")) {
            auto d = Date::parse(j.at("start_date").get<std::string>());
            if (!d) throw ValidationError("malformed start_date");
            spec.start_date = *d;
        }
        spec.seed = j.value("seed", spec.seed);
        spec.sample_rate_hz = j.value("sample_rate_hz", spec.sample_rate_hz);
        for (const auto& js : j.at("subjects")) {
            SubjectSpec s;
            s.subject_id = js.at("subject_id").get<std::string>();
            for (const auto& jr : js.at("regimes")) {
                RegimeSpec r;
                r.regime_id = jr.at("regime_id").get<int>();
                r.dirichlet_concentration = jr.value("concentration", 1.0);
                for (const auto& [name, value] : jr.at("distribution").items()) {
                    auto label = parse_label(name);
                    if (!label) throw ValidationError("unknown label '" + name + "' in regime distribution");
                    r.behavior_distribution[static_cast<std::size_t>(index_of(*label))] = value.get<double>();
                }
                s.regimes.push_back(r);
            }
            for (const auto& je : js.at("schedule"))
                s.schedule.push_back({je.at("start_minute").get<int>(), je.at("end_minute").get<int>(),
                                      je.at("regime_id").get<int>()});
            spec.subjects.push_back(std::move(s));
        }
        validate(spec);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("synthesis spec: ") + e.what());
    }
}

inline SynthesisSpec load_synthesis_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open synthesis spec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return synthesis_spec_from_json(j);
}

inline constexpr std::string_view kGroundTruthHeader = "date,start_minute,regime_id";

inline void write_ground_truth_csv(std::ostream& out, const std::vector<GroundTruthRecord>& truth) {
    out << kGroundTruthHeader << '\n';
    for (const auto& g : truth) out << g.day.to_string() << ',' << g.start_minute << ',' << g.regime_id << '\n';
}

inline std::vector<GroundTruthRecord> read_ground_truth_csv(std::istream& in, const std::string& source) {
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line) || text::trim(line) != kGroundTruthHeader)
        reader.fail("expected header '" + std::string(kGroundTruthHeader) + "'");
    std::vector<GroundTruthRecord> out;
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 3) reader.fail("expected 3 fields");
        auto d = Date::parse(f[0]);
        auto m = text::parse_number<int>(f[1]);
        auto r = text::parse_number<int>(f[2]);
        if (!d || !m || !r) reader.fail("malformed ground-truth row");
        out.push_back({*d, *m, *r});
    }
    return out;
}

}  // namespace bpdhar
