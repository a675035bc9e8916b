#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"
#include "text.hpp"

namespace bpdhar {

/// Recorded day window: 08:00 (inclusive) to 18:00 (exclusive), minutes since midnight.
inline constexpr int kDayStartMinute = 480;
inline constexpr int kDayEndMinute = 1080;
inline constexpr int kDayWindowMinutes = kDayEndMinute - kDayStartMinute;
inline constexpr int kSlotMinutes = 5;
inline constexpr int kSlotsPerDay = kDayWindowMinutes / kSlotMinutes;
inline constexpr double kDefaultSampleRateHz = 50.0;

struct AnnotationRecord {
    Date day;
    int start_minute = kDayStartMinute;
    Label label = Label::normal;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// One point of the acceleration stream (m/s^2).
struct Sample {
    std::int64_t timestamp_ms;
    double ax, ay, az;
};

/// Per-subject recording. Samples are stored column-wise so that a window over
/// one axis is a contiguous span.
struct Recording {
    std::string subject_id;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::vector<std::int64_t> timestamp_ms;
    std::vector<double> ax, ay, az;
    std::vector<AnnotationRecord> annotations;

    std::size_t sample_count() const noexcept { return timestamp_ms.size(); }

    Sample sample(std::size_t i) const { return {timestamp_ms[i], ax[i], ay[i], az[i]}; }

    void push_sample(std::int64_t t, double x, double y, double z) {
        timestamp_ms.push_back(t);
        ax.push_back(x);
        ay.push_back(y);
        az.push_back(z);
    }

    void reserve_samples(std::size_t n) {
        timestamp_ms.reserve(n);
        ax.reserve(n);
        ay.reserve(n);
        az.reserve(n);
    }

    /// Appends another recording of the same subject whose samples all come later.
    void append(const Recording& later) {
        timestamp_ms.insert(timestamp_ms.end(), later.timestamp_ms.begin(), later.timestamp_ms.end());
        ax.insert(ax.end(), later.ax.begin(), later.ax.end());
        ay.insert(ay.end(), later.ay.begin(), later.ay.end());
        az.insert(az.end(), later.az.begin(), later.az.end());
        annotations.insert(annotations.end(), later.annotations.begin(), later.annotations.end());
    }

    /// Days that carry samples or annotations, ascending.
    std::vector<Date> days() const {
        std::set<Date> out;
        for (const auto& a : annotations) out.insert(a.day);
        std::size_t i = 0;
        while (i < timestamp_ms.size()) {
            const Date d = Date::of_timestamp(timestamp_ms[i]);
            out.insert(d);
            const std::int64_t next_midnight = Date{d.days + 1}.midnight_ms();
            i = static_cast<std::size_t>(
                std::lower_bound(timestamp_ms.begin() + static_cast<std::ptrdiff_t>(i), timestamp_ms.end(),
                                 next_midnight) -
                timestamp_ms.begin());
        }
        return {out.begin(), out.end()};
    }

    friend bool operator==(const Recording&, const Recording&) = default;
};

inline double nominal_period_ms(double rate_hz) { return 1000.0 / rate_hz; }

/// Annotation slot that is not fully covered by samples at the nominal rate.
struct CoverageGap {
    Date day;
    int start_minute;
    std::size_t expected_samples;
    std::size_t present_samples;
};

/// Checks the recording invariants; throws ValidationError on the first violation.
inline void validate(const Recording& r) {
    if (!(r.sample_rate_hz > 0.0) || !std::isfinite(r.sample_rate_hz))
        throw ValidationError("sample rate must be positive");
    const auto n = r.timestamp_ms.size();
    if (r.ax.size() != n || r.ay.size() != n || r.az.size() != n)
        throw ValidationError("sample columns have different lengths");
    for (std::size_t i = 1; i < n; ++i)
        if (r.timestamp_ms[i] <= r.timestamp_ms[i - 1])
            throw ValidationError("timestamps not strictly increasing at sample " + std::to_string(i) + " (" +
                                  std::to_string(r.timestamp_ms[i]) + " after " +
                                  std::to_string(r.timestamp_ms[i - 1]) + ")");
    std::set<std::pair<Date, int>> seen;
    for (const auto& a : r.annotations) {
        if (a.start_minute % kSlotMinutes != 0)
            throw ValidationError("annotation " + a.day.to_string() + " minute " + std::to_string(a.start_minute) +
                                  " is off the 5-minute grid");
        if (a.start_minute < kDayStartMinute || a.start_minute > kDayEndMinute - kSlotMinutes)
            throw ValidationError("annotation " + a.day.to_string() + " minute " + std::to_string(a.start_minute) +
                                  " is outside the 08:00-18:00 window");
        if (!seen.emplace(a.day, a.start_minute).second)
            throw ValidationError("duplicate annotation for " + a.day.to_string() + " minute " +
                                  std::to_string(a.start_minute));
    }
}

/// Annotation slots whose 5-minute interval is not fully sampled.
inline std::vector<CoverageGap> coverage_gaps(const Recording& r) {
    std::vector<CoverageGap> gaps;
    const auto expected =
        static_cast<std::size_t>(std::llround(kSlotMinutes * 60.0 * r.sample_rate_hz));
    const double period = nominal_period_ms(r.sample_rate_hz);
    for (const auto& a : r.annotations) {
        const std::int64_t begin = a.day.midnight_ms() + std::int64_t{a.start_minute} * 60'000;
        const std::int64_t end = begin + kSlotMinutes * 60'000;
        auto lo = std::lower_bound(r.timestamp_ms.begin(), r.timestamp_ms.end(), begin);
        auto hi = std::lower_bound(lo, r.timestamp_ms.end(), end);
        const auto present = static_cast<std::size_t>(hi - lo);
        bool ok = present >= expected && lo != hi && static_cast<double>(*lo - begin) < period;
        for (auto it = lo; ok && it != hi && std::next(it) != hi; ++it)
            if (static_cast<double>(*std::next(it) - *it) > 1.5 * period) ok = false;
        if (ok && static_cast<double>(end - *std::prev(hi)) > 1.5 * period) ok = false;
        if (!ok) gaps.push_back({a.day, a.start_minute, expected, present});
    }
    return gaps;
}

// ---------------------------------------------------------------------------
// CSV I/O

inline constexpr std::string_view kSignalHeader = "timestamp_ms,ax,ay,az";
inline constexpr std::string_view kAnnotationHeader = "date,start_minute,label";

inline void write_signal_csv(std::ostream& out, const Recording& r) {
    out << kSignalHeader << '\n';
    std::string line;
    for (std::size_t i = 0; i < r.sample_count(); ++i) {
        line.clear();
        line += std::to_string(r.timestamp_ms[i]);
        line += ',';
        line += text::format_double(r.ax[i]);
        line += ',';
        line += text::format_double(r.ay[i]);
        line += ',';
        line += text::format_double(r.az[i]);
        line += '\n';
        out << line;
    }
}

inline void write_annotation_csv(std::ostream& out, const Recording& r) {
    out << kAnnotationHeader << '\n';
    for (const auto& a : r.annotations)
        out << a.day.to_string() << ',' << a.start_minute << ',' << name_of(a.label) << '\n';
}

inline void read_signal_csv(std::istream& in, const std::string& source, Recording& r) {
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line)) reader.fail("empty file, expected header");
    if (text::trim(line) != kSignalHeader) reader.fail("expected header '" + std::string(kSignalHeader) + "'");
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
        auto t = text::parse_number<std::int64_t>(f[0]);
        auto x = text::parse_number<double>(f[1]);
        auto y = text::parse_number<double>(f[2]);
        auto z = text::parse_number<double>(f[3]);
        if (!t || !x || !y || !z) reader.fail("malformed sample row");
        if (!r.timestamp_ms.empty() && *t <= r.timestamp_ms.back())
            throw ValidationError(source + ":" + std::to_string(reader.line_no()) +
                                  ": timestamps not strictly increasing");
        r.push_sample(*t, *x, *y, *z);
    }
}

inline void read_annotation_csv(std::istream& in, const std::string& source, Recording& r) {
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line)) reader.fail("empty file, expected header");
    if (text::trim(line) != kAnnotationHeader)
        reader.fail("expected header '" + std::string(kAnnotationHeader) + "'");
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(f.size()));
        auto day = Date::parse(f[0]);
        auto minute = text::parse_number<int>(f[1]);
        auto label = parse_label(text::trim(f[2]));
        if (!day) reader.fail("malformed date '" + std::string(f[0]) + "'");
        if (!minute) reader.fail("malformed start_minute '" + std::string(f[1]) + "'");
        if (!label) reader.fail("unknown label '" + std::string(f[2]) + "'");
        r.annotations.push_back({*day, *minute, *label});
    }
}

/// File names of one recording inside a data directory.
struct RecordingPaths {
    std::filesystem::path signal;
    std::filesystem::path annotations;
    std::filesystem::path ground_truth;

    static RecordingPaths in(const std::filesystem::path& dir, const std::string& subject_id) {
        return {dir / (subject_id + ".signal.csv"), dir / (subject_id + ".annotations.csv"),
                dir / (subject_id + ".truth.csv")};
    }
};

/// Loads and validates a recording from its signal and annotation CSV files.
inline Recording load_recording(const std::filesystem::path& signal_path,
                                const std::filesystem::path& annotation_path, std::string subject_id,
                                double sample_rate_hz = kDefaultSampleRateHz) {
    Recording r;
    r.subject_id = std::move(subject_id);
    r.sample_rate_hz = sample_rate_hz;
    {
        std::ifstream in(signal_path);
        if (!in) throw ValidationError("cannot open " + signal_path.string());
        read_signal_csv(in, signal_path.string(), r);
    }
    {
        std::ifstream in(annotation_path);
        if (!in) throw ValidationError("cannot open " + annotation_path.string());
        read_annotation_csv(in, annotation_path.string(), r);
    }
    validate(r);
    return r;
}

inline Recording load_recording(const std::filesystem::path& data_dir, const std::string& subject_id,
                                double sample_rate_hz = kDefaultSampleRateHz) {
    const auto p = RecordingPaths::in(data_dir, subject_id);
    return load_recording(p.signal, p.annotations, subject_id, sample_rate_hz);
}

inline void save_recording(const std::filesystem::path& data_dir, const Recording& r) {
    const auto p = RecordingPaths::in(data_dir, r.subject_id);
    std::ofstream sig(p.signal, std::ios::binary);
    write_signal_csv(sig, r);
    std::ofstream ann(p.annotations, std::ios::binary);
    write_annotation_csv(ann, r);
    if (!sig || !ann) throw ValidationError("failed writing recording to " + data_dir.string());
}

/// Subjects with both a signal and an annotation file in `dir`, sorted.
inline std::vector<std::string> discover_subjects(const std::filesystem::path& dir) {
    std::vector<std::string> out;
    if (!std::filesystem::is_directory(dir)) return out;
    constexpr std::string_view suffix = ".signal.csv";
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            auto id = name.substr(0, name.size() - suffix.size());
            if (std::filesystem::exists(RecordingPaths::in(dir, id).annotations)) out.push_back(std::move(id));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Day segmentation

/// Identifies one day-and-time segment; the segment length is implied by context.
struct SegmentKey {
    Date day;
    int start_minute = kDayStartMinute;

    friend constexpr auto operator<=>(const SegmentKey&, const SegmentKey&) = default;

    /// `YYYY-MM-DDTHH:MM`
    std::string to_string() const {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%02d:%02d", start_minute / 60, start_minute % 60);
        return day.to_string() + "T" + buf;
    }

    static std::optional<SegmentKey> parse(std::string_view s) {
        s = text::trim(s);
        if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return std::nullopt;
        auto d = Date::parse(s.substr(0, 10));
        auto h = text::parse_number<int>(s.substr(11, 2));
        auto m = text::parse_number<int>(s.substr(14, 2));
        if (!d || !h || !m || *m >= 60) return std::nullopt;
        return SegmentKey{*d, *h * 60 + *m};
    }
};

struct TimeSegment {
    Date day;
    int start_minute;
    int end_minute;
    /// Indices into the recording's annotations whose start_minute lies in [start, end).
    std::vector<std::size_t> slots;

    SegmentKey key() const noexcept { return {day, start_minute}; }
};

inline void check_segment_minutes(int segment_minutes) {
    if (segment_minutes <= 0 || segment_minutes % kSlotMinutes != 0 || kDayWindowMinutes % segment_minutes != 0)
        throw ArgumentError("segment length must be a positive multiple of 5 dividing 600, got " +
                            std::to_string(segment_minutes));
}

/// Start minute of the segment of length `segment_minutes` containing `minute_of_day`.
constexpr int segment_start(int minute_of_day, int segment_minutes) noexcept {
    return kDayStartMinute + ((minute_of_day - kDayStartMinute) / segment_minutes) * segment_minutes;
}

/// Tiles every recorded day into segments of `segment_minutes`.
inline std::vector<TimeSegment> segment_day(const Recording& r, int segment_minutes) {
    check_segment_minutes(segment_minutes);
    std::vector<TimeSegment> segments;
    const auto days = r.days();
    std::map<Date, std::size_t> first_of_day;
    for (const Date d : days) {
        first_of_day[d] = segments.size();
        for (int m = kDayStartMinute; m < kDayEndMinute; m += segment_minutes)
            segments.push_back({d, m, m + segment_minutes, {}});
    }
    for (std::size_t i = 0; i < r.annotations.size(); ++i) {
        const auto& a = r.annotations[i];
        if (a.start_minute < kDayStartMinute || a.start_minute >= kDayEndMinute) continue;
        const auto base = first_of_day.at(a.day);
        segments[base + static_cast<std::size_t>((a.start_minute - kDayStartMinute) / segment_minutes)]
            .slots.push_back(i);
    }
    return segments;
}

}  // namespace bpdhar
