#pragma once

// Flat key=value run configuration shared by all CLI subcommands.
//
// Blank lines and lines starting with '#' are ignored. Lists are comma
// separated; integer lists also accept inclusive ranges ("1-20").

#include <bpdhar/errors.hpp>
#include <bpdhar/experiments.hpp>
#include <bpdhar/parallel.hpp>
#include <bpdhar/text.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bpdhar {

/// Cell whose confusion matrix the report renders. Unset fields mean "best
/// mean macro-F1 among k-means cells".
struct ConfusionCellSelector {
    std::optional<Strategy> strategy;
    std::optional<int> k;
    std::optional<int> segment_min;
    std::optional<ClassifierKind> classifier;
};

struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "out";
    std::filesystem::path synth_spec;  // empty: none given
    std::filesystem::path results;     // report input; empty: <data_dir>/results.csv
    std::optional<std::uint64_t> seed;
    unsigned jobs = default_jobs();
    std::string log_level = "info";

    /// Grid subjects stay empty until resolved against the data directory.
    ExperimentGrid grid{};
    int segment_minutes = 30;
    Strategy cluster_strategy = Strategy::kmeans;
    int cluster_k = 4;
    ConfusionCellSelector confusion{};
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view key, std::string_view v) {
    auto n = text::parse_number<std::uint64_t>(v);
    if (!n) throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return *n;
}

inline int parse_int(std::string_view key, std::string_view v) {
    auto n = text::parse_number<int>(v);
    if (!n) throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return *n;
}

inline double parse_real(std::string_view key, std::string_view v) {
    auto n = text::parse_number<double>(v);
    if (!n) throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return *n;
}

inline std::vector<int> parse_int_list(std::string_view key, std::string_view v) {
    std::vector<int> out;
    for (auto item : text::split(v)) {
        item = text::trim(item);
        if (item.empty()) continue;
        const auto dash = item.find('-', 1);
        if (dash == std::string_view::npos) {
            out.push_back(parse_int(key, item));
            continue;
        }
        const int lo = parse_int(key, item.substr(0, dash));
        const int hi = parse_int(key, item.substr(dash + 1));
        if (hi < lo) throw ConfigError(std::string(key) + ": empty range '" + std::string(item) + "'");
        for (int i = lo; i <= hi; ++i) out.push_back(i);
    }
    if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_name_list(std::string_view key, std::string_view v, Parse parse) {
    std::vector<T> out;
    for (auto item : text::split(v)) {
        item = text::trim(item);
        if (item.empty()) continue;
        auto p = parse(item);
        if (!p) throw ConfigError(std::string(key) + ": unknown value '" + std::string(item) + "'");
        out.push_back(*p);
    }
    if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v, auto&& fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

}  // namespace detail

/// Applies one key. Throws ConfigError for unknown keys and bad values.
inline void apply_config_value(RunConfig& c, std::string_view key, std::string_view value) {
    using namespace detail;
    const auto v = text::trim(value);
    if (key == "data_dir") c.data_dir = std::string(v);
    else if (key == "out_dir") c.out_dir = std::string(v);
    else if (key == "synth_spec") c.synth_spec = std::string(v);
    else if (key == "results") c.results = std::string(v);
    else if (key == "seed") c.seed = parse_u64(key, v);
    else if (key == "jobs") {
        const int j = parse_int(key, v);
        if (j < 0) throw ConfigError("jobs must be non-negative");
        c.jobs = j == 0 ? default_jobs() : static_cast<unsigned>(j);
    } else if (key == "log_level") {
        if (v != "quiet" && v != "info" && v != "debug") throw ConfigError("log_level must be quiet, info or debug");
        c.log_level = std::string(v);
    } else if (key == "strategies")
        c.grid.strategies = parse_name_list<Strategy>(key, v, parse_strategy);
    else if (key == "ks") c.grid.ks = parse_int_list(key, v);
    else if (key == "segment_lengths") c.grid.segment_lengths_min = parse_int_list(key, v);
    else if (key == "classifiers")
        c.grid.classifier_kinds = parse_name_list<ClassifierKind>(key, v, parse_classifier_kind);
    else if (key == "subjects") {
        c.grid.subjects.clear();
        for (auto s : text::split(v))
            if (!text::trim(s).empty()) c.grid.subjects.emplace_back(text::trim(s));
    } else if (key == "repetitions") c.grid.repetitions = parse_int(key, v);
    else if (key == "train_fraction") c.grid.train_fraction = parse_real(key, v);
    else if (key == "window_seconds") c.grid.window.window_seconds = parse_int(key, v);
    else if (key == "window_overlap") c.grid.window.overlap_fraction = parse_real(key, v);
    else if (key == "segment_minutes") c.segment_minutes = parse_int(key, v);
    else if (key == "cluster_strategy") {
        auto s = parse_strategy(v);
        if (!s) throw ConfigError("cluster_strategy: unknown value '" + std::string(v) + "'");
        c.cluster_strategy = *s;
    } else if (key == "cluster_k") c.cluster_k = parse_int(key, v);
    else if (key == "confusion_strategy") {
        auto s = parse_strategy(v);
        if (!s) throw ConfigError("confusion_strategy: unknown value '" + std::string(v) + "'");
        c.confusion.strategy = *s;
    } else if (key == "confusion_k") c.confusion.k = parse_int(key, v);
    else if (key == "confusion_segment_min") c.confusion.segment_min = parse_int(key, v);
    else if (key == "confusion_classifier") {
        auto k = parse_classifier_kind(v);
        if (!k) throw ConfigError("confusion_classifier: unknown value '" + std::string(v) + "'");
        c.confusion.classifier = *k;
    } else
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

/// Parses key=value lines into `c`. Errors name the source and line.
inline void read_config(std::istream& in, const std::string& source, RunConfig& c) {
    std::string line;
    std::size_t n = 0;
    std::set<std::string, std::less<>> seen;
    while (std::getline(in, line)) {
        ++n;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(n) + ": expected key=value");
        const auto key = text::trim(t.substr(0, eq));
        if (!seen.emplace(key).second)
            throw ConfigError(source + ":" + std::to_string(n) + ": duplicate key '" + std::string(key) + "'");
        try {
            apply_config_value(c, key, t.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    RunConfig c;
    read_config(in, path.string(), c);
    return c;
}

/// Canonical dump of the effective configuration; read_config accepts it.
inline std::string to_config_text(const RunConfig& c) {
    using detail::join;
    const auto num = [](auto v) { return std::to_string(v); };
    const auto named = [](auto v) { return std::string(name_of(v)); };
    std::ostringstream o;
    o << "data_dir=" << c.data_dir.string() << '\n';
    o << "out_dir=" << c.out_dir.string() << '\n';
    if (!c.synth_spec.empty()) o << "synth_spec=" << c.synth_spec.string() << '\n';
    if (!c.results.empty()) o << "results=" << c.results.string() << '\n';
    if (c.seed) o << "seed=" << *c.seed << '\n';
    o << "jobs=" << c.jobs << '\n';
    o << "log_level=" << c.log_level << '\n';
    o << "strategies=" << join(c.grid.strategies, named) << '\n';
    o << "ks=" << join(c.grid.ks, num) << '\n';
    o << "segment_lengths=" << join(c.grid.segment_lengths_min, num) << '\n';
    o << "classifiers=" << join(c.grid.classifier_kinds, named) << '\n';
    if (!c.grid.subjects.empty()) o << "subjects=" << join(c.grid.subjects, [](const std::string& s) { return s; }) << '\n';
    o << "repetitions=" << c.grid.repetitions << '\n';
    o << "train_fraction=" << text::format_double(c.grid.train_fraction) << '\n';
    o << "window_seconds=" << c.grid.window.window_seconds << '\n';
    o << "window_overlap=" << text::format_double(c.grid.window.overlap_fraction) << '\n';
    o << "segment_minutes=" << c.segment_minutes << '\n';
    o << "cluster_strategy=" << name_of(c.cluster_strategy) << '\n';
    o << "cluster_k=" << c.cluster_k << '\n';
    if (c.confusion.strategy) o << "confusion_strategy=" << name_of(*c.confusion.strategy) << '\n';
    if (c.confusion.k) o << "confusion_k=" << *c.confusion.k << '\n';
    if (c.confusion.segment_min) o << "confusion_segment_min=" << *c.confusion.segment_min << '\n';
    if (c.confusion.classifier) o << "confusion_classifier=" << name_of(*c.confusion.classifier) << '\n';
    return o.str();
}

}  // namespace bpdhar
