#pragma once

// Factorial experiment: strategy x k x segment length x classifier x subject x
// repetition. BPD models are built on the full subject data (the BPD of every
// test segment is assumed known); the 70/30 split happens at window level.

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bpd.hpp"
#include "classifiers.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "text.hpp"

namespace bpdhar {

struct ExperimentGrid {
    std::vector<Strategy> strategies = {Strategy::kmeans, Strategy::time_based};
    std::vector<int> ks = [] {
        std::vector<int> v;
        for (int k = 1; k <= 20; ++k) v.push_back(k);
        return v;
    }();
    /// Histogram segment lengths; k-means only.
    std::vector<int> segment_lengths_min = {5, 10, 15, 30, 60, 120};
    std::vector<ClassifierKind> classifier_kinds = {kAllClassifierKinds.begin(), kAllClassifierKinds.end()};
    std::vector<std::string> subjects;
    int repetitions = 10;
    double train_fraction = 0.7;
    std::uint64_t master_seed = 1;
    WindowSpec window{};
};

namespace detail {

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace detail

/// Validates the grid and puts every factor into canonical (sorted, unique) order.
inline ExperimentGrid canonical(ExperimentGrid g) {
    if (g.repetitions < 1) throw ValidationError("repetitions must be at least 1");
    if (!(g.train_fraction > 0.0 && g.train_fraction < 1.0)) throw ValidationError("train_fraction must lie in (0, 1)");
    if (g.strategies.empty() || g.ks.empty() || g.classifier_kinds.empty() || g.subjects.empty())
        throw ValidationError("every grid factor needs at least one level");
    for (int k : g.ks)
        if (k < 1) throw ValidationError("k must be positive");
    for (int len : g.segment_lengths_min) {
        try {
            check_segment_minutes(len);
        } catch (const ArgumentError& e) {
            throw ValidationError(e.what());
        }
    }
    if (std::find(g.strategies.begin(), g.strategies.end(), Strategy::kmeans) != g.strategies.end() &&
        g.segment_lengths_min.empty())
        throw ValidationError("k-means needs at least one segment length");
    (void)g.window.stride_seconds();
    detail::sort_unique(g.strategies);
    detail::sort_unique(g.ks);
    detail::sort_unique(g.segment_lengths_min);
    detail::sort_unique(g.classifier_kinds);
    detail::sort_unique(g.subjects);
    return g;
}

/// Everything the grid needs from one subject; the raw signal is not kept.
struct SubjectData {
    std::string subject_id;
    std::vector<AnnotationRecord> annotations;
    std::vector<Date> days;
    /// Windows tagged with 5-minute segments.
    std::vector<FeatureVector> features;
};

inline SubjectData prepare_subject(const Recording& r, const WindowSpec& window, unsigned jobs = 1) {
    SubjectData s;
    s.subject_id = r.subject_id;
    s.annotations = r.annotations;
    s.days = r.days();
    s.features = featurize_recording(r, window, kSlotMinutes, jobs).features;
    return s;
}

/// Segments of the subject's recorded days (no samples needed).
inline std::vector<TimeSegment> segments_of(const SubjectData& s, int segment_minutes) {
    Recording shell;
    shell.annotations = s.annotations;
    auto segs = segment_day(shell, segment_minutes);
    // Days with samples but no annotation still need tiling.
    std::set<Date> have;
    for (const auto& seg : segs) have.insert(seg.day);
    for (const Date d : s.days)
        if (!have.contains(d))
            for (int m = kDayStartMinute; m < kDayEndMinute; m += segment_minutes)
                segs.push_back({d, m, m + segment_minutes, {}});
    std::sort(segs.begin(), segs.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return segs;
}

// ---------------------------------------------------------------------------
// Split

/// Uniform window-level split: the first round(n * fraction) entries of a
/// seeded permutation form the training set. Both parts stay non-empty.
/// Returned index lists are sorted.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_test(std::size_t n,
                                                                                      double train_fraction,
                                                                                      std::uint64_t seed) {
    if (n < 2) throw ArgumentError("need at least 2 windows to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");
    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(std::span<const T> items, double train_fraction,
                                                           std::uint64_t seed) {
    auto [tr, te] = split_train_test(items.size(), train_fraction, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    for (auto i : tr) out.first.push_back(items[i]);
    for (auto i : te) out.second.push_back(items[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Seeds
//
// split seed = derive_seed(master, "split", subject, rep)
// train seed = derive_seed(master, "train", subject, classifier, rep)
// kmeans seed = derive_seed(master, "kmeans", subject, segment_min, k)
//
// Strategy, k and segment length are deliberately absent from the split and
// training seeds: every BPD structure of a subject is evaluated on the same
// splits, which makes the k = 1 rows of both strategies identical.

inline std::uint64_t split_seed(std::uint64_t master, std::string_view subject, int rep) {
    return derive_seed(master, "split", subject, static_cast<std::uint64_t>(rep));
}

inline std::uint64_t train_seed(std::uint64_t master, std::string_view subject, ClassifierKind kind, int rep) {
    return derive_seed(master, "train", subject, name_of(kind), static_cast<std::uint64_t>(rep));
}

inline std::uint64_t kmeans_seed(std::uint64_t master, std::string_view subject, int segment_min, int k) {
    return derive_seed(master, "kmeans", subject, static_cast<std::uint64_t>(segment_min),
                       static_cast<std::uint64_t>(k));
}

// ---------------------------------------------------------------------------
// Results

struct ExperimentResult {
    Strategy strategy = Strategy::kmeans;
    int k = 1;
    /// Histogram segment length; 0 for time-based rows.
    int segment_min = 0;
    ClassifierKind classifier = ClassifierKind::majority;
    std::string subject;
    int rep = 0;
    double f1_macro = 0.0;
    std::array<double, kLabelCount> f1{};
    ConfusionMatrix confusion{};
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_fallback = 0;

    auto factor_tuple() const { return std::tie(strategy, k, segment_min, classifier, subject, rep); }
};

/// One BPD structure of one subject.
struct BpdCellKey {
    Strategy strategy;
    int k;
    int segment_min;
    std::string subject;

    friend auto operator<=>(const BpdCellKey&, const BpdCellKey&) = default;
};

/// Builds the BPD model of one cell from the full subject data.
inline BpdModel build_bpd_model(const SubjectData& s, Strategy strategy, int k, int segment_min,
                                std::uint64_t master_seed) {
    if (strategy == Strategy::time_based) return time_based_assign(segments_of(s, kSlotMinutes), k);
    const auto segments = segments_of(s, segment_min);
    const auto histograms = build_histograms(segments, s.annotations);
    return kmeans_cluster(histograms, k, kmeans_seed(master_seed, s.subject_id, segment_min, k), segment_min);
}

namespace detail {

struct SubjectMatrix {
    Matrix x;
    std::vector<Label> y;
};

inline SubjectMatrix to_matrix(const SubjectData& s) {
    SubjectMatrix m{Matrix(s.features.size(), kFeatureCount), {}};
    m.y.reserve(s.features.size());
    for (std::size_t i = 0; i < s.features.size(); ++i) {
        std::copy(s.features[i].values.begin(), s.features[i].values.end(), m.x.row(i).begin());
        m.y.push_back(s.features[i].label);
    }
    return m;
}

/// Repetitions of one (BPD structure, classifier) cell.
inline std::vector<ExperimentResult> evaluate_cell(const SubjectData& s, const SubjectMatrix& m, const BpdModel& model,
                                                   const BpdCellKey& key, ClassifierKind kind,
                                                   const ExperimentGrid& grid) {
    const int seg_len = key.strategy == Strategy::time_based ? kSlotMinutes : key.segment_min;
    std::vector<FeatureVector> tagged = s.features;
    retag_segments(tagged, seg_len, grid.window.window_seconds);
    const auto labels = label_windows(model, tagged);

    std::vector<ExperimentResult> rows;
    for (int rep = 0; rep < grid.repetitions; ++rep) {
        const auto [train_pos, test_pos] =
            split_train_test(labels.kept.size(), grid.train_fraction, split_seed(grid.master_seed, s.subject_id, rep));
        std::vector<std::size_t> train_rows(train_pos.size());
        std::vector<Label> train_y(train_pos.size());
        std::vector<int> train_d(train_pos.size());
        for (std::size_t i = 0; i < train_pos.size(); ++i) {
            train_rows[i] = labels.kept[train_pos[i]];
            train_y[i] = m.y[train_rows[i]];
            train_d[i] = labels.bpd[train_pos[i]];
        }
        const auto bank = train_bank(kind, gather_rows(m.x, train_rows), train_y, train_d,
                                     train_seed(grid.master_seed, s.subject_id, kind, rep));
        const Label fallback = detail::modal_label(train_y);

        ExperimentResult row;
        row.strategy = key.strategy;
        row.k = key.k;
        row.segment_min = key.strategy == Strategy::time_based ? 0 : key.segment_min;
        row.classifier = kind;
        row.subject = s.subject_id;
        row.rep = rep;
        row.n_train = train_pos.size();
        row.n_test = test_pos.size();
        for (std::size_t pos : test_pos) {
            const std::size_t r = labels.kept[pos];
            const int d = labels.bpd[pos];
            Label predicted;
            if (bank.contains(d)) {
                predicted = bank.predict(m.x.row(r), d);
            } else {
                predicted = fallback;
                ++row.n_fallback;
            }
            ++row.confusion[static_cast<std::size_t>(index_of(m.y[r]))][static_cast<std::size_t>(index_of(predicted))];
        }
        const auto f1 = f1_macro(row.confusion);
        row.f1_macro = f1.macro;
        row.f1 = f1.per_class;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

/// The BPD structures of the grid for one subject, canonical order.
inline std::vector<BpdCellKey> bpd_cells(const ExperimentGrid& grid, const std::string& subject) {
    std::vector<BpdCellKey> cells;
    for (Strategy s : grid.strategies)
        for (int k : grid.ks) {
            if (s == Strategy::time_based)
                cells.push_back({s, k, 0, subject});
            else
                for (int len : grid.segment_lengths_min) cells.push_back({s, k, len, subject});
        }
    return cells;
}

inline std::size_t expected_row_count(const ExperimentGrid& g) {
    std::size_t per_k = 0;
    for (Strategy s : g.strategies) per_k += s == Strategy::kmeans ? g.segment_lengths_min.size() : 1;
    return per_k * g.ks.size() * g.classifier_kinds.size() * g.subjects.size() *
           static_cast<std::size_t>(g.repetitions);
}

using ResultSink = std::function<void(const ExperimentResult&)>;

/// Runs the grid. Rows reach `sink` (when given) in canonical factor order as
/// soon as every earlier row is done, and are also returned in that order.
inline std::vector<ExperimentResult> run_grid(const ExperimentGrid& grid_in, std::span<const SubjectData> data,
                                              const ResultSink& sink = {}, unsigned jobs = 1) {
    const ExperimentGrid grid = canonical(grid_in);
    std::map<std::string, const SubjectData*> by_subject;
    for (const auto& s : data) by_subject[s.subject_id] = &s;
    for (const auto& id : grid.subjects)
        if (!by_subject.contains(id)) throw ValidationError("subject " + id + " has no data");

    // Check k against the histogram counts before any work starts.
    for (const auto& id : grid.subjects) {
        const auto& s = *by_subject.at(id);
        if (s.features.size() < 2) throw ValidationError("subject " + id + " has fewer than 2 labeled windows");
        for (int k : grid.ks) {
            if (k > kSlotsPerDay) throw ValidationError("k = " + std::to_string(k) + " exceeds 120");
            for (int len : grid.segment_lengths_min) {
                if (std::find(grid.strategies.begin(), grid.strategies.end(), Strategy::kmeans) == grid.strategies.end())
                    break;
                const auto hist = build_histograms(segments_of(s, len), s.annotations);
                if (static_cast<std::size_t>(k) > hist.size())
                    throw ValidationError("subject " + id + ": k = " + std::to_string(k) + " exceeds the " +
                                          std::to_string(hist.size()) + " histograms at " + std::to_string(len) +
                                          " minutes");
            }
        }
    }

    std::map<std::string, detail::SubjectMatrix> matrices;
    for (const auto& id : grid.subjects) matrices.emplace(id, detail::to_matrix(*by_subject.at(id)));

    std::vector<BpdCellKey> structures;
    for (const auto& id : grid.subjects)
        for (auto& c : bpd_cells(grid, id)) structures.push_back(std::move(c));
    std::vector<BpdModel> models(structures.size());
    parallel_for(structures.size(), jobs, [&](std::size_t i) {
        const auto& c = structures[i];
        models[i] = build_bpd_model(*by_subject.at(c.subject), c.strategy, c.k, c.segment_min, grid.master_seed);
    });
    std::map<BpdCellKey, const BpdModel*> model_of;
    for (std::size_t i = 0; i < structures.size(); ++i) model_of[structures[i]] = &models[i];

    // Work units in canonical order: strategy, k, segment, classifier, subject.
    struct Unit {
        BpdCellKey key;
        ClassifierKind kind;
    };
    std::vector<Unit> units;
    for (Strategy st : grid.strategies)
        for (int k : grid.ks) {
            const std::vector<int> lens = st == Strategy::kmeans ? grid.segment_lengths_min : std::vector<int>{0};
            for (int len : lens)
                for (ClassifierKind kind : grid.classifier_kinds)
                    for (const auto& id : grid.subjects) units.push_back({{st, k, len, id}, kind});
        }

    std::vector<std::optional<std::vector<ExperimentResult>>> done(units.size());
    std::size_t next_emit = 0;
    std::mutex emit_mutex;
    std::vector<ExperimentResult> all;
    all.reserve(expected_row_count(grid));

    parallel_for(units.size(), jobs, [&](std::size_t u) {
        const auto& unit = units[u];
        auto rows = detail::evaluate_cell(*by_subject.at(unit.key.subject), matrices.at(unit.key.subject),
                                          *model_of.at(unit.key), unit.key, unit.kind, grid);
        std::lock_guard lock(emit_mutex);
        done[u] = std::move(rows);
        while (next_emit < units.size() && done[next_emit]) {
            for (auto& row : *done[next_emit]) {
                if (sink) sink(row);
                all.push_back(std::move(row));
            }
            done[next_emit].reset();
            ++next_emit;
        }
    });
    return all;
}

// ---------------------------------------------------------------------------
// Aggregation

/// Mean macro-F1 per subject (over repetitions) and then over subjects.
struct CellSummary {
    Strategy strategy;
    int k;
    int segment_min;
    ClassifierKind classifier;
    double mean_f1 = 0.0;
    std::map<std::string, double> per_subject;
};

inline std::vector<CellSummary> summarize(std::span<const ExperimentResult> results) {
    using Key = std::tuple<Strategy, int, int, ClassifierKind>;
    std::map<Key, std::map<std::string, std::pair<double, int>>> acc;
    for (const auto& r : results) {
        auto& slot = acc[{r.strategy, r.k, r.segment_min, r.classifier}][r.subject];
        slot.first += r.f1_macro;
        slot.second += 1;
    }
    std::vector<CellSummary> out;
    for (const auto& [key, subjects] : acc) {
        CellSummary s{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), 0.0, {}};
        for (const auto& [subject, sum] : subjects) {
            const double m = sum.first / sum.second;
            s.per_subject[subject] = m;
            s.mean_f1 += m;
        }
        s.mean_f1 /= static_cast<double>(subjects.size());
        out.push_back(std::move(s));
    }
    return out;
}

struct MatchedPoint {
    ClassifierKind classifier;
    int k;
    int segment_min;
    double f1_kmeans_mean;
    double f1_time_mean;
    double delta;  // kmeans - time_based
    std::map<std::string, std::pair<double, double>> per_subject;  // (kmeans, time_based)
};

struct MatchedPointsResult {
    std::vector<MatchedPoint> points;
    std::vector<std::string> warnings;
};

/// Pairs k-means at (k, 600/k minutes) with time-based k wherever both exist.
inline MatchedPointsResult matched_points(std::span<const ExperimentResult> results) {
    MatchedPointsResult out;
    const auto cells = summarize(results);
    std::map<std::tuple<Strategy, int, int, ClassifierKind>, const CellSummary*> index;
    bool any_kmeans = false, any_time = false;
    for (const auto& c : cells) {
        index[{c.strategy, c.k, c.segment_min, c.classifier}] = &c;
        any_kmeans |= c.strategy == Strategy::kmeans;
        any_time |= c.strategy == Strategy::time_based;
    }
    if (!any_time) out.warnings.push_back("no time_based results; matched points need both strategies");
    if (!any_kmeans) out.warnings.push_back("no kmeans results; matched points need both strategies");
    if (!any_time || !any_kmeans) return out;
    for (const auto& c : cells) {
        if (c.strategy != Strategy::time_based || kDayWindowMinutes % c.k != 0) continue;
        const int len = kDayWindowMinutes / c.k;
        auto it = index.find({Strategy::kmeans, c.k, len, c.classifier});
        if (it == index.end()) continue;
        MatchedPoint p{c.classifier, c.k, len, it->second->mean_f1, c.mean_f1, it->second->mean_f1 - c.mean_f1, {}};
        for (const auto& [subject, f] : c.per_subject) {
            auto ks = it->second->per_subject.find(subject);
            if (ks != it->second->per_subject.end()) p.per_subject[subject] = {ks->second, f};
        }
        out.points.push_back(std::move(p));
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const auto& a, const auto& b) { return std::tie(a.classifier, a.k) < std::tie(b.classifier, b.k); });
    return out;
}

// ---------------------------------------------------------------------------
// CSV formats

inline constexpr std::string_view kResultsHeader =
    "strategy,k,segment_min,classifier,subject,rep,f1_macro,f1_c0,f1_c1,f1_c2,f1_c3,f1_c4,f1_c5,f1_c6,n_train,"
    "n_test,n_fallback";
inline constexpr std::string_view kConfusionHeader =
    "strategy,k,segment_min,classifier,subject,rep,true_label,pred_0,pred_1,pred_2,pred_3,pred_4,pred_5,pred_6";
inline constexpr std::string_view kSummaryHeader = "classifier,k,segment_min,f1_kmeans_mean,f1_time_mean,delta";
inline constexpr std::string_view kSubjectSummaryHeader = "classifier,k,segment_min,subject,f1_kmeans_mean,f1_time_mean,delta";

inline std::string format_result_row(const ExperimentResult& r) {
    std::string s;
    s += name_of(r.strategy);
    s += ',' + std::to_string(r.k) + ',' + std::to_string(r.segment_min) + ',';
    s += name_of(r.classifier);
    s += ',' + r.subject + ',' + std::to_string(r.rep) + ',' + text::format_double(r.f1_macro);
    for (double v : r.f1) s += ',' + text::format_double(v);
    s += ',' + std::to_string(r.n_train) + ',' + std::to_string(r.n_test) + ',' + std::to_string(r.n_fallback);
    return s;
}

inline std::string format_confusion_rows(const ExperimentResult& r) {
    std::string prefix;
    prefix += name_of(r.strategy);
    prefix += ',' + std::to_string(r.k) + ',' + std::to_string(r.segment_min) + ',';
    prefix += name_of(r.classifier);
    prefix += ',' + r.subject + ',' + std::to_string(r.rep) + ',';
    std::string out;
    for (std::size_t t = 0; t < kLabelCount; ++t) {
        out += prefix;
        out += kLabelNames[t];
        for (std::size_t p = 0; p < kLabelCount; ++p) out += ',' + std::to_string(r.confusion[t][p]);
        out += '\n';
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const MatchedPointsResult& m) {
    out << kSummaryHeader << '\n';
    for (const auto& p : m.points)
        out << name_of(p.classifier) << ',' << p.k << ',' << p.segment_min << ',' << text::format_fixed(p.f1_kmeans_mean, 6)
            << ',' << text::format_fixed(p.f1_time_mean, 6) << ',' << text::format_fixed(p.delta, 6) << '\n';
}

inline void write_subject_summary_csv(std::ostream& out, const MatchedPointsResult& m) {
    out << kSubjectSummaryHeader << '\n';
    for (const auto& p : m.points)
        for (const auto& [subject, f] : p.per_subject)
            out << name_of(p.classifier) << ',' << p.k << ',' << p.segment_min << ',' << subject << ','
                << text::format_fixed(f.first, 6) << ',' << text::format_fixed(f.second, 6) << ','
                << text::format_fixed(f.first - f.second, 6) << '\n';
}

/// Reads a results CSV; throws ParseError naming the offending line.
inline std::vector<ExperimentResult> read_results_csv(std::istream& in, const std::string& source) {
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line)) reader.fail("empty results file");
    if (text::trim(line) != kResultsHeader) reader.fail("unexpected results header");
    std::vector<ExperimentResult> out;
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 17) reader.fail("expected 17 fields, got " + std::to_string(f.size()));
        ExperimentResult r;
        auto st = parse_strategy(text::trim(f[0]));
        auto k = text::parse_number<int>(f[1]);
        auto seg = text::parse_number<int>(f[2]);
        auto kind = parse_classifier_kind(text::trim(f[3]));
        auto rep = text::parse_number<int>(f[5]);
        auto f1 = text::parse_number<double>(f[6]);
        if (!st || !k || !seg || !kind || !rep || !f1 || *k < 1 || !(*f1 >= 0.0 && *f1 <= 1.0))
            reader.fail("malformed results row");
        r.strategy = *st;
        r.k = *k;
        r.segment_min = *seg;
        r.classifier = *kind;
        r.subject = std::string(text::trim(f[4]));
        r.rep = *rep;
        r.f1_macro = *f1;
        for (std::size_t c = 0; c < kLabelCount; ++c) {
            auto v = text::parse_number<double>(f[7 + c]);
            if (!v) reader.fail("malformed per-class F1");
            r.f1[c] = *v;
        }
        auto a = text::parse_number<std::size_t>(f[14]);
        auto b = text::parse_number<std::size_t>(f[15]);
        auto c = text::parse_number<std::size_t>(f[16]);
        if (!a || !b || !c) reader.fail("malformed window counts");
        r.n_train = *a;
        r.n_test = *b;
        r.n_fallback = *c;
        out.push_back(std::move(r));
    }
    if (out.empty()) reader.fail("results file has no rows");
    return out;
}

/// Reads the confusion sidecar into the matching rows of `results` (matched by factor tuple).
inline void read_confusion_csv(std::istream& in, const std::string& source, std::vector<ExperimentResult>& results) {
    using Key = std::tuple<Strategy, int, int, ClassifierKind, std::string, int>;
    std::map<Key, ExperimentResult*> index;
    for (auto& r : results) index[{r.strategy, r.k, r.segment_min, r.classifier, r.subject, r.rep}] = &r;
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line) || text::trim(line) != kConfusionHeader) reader.fail("unexpected confusion header");
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 14) reader.fail("expected 14 fields");
        auto st = parse_strategy(text::trim(f[0]));
        auto k = text::parse_number<int>(f[1]);
        auto seg = text::parse_number<int>(f[2]);
        auto kind = parse_classifier_kind(text::trim(f[3]));
        auto rep = text::parse_number<int>(f[5]);
        auto label = parse_label(text::trim(f[6]));
        if (!st || !k || !seg || !kind || !rep || !label) reader.fail("malformed confusion row");
        auto it = index.find({*st, *k, *seg, *kind, std::string(text::trim(f[4])), *rep});
        if (it == index.end()) continue;
        for (std::size_t p = 0; p < kLabelCount; ++p) {
            auto v = text::parse_number<std::size_t>(f[7 + p]);
            if (!v) reader.fail("malformed count");
            it->second->confusion[static_cast<std::size_t>(index_of(*label))][p] = *v;
        }
    }
}

}  // namespace bpdhar
