// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//
// Tolerances are pinned here and printed with each line.

#include "support.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace bpdhar;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

int failures = 0;

void emit(int id, const std::string& title, const Outcome& o) {
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title;
    if (!o.detail.empty()) std::cout << "  [" << o.detail << "]";
    std::cout << std::endl;
    failures += !o.pass;
}

std::string fmt(double v, int digits = 4) { return text::format_fixed(v, digits); }

// ---------------------------------------------------------------------------

Outcome oracle_kmeans() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> size(4, 12), clusters(1, 3);
    int optimal = 0;
    bool monotone = true;
    for (int instance = 0; instance < 100; ++instance) {
        const auto pts = support::random_histograms(gen, static_cast<std::size_t>(size(gen)));
        const int k = std::min<int>(clusters(gen), static_cast<int>(pts.size()));
        const auto r = kmeans<kLabelCount>(std::span<const LabelProbs>(pts), k, 1000 + instance);
        if (r.best.sse <= support::brute_force_min_sse(pts, k) + 1e-9) ++optimal;
        for (const auto& trace : r.restart_traces)
            for (std::size_t i = 1; i < trace.size(); ++i) monotone &= trace[i] <= trace[i - 1] + 1e-12;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.require(optimal >= 95, "optimal in " + std::to_string(optimal) + "/100");
    o.require(monotone, "an SSE trace increased");
    o.require(secs < 10.0, "took " + fmt(secs, 1) + " s");
    if (o.pass) o.detail = "optimal " + std::to_string(optimal) + "/100 (need 95), traces monotone, " + fmt(secs, 2) + " s";
    return o;
}

Outcome cluster_recovery() {
    const auto t0 = Clock::now();
    const std::vector<RegimeSpec> regimes = {{0, one_hot(Label::apathy), 1.0},
                                             {1, one_hot(Label::pacing), 1.0},
                                             {2, one_hot(Label::aggression), 1.0},
                                             {3, one_hot(Label::normal), 1.0}};
    const std::vector<ScheduleEntry> schedule = {{480, 630, 0}, {630, 780, 1}, {780, 930, 2}, {930, 1080, 3}};
    int perfect = 0;
    double worst = 1.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = generate_synthetic_recording(regimes, schedule, 20, seed, "S01", false);
        const auto hist = build_histograms(segment_day(s.recording, 30), s.recording.annotations);
        const auto model = kmeans_cluster(hist, 4, derive_seed(seed, "recovery"), 30);
        std::map<SegmentKey, int> truth;
        for (const auto& g : s.ground_truth) truth[{g.day, segment_start(g.start_minute, 30)}] = g.regime_id;
        std::vector<int> found, expected;
        for (const auto& h : hist) {
            found.push_back(model.assignment.at(h.segment));
            expected.push_back(truth.at(h.segment));
        }
        const double ari = adjusted_rand_index(found, expected);
        worst = std::min(worst, ari);
        perfect += ari == 1.0;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.require(perfect == 10, "ARI = 1 for " + std::to_string(perfect) + "/10 seeds, worst " + fmt(worst));
    o.require(secs < 30.0, "took " + fmt(secs, 1) + " s");
    if (o.pass) o.detail = "ARI = 1.0 for 10/10 seeds, " + fmt(secs, 2) + " s";
    return o;
}

// ---------------------------------------------------------------------------
// Default synthetic dataset, shared by criteria 3, 4, 5 and 7.

struct Dataset {
    SynthesisSpec spec;
    std::vector<SubjectData> subjects;
    double prep_seconds = 0.0;
};

Dataset prepare_default_dataset() {
    const auto t0 = Clock::now();
    Dataset d;
    d.spec = load_synthesis_spec(fs::path(BPDHAR_SOURCE_DIR) / "config" / "default_synth.json");
    d.subjects.resize(d.spec.subjects.size());
    parallel_for(d.spec.subjects.size(), default_jobs(), [&](std::size_t i) {
        const auto& subject = d.spec.subjects[i];
        auto& s = d.subjects[i];
        s.subject_id = subject.subject_id;
        // Day by day keeps the raw signal of only one day in memory.
        for (int day = 0; day < d.spec.n_days; ++day) {
            const auto syn = generate_synthetic_day(subject, d.spec, day);
            const auto f = featurize_recording(syn.recording, WindowSpec{}, kSlotMinutes);
            s.annotations.insert(s.annotations.end(), syn.recording.annotations.begin(), syn.recording.annotations.end());
            for (const Date dd : syn.recording.days()) s.days.push_back(dd);
            s.features.insert(s.features.end(), f.features.begin(), f.features.end());
        }
    });
    d.prep_seconds = seconds_since(t0);
    return d;
}

ExperimentGrid trend_grid(const Dataset& d) {
    ExperimentGrid g;
    g.ks = {1, 2, 3, 4, 5, 10, 20};
    g.segment_lengths_min = {30, 60, 120};
    g.repetitions = 10;
    for (const auto& s : d.subjects) g.subjects.push_back(s.subject_id);
    return g;
}

Outcome baseline_identity(std::span<const ExperimentResult> rows) {
    std::map<std::tuple<ClassifierKind, std::string, int>, std::vector<double>> k1;
    for (const auto& r : rows)
        if (r.k == 1) k1[{r.classifier, r.subject, r.rep}].push_back(r.f1_macro);
    std::size_t compared = 0, mismatched = 0;
    std::set<int> reps;
    std::set<ClassifierKind> kinds;
    for (const auto& [key, values] : k1) {
        reps.insert(std::get<2>(key));
        kinds.insert(std::get<0>(key));
        for (double v : values) {
            ++compared;
            mismatched += v != values.front();
        }
    }
    Outcome o;
    o.require(kinds.size() == 3, "classifiers covered: " + std::to_string(kinds.size()));
    o.require(reps.size() == 10, "repetitions covered: " + std::to_string(reps.size()));
    o.require(mismatched == 0, std::to_string(mismatched) + " k=1 rows differ");
    if (o.pass)
        o.detail = std::to_string(compared) + " k=1 rows (3 k-means lengths + time_based) x 3 classifiers x 10 reps, exact equality";
    return o;
}

Outcome trend(std::span<const ExperimentResult> rows, const Dataset& d, double secs) {
    Outcome o;
    const auto cells = summarize(rows);
    std::map<int, double> majority;
    for (const auto& c : cells)
        if (c.strategy == Strategy::kmeans && c.segment_min == 30 && c.classifier == ClassifierKind::majority)
            majority[c.k] = c.mean_f1;
    const int regimes = static_cast<int>(d.spec.subjects.front().regimes.size());
    std::string curve;
    for (int k = 1; k <= regimes; ++k) {
        curve += (k > 1 ? ", " : "") + fmt(majority.at(k));
        if (k > 1) o.require(majority.at(k) > majority.at(k - 1), "majority F1 not increasing at k=" + std::to_string(k));
    }
    double max_conc = 0.0;
    for (const auto& s : d.spec.subjects)
        for (const auto& r : s.regimes) max_conc = std::max(max_conc, r.dirichlet_concentration);
    o.require(max_conc <= 5.0, "concentration " + fmt(max_conc, 2) + " > 5");

    const auto matched = matched_points(rows);
    std::string deltas;
    for (const auto& p : matched.points) {
        if (p.k != 5 && p.k != 10 && p.k != 20) continue;
        deltas += " " + std::string(name_of(p.classifier)) + "@" + std::to_string(p.k) + "=" + (p.delta >= 0 ? "+" : "") +
                  fmt(p.delta);
        if (!(p.delta > 0)) o.require(false, std::string(name_of(p.classifier)) + " k=" + std::to_string(p.k) + " delta " + fmt(p.delta));
    }
    std::size_t points = 0;
    for (const auto& p : matched.points) points += p.k == 5 || p.k == 10 || p.k == 20;
    o.require(points == 9, "matched points found: " + std::to_string(points));
    o.require(secs < 900.0, "took " + fmt(secs, 0) + " s");
    const std::string summary = "majority@30min " + curve + "; kmeans-time_based:" + deltas + "; " + fmt(secs, 0) + " s";
    o.detail = o.pass ? summary : o.detail + "; " + summary;
    return o;
}

Outcome single_class_bpds(const Dataset& d) {
    Outcome o;
    std::size_t bpds = 0, windows = 0, wrong = 0;
    for (const auto& s : d.subjects) {
        const auto m = detail::to_matrix(s);
        for (Strategy st : {Strategy::kmeans, Strategy::time_based}) {
            const auto model = build_bpd_model(s, st, 20, 30, 1);
            auto tagged = s.features;
            retag_segments(tagged, st == Strategy::kmeans ? 30 : kSlotMinutes, 60);
            const auto labels = label_windows(model, tagged);
            for (int rep = 0; rep < 10; ++rep) {
                const auto [train_pos, test_pos] = split_train_test(labels.kept.size(), 0.7, split_seed(1, s.subject_id, rep));
                std::vector<std::size_t> rows;
                std::vector<Label> y;
                std::vector<int> bpd;
                std::map<int, std::set<Label>> seen;
                for (auto p : train_pos) {
                    rows.push_back(labels.kept[p]);
                    y.push_back(m.y[labels.kept[p]]);
                    bpd.push_back(labels.bpd[p]);
                    seen[labels.bpd[p]].insert(y.back());
                }
                const auto x = gather_rows(m.x, rows);
                for (auto kind : kAllClassifierKinds) {
                    const auto bank = train_bank(kind, x, y, bpd, train_seed(1, s.subject_id, kind, rep));
                    for (const auto& [b, classes] : seen) {
                        if (classes.size() != 1) continue;
                        ++bpds;
                        const Label only = *classes.begin();
                        for (auto p : test_pos) {
                            const auto r = labels.kept[p];
                            if (labels.bpd[p] != b || m.y[r] != only) continue;
                            ++windows;
                            wrong += bank.predict(m.x.row(r), b) != only;
                        }
                    }
                }
            }
        }
    }
    // Constructed case: every BPD is single-class.
    const auto syn = generate_synthetic_recording({{0, one_hot(Label::apathy), 1.0}, {1, one_hot(Label::pacing), 1.0}},
                                                  {{480, 780, 0}, {780, 1080, 1}}, 3, 7, "T01", false);
    const std::vector<SubjectData> toy = {support::feature_subject(syn.recording, 7)};
    ExperimentGrid g;
    g.strategies = {Strategy::kmeans};
    g.ks = {2};
    g.segment_lengths_min = {30};
    g.subjects = {"T01"};
    std::size_t toy_rows = 0, toy_perfect = 0;
    for (const auto& r : run_grid(g, toy)) {
        ++toy_rows;
        toy_perfect += r.f1_macro == 1.0;
    }
    o.require(wrong == 0, std::to_string(wrong) + " of " + std::to_string(windows) + " windows mispredicted");
    o.require(windows > 0, "no single-class BPD test windows in the default dataset");
    o.require(toy_perfect == toy_rows, "constructed case: " + std::to_string(toy_perfect) + "/" + std::to_string(toy_rows));
    if (o.pass)
        o.detail = std::to_string(bpds) + " single-class partitions, " + std::to_string(windows) +
                   " matching test windows all correct (3 classifiers); constructed case " + std::to_string(toy_rows) +
                   "/" + std::to_string(toy_rows) + " rows at F1 = 1";
    return o;
}

ConfusionMatrix cm(std::initializer_list<std::pair<Label, Label>> p) {
    const std::vector<std::pair<Label, Label>> v(p);
    return confusion_matrix(v);
}

Outcome metric_oracles() {
    Outcome o;
    using L = Label;
    constexpr auto A = L::apathy, B = L::restlessness, C = L::mannerisms;
    struct Case {
        ConfusionMatrix got;
        std::vector<std::tuple<L, L, std::size_t>> cells;  // expected non-zero cells
        double macro;
    };
    const std::vector<Case> cases = {
        {cm({{A, A}, {B, B}}), {{A, A, 1}, {B, B, 1}}, 1.0},
        {cm({{A, A}, {A, B}, {B, B}, {B, B}}), {{A, A, 1}, {A, B, 1}, {B, B, 2}}, (2.0 / 3.0 + 0.8) / 2.0},
        {cm({{A, A}, {B, C}}), {{A, A, 1}, {B, C, 1}}, 0.5},
        {cm({{A, B}, {A, B}}), {{A, B, 2}}, 0.0},
        {cm({{A, A}, {A, A}, {A, B}, {B, B}, {B, C}, {C, C}}), {{A, A, 2}, {A, B, 1}, {B, B, 1}, {B, C, 1}, {C, C, 1}},
         (0.8 + 0.5 + 2.0 / 3.0) / 3.0},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        ConfusionMatrix want{};
        for (const auto& [t, p, n] : cases[i].cells)
            want[static_cast<std::size_t>(index_of(t))][static_cast<std::size_t>(index_of(p))] = n;
        o.require(cases[i].got == want, "confusion case " + std::to_string(i + 1));
        o.require(f1_macro(cases[i].got).macro == cases[i].macro, "F1 case " + std::to_string(i + 1));
    }

    std::vector<std::vector<double>> rows = {{0}, {2}, {4}, {6}};
    const auto nb = train(ClassifierKind::naive_bayes, Matrix::from_rows(rows),
                          std::vector<Label>{A, A, Label::pacing, Label::pacing}, 1);
    const double posterior = nb.posterior(std::vector<double>{2})[0];
    const double hand = 1.0 / (1.0 + std::exp(-4.0));
    o.require(std::abs(posterior - hand) <= 1e-9, "NB posterior " + text::format_double(posterior));

    const auto [x, y] = support::blobs(17);
    const auto svm = train(ClassifierKind::svm, x, y, 17);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.rows; ++i) hits += svm.predict(x.row(i)) == y[i];
    const double acc = static_cast<double>(hits) / static_cast<double>(x.rows);
    o.require(acc >= 0.99, "SVM training accuracy " + fmt(acc));
    if (o.pass)
        o.detail = "5/5 confusion and F1 cases exact; NB |p - 1/(1+e^-4)| = " +
                   text::format_double(std::abs(posterior - hand)) + " (tol 1e-9); SVM training accuracy " + fmt(acc);
    return o;
}

Outcome numerical_checks(const Dataset& d) {
    Outcome o;
    const auto day = generate_synthetic_day(d.spec.subjects.front(), d.spec, 0);
    const auto windows = window_signal(day.recording, WindowSpec{});
    double worst_parseval = 0.0;
    std::size_t spectra = 0;
    for (const auto& w : windows.windows) {
        const auto raw = view(day.recording, w);
        for (auto axis : {raw.x, raw.y, raw.z}) {
            for (const auto& signal : {std::vector<double>(axis.begin(), axis.end()), tapered_axis(axis)}) {
                const auto spec = power_spectrum(signal, day.recording.sample_rate_hz);
                double power = 0.0, energy = 0.0;
                for (double p : spec.power) power += p;
                for (double v : signal) energy += v * v;
                if (energy > 0) worst_parseval = std::max(worst_parseval, std::abs(power - energy) / energy);
                ++spectra;
            }
        }
    }
    double worst_hist = 0.0;
    std::size_t histograms = 0;
    for (const auto& s : d.subjects)
        for (int len : {5, 10, 15, 30, 60, 120})
            for (const auto& h : build_histograms(segments_of(s, len), s.annotations)) {
                double total = 0.0;
                for (double p : h.probs) total += p;
                worst_hist = std::max(worst_hist, std::abs(total - 1.0));
                ++histograms;
            }
    o.require(worst_parseval <= 1e-6, "Parseval relative error " + text::format_double(worst_parseval));
    o.require(worst_hist <= 1e-9, "histogram sum error " + text::format_double(worst_hist));
    o.require(spectra > 0 && histograms > 0, "nothing checked");
    if (o.pass)
        o.detail = "Parseval max rel. error " + text::format_double(worst_parseval) + " over " + std::to_string(spectra) +
                   " spectra (tol 1e-6); histogram |sum - 1| max " + text::format_double(worst_hist) + " over " +
                   std::to_string(histograms) + " histograms (tol 1e-9)";
    return o;
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(BPDHAR_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    Outcome o;
    const auto root = support::fresh_dir("acceptance_determinism");
    auto spec = default_synthesis_spec();
    spec.subjects.resize(2);
    spec.n_days = 1;
    std::ofstream(root / "spec.json") << to_json(spec).dump(2);
    std::ofstream(root / "grid.cfg") << "ks=1,2,5\nsegment_lengths=30,120\nrepetitions=2\nseed=11\n";
    const auto log = root / "log.txt";
    o.require(run_cli("synth --spec " + (root / "spec.json").string() + " --out " + (root / "data").string(), log) == 0,
              "synth failed");
    const std::vector<std::pair<std::string, int>> runs = {{"a", 1}, {"b", 1}, {"c", 4}};
    for (const auto& [name, jobs] : runs) {
        const auto out = root / name;
        o.require(run_cli("experiment --config " + (root / "grid.cfg").string() + " --data " + (root / "data").string() +
                              " --out " + out.string() + " --jobs " + std::to_string(jobs),
                          log) == 0,
                  "experiment " + name + " failed");
        o.require(run_cli("report --results " + (out / "results.csv").string() + " --out " + (out / "plots").string(),
                          log) == 0,
                  "report " + name + " failed");
    }
    std::vector<fs::path> compared = {"results.csv"};
    for (const auto& e : fs::directory_iterator(root / "a" / "plots"))
        if (e.path().extension() == ".svg") compared.push_back(fs::path("plots") / e.path().filename());
    std::sort(compared.begin(), compared.end());
    for (const auto& rel : compared) {
        const auto a = support::read_file(root / "a" / rel);
        for (const char* other : {"b", "c"})
            o.require(!a.empty() && a == support::read_file(root / other / rel),
                      rel.string() + " differs in run " + other);
    }
    o.require(compared.size() == 6, "expected 5 SVGs, found " + std::to_string(compared.size() - 1));
    if (o.pass)
        o.detail = "results.csv and " + std::to_string(compared.size() - 1) +
                   " SVGs byte-identical across 2 runs at --jobs 1 and 1 run at --jobs 4";
    return o;
}

}  // namespace

int main() {
    emit(1, "oracle k-means (100 instances, n <= 12, k <= 3)", oracle_kmeans());
    emit(2, "cluster recovery (4 one-hot regimes, 20 days, 30 min, k = 4)", cluster_recovery());

    std::cerr << "preparing the default 8-subject dataset..." << std::endl;
    const Dataset data = prepare_default_dataset();
    const auto t0 = Clock::now();
    const auto rows = run_grid(trend_grid(data), data.subjects, {}, default_jobs());
    const double trend_secs = data.prep_seconds + seconds_since(t0);

    emit(3, "baseline identity (k = 1 rows equal across strategies)", baseline_identity(rows));
    emit(4, "trend reproduction (default synthetic dataset)", trend(rows, data, trend_secs));
    emit(5, "single-class BPD property", single_class_bpds(data));
    emit(6, "metric oracles", metric_oracles());
    emit(7, "numerical checks (Parseval, histogram normalization)", numerical_checks(data));
    emit(8, "determinism (CLI rerun, parallelism)", determinism());

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
