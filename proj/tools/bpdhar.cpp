// bpdhar: command-line front end.
//
//   bpdhar synth      --spec spec.json --out data/
//   bpdhar featurize  --data data/ --out features/
//   bpdhar cluster    --data data/ --out bpd/
//   bpdhar experiment --data data/ --out results/
//   bpdhar report     --results results/results.csv --out plots/
//
// Every subcommand also takes --config FILE (key=value), --seed, --jobs and
// repeated --set key=value. Flags override the config file.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <bpdhar/bpdhar.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bpdhar;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Flags {
    std::string config;
    std::string out;
    std::string data;
    std::string spec;
    std::string results;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::vector<std::string> overrides;
};

class Log {
public:
    explicit Log(const std::string& level) : level_(level == "quiet" ? 0 : level == "debug" ? 2 : 1) {}
    void info(const std::string& msg) const {
        if (level_ >= 1) std::cerr << msg << '\n';
    }
    void debug(const std::string& msg) const {
        if (level_ >= 2) std::cerr << msg << '\n';
    }
    void warn(const std::string& msg) const { std::cerr << "warning: " << msg << '\n'; }

private:
    int level_;
};

RunConfig resolve_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    for (const auto& kv : f.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_value(c, text::trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
    }
    if (!f.out.empty()) c.out_dir = f.out;
    if (!f.data.empty()) c.data_dir = f.data;
    if (!f.spec.empty()) c.synth_spec = f.spec;
    if (!f.results.empty()) c.results = f.results;
    if (f.seed) c.seed = *f.seed;
    if (f.jobs) apply_config_value(c, "jobs", std::to_string(*f.jobs));
    if (c.seed) c.grid.master_seed = *c.seed;
    return c;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ValidationError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void copy_config(const RunConfig& c) { write_file(c.out_dir / "run.cfg", to_config_text(c)); }

std::vector<std::string> resolve_subjects(const RunConfig& c) {
    if (!fs::is_directory(c.data_dir)) throw ConfigError("data directory " + c.data_dir.string() + " does not exist");
    auto subjects = c.grid.subjects.empty() ? discover_subjects(c.data_dir) : c.grid.subjects;
    if (subjects.empty()) throw ValidationError("no recordings found in " + c.data_dir.string());
    return subjects;
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& c, const Log& log) {
    if (c.synth_spec.empty()) throw ConfigError("synth needs a synthesis spec (--spec or synth_spec=)");
    SynthesisSpec spec;
    try {
        spec = load_synthesis_spec(c.synth_spec);
        if (c.seed) spec.seed = *c.seed;
        validate(spec);
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid synthesis spec: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("invalid synthesis spec: ") + e.what());
    }
    ensure_dir(c.out_dir);
    parallel_for(spec.subjects.size(), c.jobs, [&](std::size_t i) {
        const auto& subject = spec.subjects[i];
        auto synthetic = generate_synthetic_recording(subject, spec);
        save_recording(c.out_dir, synthetic.recording);
        std::ofstream truth(RecordingPaths::in(c.out_dir, subject.subject_id).ground_truth, std::ios::binary);
        write_ground_truth_csv(truth, synthetic.ground_truth);
        if (!truth) throw ValidationError("failed writing ground truth for " + subject.subject_id);
    });
    copy_config(c);
    log.info("wrote " + std::to_string(spec.subjects.size()) + " synthetic recordings to " + c.out_dir.string());
    return 0;
}

int cmd_featurize(const RunConfig& c, const Log& log) {
    check_segment_minutes(c.segment_minutes);
    (void)c.grid.window.stride_seconds();
    const auto subjects = resolve_subjects(c);
    ensure_dir(c.out_dir);
    for (const auto& id : subjects) {
        const auto r = load_recording(c.data_dir, id);
        const auto f = featurize_recording(r, c.grid.window, c.segment_minutes, c.jobs);
        std::ofstream out(c.out_dir / (id + ".features.csv"), std::ios::binary);
        write_feature_csv(out, f.features);
        log.info(id + ": " + std::to_string(f.features.size()) + " windows, " + std::to_string(f.dropped_windows) +
                 " dropped at gaps, " + std::to_string(f.unlabeled_windows) + " unlabeled");
    }
    copy_config(c);
    return 0;
}

int cmd_cluster(const RunConfig& c, const Log& log) {
    check_segment_minutes(c.segment_minutes);
    if (c.cluster_k < 1) throw ConfigError("cluster_k must be positive");
    const auto subjects = resolve_subjects(c);
    ensure_dir(c.out_dir);
    for (const auto& id : subjects) {
        const auto r = load_recording(c.data_dir, id);
        SubjectData s;
        s.subject_id = id;
        s.annotations = r.annotations;
        s.days = r.days();
        BpdModel model;
        try {
            model = build_bpd_model(s, c.cluster_strategy, c.cluster_k, c.segment_minutes, c.grid.master_seed);
        } catch (const ArgumentError& e) {
            throw ValidationError(id + ": " + e.what());
        }
        std::ofstream a(c.out_dir / (id + ".bpd_assignment.csv"), std::ios::binary);
        write_bpd_assignment_csv(a, model);
        if (model.strategy == Strategy::kmeans) {
            std::ofstream cen(c.out_dir / (id + ".bpd_centroids.csv"), std::ios::binary);
            write_bpd_centroid_csv(cen, model);
            log.info(id + ": " + std::to_string(model.assignment.size()) + " segments, SSE " +
                     text::format_fixed(model.sse, 6));
        }
    }
    copy_config(c);
    return 0;
}

int cmd_experiment(RunConfig c, const Log& log) {
    c.grid.subjects = resolve_subjects(c);
    ExperimentGrid grid;
    try {
        grid = canonical(c.grid);
        for (int k : grid.ks)
            if (k > kSlotsPerDay) throw ValidationError("k = " + std::to_string(k) + " exceeds 120");
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    ensure_dir(c.out_dir);

    std::vector<SubjectData> data;
    std::map<std::string, LabelCounts> distribution;
    for (const auto& id : grid.subjects) {
        log.info("featurizing " + id);
        const auto r = load_recording(c.data_dir, id);
        data.push_back(prepare_subject(r, grid.window, c.jobs));
        distribution[id] = report::annotation_counts(r.annotations);
    }

    const auto expected = expected_row_count(grid);
    log.info("running " + std::to_string(expected) + " rows");
    const fs::path results_path = c.out_dir / "results.csv";
    const fs::path partial = c.out_dir / "results.csv.partial";
    std::vector<ExperimentResult> results;
    {
        std::ofstream out(partial, std::ios::binary);
        out << kResultsHeader << '\n';
        std::size_t done = 0;
        results = run_grid(
            grid, data,
            [&](const ExperimentResult& r) {
                out << format_result_row(r) << '\n';
                if (++done % 500 == 0) {
                    out.flush();
                    log.info(std::to_string(done) + " / " + std::to_string(expected) + " rows");
                }
            },
            c.jobs);
        if (!out.flush()) throw ValidationError("failed writing " + partial.string());
    }
    fs::rename(partial, results_path);

    {
        std::ofstream out(c.out_dir / "confusion.csv", std::ios::binary);
        out << kConfusionHeader << '\n';
        for (const auto& r : results) out << format_confusion_rows(r);
    }
    const auto matched = matched_points(results);
    for (const auto& w : matched.warnings) log.warn(w);
    {
        std::ofstream out(c.out_dir / "summary.csv", std::ios::binary);
        write_summary_csv(out, matched);
    }
    {
        std::ofstream out(c.out_dir / "summary_by_subject.csv", std::ios::binary);
        write_subject_summary_csv(out, matched);
    }
    {
        std::ofstream out(c.out_dir / "annotation_distribution.csv", std::ios::binary);
        report::write_annotation_distribution_csv(out, distribution);
    }

    nlohmann::json meta;
    meta["rows"] = results.size();
    meta["master_seed"] = grid.master_seed;
    meta["subjects"] = grid.subjects;
    meta["repetitions"] = grid.repetitions;
    meta["train_fraction"] = grid.train_fraction;
    meta["bpd_source"] =
        "BPD models are fit on the full subject data before the train/test split; the test windows' BPD is "
        "treated as known (oracle BPD)";
    meta["fallback"] = "windows whose BPD has no classifier are predicted as the modal training label";
    std::size_t fallbacks = 0;
    for (const auto& r : results) fallbacks += r.n_fallback;
    meta["fallback_predictions"] = fallbacks;
    meta["warnings"] = matched.warnings;
    write_file(c.out_dir / "metadata.json", meta.dump(2) + "\n");
    copy_config(c);

    for (const auto& p : matched.points)
        log.info(std::string(name_of(p.classifier)) + " k=" + std::to_string(p.k) +
                 ": kmeans " + text::format_fixed(p.f1_kmeans_mean, 4) + " vs time_based " +
                 text::format_fixed(p.f1_time_mean, 4));
    return 0;
}

int cmd_report(const RunConfig& c, const Log& log) {
    const fs::path results_path = c.results.empty() ? c.data_dir / "results.csv" : c.results;
    std::ifstream in(results_path);
    if (!in) throw ValidationError("cannot open results file " + results_path.string());
    auto results = read_results_csv(in, results_path.string());
    const fs::path dir = results_path.parent_path();
    if (std::ifstream conf(dir / "confusion.csv"); conf)
        read_confusion_csv(conf, (dir / "confusion.csv").string(), results);
    ensure_dir(c.out_dir);

    const auto cells = summarize(results);
    const auto matched = matched_points(results);
    for (const auto& chart : report::f1_charts(cells, matched))
        write_file(c.out_dir / ("f1_vs_k_" + std::string(name_of(chart.classifier)) + ".svg"),
                   report::render_line_chart(chart.chart));

    const auto cell = report::select_cell(cells, c.confusion.strategy, c.confusion.k, c.confusion.segment_min,
                                          c.confusion.classifier);
    if (!cell) throw ConfigError("no results match the selected confusion cell");
    write_file(c.out_dir / "confusion.svg",
               report::render_confusion_heatmap(report::cell_confusion(results, *cell),
                                                "Confusion matrix, " + report::describe(*cell)));

    if (std::ifstream dist(dir / "annotation_distribution.csv"); dist) {
        const auto counts = report::read_annotation_distribution_csv(dist, (dir / "annotation_distribution.csv").string());
        write_file(c.out_dir / "annotation_distribution.svg", report::render_annotation_distribution(counts));
    } else {
        log.warn("no annotation_distribution.csv next to the results; skipping that chart");
    }

    std::ostringstream table;
    report::write_text_report(table, cells, matched);
    write_file(c.out_dir / "report.txt", table.str());
    log.info("wrote report for " + std::to_string(results.size()) + " rows to " + c.out_dir.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral predisposition extraction and activity-recognition experiments"};
    app.require_subcommand(1);
    Flags flags;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key=value configuration file");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "master seed");
        sub->add_option("--jobs", flags.jobs, "worker threads (0 = all cores)");
        sub->add_option("--set", flags.overrides, "override a configuration key (key=value)");
        return sub;
    };
    auto* synth = add_common(app.add_subcommand("synth", "generate a synthetic dataset"));
    synth->add_option("--spec", flags.spec, "synthesis spec JSON");
    auto* featurize = add_common(app.add_subcommand("featurize", "window and featurize recordings"));
    auto* cluster = add_common(app.add_subcommand("cluster", "fit BPD models"));
    auto* experiment = add_common(app.add_subcommand("experiment", "run the factorial experiment"));
    auto* report = add_common(app.add_subcommand("report", "render tables and SVG charts"));
    report->add_option("--results", flags.results, "results CSV");
    for (auto* sub : {featurize, cluster, experiment}) sub->add_option("--data", flags.data, "dataset directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const RunConfig config = resolve_config(flags);
        const Log log(config.log_level);
        if (*synth) return cmd_synth(config, log);
        if (*featurize) return cmd_featurize(config, log);
        if (*cluster) return cmd_cluster(config, log);
        if (*experiment) return cmd_experiment(config, log);
        if (*report) return cmd_report(config, log);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ArgumentError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
