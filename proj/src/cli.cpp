#include "saasqual/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "saasqual/dataset.hpp"
#include "saasqual/error.hpp"
#include "saasqual/evaluation.hpp"
#include "saasqual/model_selection.hpp"
#include "saasqual/persistence.hpp"
#include "saasqual/testkit.hpp"

namespace saasqual::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorKind::Io, "failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot move output into '" + path + "'");
    }
}

/// Options shared by the fitting subcommands.
struct FitFlags {
    std::string input;
    std::string unit = "offerings";
    int clusters = 0;
    bool auto_k = false;
    int k_min = 1;
    int k_max = 10;
    double tol = 1e-6;
    int max_iters = 500;
    int restarts = 8;
    std::string covariance = "diag";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;
};

void add_input(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--input", f.input, "Feedback CSV")->required();
    cmd->add_option("--unit", f.unit, "Clustering unit: offerings|records")
        ->check(CLI::IsMember({"offerings", "records"}));
}

void add_fit_options(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--tol", f.tol, "Relative log-likelihood tolerance");
    cmd->add_option("--max-iters", f.max_iters, "Iteration cap per EM run");
    cmd->add_option("--restarts", f.restarts, "Independent EM runs per fit");
    cmd->add_option("--covariance", f.covariance, "Covariance structure: diag|full")
        ->check(CLI::IsMember({"diag", "diagonal", "full"}));
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--threads", f.threads, "Worker threads for restarts");
    cmd->add_option("--out", f.out, "Output file (default: standard output)");
}

void add_range_options(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--k-min", f.k_min, "Smallest cluster count in the sweep");
    cmd->add_option("--k-max", f.k_max, "Largest cluster count in the sweep (clamped to n-1)");
}

FitConfig fit_config(const FitFlags& f, bool seed_required = true) {
    if (seed_required && !f.seed) {
        throw UsageError("--seed is required");
    }
    FitConfig c;
    c.num_clusters = 1;
    c.tolerance = f.tol;
    c.max_iterations = f.max_iters;
    c.seed = f.seed.value_or(0);
    c.covariance_kind = parse_covariance_kind(f.covariance);
    c.restarts = f.restarts;
    c.threads = f.threads;
    c.validate();
    return c;
}

void check_range(const FitFlags& f) {
    if (f.k_min < 1 || f.k_min > f.k_max) {
        throw UsageError("cluster range must satisfy 1 <= --k-min <= --k-max");
    }
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
    } else {
        write_atomic(path, content);
    }
}

std::vector<FeedbackRecord> load_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    }
    auto records = parse_feedback_csv(in);
    if (records.empty()) {
        throw Error(ErrorKind::EmptyInput, "'" + path + "' contains no feedback rows");
    }
    return records;
}

DataMatrix load_matrix(const FitFlags& f, const std::vector<FeedbackRecord>& records) {
    return parse_unit(f.unit) == Unit::Offerings ? to_matrix(aggregate_by_offering(records)) : to_matrix(records);
}

RatingVector parse_weights(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw UsageError("--weights entry '" + part + "' is not a number");
        }
    }
    if (values.size() != kFeatureCount) {
        throw UsageError("--weights needs six comma-separated values (r,a,s,p,c,d)");
    }
    return Eigen::Map<const RatingVector>(values.data());
}

std::string labels_path_for(const std::string& csv_path) {
    fs::path p(csv_path);
    const auto stem = p.stem().string();
    return (p.parent_path() / (stem + ".labels.csv")).string();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quality evaluation of SaaS offerings from user feedback ratings", "saasqual"};
    app.require_subcommand(1);
    app.fallthrough(false);

    FitFlags flags;
    std::string format = "table";
    std::string model_in;
    std::string model_out;
    std::string weights_text = "1,1,1,1,1,1";
    int top = 10;
    std::string scenario;
    int synth_clusters = 0;
    double separation = 4.0;
    double sigma = 0.3;
    int points = 20;
    std::string labels_out;

    auto* validate = app.add_subcommand("validate", "Check a feedback CSV and summarize it");
    validate->add_option("--input", flags.input, "Feedback CSV")->required();

    auto* fit = app.add_subcommand("fit", "Fit a mixture with a fixed number of clusters");
    add_input(fit, flags);
    fit->add_option("--clusters", flags.clusters, "Number of clusters M")->required();
    add_fit_options(fit, flags);

    auto* sweep = app.add_subcommand("sweep", "Fit a range of cluster counts and score them by BIC");
    add_input(sweep, flags);
    add_range_options(sweep, flags);
    add_fit_options(sweep, flags);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Cluster, tier and report on offerings");
    add_input(evaluate_cmd, flags);
    auto* clusters_opt = evaluate_cmd->add_option("--clusters", flags.clusters, "Fixed number of clusters M");
    auto* auto_opt = evaluate_cmd->add_flag("--auto-k", flags.auto_k, "Choose M by BIC (default)");
    clusters_opt->excludes(auto_opt);
    add_range_options(evaluate_cmd, flags);
    add_fit_options(evaluate_cmd, flags);
    evaluate_cmd->add_option("--model-out", model_out, "Also write the fitted model JSON here");
    auto* model_opt = evaluate_cmd->add_option("--model", model_in, "Report on a persisted model instead of fitting");
    model_opt->excludes(clusters_opt)->excludes(auto_opt);
    evaluate_cmd->add_option("--format", format, "Standard output rendering: table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* recommend_cmd = app.add_subcommand("recommend", "Rank offerings of a report by weighted ratings");
    recommend_cmd->add_option("--input", flags.input, "Report JSON produced by evaluate")->required();
    recommend_cmd->add_option("--weights", weights_text, "Six weights r,a,s,p,c,d");
    recommend_cmd->add_option("--top", top, "Number of offerings to list");
    recommend_cmd->add_option("--out", flags.out, "Write the recommendation JSON here");
    recommend_cmd->add_option("--format", format, "Standard output rendering: table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* synth = app.add_subcommand("synth", "Generate feedback with planted clusters");
    auto* scenario_opt = synth->add_option("--scenario", scenario, "Catalog scenario name");
    auto* k_opt = synth->add_option("--clusters", synth_clusters, "Planted tiers (explicit spec)");
    synth->add_option("--separation", separation, "Separation between tier means (explicit spec)");
    synth->add_option("--sigma", sigma, "Noise standard deviation (explicit spec)");
    synth->add_option("--points", points, "Points per cluster");
    synth->add_option("--seed", flags.seed, "Random seed");
    synth->add_option("--out", flags.out, "Feedback CSV output (default: standard output)");
    synth->add_option("--labels-out", labels_out, "Labels CSV (default: <out stem>.labels.csv)");
    scenario_opt->excludes(k_opt);

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("saasqual");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (validate->parsed()) {
            const auto records = load_records(flags.input);
            const auto profiles = aggregate_by_offering(records);
            out << "ok: " << records.size() << " records, " << profiles.size() << " offerings\n";
            return kSuccess;
        }

        if (fit->parsed()) {
            if (flags.clusters < 1) throw UsageError("--clusters must be >= 1 (M is a positive cluster count)");
            auto config = fit_config(flags);
            config.num_clusters = flags.clusters;
            const auto records = load_records(flags.input);
            const auto matrix = load_matrix(flags, records);
            const auto result = fit_em(matrix.values(), config);
            emit(flags.out, dump_document(model_to_json(to_fitted_model(result, config))), out);
            return kSuccess;
        }

        if (sweep->parsed()) {
            check_range(flags);
            const auto config = fit_config(flags);
            const auto records = load_records(flags.input);
            const auto matrix = load_matrix(flags, records);
            const auto result = sweep_k(matrix.values(), SweepConfig{flags.k_min, flags.k_max, config});
            emit(flags.out, dump_document(sweep_to_json(result)), out);
            return kSuccess;
        }

        if (evaluate_cmd->parsed()) {
            const auto records = load_records(flags.input);
            const Unit unit = parse_unit(flags.unit);
            EvaluationReport report;
            if (!model_in.empty()) {
                report = build_report(records, unit, model_from_json(parse_document(read_file(model_in))));
            } else {
                if (clusters_opt->count() > 0 && flags.clusters < 1) {
                    throw UsageError("--clusters must be >= 1 (M is a positive cluster count)");
                }
                check_range(flags);
                EvaluationConfig config;
                config.unit = unit;
                config.fit = fit_config(flags);
                config.k_min = flags.k_min;
                config.k_max = flags.k_max;
                if (clusters_opt->count() > 0) config.clusters = flags.clusters;
                report = evaluate(records, config);
            }
            const auto doc = report_to_json(report);
            if (!model_out.empty()) write_atomic(model_out, dump_document(model_to_json(report.mixture)));
            if (!flags.out.empty()) write_atomic(flags.out, dump_document(doc));
            if (format == "json") {
                if (flags.out.empty()) out << dump_document(doc);
            } else {
                out << render_report_table(report);
            }
            return kSuccess;
        }

        if (recommend_cmd->parsed()) {
            const FeatureWeights weights(parse_weights(weights_text));
            if (top < 1) throw UsageError("--top must be >= 1");
            const auto report = report_from_json(parse_document(read_file(flags.input)));
            const auto recs = recommend(report, weights, top);
            const auto doc = recommendations_to_json(recs);
            if (!flags.out.empty()) write_atomic(flags.out, dump_document(doc));
            if (format == "json") {
                if (flags.out.empty()) out << dump_document(doc);
            } else {
                out << render_recommendations_table(recs);
            }
            return kSuccess;
        }

        if (synth->parsed()) {
            if (!flags.seed) throw UsageError("--seed is required");
            testkit::PlantedSpec spec;
            if (!scenario.empty()) {
                auto found = testkit::find_scenario(scenario);
                if (!found) throw UsageError("unknown scenario '" + scenario + "'");
                spec = *found;
                if (synth->count("--points") > 0) spec.points_per_cluster = points;
            } else {
                if (synth_clusters < 1) throw UsageError("synth needs --scenario or --clusters K");
                spec.name = "custom";
                spec.num_clusters = synth_clusters;
                spec.points_per_cluster = points;
                spec.sigma = sigma;
                spec.cluster_means = testkit::tier_means(synth_clusters, separation);
            }
            spec.seed = *flags.seed;
            const auto data = testkit::generate_planted(spec);
            const auto csv = format_feedback_csv(testkit::to_feedback_records(data));
            const auto labels = testkit::format_labels_csv(data);
            if (flags.out.empty()) {
                if (labels_out.empty()) throw UsageError("--labels-out is required when writing to standard output");
                write_atomic(labels_out, labels);
                out << csv;
            } else {
                write_atomic(flags.out, csv);
                write_atomic(labels_out.empty() ? labels_path_for(flags.out) : labels_out, labels);
            }
            return kSuccess;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        switch (e.category()) {
            case ErrorCategory::Usage: return kUsage;
            case ErrorCategory::Data: return kDataError;
            case ErrorCategory::Numeric: return kNumericError;
        }
    }
    return kUsage;
}

}  // namespace saasqual::cli
