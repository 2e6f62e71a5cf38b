#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qprec/config.hpp"
#include "qprec/ep.hpp"
#include "qprec/eval.hpp"
#include "qprec/oracles.hpp"
#include "qprec/sd.hpp"

namespace qprec {
namespace {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

struct CommonOpts {
    std::string config_path;
    std::string output_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool json = false;
    bool trace = false;
};

// Binds the flags shared by run and sweep; the returned option reports whether
// --seed was given so a file-supplied seed survives when it was not.
CLI::Option* add_common_options(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "Experiment config file");
    sub->add_option("--output", opts.output_path,
                    "Output file (standard output when omitted)");
    sub->add_option("--set", opts.overrides, "Override, key=value (repeatable)")
        ->take_all();
    sub->add_flag("--json", opts.json, "Emit JSON instead of CSV");
    sub->add_flag("--trace", opts.trace,
                  "Also write per-iteration convergence traces for trial 0");
    return sub->add_option("--seed", opts.seed, "Override the experiment seed");
}

ExperimentConfig build_config(const CommonOpts& opts, bool seed_given) {
    ExperimentConfig cfg = opts.config_path.empty() ? default_config()
                                                    : load_config_file(opts.config_path);
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got: " + kv);
        apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) cfg.seed = opts.seed;
    validate_config(cfg);
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << text;
}

constexpr const char* kCsvHeader =
    "scheme,snr_db,mean_sum_rate,std_error,trials,converged_fraction,"
    "mean_iterations\n";

void append_rows_csv(std::ostringstream& out, const std::vector<ResultRow>& rows) {
    for (const ResultRow& r : rows) {
        out << r.scheme << ',' << format_double(r.snr_db) << ','
            << format_double(r.mean_sum_rate) << ',' << format_double(r.std_error)
            << ',' << r.trials << ',' << format_double(r.converged_fraction) << ','
            << format_double(r.mean_iterations) << '\n';
    }
}

nlohmann::ordered_json rows_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ResultRow& r : rows) {
        arr.push_back({{"scheme", r.scheme},
                       {"snr_db", r.snr_db},
                       {"mean_sum_rate", r.mean_sum_rate},
                       {"std_error", r.std_error},
                       {"trials", r.trials},
                       {"converged_fraction", r.converged_fraction},
                       {"mean_iterations", r.mean_iterations}});
    }
    return arr;
}

void warn_failed_cells(const std::vector<ResultRow>& rows) {
    for (const ResultRow& r : rows) {
        const int total = r.trials + r.failed_trials;
        if (total > 0 && r.failed_trials * 100 > total)
            std::cerr << "warning: " << r.scheme << " at " << format_double(r.snr_db)
                      << " dB: " << r.failed_trials << "/" << total
                      << " trials failed\n";
    }
}

// results.csv -> results_trace_<scheme>_snr<value>.csv; bare trace files when
// writing to standard output. Dots and minus signs in the SNR value are
// replaced so the name stays filesystem friendly.
std::string trace_path_for(const std::string& output_path, const std::string& scheme,
                           double snr_db) {
    std::string stem = "trace";
    if (!output_path.empty()) {
        stem = output_path;
        const auto dot = stem.rfind('.');
        if (dot != std::string::npos && stem.find('/', dot) == std::string::npos)
            stem = stem.substr(0, dot);
        stem += "_trace";
    }
    std::string snr_txt = format_double(snr_db);
    for (char& ch : snr_txt) {
        if (ch == '.') ch = 'p';
        if (ch == '-') ch = 'm';
    }
    return stem + "_" + scheme + "_snr" + snr_txt + ".csv";
}

void write_traces(const ExperimentConfig& cfg, const std::string& output_path) {
    for (Scheme scheme : cfg.schemes) {
        for (double snr : cfg.snr_grid_db) {
            WmmseState st;
            simulate_trial(cfg, scheme, snr, 0, &st);
            std::ostringstream out;
            out << "iteration,objective,sum_rate\n";
            for (std::size_t i = 0; i < st.objective_trace.size(); ++i) {
                const double rate = i < st.rate_trace.size() ? st.rate_trace[i] : 0.0;
                out << (i + 1) << ',' << format_double(st.objective_trace[i]) << ','
                    << format_double(rate) << '\n';
            }
            write_text(trace_path_for(output_path, scheme_name(scheme), snr),
                       out.str());
        }
    }
}

int do_run(const CommonOpts& opts, bool seed_given) {
    const ExperimentConfig cfg = build_config(opts, seed_given);
    const std::vector<ResultRow> rows = run_experiment(cfg);
    warn_failed_cells(rows);
    if (opts.json) {
        write_text(opts.output_path, rows_to_json(rows).dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << kCsvHeader;
        append_rows_csv(out, rows);
        write_text(opts.output_path, out.str());
    }
    if (opts.trace) write_traces(cfg, opts.output_path);
    return 0;
}

struct GridAxis {
    std::string key;
    std::vector<std::string> values;
};

std::vector<GridAxis> parse_grid(const std::vector<std::string>& specs) {
    std::vector<GridAxis> axes;
    for (const std::string& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--grid expects key=v1,v2,..., got: " + spec);
        GridAxis axis;
        axis.key = spec.substr(0, eq);
        std::string item;
        std::istringstream in(spec.substr(eq + 1));
        while (std::getline(in, item, ','))
            if (!item.empty()) axis.values.push_back(item);
        if (axis.values.empty())
            throw ConfigError("--grid axis has no values: " + spec);
        axes.push_back(std::move(axis));
    }
    return axes;
}

std::string grid_suffix(const std::vector<std::pair<std::string, std::string>>& point) {
    std::string suffix;
    for (const auto& [key, value] : point) {
        std::string cleaned = key + value;
        for (char& ch : cleaned) {
            if (ch == '.') ch = 'p';
            if (ch == '-') ch = 'm';
        }
        suffix += "_" + cleaned;
    }
    return suffix;
}

std::string grid_output_path(const std::string& output_path, const std::string& suffix) {
    if (output_path.empty()) return "";
    const auto dot = output_path.rfind('.');
    if (dot != std::string::npos && output_path.find('/', dot) == std::string::npos)
        return output_path.substr(0, dot) + suffix + output_path.substr(dot);
    return output_path + suffix;
}

int do_sweep(const CommonOpts& opts, bool seed_given,
             const std::vector<std::string>& grid_specs) {
    const std::vector<GridAxis> axes = parse_grid(grid_specs);

    std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
    for (const GridAxis& axis : axes) {
        std::vector<std::vector<std::pair<std::string, std::string>>> expanded;
        for (const auto& point : points) {
            for (const std::string& value : axis.values) {
                auto next = point;
                next.emplace_back(axis.key, value);
                expanded.push_back(std::move(next));
            }
        }
        points = std::move(expanded);
    }

    nlohmann::ordered_json json_out = nlohmann::ordered_json::array();
    for (const auto& point : points) {
        ExperimentConfig cfg = build_config(opts, seed_given);
        for (const auto& [key, value] : point) apply_override(cfg, key, value);
        validate_config(cfg);
        const std::vector<ResultRow> rows = run_experiment(cfg);
        warn_failed_cells(rows);
        if (opts.json) {
            nlohmann::ordered_json entry;
            auto& grid = entry["grid"] = nlohmann::ordered_json::object();
            for (const auto& [key, value] : point) grid[key] = value;
            entry["rows"] = rows_to_json(rows);
            json_out.push_back(std::move(entry));
            continue;
        }
        std::ostringstream out;
        if (opts.output_path.empty() && !point.empty()) {
            out << "# grid:";
            for (const auto& [key, value] : point) out << ' ' << key << '=' << value;
            out << '\n';
        }
        out << kCsvHeader;
        append_rows_csv(out, rows);
        write_text(grid_output_path(opts.output_path, grid_suffix(point)), out.str());
    }
    if (opts.json) write_text(opts.output_path, json_out.dump(2) + "\n");
    return 0;
}

int do_oracle_check() {
    const SdExactnessReport sd = run_sd_exactness_suite();
    std::cout << "sd-exactness: " << (sd.passed ? "PASS" : "FAIL") << " ("
              << sd.instances << " instances, " << sd.objective_mismatches
              << " objective mismatches, " << sd.minimizer_mismatches
              << " minimizer mismatches, max gap " << format_double(sd.max_objective_gap)
              << ")\n";
    const EpQualityReport ep = run_ep_quality_suite();
    std::cout << "ep-quality: " << (ep.passed ? "PASS" : "FAIL") << " ("
              << ep.instances << " instances, mean relative excess "
              << format_double(ep.mean_relative_excess) << " vs bound "
              << format_double(kEpMeanExcessBound) << ", clamp fraction "
              << format_double(ep.clamp_fraction) << ", posterior pd "
              << (ep.posterior_pd ? "yes" : "no") << ", finite "
              << (ep.all_finite ? "yes" : "no") << ")\n";
    return sd.passed && ep.passed ? 0 : 1;
}

int do_ep_diagnostic(const std::string& output_path) {
    std::ostringstream out;
    out << "instance,coordinate,residual\n";
    for (int i = 0; i < kOracleInstances; ++i) {
        const IlsProblem prob = oracle_problem(i);
        const Eigen::VectorXd p = ep_solve(prob, EpConfig{});
        const Eigen::VectorXd residual = prob.c - prob.G * p;
        for (int m = 0; m < residual.size(); ++m)
            out << i << ',' << m << ',' << format_double(residual(m)) << '\n';
    }
    write_text(output_path, out.str());
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Fronthaul-quantization-aware downlink precoding experiments"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment config");
    CLI::Option* run_seed = add_common_options(run_cmd, run_opts);

    CommonOpts sweep_opts;
    std::vector<std::string> grid_specs;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run a config across a parameter grid");
    CLI::Option* sweep_seed = add_common_options(sweep_cmd, sweep_opts);
    sweep_cmd
        ->add_option("--grid", grid_specs,
                     "Grid axis, key=v1,v2,... (repeatable; Cartesian product)")
        ->take_all();

    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-check", "Validate the sphere decoder and the EP solver against "
                        "the frozen instance set");

    std::string diag_output;
    CLI::App* diag_cmd = app.add_subcommand(
        "ep-diagnostic", "Dump per-coordinate EP fit residuals over the frozen "
                         "instance set as CSV");
    diag_cmd->add_option("--output", diag_output,
                         "Output file (standard output when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(run_opts, run_seed->count() > 0);
        if (sweep_cmd->parsed())
            return do_sweep(sweep_opts, sweep_seed->count() > 0, grid_specs);
        if (oracle_cmd->parsed()) return do_oracle_check();
        if (diag_cmd->parsed()) return do_ep_diagnostic(diag_output);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace qprec
