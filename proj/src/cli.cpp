#include "hardthresh/cli.hpp"

#include "hardthresh/dataio.hpp"
#include "hardthresh/errors.hpp"
#include "hardthresh/format.hpp"
#include "hardthresh/simulation.hpp"
#include "hardthresh/thresholding.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hardthresh::cli {

namespace {

constexpr const char* kDefaultPenalties = "0.5:0.25,0.75:0.4,1:0.5";

// Raised for problems the user can fix by changing flags (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EstimatorFlags {
    std::string estimator = "ols";
    std::string ridge_lambda = "sqrt_n";
    double ar_xi = 1.0;
    int ar_steps = 5;
};

struct RunConfig {
    EstimatorFlags est;
    std::string penalties = kDefaultPenalties;
    unsigned threads = 0;
    std::string out_path;
    std::string format;

    // simulate
    std::string scenario;
    std::vector<long long> n_values;
    std::vector<long long> p_values;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::string audit_path;

    // select
    std::string input;
    std::string response;
    std::vector<std::string> drop;
    bool intercept = false;
    bool no_standardize = false;
    bool raw_response = false;
    bool interactions = false;
    double spline_h = 0.0;
};

void add_estimator_flags(CLI::App& app, EstimatorFlags& flags) {
    app.add_option("--estimator", flags.estimator, "Initial estimator: ols, ridge or ar")
        ->check(CLI::IsMember({"ols", "ridge", "ar"}))
        ->capture_default_str();
    app.add_option("--ridge-lambda", flags.ridge_lambda,
                   "Ridge penalty (also the AR initializer's): a number or sqrt_n")
        ->capture_default_str();
    app.add_option("--ar-xi", flags.ar_xi, "Adaptive ridge weight xi (> 0)")->capture_default_str();
    app.add_option("--ar-steps", flags.ar_steps, "Adaptive ridge iterations (>= 1)")
        ->capture_default_str();
}

EstimatorConfig resolve_estimator(const EstimatorFlags& flags) {
    EstimatorConfig cfg;
    cfg.kind = parse_estimator_kind(flags.estimator);
    if (flags.ridge_lambda != "sqrt_n") {
        double value = 0.0;
        std::size_t used = 0;
        try {
            value = std::stod(flags.ridge_lambda, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != flags.ridge_lambda.size() || !(value >= 0.0) || !std::isfinite(value)) {
            throw ConfigError("--ridge-lambda must be sqrt_n or a nonnegative number");
        }
        cfg.ridge_lambda = value;
    }
    if (!(flags.ar_xi > 0.0)) throw ConfigError("--ar-xi must be positive");
    if (flags.ar_steps < 1) throw ConfigError("--ar-steps must be at least 1");
    cfg.xi = flags.ar_xi;
    cfg.steps = flags.ar_steps;
    return cfg;
}

std::vector<PenaltySpec> resolve_penalties(const std::string& text) {
    try {
        return parse_penalty_list(text);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("--penalties: ") + e.what());
    }
}

ScenarioSpec load_custom_scenario(const std::string& path, Index n) {
    ScenarioSpec spec;
    try {
        const auto doc = nlohmann::json::parse(read_text_file(path));
        spec.name = doc.value("name", std::string("custom"));
        const auto beta = doc.at("beta0").get<std::vector<double>>();
        spec.beta0 = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
        spec.rho = doc.value("rho", 0.2);
        spec.noise_sd = doc.value("noise_sd", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario file " + path + ": " + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    spec.n = n;
    return spec;
}

std::string paren_label(const PenaltySpec& pen) {
    return "(" + format_double(pen.c) + "," + format_double(pen.r) + ")";
}

void print_aggregate_table(std::ostream& out, const std::vector<AggregateReport>& reports,
                           const std::vector<PenaltySpec>& penalties) {
    if (reports.empty()) return;
    out << "Scenario " << reports.front().scenario << ", estimator "
        << reports.front().estimator.label() << ", " << reports.front().replications
        << " replications, base seed " << reports.front().base_seed << "\n";
    out << std::left << std::setw(10) << "Measure" << std::right << std::setw(7) << "n"
        << std::setw(5) << "p";
    for (const auto& pen : penalties) out << std::setw(14) << paren_label(pen);
    out << "\n";

    struct Row {
        const char* name;
        double AggregateReport::*field;
    };
    const Row rows[] = {{"delta", &AggregateReport::mean_delta_hat},
                        {"FNR%", &AggregateReport::mean_fnr_pct},
                        {"TNR%", &AggregateReport::mean_tnr_pct}};
    const std::size_t per_cell = penalties.size();
    for (const auto& row : rows) {
        for (std::size_t cell = 0; cell < reports.size() / per_cell; ++cell) {
            const auto& first = reports[cell * per_cell];
            out << std::left << std::setw(10) << row.name << std::right << std::setw(7) << first.n
                << std::setw(5) << first.p;
            for (std::size_t m = 0; m < per_cell; ++m) {
                std::ostringstream cellv;
                cellv << std::setprecision(4) << reports[cell * per_cell + m].*row.field;
                out << std::setw(14) << cellv.str();
            }
            out << "\n";
        }
    }
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto estimator = resolve_estimator(cfg.est);
    const auto penalties = resolve_penalties(cfg.penalties);
    if (cfg.reps < 1) throw ConfigError("--reps must be at least 1");
    const auto format = parse_report_format(cfg.format.empty() ? "csv" : cfg.format);
    for (auto n : cfg.n_values) {
        if (n < 2) throw ConfigError("--n values must be at least 2");
    }

    const bool preset = cfg.scenario == "S1" || cfg.scenario == "S2";
    std::vector<ScenarioSpec> specs;
    for (auto n : cfg.n_values) {
        if (preset) {
            if (cfg.p_values.empty()) throw ConfigError("--p is required for scenario " + cfg.scenario);
            for (auto p : cfg.p_values) {
                if (p < 10) throw ConfigError("--p must be at least 10 for " + cfg.scenario);
                specs.push_back(cfg.scenario == "S1" ? ScenarioSpec::s1(n, p) : ScenarioSpec::s2(n, p));
            }
        } else {
            auto spec = load_custom_scenario(cfg.scenario, n);
            if (!cfg.p_values.empty() &&
                (cfg.p_values.size() != 1 || cfg.p_values.front() != spec.p())) {
                throw ConfigError("--p does not match the scenario file's beta0 length");
            }
            try {
                spec.validate();
            } catch (const InvalidArgument& e) {
                throw ConfigError("scenario file " + cfg.scenario + ": " + e.what());
            }
            specs.push_back(std::move(spec));
        }
    }

    std::vector<AggregateReport> reports;
    for (const auto& spec : specs) {
        double min_signal = INFINITY;
        for (Index j = 0; j < spec.p(); ++j) {
            if (spec.beta0[j] != 0.0) min_signal = std::min(min_signal, std::abs(spec.beta0[j]));
        }
        auto cell = run_scenario(spec, estimator, penalties, cfg.reps, cfg.seed, cfg.threads);
        std::size_t warned = 0;
        for (const auto& o : cell.front().outcomes) warned += o.beta_min_warning ? 1 : 0;
        if (warned > 0) {
            err << "warning: n=" << spec.n << " p=" << spec.p() << ": in " << warned
                << " replication(s) the finest threshold reached the smallest signal "
                << format_double(min_signal) << "\n";
        }
        for (auto& r : cell) reports.push_back(std::move(r));
    }

    print_aggregate_table(out, reports, penalties);
    if (!cfg.out_path.empty()) write_report(reports, cfg.out_path, format);
    if (!cfg.audit_path.empty()) write_text_file(cfg.audit_path, replications_to_csv(reports));
    return kExitOk;
}

std::string output_path_for(const std::string& path, const PenaltySpec& pen, bool multiple) {
    if (!multiple) return path;
    const std::string tag = "c" + format_double(pen.c) + "_r" + format_double(pen.r);
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + "." + tag;
    }
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int cmd_select(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const auto estimator = resolve_estimator(cfg.est);
    const auto penalties = resolve_penalties(cfg.penalties);
    const auto format = parse_report_format(cfg.format.empty() ? "json" : cfg.format);
    if (cfg.spline_h < 0.0) throw ConfigError("--spline-h must be positive");

    Dataset raw;
    try {
        raw = load_csv(cfg.input, cfg.response, cfg.drop);
    } catch (const MissingColumn& e) {
        throw ConfigError(e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    PreprocessOptions prep;
    prep.standardize = !cfg.no_standardize;
    prep.standardize_response = !cfg.raw_response;
    prep.interactions = cfg.interactions;
    prep.intercept = cfg.intercept;
    const Dataset data = preprocess(raw, prep);

    const auto beta_hat = estimator.fit(data);
    auto path = build_empirical_path(beta_hat);
    if (cfg.spline_h > 0.0) {
        path.mode = ThresholdMode::Spline;
        path.spline_width = cfg.spline_h;
    }
    const unsigned threads = cfg.threads == 0 ? 1 : cfg.threads;
    const auto risks = thresholded_risks(data, beta_hat.values, path, threads);

    out << "n=" << data.n() << " p=" << data.p() << " estimator " << estimator.label()
        << (beta_hat.rank_deficient() ? " (rank deficient design)" : "") << ", K=" << path.size()
        << "\n";
    for (const auto& pen : penalties) {
        const auto result = select_from_risks(beta_hat.values, risks, data.n(), pen);
        const auto relevant = result.relevant_set();
        out << "(c,r)=" << paren_label(pen) << " delta_hat=" << format_double(result.delta_hat)
            << " relevant set {";
        for (std::size_t i = 0; i < relevant.size(); ++i) {
            out << (i ? ", " : "") << data.labels[static_cast<std::size_t>(relevant[i])];
        }
        out << "} columns {";
        for (std::size_t i = 0; i < relevant.size(); ++i) out << (i ? "," : "") << relevant[i] + 1;
        out << "}\n";
        if (!cfg.out_path.empty()) {
            write_report(result, data.labels, output_path_for(cfg.out_path, pen, penalties.size() > 1),
                         format);
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Variable selection by thresholding an initial regression estimate"};
    app.name("hardthresh");
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo study on a synthetic scenario");
    sim->add_option("--scenario", cfg.scenario, "S1, S2, or a JSON scenario file")->required();
    sim->add_option("--n", cfg.n_values, "Sample size(s), comma separated")
        ->required()
        ->delimiter(',');
    sim->add_option("--p", cfg.p_values, "Dimension(s), comma separated (S1/S2)")->delimiter(',');
    add_estimator_flags(*sim, cfg.est);
    sim->add_option("--penalties", cfg.penalties, "Penalty pairs c:r, comma separated")
        ->capture_default_str();
    sim->add_option("--reps", cfg.reps, "Replications per cell")->capture_default_str();
    sim->add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
    sim->add_option("--threads", cfg.threads, "Worker threads (0 = all hardware threads)")
        ->capture_default_str();
    sim->add_option("--out", cfg.out_path, "Write the aggregate report here");
    sim->add_option("--format", cfg.format, "Report format: csv (default) or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--audit", cfg.audit_path, "Write per-replication outcomes as CSV");

    auto* sel = app.add_subcommand("select", "Select variables on a CSV dataset");
    sel->add_option("--input", cfg.input, "Input CSV with a header row")->required();
    sel->add_option("--response", cfg.response, "Name of the response column")->required();
    sel->add_option("--drop", cfg.drop, "Columns to ignore, comma separated")->delimiter(',');
    add_estimator_flags(*sel, cfg.est);
    sel->add_option("--penalties", cfg.penalties, "Penalty pairs c:r, comma separated")
        ->capture_default_str();
    sel->add_flag("--intercept", cfg.intercept, "Prepend an all-ones column");
    sel->add_flag("--no-standardize", cfg.no_standardize, "Use the columns as given");
    sel->add_flag("--raw-response", cfg.raw_response, "Standardize covariates only");
    sel->add_flag("--interactions", cfg.interactions, "Add all pairwise products");
    sel->add_option("--spline-h", cfg.spline_h,
                    "Use the cubic spline threshold with this width instead of the step");
    sel->add_option("--threads", cfg.threads, "Worker threads for the per-threshold refits")
        ->capture_default_str();
    sel->add_option("--out", cfg.out_path,
                    "Write the selection report here (one file per penalty when several)");
    sel->add_option("--format", cfg.format, "Report format: json (default) or csv")
        ->check(CLI::IsMember({"csv", "json"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        const CLI::App* failing = sim->parsed() ? sim : sel->parsed() ? sel : &app;
        err << failing->help();
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg, out, err);
        return cmd_select(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ReplicationError& e) {
        err << "error: replication failed: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace hardthresh::cli
