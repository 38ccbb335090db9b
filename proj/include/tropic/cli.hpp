#pragma once

/**
 * @file cli.hpp
 * @brief The command-line front end: configuration, reports, rendering.
 *
 * Kept in the library (the binary is a two-line wrapper) so the exit codes,
 * output formats and flag handling are all unit-testable.
 */

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tropic/io.hpp"
#include "tropic/lyapunov.hpp"
#include "tropic/network.hpp"

namespace tropic {

struct RunConfig {
    enum class Input { preset, spec_file, matrix_file };

    Input input = Input::preset;
    std::string preset = "open_tandem";
    std::string spec_path;
    std::string matrix_path;

    // preset parameters
    int n = 3;
    std::vector<std::string> services;  // distribution literals, empty = exp(1)
    std::vector<std::string> buffers;   // "inf" or integers, blocked tandems only
    int queues = 2;                     // round robin
    std::string arrival = "exp(1)";     // round robin

    std::uint64_t seed = 17;  // fixed documented default
    long long k = 10000;
    int replications = 20;
    long long esamples = 100000;
    std::string method = "all";  // mc | closed | decomp | rho | all
    std::vector<long long> ks;   // convergence table mode when nonempty
    std::string format = "table";
    std::string out_path;  // empty = stdout
    bool override_existence = false;
    int max_depth = 4;
    int threads = 1;
};

struct MethodOutcome {
    std::string requested;  // mc | closed | decomp | rho
    std::optional<LyapunovEstimate> estimate;
    std::string note;  // why there is no estimate, or a caveat
};

struct RunReport {
    RunConfig config;
    KingmanDiagnostics kingman;
    std::vector<MethodOutcome> outcomes;
    std::optional<double> discrepancy_abs;
    std::optional<double> discrepancy_rel;
    bool discrepancy_warning = false;
};

struct ConvergenceRow {
    long long k = 0;
    double lambda = 0.0;
    double std_error = 0.0;
    double drift = 0.0;  // estimate minus the final row's estimate
};

namespace detail {

struct PreparedInput {
    std::optional<Matrix> fixed;  // matrix-literal input
    std::optional<RandomMatrixProcess> process;
    bool deterministic = false;
};

inline PreparedInput prepare_input(const RunConfig& cfg) {
    PreparedInput in;
    if (cfg.input == RunConfig::Input::matrix_file) {
        in.fixed = parse_matrix(read_file(cfg.matrix_path));
        if (!in.fixed->square()) throw ModelInvalidError("matrix input must be square");
        in.process = RandomMatrixProcess(ExprMatrix::from_matrix(*in.fixed),
                                         {ServiceDistribution::deterministic(0.0)}, cfg.seed);
        in.deterministic = true;
        return in;
    }

    NetworkModel model;
    if (cfg.input == RunConfig::Input::spec_file) {
        model = parse_network(read_file(cfg.spec_path));
    } else {
        nlohmann::json j;
        j["preset"] = cfg.preset;
        j["n"] = cfg.n;
        j["queues"] = cfg.queues;
        j["arrival"] = cfg.arrival;
        if (!cfg.services.empty()) j["services"] = cfg.services;
        if (!cfg.buffers.empty()) {
            nlohmann::json buf = nlohmann::json::array();
            for (const std::string& b : cfg.buffers) {
                if (b == "inf")
                    buf.push_back("inf");
                else
                    buf.push_back(std::stoll(b));
            }
            j["buffers"] = buf;
        }
        model = parse_network(j.dump());
    }
    CompiledModel compiled = compile(model, cfg.seed);
    in.deterministic = true;
    for (const TauLeaf& l : compiled.lifted.exprs().leaves())
        in.deterministic &= compiled.lifted.node_distribution(l.node).is_deterministic();
    in.process = std::move(compiled.lifted);
    return in;
}

inline std::vector<std::string> expand_methods(const std::string& method, bool deterministic) {
    if (method == "all") {
        std::vector<std::string> out{"mc", "closed", "decomp"};
        if (deterministic) out.insert(out.begin(), "rho");
        return out;
    }
    if (method == "mc" || method == "closed" || method == "decomp" || method == "rho")
        return {method};
    if (method == "spectral_radius") return {"rho"};
    throw ParseError("unknown method '" + method + "'");
}

inline std::string describe(const LyapunovEstimate& e) {
    std::string s = name(e.method);
    if (e.method == Method::decomposition_chain) {
        s += "(depth=" + std::to_string(e.chain_depth);
        if (e.inner_method) s += std::string(",inner=") + name(*e.inner_method);
        s += ")";
    } else if (e.method == Method::backward_skeleton && e.chain_depth > 0) {
        s += "(depth=" + std::to_string(e.chain_depth) + ")";
    }
    return s;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string fmt6(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

/// Execute one configuration: existence diagnostics plus one estimate per
/// requested method, with the Monte Carlo vs closed-form discrepancy.
inline RunReport run(const RunConfig& cfg) {
    if (cfg.k < 1) throw ParseError("k must be >= 1");
    if (cfg.replications < 2) throw ParseError("reps must be >= 2");

    detail::PreparedInput in = detail::prepare_input(cfg);
    const RandomMatrixProcess& p = *in.process;

    RunReport report;
    report.config = cfg;
    report.kingman = kingman_check(p, std::min<long long>(cfg.esamples, 2000));

    std::vector<std::string> methods = detail::expand_methods(cfg.method, in.deterministic);
    bool wants_mc = std::find(methods.begin(), methods.end(), "mc") != methods.end();
    if (wants_mc && !report.kingman.ok && !cfg.override_existence)
        throw ExistenceError(
            "existence conditions unverified; pass --override-existence to estimate anyway");

    for (const std::string& m : methods) {
        MethodOutcome out;
        out.requested = m;
        if (m == "mc") {
            MonteCarloOptions opt;
            opt.k = cfg.k;
            opt.replications = cfg.replications;
            opt.override_existence = true;  // gated above, once
            opt.threads = cfg.threads;
            out.estimate = estimate_monte_carlo(p, opt);
        } else if (m == "closed") {
            auto est = evaluate_closed_form(p, cfg.esamples);
            if (est)
                out.estimate = *est;
            else
                out.note = "not applicable: the matrix classifies as general";
        } else if (m == "decomp") {
            try {
                auto est = evaluate_by_decomposition(p, cfg.max_depth, cfg.esamples);
                if (est)
                    out.estimate = *est;
                else
                    out.note = "not applicable: no usable decomposition found";
            } catch (const DependencyError& e) {
                out.note = std::string("not applicable: ") + e.what();
            }
        } else {  // rho
            if (!in.deterministic) {
                out.note = "not applicable: spectral radius needs a deterministic system";
            } else {
                LyapunovEstimate est = evaluate_spectral_radius(p.sample(1));
                est.seed = cfg.seed;
                out.estimate = est;
            }
        }
        report.outcomes.push_back(std::move(out));
    }

    // discrepancy between the Monte Carlo run and the best closed route
    const LyapunovEstimate* mc = nullptr;
    const LyapunovEstimate* closed = nullptr;
    for (const MethodOutcome& o : report.outcomes) {
        if (!o.estimate) continue;
        if (o.requested == "mc" && !mc) mc = &*o.estimate;
        if (o.requested != "mc" && !closed) closed = &*o.estimate;
    }
    if (mc && closed) {
        double abs = std::abs(mc->lambda - closed->lambda);
        report.discrepancy_abs = abs;
        if (closed->lambda != 0.0) report.discrepancy_rel = abs / std::abs(closed->lambda);
        double band = 2.576 * mc->std_error;  // 99% interval
        report.discrepancy_warning = abs > std::max(band, 1e-9);
    }
    return report;
}

/// Monte Carlo estimates at an ascending list of horizon values, with the
/// drift of each row from the final one.
inline std::vector<ConvergenceRow> convergence_table(const RunConfig& cfg) {
    if (cfg.ks.empty()) throw ParseError("convergence table needs at least one k");
    if (!std::is_sorted(cfg.ks.begin(), cfg.ks.end()))
        throw ParseError("convergence ks must be ascending");
    detail::PreparedInput in = detail::prepare_input(cfg);
    const RandomMatrixProcess& p = *in.process;

    KingmanDiagnostics kd = kingman_check(p, std::min<long long>(cfg.esamples, 2000));
    if (!kd.ok && !cfg.override_existence)
        throw ExistenceError(
            "existence conditions unverified; pass --override-existence to estimate anyway");

    std::vector<ConvergenceRow> rows;
    for (long long k : cfg.ks) {
        MonteCarloOptions opt;
        opt.k = k;
        opt.replications = cfg.replications;
        opt.override_existence = true;
        opt.threads = cfg.threads;
        LyapunovEstimate est = estimate_monte_carlo(p, opt);
        rows.push_back({k, est.lambda, est.std_error, 0.0});
    }
    for (ConvergenceRow& r : rows) r.drift = r.lambda - rows.back().lambda;
    return rows;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["input"] = c.input == RunConfig::Input::preset      ? "preset"
                 : c.input == RunConfig::Input::spec_file ? "spec"
                                                          : "matrix";
    if (c.input == RunConfig::Input::preset) {
        j["preset"] = c.preset;
        j["n"] = c.n;
        j["queues"] = c.queues;
        j["arrival"] = c.arrival;
        j["services"] = c.services;
        j["buffers"] = c.buffers;
    } else if (c.input == RunConfig::Input::spec_file) {
        j["spec"] = c.spec_path;
    } else {
        j["matrix"] = c.matrix_path;
    }
    j["seed"] = c.seed;
    j["k"] = c.k;
    j["reps"] = c.replications;
    j["esamples"] = c.esamples;
    j["method"] = c.method;
    j["format"] = c.format;
    j["override_existence"] = c.override_existence;
    j["max_depth"] = c.max_depth;
    j["threads"] = c.threads;
    if (!c.ks.empty()) j["ks"] = c.ks;
    return j;
}

inline nlohmann::json estimate_json(const LyapunovEstimate& e) {
    nlohmann::json j;
    j["resolved_method"] = describe(e);
    j["lambda"] = e.lambda;
    j["stderr"] = e.std_error;
    j["ci"] = {e.ci_lo, e.ci_hi};
    j["k"] = e.k_used;
    j["reps"] = e.replications;
    j["seed"] = e.seed;
    if (e.throughput) j["throughput"] = *e.throughput;
    if (!e.checkpoints.empty()) {
        nlohmann::json cps = nlohmann::json::array();
        for (auto [k, v] : e.checkpoints) cps.push_back({k, v});
        j["checkpoints"] = cps;
    }
    return j;
}

} // namespace detail

inline std::string render_csv(const RunReport& r) {
    std::ostringstream os;
    os << "method,lambda,stderr,ci_lo,ci_hi,k,reps,seed\n";
    for (const MethodOutcome& o : r.outcomes) {
        if (!o.estimate) continue;
        const LyapunovEstimate& e = *o.estimate;
        os << o.requested << ',' << detail::fmt(e.lambda) << ',' << detail::fmt(e.std_error)
           << ',' << detail::fmt(e.ci_lo) << ',' << detail::fmt(e.ci_hi) << ',' << e.k_used
           << ',' << e.replications << ',' << e.seed << '\n';
    }
    return os.str();
}

inline std::string render_json(const RunReport& r) {
    nlohmann::json j;
    j["config"] = detail::config_json(r.config);
    j["kingman"] = {{"ok", r.kingman.ok},
                    {"e_norm_finite", r.kingman.e_norm_finite},
                    {"e_norm_estimate", r.kingman.e_norm_estimate},
                    {"rho_of_mean", r.kingman.rho_of_mean.is_zero()
                                        ? nlohmann::json()
                                        : nlohmann::json(r.kingman.rho_of_mean.value())}};
    nlohmann::json rows = nlohmann::json::array();
    for (const MethodOutcome& o : r.outcomes) {
        nlohmann::json row;
        row["method"] = o.requested;
        if (o.estimate)
            row.update(detail::estimate_json(*o.estimate));
        else
            row["note"] = o.note;
        rows.push_back(row);
    }
    j["results"] = rows;
    if (r.discrepancy_abs) {
        j["discrepancy"]["abs"] = *r.discrepancy_abs;
        if (r.discrepancy_rel) j["discrepancy"]["rel"] = *r.discrepancy_rel;
        j["discrepancy"]["warning"] = r.discrepancy_warning;
    }
    return j.dump(2) + "\n";
}

inline std::string render_table(const RunReport& r) {
    std::ostringstream os;
    os << "existence: " << (r.kingman.ok ? "ok" : "UNVERIFIED")
       << "  (E||A1|| ~ " << detail::fmt6(r.kingman.e_norm_estimate) << ", rho(E A1) = "
       << (r.kingman.rho_of_mean.is_zero() ? std::string("-inf")
                                           : detail::fmt6(r.kingman.rho_of_mean.value()))
       << ")\n";
    for (const MethodOutcome& o : r.outcomes) {
        os << "  " << o.requested << ": ";
        if (!o.estimate) {
            os << o.note << '\n';
            continue;
        }
        const LyapunovEstimate& e = *o.estimate;
        os << "lambda = " << detail::fmt6(e.lambda);
        if (e.std_error > 0.0)
            os << " +- " << detail::fmt6(e.std_error) << "  ci95 [" << detail::fmt6(e.ci_lo)
               << ", " << detail::fmt6(e.ci_hi) << "]";
        if (e.throughput) os << "  throughput = " << detail::fmt6(*e.throughput);
        os << "  [" << detail::describe(e);
        if (e.k_used > 0) os << ", k=" << e.k_used << ", reps=" << e.replications;
        os << "]\n";
    }
    if (r.discrepancy_abs) {
        os << "discrepancy |mc - closed| = " << detail::fmt6(*r.discrepancy_abs);
        if (r.discrepancy_rel) os << " (" << detail::fmt6(100.0 * *r.discrepancy_rel) << "%)";
        if (r.discrepancy_warning) os << "  WARNING: outside the 99% interval";
        os << '\n';
    }
    return os.str();
}

inline std::string render_convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "k,lambda,stderr,drift\n";
    for (const ConvergenceRow& r : rows)
        os << r.k << ',' << detail::fmt(r.lambda) << ',' << detail::fmt(r.std_error) << ','
           << detail::fmt(r.drift) << '\n';
    return os.str();
}

inline std::string render_convergence_json(const RunConfig& cfg,
                                           const std::vector<ConvergenceRow>& rows) {
    nlohmann::json j;
    j["config"] = detail::config_json(cfg);
    nlohmann::json arr = nlohmann::json::array();
    for (const ConvergenceRow& r : rows)
        arr.push_back({{"k", r.k},
                       {"lambda", r.lambda},
                       {"stderr", r.std_error},
                       {"drift", r.drift}});
    j["rows"] = arr;
    return j.dump(2) + "\n";
}

inline std::string render_convergence_table(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "        k    lambda    stderr     drift\n";
    for (const ConvergenceRow& r : rows) {
        os.width(9);
        os << r.k;
        os << "  " << detail::fmt6(r.lambda) << "  " << detail::fmt6(r.std_error) << "  "
           << detail::fmt6(r.drift) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

/// Parse flags and execute; returns the process exit code.
/// 0 success, 2 parse error, 3 invalid model, 4 existence unverified.
inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean service cycle time of fork-join queueing networks via max-plus algebra"};
    app.name("tropic");

    RunConfig cfg;
    std::string spec_path, matrix_path, preset;
    app.add_option("--spec", spec_path, "network spec file (JSON)");
    app.add_option("--preset", preset,
                   "scenario preset: open_tandem, closed_tandem, manufacturing_tandem, "
                   "communication_tandem, fork_join_5, round_robin");
    app.add_option("--matrix", matrix_path, "fixed matrix literal file");
    app.add_option("--n", cfg.n, "node count for tandem presets");
    app.add_option("--service", cfg.services,
                   "service distribution literal per node (repeatable); det(v), exp(rate), "
                   "unif(lo,hi), norm(mean,sd)");
    app.add_option("--buffer", cfg.buffers,
                   "buffer capacity per node for blocked tandems: integer or inf (repeatable)");
    app.add_option("--queues", cfg.queues, "round_robin: number of queues");
    app.add_option("--arrival", cfg.arrival, "round_robin: arrival distribution literal");
    app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    app.add_option("--k", cfg.k, "Monte Carlo horizon")->capture_default_str();
    app.add_option("--reps", cfg.replications, "Monte Carlo replications")->capture_default_str();
    app.add_option("--esamples", cfg.esamples, "expectation sample count")->capture_default_str();
    app.add_option("--method", cfg.method, "mc | closed | decomp | rho | all")->capture_default_str();
    app.add_option("--ks", cfg.ks, "convergence table at these ascending k values");
    app.add_option("--format", cfg.format, "table | csv | json")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "csv", "json"}));
    app.add_option("--out", cfg.out_path, "write the report to this file");
    app.add_flag("--override-existence", cfg.override_existence,
                 "estimate even when the existence check fails");
    app.add_option("--max-depth", cfg.max_depth, "decomposition chain depth")->capture_default_str();
    app.add_option("--threads", cfg.threads, "replication worker threads")->capture_default_str();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    int inputs = (!spec_path.empty() ? 1 : 0) + (!matrix_path.empty() ? 1 : 0) +
                 (!preset.empty() ? 1 : 0);
    if (inputs != 1) {
        err << "error: exactly one of --spec, --preset, --matrix is required\n";
        return 2;
    }
    if (!spec_path.empty()) {
        cfg.input = RunConfig::Input::spec_file;
        cfg.spec_path = spec_path;
    } else if (!matrix_path.empty()) {
        cfg.input = RunConfig::Input::matrix_file;
        cfg.matrix_path = matrix_path;
    } else {
        cfg.input = RunConfig::Input::preset;
        cfg.preset = preset;
    }

    try {
        std::string body;
        if (!cfg.ks.empty()) {
            auto rows = convergence_table(cfg);
            body = cfg.format == "csv"    ? render_convergence_csv(rows)
                   : cfg.format == "json" ? render_convergence_json(cfg, rows)
                                          : render_convergence_table(rows);
        } else {
            RunReport report = run(cfg);
            body = cfg.format == "csv"    ? render_csv(report)
                   : cfg.format == "json" ? render_json(report)
                                          : render_table(report);
        }
        if (cfg.out_path.empty()) {
            out << body;
        } else {
            std::ofstream f(cfg.out_path, std::ios::binary);
            if (!f) throw ParseError("cannot write '" + cfg.out_path + "'");
            f << body;
        }
        return 0;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ModelInvalidError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const ExistenceError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tropic
