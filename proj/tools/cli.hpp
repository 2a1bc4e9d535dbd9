#pragma once

#include <Eigen/Core>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monodiff/monodiff.hpp"

#ifndef MONODIFF_VERSION
#define MONODIFF_VERSION "0.0.0"
#endif

namespace monodiff::cli {

enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kConfigError = 2,
    kPlanFailure = 3,
    kAuditFailure = 4,
    kNotConverged = 5,
};

/// Bad flag or config value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Solver stopped above the requested tolerance.
class NotConverged : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string problem;  ///< exam1..exam4, or "custom" for inline expressions
    double k = 10.0;
    std::vector<int> sizes;  ///< grid intervals N
    std::optional<int> fixed_m;
    double tol = 1e-10;
    int max_iter = 0;
    double probe_step = kDefaultProbeStep;
    double safety = kDefaultSafety;
    std::string out = "monodiff-out";
    bool force = false;
    std::optional<std::string> a, b, c, f, exact, g;

    [[nodiscard]] bool inline_problem() const { return a || b || c || f || exact || g; }
};

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_int(key, item));
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

/// Applies one key=value setting. `nodes` lists node counts per side and is
/// stored as intervals (nodes - 1).
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "problem") cfg.problem = value;
    else if (key == "k") cfg.k = parse_double(key, value);
    else if (key == "n") cfg.sizes = parse_int_list(key, value);
    else if (key == "nodes") {
        cfg.sizes.clear();
        for (const int j : parse_int_list(key, value)) cfg.sizes.push_back(j - 1);
    } else if (key == "m") {
        if (value == "auto") cfg.fixed_m.reset();
        else cfg.fixed_m = parse_int(key, value);
    } else if (key == "tol") cfg.tol = parse_double(key, value);
    else if (key == "max_iter") cfg.max_iter = parse_int(key, value);
    else if (key == "probe_step") cfg.probe_step = parse_double(key, value);
    else if (key == "safety") cfg.safety = parse_double(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "force") cfg.force = parse_bool(key, value);
    else if (key == "a") cfg.a = value;
    else if (key == "b") cfg.b = value;
    else if (key == "c") cfg.c = value;
    else if (key == "f") cfg.f = value;
    else if (key == "exact") cfg.exact = value;
    else if (key == "g") cfg.g = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

/// Flat key=value text; '#' starts a comment line.
inline void read_config(std::istream& is, RunConfig& cfg) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + t + "'");
        }
        apply_setting(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

inline void read_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    read_config(in, cfg);
}

inline void validate(RunConfig& cfg) {
    if (cfg.problem.empty() && cfg.inline_problem()) cfg.problem = "custom";
    if (cfg.problem.empty()) throw ConfigError("no problem given (exam1..exam4 or inline --a/--b/--c)");
    if (cfg.problem == "custom") {
        if (!cfg.a || !cfg.b || !cfg.c) throw ConfigError("inline problems need a, b and c");
        if (cfg.f.has_value() == cfg.exact.has_value()) throw ConfigError("give exactly one of f and exact");
        if (cfg.f && !cfg.g) throw ConfigError("inline problems with f need g");
    } else {
        if (!is_builtin_problem(cfg.problem)) throw ConfigError("unknown problem '" + cfg.problem + "'");
        if (cfg.inline_problem()) throw ConfigError("inline expressions cannot be combined with a built-in problem");
    }
    if (cfg.sizes.empty()) throw ConfigError("at least one grid size is required (--n or --nodes)");
    for (const int n : cfg.sizes) {
        if (n < 2) throw ConfigError("grid sizes need N >= 2 intervals, got " + std::to_string(n));
    }
    if (cfg.fixed_m && *cfg.fixed_m < 1) throw ConfigError("fixed stencil needs m >= 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.max_iter < 0) throw ConfigError("max_iter must be non-negative");
    if (!(cfg.probe_step > 0.0 && cfg.probe_step <= 1.0)) throw ConfigError("probe_step must lie in (0, 1]");
    if (!(cfg.safety >= 0.0 && cfg.safety < 1.0)) throw ConfigError("safety must lie in [0, 1)");
    if (cfg.problem == "exam4" && !(cfg.k > 0.0)) throw ConfigError("k must be positive");
}

inline Problem make_problem(const RunConfig& cfg) {
    if (cfg.problem != "custom") return builtin_problem(cfg.problem, cfg.k);
    DiffusionField field = DiffusionField::from_strings("custom", *cfg.a, *cfg.b, *cfg.c);
    if (cfg.exact) {
        Problem p = manufactured_problem(field, Expr::parse(*cfg.exact), "custom");
        if (cfg.g) return {"custom", field, p.source(), Expr::parse(*cfg.g), p.exact()};
        return p;
    }
    return {"custom", field, Expr::parse(*cfg.f), Expr::parse(*cfg.g)};
}

inline PipelineOptions pipeline_options(const RunConfig& cfg) {
    PipelineOptions o;
    o.plan.fixed_m = cfg.fixed_m;
    o.solve.tol = cfg.tol;
    o.solve.max_iter = cfg.max_iter;
    o.require_mesh_condition = !cfg.force;
    o.require_audit = !cfg.force;
    return o;
}

inline std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline std::string full(double v) {
    std::ostringstream s;
    s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return s.str();
}

/// Published stencil sizes for the built-in problems.
inline std::optional<int> reference_max_m(const RunConfig& cfg) {
    if (cfg.problem == "exam1" || cfg.problem == "exam2") return 2;
    if (cfg.problem == "exam3") return 1;
    if (cfg.problem == "exam4" && cfg.k == 10.0) return 3;
    if (cfg.problem == "exam4" && cfg.k == 100.0) return 26;
    return std::nullopt;
}

/// State shared by one command invocation.
class Session {
public:
    Session(RunConfig cfg, std::string command, std::ostream& out)
        : cfg_(std::move(cfg)), command_(std::move(command)), out_(out), problem_(make_problem(cfg_)) {
        std::filesystem::create_directories(cfg_.out);
    }

    [[nodiscard]] const RunConfig& config() const { return cfg_; }
    [[nodiscard]] const Problem& problem() const { return problem_; }
    [[nodiscard]] std::ostream& out() const { return out_; }

    const FieldAnalysis& analysis() {
        if (!analysis_) {
            analysis_ = analyze_field(problem_.field(), cfg_.probe_step, cfg_.safety);
            const SplittingConstants& k = analysis_->constants;
            out_ << "constants: alpha_bar=" << k.alpha_bar << " alpha=" << k.alpha << " M=" << k.cap_m
                 << " L_F+=" << k.lip_fplus << " L_F-=" << k.lip_fminus << " L_G=" << k.lip_g << " R=" << k.radius
                 << " bound=" << stencil_upper_bound(k) << "\n";
        }
        return *analysis_;
    }

    [[nodiscard]] std::filesystem::path path(const std::string& name) const {
        return std::filesystem::path(cfg_.out) / name;
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream f(path(name));
        if (!f) throw Error("cannot write '" + path(name).string() + "'");
        return f;
    }

    void note(const std::string& line) { notes_.push_back(line); }

    /// Config echo (re-readable with --config) plus commented run facts.
    void write_manifest() const {
        std::ofstream m = open("manifest.txt");
        m << "# monodiff " << MONODIFF_VERSION << " (Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION
          << '.' << EIGEN_MINOR_VERSION << ")\n";
        m << "# command=" << command_ << "\n";
        m << "problem=" << cfg_.problem << "\n";
        if (cfg_.problem == "exam4") m << "k=" << full(cfg_.k) << "\n";
        m << "n=" << join(cfg_.sizes) << "\n";
        m << "m=" << (cfg_.fixed_m ? std::to_string(*cfg_.fixed_m) : "auto") << "\n";
        m << "tol=" << full(cfg_.tol) << "\n";
        m << "max_iter=" << cfg_.max_iter << "\n";
        m << "probe_step=" << full(cfg_.probe_step) << "\n";
        m << "safety=" << full(cfg_.safety) << "\n";
        m << "out=" << cfg_.out << "\n";
        m << "force=" << (cfg_.force ? "true" : "false") << "\n";
        if (cfg_.problem == "custom") {
            m << "a=" << *cfg_.a << "\nb=" << *cfg_.b << "\nc=" << *cfg_.c << "\n";
            if (cfg_.f) m << "f=" << *cfg_.f << "\n";
            if (cfg_.exact) m << "exact=" << *cfg_.exact << "\n";
            if (cfg_.g) m << "g=" << *cfg_.g << "\n";
        }
        if (analysis_) {
            const SplittingConstants& k = analysis_->constants;
            m << "# alpha_bar=" << full(k.alpha_bar) << " alpha=" << full(k.alpha) << " M=" << full(k.cap_m) << "\n";
            m << "# L_F+=" << full(k.lip_fplus) << " L_F-=" << full(k.lip_fminus) << " L_G=" << full(k.lip_g)
              << "\n";
            m << "# R=" << full(k.radius) << " bound=" << stencil_upper_bound(k) << "\n";
        }
        for (const std::string& n : notes_) m << "# " << n << "\n";
    }

    RunResult run(int n) {
        const FieldAnalysis& an = analysis();
        RunResult r = run_problem(problem_, an, n, pipeline_options(cfg_));
        std::ostringstream s;
        s << "N=" << n << " max_m=" << r.plans.max_m << " mesh_condition=" << (r.mesh.passed ? "pass" : "fail")
          << " audit=" << (r.audit.passed ? "pass" : "fail") << " solver=" << r.solution.report.method_name
          << " residual=" << r.solution.report.final_relative_residual;
        note(s.str());
        if (!r.mesh.passed) {
            out_ << "warning: N=" << n << " mesh condition fails (sqrt(2) h max m = " << r.mesh.lhs
                 << " > R = " << r.mesh.radius << "), continuing because of --force\n";
        }
        if (!r.audit.passed) out_ << "warning: N=" << n << " audit failed, continuing because of --force\n";
        if (!r.solution.report.converged) {
            throw NotConverged("solver did not converge at N = " + std::to_string(n) + " (relative residual " +
                               std::to_string(r.solution.report.final_relative_residual) + ")");
        }
        return r;
    }

private:
    RunConfig cfg_;
    std::string command_;
    std::ostream& out_;
    Problem problem_;
    std::optional<FieldAnalysis> analysis_;
    std::vector<std::string> notes_;
};

inline int cmd_plan(Session& s) {
    const FieldAnalysis& an = s.analysis();
    const auto ref = reference_max_m(s.config());
    for (const int n : s.config().sizes) {
        const Grid grid(n);
        PlanOptions po;
        po.fixed_m = s.config().fixed_m;
        const StencilPlans plans = plan_stencils(grid, s.problem().field(), an.lattice, an.constants, po);
        const MeshCondition mesh = check_mesh_condition(grid, plans.max_m, an.constants);
        std::ostream& o = s.out();
        o << "N=" << n << " h=" << grid.spacing() << " max_m=" << plans.max_m << " ("
          << 2 * plans.max_m + 1 << "x" << 2 * plans.max_m + 1 << ")";
        if (ref) o << " reference_m=" << *ref << " (" << 2 * *ref + 1 << "x" << 2 * *ref + 1 << ")";
        o << "\n  m distribution:";
        for (const auto& [m, count] : plans.m_histogram) o << " m=" << m << ":" << count;
        o << "\n  mesh condition sqrt(2) h max m <= R: " << mesh.lhs << " <= " << mesh.radius << " -> "
          << (mesh.passed ? "pass" : "fail") << " (slack " << mesh.slack << ")\n";
        std::ofstream f = s.open("plan_N" + std::to_string(n) + ".txt");
        write_plan(f, plans);
        s.note("N=" + std::to_string(n) + " max_m=" + std::to_string(plans.max_m) +
               " mesh_condition=" + (mesh.passed ? "pass" : "fail"));
    }
    s.write_manifest();
    return kOk;
}

inline int cmd_solve(Session& s) {
    for (const int n : s.config().sizes) {
        const RunResult r = s.run(n);
        {
            std::ofstream f = s.open("solution_N" + std::to_string(n) + ".txt");
            write_grid(f, n, solution_grid(r.grid, s.problem(), r.solution.u));
        }
        std::ofstream rep = s.open("report_N" + std::to_string(n) + ".txt");
        rep << "audit " << r.audit.summary() << "\n";
        rep << "solver method=" << r.solution.report.method_name << " iterations=" << r.solution.report.iterations
            << " residual=" << full(r.solution.report.final_relative_residual)
            << " converged=" << (r.solution.report.converged ? "yes" : "no") << "\n";
        const DmpRow d = dmp_row(r.grid, s.problem(), r.solution.u);
        rep << "extrema boundary_min=" << full(d.boundary_min) << " interior_min=" << full(d.interior_min)
            << " boundary_max=" << full(d.boundary_max) << " interior_max=" << full(d.interior_max) << "\n";
        s.out() << "N=" << n << " max_m=" << r.plans.max_m << " audit: " << r.audit.summary() << "\n  solver "
                << r.solution.report.method_name << " iterations=" << r.solution.report.iterations
                << " residual=" << r.solution.report.final_relative_residual;
        if (s.problem().exact()) {
            const double err = interior_max_error(r.grid, s.problem(), r.solution.u);
            rep << "max_error " << full(err) << "\n";
            s.out() << " max_error=" << err;
        }
        s.out() << "\n";
    }
    s.write_manifest();
    return kOk;
}

inline int cmd_dmp(Session& s) {
    const Expr& f = s.problem().source();
    if (!f.is_closed() || f.eval(0.0, 0.0) != 0.0) throw ConfigError("dmp needs a problem with f = 0");
    std::vector<DmpRow> rows;
    bool all_pass = true;
    for (const int n : s.config().sizes) {
        const RunResult r = s.run(n);
        rows.push_back(dmp_row(r.grid, s.problem(), r.solution.u));
        all_pass = all_pass && rows.back().passed();
    }
    {
        std::ofstream f_csv = s.open("dmp.csv");
        write_dmp_csv(f_csv, rows);
    }
    write_dmp_csv(s.out(), rows);
    s.out() << "maximum principle: " << (all_pass ? "holds" : "VIOLATED") << "\n";
    s.write_manifest();
    return kOk;
}

inline int cmd_converge(Session& s) {
    if (!s.problem().exact()) throw ConfigError("converge needs an exact solution");
    try {
        check_study_sizes(s.config().sizes);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    std::vector<ConvergenceRow> rows;
    for (const int n : s.config().sizes) rows.push_back(convergence_row(s.run(n), s.problem()));
    const ConvergenceStudy study = summarize_convergence(std::move(rows));
    {
        std::ofstream f = s.open("convergence.csv");
        write_convergence_csv(f, study);
    }
    write_convergence_csv(s.out(), study);
    s.out() << "fitted slope: " << study.slope << "\n";
    s.note("slope=" + full(study.slope));
    s.write_manifest();
    return kOk;
}

inline int cmd_export(Session& s) {
    for (const int n : s.config().sizes) {
        const RunResult r = s.run(n);
        {
            std::ofstream f = s.open("matrix_N" + std::to_string(n) + ".txt");
            write_matrix(f, r.system.matrix);
        }
        std::ofstream f = s.open("rhs_N" + std::to_string(n) + ".txt");
        write_vector(f, r.system.rhs);
        s.out() << "N=" << n << " exported " << r.system.dimension() << "x" << r.system.dimension() << " with "
                << r.system.nonzeros() << " nonzeros\n";
    }
    s.write_manifest();
    return kOk;
}

/// Runs one command and maps library errors to exit codes.
inline int dispatch(const std::string& command, RunConfig cfg, std::ostream& out, std::ostream& err) {
    try {
        validate(cfg);
        Session s(std::move(cfg), command, out);
        if (command == "plan") return cmd_plan(s);
        if (command == "solve") return cmd_solve(s);
        if (command == "dmp") return cmd_dmp(s);
        if (command == "converge") return cmd_converge(s);
        if (command == "export") return cmd_export(s);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ExpressionError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidGrid& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const FieldRejected& e) {
        err << "planning failure: " << e.what() << "\n";
        return kPlanFailure;
    } catch (const PlanError& e) {
        err << "planning failure: " << e.what() << "\n";
        if (std::string_view(e.what()).starts_with("mesh condition")) {
            err << "(rerun with --force to assemble anyway)\n";
        }
        return kPlanFailure;
    } catch (const AuditError& e) {
        err << "audit failure: " << e.what() << "\n";
        return kAuditFailure;
    } catch (const AssemblyError& e) {
        err << "audit failure: " << e.what() << "\n";
        return kAuditFailure;
    } catch (const NotConverged& e) {
        err << "solver failure: " << e.what() << "\n";
        return kNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUnexpected;
    }
}

}  // namespace monodiff::cli
