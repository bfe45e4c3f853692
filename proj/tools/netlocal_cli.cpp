// netlocal: fit finite-cardinality local models to network behaviours,
// sweep families, estimate critical visibilities, and verify the built-in
// closed-form models.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netlocal/analytic.hpp"
#include "netlocal/errors.hpp"
#include "netlocal/experiments.hpp"
#include "netlocal/model.hpp"
#include "netlocal/optimizer.hpp"
#include "netlocal/serialization.hpp"
#include "netlocal/targets.hpp"
#include "netlocal/topology.hpp"

namespace {

using namespace netlocal;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NetworkOptions {
    std::string name = "triangle";
    std::string topology_file;
    int outputs = 2;
    int inputs = 2;
};

struct TargetOptions {
    std::string family;
    std::string v = "";
    double i = 0.0, j = 0.0;
    double x = 0.0, y = 0.0;
    std::string file;
};

struct SolverOptions {
    int restarts = 50;
    int max_iterations = 2000;
    double gtol = 1e-10;
    double threshold = 1e-6;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
};

void add_network_flags(CLI::App* cmd, NetworkOptions& net) {
    cmd->add_option("--network", net.name, "Scenario name: bilocal or triangle")
        ->check(CLI::IsMember({"bilocal", "triangle"}));
    cmd->add_option("--topology", net.topology_file,
                    "Topology JSON file (overrides --network)");
    cmd->add_option("--outputs", net.outputs, "Outputs per party (named networks)")
        ->check(CLI::Range(2, 16));
    cmd->add_option("--inputs", net.inputs, "Inputs per party (bilocal only)")
        ->check(CLI::Range(1, 16));
}

void add_solver_flags(CLI::App* cmd, SolverOptions& opt, double default_threshold) {
    opt.threshold = default_threshold;
    cmd->add_option("--restarts", opt.restarts, "Independent solver restarts per fit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-iters", opt.max_iterations, "Iteration cap per restart")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--gtol", opt.gtol, "Projected-gradient stationarity tolerance")
        ->capture_default_str();
    cmd->add_option("--threshold", opt.threshold, "Success RMSE threshold")
        ->capture_default_str();
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opt](const std::uint64_t& s) {
            opt.seed = s;
            opt.seed_given = true;
        },
        "Master seed (default: NETLOCAL_SEED env var, else 0)");
    cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
}

NetworkTopology resolve_network(const NetworkOptions& net) {
    if (!net.topology_file.empty()) {
        return load_topology(net.topology_file);
    }
    if (net.name == "bilocal") {
        return make_bilocal(net.outputs, net.inputs);
    }
    return make_triangle(net.outputs);
}

SolverSettings resolve_settings(const SolverOptions& opt) {
    SolverSettings s;
    s.restarts = opt.restarts;
    s.max_iterations = opt.max_iterations;
    s.gtol = opt.gtol;
    s.rmse_threshold = opt.threshold;
    s.threads = opt.threads;
    if (opt.seed_given) {
        s.master_seed = opt.seed;
    } else if (const char* env = std::getenv("NETLOCAL_SEED")) {
        s.master_seed = std::strtoull(env, nullptr, 10);
    }
    return s;
}

double resolve_v(const std::string& v, const std::string& family) {
    if (v.empty()) {
        throw UsageError("--v is required for target family '" + family + "'");
    }
    if (v == "auto") {
        if (family == "ghz") return ghz_critical_visibility();
        if (family == "w") return w_critical_visibility();
        throw UsageError("--v auto is only defined for the ghz and w families");
    }
    try {
        std::size_t used = 0;
        const double value = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return value;
    } catch (const std::exception&) {
        throw UsageError("--v must be a number or 'auto', got '" + v + "'");
    }
}

Behaviour resolve_target(const TargetOptions& t) {
    if (t.family == "ghz") return ghz(resolve_v(t.v, t.family));
    if (t.family == "w") return w_dist(resolve_v(t.v, t.family));
    if (t.family == "ejm") return ejm(resolve_v(t.v, t.family));
    if (t.family == "bilocal-ij") return bilocal_ij(t.i, t.j);
    if (t.family == "bilocal-xy") return bilocal_xy(t.x, t.y);
    if (t.family == "file") {
        if (t.file.empty()) throw UsageError("--target file requires --target-file");
        return load_behaviour(t.file);
    }
    throw UsageError("unknown target family '" + t.family + "'");
}

Family1D resolve_family_1d(const TargetOptions& t) {
    if (t.family == "ghz") return [](double v) { return ghz(v); };
    if (t.family == "w") return [](double v) { return w_dist(v); };
    if (t.family == "ejm") return [](double v) { return ejm(v); };
    if (t.family == "file") {
        if (t.file.empty()) throw UsageError("--target file requires --target-file");
        const Behaviour base = load_behaviour(t.file);
        return [base](double v) { return mix_with_uniform(base, v); };
    }
    throw UsageError("target family '" + t.family + "' is not a visibility family");
}

Family2D resolve_family_2d(const TargetOptions& t) {
    if (t.family == "bilocal-ij") {
        return [](double x, double y) { return bilocal_ij(x, y); };
    }
    if (t.family == "bilocal-xy") {
        return [](double x, double y) { return bilocal_xy(x, y); };
    }
    throw UsageError("grid sweeps need --target bilocal-ij or bilocal-xy");
}

std::vector<double> linspace(double from, double to, int steps) {
    if (steps < 1) throw UsageError("step counts must be >= 1");
    std::vector<double> values;
    if (steps == 1) {
        values.push_back(from);
        return values;
    }
    for (int k = 0; k < steps; ++k) {
        values.push_back(from + (to - from) * static_cast<double>(k) / (steps - 1));
    }
    return values;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw InputDataError("cannot write " + out_path);
    file << text;
}

LocalModel resolve_builtin(const std::string& name, TargetOptions& target) {
    if (name == "ghz222") {
        if (target.family.empty()) {
            target.family = "ghz";
            if (target.v.empty()) target.v = "0.25";
        }
        return ghz_model_222();
    }
    if (name == "ghz322") {
        const double v = target.v.empty() ? 1.0 / 3.0 : resolve_v(target.v, "ghz");
        if (target.family.empty()) {
            target.family = "ghz";
            target.v = std::to_string(v);
        }
        return ghz_model_322(v);
    }
    if (name == "ghz333") {
        if (target.family.empty()) {
            target.family = "ghz";
            if (target.v.empty()) target.v = "auto";
        }
        return ghz_model_333();
    }
    if (name == "w") {
        const double v = (target.v == "auto" || target.v.empty())
                             ? w_critical_visibility()
                             : resolve_v(target.v, "w");
        if (target.family.empty()) target.family = "w";
        if (target.v.empty()) target.v = "auto";
        return w_model(v);
    }
    if (name == "bilocal-boundary") {
        if (target.family.empty()) {
            target.family = "bilocal-xy";
            target.y = 1.0 - target.x;
        }
        return bilocal_boundary_model(target.x);
    }
    throw UsageError("unknown builtin model '" + name + "'");
}

int run_fit(const NetworkOptions& net, const TargetOptions& target_opt,
            const SolverOptions& solver_opt, const std::vector<int>& cards,
            const std::string& out_path) {
    const NetworkTopology topo = resolve_network(net);
    const Behaviour target = resolve_target(target_opt);
    const SolverSettings settings = resolve_settings(solver_opt);
    const FitResult result = fit(target, topo, cards, settings);
    write_output(out_path, fit_result_to_json(result) + "\n");
    std::fprintf(stderr, "fit: best_rmse=%.6e (threshold %.1e) over %d restarts -> %s\n",
                 result.best_rmse, settings.rmse_threshold, settings.restarts,
                 result.success ? "success" : "failure");
    return result.success ? 0 : 2;
}

int run_sweep(const NetworkOptions& net, const TargetOptions& target_opt,
              const SolverOptions& solver_opt, const std::vector<int>& cards,
              const std::vector<double>& v_list, double v_from, double v_to, int v_steps,
              const std::string& out_path) {
    const NetworkTopology topo = resolve_network(net);
    const Family1D family = resolve_family_1d(target_opt);
    const SolverSettings settings = resolve_settings(solver_opt);
    const std::vector<double> values =
        v_list.empty() ? linspace(v_from, v_to, v_steps) : v_list;
    const auto records = visibility_sweep(family, values, topo, cards, settings);
    std::ostringstream os;
    write_sweep_csv(os, records);
    write_output(out_path, os.str());
    return 0;
}

int run_grid(const NetworkOptions& net, const TargetOptions& target_opt,
             const SolverOptions& solver_opt, const std::vector<int>& cards,
             double x_from, double x_to, int x_steps, double y_from, double y_to,
             int y_steps, const std::string& out_path) {
    const NetworkTopology topo = resolve_network(net);
    const Family2D family = resolve_family_2d(target_opt);
    const SolverSettings settings = resolve_settings(solver_opt);
    const auto records = grid_sweep(family, linspace(x_from, x_to, x_steps),
                                    linspace(y_from, y_to, y_steps), topo, cards, settings);
    std::ostringstream os;
    write_grid_csv(os, records);
    write_output(out_path, os.str());
    return 0;
}

int run_critical_v(const NetworkOptions& net, const TargetOptions& target_opt,
                   const SolverOptions& solver_opt, const std::vector<int>& cards,
                   double v_lo, double v_hi, double v_tol, const std::string& out_path) {
    const NetworkTopology topo = resolve_network(net);
    const Family1D family = resolve_family_1d(target_opt);
    const SolverSettings settings = resolve_settings(solver_opt);
    const double vc = critical_visibility(family, topo, cards, solver_opt.threshold,
                                          v_lo, v_hi, v_tol, settings);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "{\"v_critical\":%.17g,\"threshold\":%.17g,\"v_tol\":%.17g}\n", vc,
                  solver_opt.threshold, v_tol);
    write_output(out_path, buf);
    return 0;
}

int run_ejm_table(const SolverOptions& solver_opt, int c_max, double v_tol, double v_lo,
                  double v_hi, const std::string& out_path) {
    const SolverSettings settings = resolve_settings(solver_opt);
    const auto rows = ejm_cardinality_table(c_max, settings, solver_opt.threshold, v_tol,
                                            v_lo, v_hi);
    std::ostringstream os;
    write_ejm_csv(os, rows);
    write_output(out_path, os.str());
    return 0;
}

int run_bound(const NetworkOptions& net, const std::optional<int>& source,
              const std::string& out_path) {
    const NetworkTopology topo = resolve_network(net);
    std::vector<long long> bounds;
    for (int s = 0; s < topo.source_count; ++s) {
        bounds.push_back(cardinality_upper_bound(topo, s));
    }
    std::string text;
    if (source) {
        if (*source < 0 || *source >= topo.source_count) {
            throw UsageError("--source out of range");
        }
        text = std::to_string(bounds[*source]) + "\n";
    } else if (std::all_of(bounds.begin(), bounds.end(),
                           [&](long long b) { return b == bounds[0]; })) {
        text = std::to_string(bounds[0]) + "\n";
    } else {
        for (std::size_t s = 0; s < bounds.size(); ++s) {
            text += (s ? " " : "") + std::to_string(bounds[s]);
        }
        text += "\n";
    }
    write_output(out_path, text);
    return 0;
}

int run_verify(const std::string& model_file, const std::string& builtin,
               TargetOptions target_opt, double threshold,
               const std::string& export_path) {
    LocalModel model;
    if (!model_file.empty() && !builtin.empty()) {
        throw UsageError("pass either --model or --builtin, not both");
    }
    if (!model_file.empty()) {
        model = load_model(model_file);
    } else if (!builtin.empty()) {
        model = resolve_builtin(builtin, target_opt);
    } else {
        throw UsageError("verify needs --model FILE or --builtin NAME");
    }
    if (!export_path.empty()) {
        save_model(model, export_path);
    }
    if (target_opt.family.empty()) {
        throw UsageError("verify needs --target (or a --builtin with a default target)");
    }
    const Behaviour target = resolve_target(target_opt);
    const Behaviour behaved = evaluate_model(model);
    if (!behaved.same_shape(target)) {
        throw InputDataError("verify: model behaviour shape does not match the target");
    }
    double cost = 0.0;
    for (std::size_t k = 0; k < behaved.data.size(); ++k) {
        const double d = behaved.data[k] - target.data[k];
        cost += d * d;
    }
    const double rmse = rmse_of(cost, behaved.data.size());
    const double worst = max_abs_difference(behaved, target);
    const bool success = rmse <= threshold;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "{\"rmse\":%.17g,\"max_abs_error\":%.17g,\"threshold\":%.17g,"
                  "\"success\":%s}\n",
                  rmse, worst, threshold, success ? "true" : "false");
    std::cout << buf;
    return success ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-cardinality local models for network scenarios"};
    app.require_subcommand(1);

    NetworkOptions net;
    TargetOptions target;
    SolverOptions fit_solver, sweep_solver, grid_solver, crit_solver, ejm_solver;
    std::vector<int> cards;
    std::string out_path;

    auto add_target_flags = [&target](CLI::App* cmd) {
        cmd->add_option("--target", target.family,
                        "Target family: ghz, w, ejm, bilocal-ij, bilocal-xy, file");
        cmd->add_option("--v", target.v, "Family visibility (number or 'auto')");
        cmd->add_option("--i", target.i, "Bilocal I coordinate");
        cmd->add_option("--j", target.j, "Bilocal J coordinate");
        cmd->add_option("--x", target.x, "Bilocal X coordinate");
        cmd->add_option("--y", target.y, "Bilocal Y coordinate");
        cmd->add_option("--target-file", target.file, "Behaviour JSON for --target file");
    };

    auto* fit_cmd = app.add_subcommand("fit", "Fit a local model to a target behaviour");
    add_network_flags(fit_cmd, net);
    add_target_flags(fit_cmd);
    fit_cmd->add_option("--cards", cards, "Source cardinalities, e.g. 3,2,2")
        ->required()
        ->delimiter(',');
    add_solver_flags(fit_cmd, fit_solver, 1e-6);
    fit_cmd->add_option("--out", out_path, "Write the FitResult JSON here");

    auto* sweep_cmd = app.add_subcommand("sweep", "Visibility sweep, CSV output");
    add_network_flags(sweep_cmd, net);
    add_target_flags(sweep_cmd);
    std::vector<double> v_list;
    double v_from = 0.0, v_to = 1.0;
    int v_steps = 11;
    sweep_cmd->add_option("--cards", cards, "Source cardinalities")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--v-from", v_from, "Sweep start")->capture_default_str();
    sweep_cmd->add_option("--v-to", v_to, "Sweep end")->capture_default_str();
    sweep_cmd->add_option("--v-steps", v_steps, "Number of sweep points")
        ->capture_default_str();
    sweep_cmd->add_option("--v-list", v_list, "Explicit visibility list")->delimiter(',');
    add_solver_flags(sweep_cmd, sweep_solver, 1e-6);
    sweep_cmd->add_option("--out", out_path, "Write the CSV here");

    auto* grid_cmd = app.add_subcommand("grid", "2-D slice scan, CSV output");
    add_network_flags(grid_cmd, net);
    add_target_flags(grid_cmd);
    double x_from = -1.0, x_to = 1.0, y_from = -1.0, y_to = 1.0;
    int x_steps = 9, y_steps = 9;
    grid_cmd->add_option("--cards", cards, "Source cardinalities")
        ->required()
        ->delimiter(',');
    grid_cmd->add_option("--x-from", x_from)->capture_default_str();
    grid_cmd->add_option("--x-to", x_to)->capture_default_str();
    grid_cmd->add_option("--x-steps", x_steps)->capture_default_str();
    grid_cmd->add_option("--y-from", y_from)->capture_default_str();
    grid_cmd->add_option("--y-to", y_to)->capture_default_str();
    grid_cmd->add_option("--y-steps", y_steps)->capture_default_str();
    add_solver_flags(grid_cmd, grid_solver, 1e-6);
    grid_cmd->add_option("--out", out_path, "Write the CSV here");

    auto* crit_cmd =
        app.add_subcommand("critical-v", "Bisect for the critical visibility");
    add_network_flags(crit_cmd, net);
    add_target_flags(crit_cmd);
    double v_lo = 0.0, v_hi = 0.9, v_tol = 0.01;
    crit_cmd->add_option("--cards", cards, "Source cardinalities")
        ->required()
        ->delimiter(',');
    crit_cmd->add_option("--v-lo", v_lo, "Known-success visibility")->capture_default_str();
    crit_cmd->add_option("--v-hi", v_hi, "Known-failure visibility")->capture_default_str();
    crit_cmd->add_option("--v-tol", v_tol, "Bracket width at termination")
        ->capture_default_str();
    add_solver_flags(crit_cmd, crit_solver, 1e-6);
    crit_cmd->add_option("--out", out_path, "Write the result JSON here");

    auto* ejm_cmd = app.add_subcommand(
        "ejm-table", "EJM critical-visibility table over cardinality triples");
    int c_max = 4;
    double ejm_v_tol = 0.01, ejm_v_lo = 0.0, ejm_v_hi = 0.9;
    ejm_cmd->add_option("--c-max", c_max, "Largest cardinality")->capture_default_str();
    ejm_cmd->add_option("--v-tol", ejm_v_tol)->capture_default_str();
    ejm_cmd->add_option("--v-lo", ejm_v_lo)->capture_default_str();
    ejm_cmd->add_option("--v-hi", ejm_v_hi)->capture_default_str();
    add_solver_flags(ejm_cmd, ejm_solver, 1e-4);
    ejm_cmd->add_option("--out", out_path, "Write the CSV here");

    auto* bound_cmd =
        app.add_subcommand("bound", "Hidden-variable cardinality upper bounds");
    add_network_flags(bound_cmd, net);
    std::optional<int> bound_source;
    bound_cmd->add_option("--source", bound_source, "Report only this source");
    bound_cmd->add_option("--out", out_path, "Write the bound here");

    auto* verify_cmd =
        app.add_subcommand("verify", "Evaluate a model against a target family");
    std::string model_file, builtin_name;
    double verify_threshold = 1e-8;
    verify_cmd->add_option("--model", model_file, "Model JSON file");
    verify_cmd->add_option(
        "--builtin", builtin_name,
        "Built-in model: ghz222, ghz322, ghz333, w, bilocal-boundary");
    add_target_flags(verify_cmd);
    verify_cmd->add_option("--threshold", verify_threshold, "Success RMSE threshold")
        ->capture_default_str();
    verify_cmd->add_option("--out", out_path, "Export the model JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (fit_cmd->parsed()) {
            return run_fit(net, target, fit_solver, cards, out_path);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(net, target, sweep_solver, cards, v_list, v_from,
                             v_to, v_steps, out_path);
        }
        if (grid_cmd->parsed()) {
            return run_grid(net, target, grid_solver, cards, x_from, x_to, x_steps,
                            y_from, y_to, y_steps, out_path);
        }
        if (crit_cmd->parsed()) {
            return run_critical_v(net, target, crit_solver, cards, v_lo, v_hi,
                                  v_tol, out_path);
        }
        if (ejm_cmd->parsed()) {
            return run_ejm_table(ejm_solver, c_max, ejm_v_tol, ejm_v_lo, ejm_v_hi,
                                 out_path);
        }
        if (bound_cmd->parsed()) {
            return run_bound(net, bound_source, out_path);
        }
        if (verify_cmd->parsed()) {
            return run_verify(model_file, builtin_name, target, verify_threshold,
                              out_path);
        }
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const InputDataError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const StructuralError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const InvalidFamilyPoint& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const BracketError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const SelectionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const FeasibilityError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
