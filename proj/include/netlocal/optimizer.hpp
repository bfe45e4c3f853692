#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netlocal/behaviour.hpp"
#include "netlocal/model.hpp"
#include "netlocal/parameters.hpp"
#include "netlocal/topology.hpp"

namespace netlocal {

struct SolverSettings {
    int restarts = 50;
    int max_iterations = 2000;
    double gtol = 1e-10;            // infinity norm of the projected gradient
    double rmse_threshold = 1e-6;   // success below this (1e-4 for EJM tables)
    std::uint64_t master_seed = 0;
    double feasibility_tol = 1e-12;
    int threads = 0;                // 0 = hardware concurrency
    // Restarts stop once cost falls below (rmse_threshold/2)^2 * n_entries;
    // a safe margin under the success line. Set false to always run to
    // stationarity.
    bool stop_at_cost_target = true;
};

struct RestartRecord {
    std::uint64_t seed = 0;
    double cost = 0.0;
    int iterations = 0;
    std::string reason;
};

struct FitResult {
    LocalModel best_model;
    double best_cost = 0.0;
    double best_rmse = 0.0;
    std::vector<RestartRecord> per_restart;
    bool success = false;
    int best_index = -1;
};

// sqrt(cost / n_entries): the paper's colour-scale quantity.
double rmse_of(double cost, std::size_t n_entries);

// Sum of squared errors between the model behaviour at `vector` and the
// target. Throws FeasibilityError on an infeasible vector.
double cost(const ParameterVector& vector, const ParameterLayout& layout,
            const Behaviour& target);

// Exact gradient with respect to every stored coordinate, including the
// chain term from each block's implied last simplex coordinate.
ParameterVector cost_gradient(const ParameterVector& vector,
                              const ParameterLayout& layout,
                              const Behaviour& target);

// Per block, Euclidean projection of the stored coordinates onto
// {p_i >= 0, sum p_i <= 1}. Idempotent.
ParameterVector project_feasible(ParameterVector vector,
                                 const ParameterLayout& layout);

struct SolveOutcome {
    ParameterVector x;
    double cost = 0.0;
    int iterations = 0;
    std::string reason;
};

// Projected first-order descent with monotone line search, accelerated by
// damped Gauss-Newton trial steps. Terminates when the projected-gradient
// infinity norm falls below gtol, at max_iterations, at the optional cost
// target, or when no decreasing step exists at machine precision.
SolveOutcome solve_single(const ParameterVector& start, const ParameterLayout& layout,
                          const Behaviour& target, const SolverSettings& settings);

// Multi-restart fit from flat-Dirichlet random starts. Restart r draws its
// RNG stream from derive_seed(master_seed, r), so the result is identical
// for a given master_seed regardless of thread count; cost ties break
// toward the lowest restart index.
FitResult fit(const Behaviour& target, const NetworkTopology& topo,
              const std::vector<int>& cardinalities, const SolverSettings& settings);

// Uniform samples from each block's simplex (flat Dirichlet), stored
// coordinates only.
ParameterVector random_feasible(const ParameterLayout& layout, std::uint64_t seed);

}  // namespace netlocal
