#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "netlocal/behaviour.hpp"
#include "netlocal/optimizer.hpp"
#include "netlocal/topology.hpp"

namespace netlocal {

using Family1D = std::function<Behaviour(double)>;
using Family2D = std::function<Behaviour(double, double)>;

struct SweepRecord {
    double x = 0.0;  // v, or the first slice coordinate
    double y = 0.0;  // second slice coordinate (grid sweeps)
    std::vector<int> cardinalities;
    double rmse = 0.0;
    double cost = 0.0;
    bool success = false;
    bool skipped = false;  // family point outside the simplex
    int restarts = 0;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

// One fit per v, with the point at index i seeded from
// derive_seed(master_seed, i). Records come back in input order.
std::vector<SweepRecord> visibility_sweep(const Family1D& family,
                                          const std::vector<double>& v_values,
                                          const NetworkTopology& topo,
                                          const std::vector<int>& cardinalities,
                                          const SolverSettings& settings);

// One fit per (x, y) pair, row-major over x_values then y_values. Family
// points outside the simplex are recorded as skipped, keeping the grid
// rectangular.
std::vector<SweepRecord> grid_sweep(const Family2D& family,
                                    const std::vector<double>& x_values,
                                    const std::vector<double>& y_values,
                                    const NetworkTopology& topo,
                                    const std::vector<int>& cardinalities,
                                    const SolverSettings& settings);

// Bisection on the fit-success predicate, assuming success is monotone in
// v. Requires success at v_lo and failure at v_hi (BracketError otherwise);
// each predicate evaluation spends the full restart budget.
double critical_visibility(const Family1D& family, const NetworkTopology& topo,
                           const std::vector<int>& cardinalities,
                           double rmse_threshold, double v_lo, double v_hi,
                           double v_tol, const SolverSettings& settings);

struct EjmTableRow {
    int c_alpha = 0;
    int c_beta = 0;
    int c_gamma = 0;
    double v_critical = 0.0;
    double threshold = 0.0;
    double v_tol = 0.0;
};

// Critical visibility of the EJM family for every ordered cardinality
// triple c_alpha >= c_beta >= c_gamma in [2, c_max]; permuted triples are
// covered by the party symmetry of the target.
std::vector<EjmTableRow> ejm_cardinality_table(int c_max, const SolverSettings& settings,
                                               double threshold = 1e-4,
                                               double v_tol = 0.01,
                                               double v_lo = 0.0, double v_hi = 0.9);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// Least-squares line through (v, rmse) over the failed records with
// v in [v_min, v_max]. Requires at least 3 such records.
SlopeFit slope_fit(const std::vector<SweepRecord>& records, double v_min, double v_max);

// CSV emitters; header row first, floats with 17 significant digits.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_grid_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_ejm_csv(std::ostream& os, const std::vector<EjmTableRow>& rows);

}  // namespace netlocal
