#pragma once

#include <array>
#include <vector>

#include "netlocal/behaviour.hpp"
#include "netlocal/model.hpp"

namespace netlocal {

// A fixed quartic together with the rule isolating the root of interest.
struct QuarticSpec {
    // coefficients[k] multiplies x^k; leading coefficient nonzero
    std::array<double, 5> coefficients{};
    enum class Rule { LargestReal, UniqueInInterval } rule = Rule::UniqueInInterval;
    double lo = 0.0;
    double hi = 1.0;  // bracket for UniqueInInterval

    double operator()(double x) const;
};

// Sign-bisection on the isolating bracket; |root error| <= tol. Throws
// SelectionError when the rule does not isolate exactly one root.
double poly_root(const QuarticSpec& spec, double tol = 1e-12);

// Constants of the triangle models: the unique roots in [0,1] of
// 12a^4 - 8a^3 + 6a^2 - 1 and 4b^4 - 8b + 3.
double ghz_param_a();
double ghz_param_b();

// Critical visibilities: the largest real root of
// 3v^4 + 28v^3 + 66v^2 - 36v + 3, and the [0,1] root of
// 4v^4 - 30v^3 + 63v^2 + 108v - 81.
double ghz_critical_visibility();
double w_critical_visibility();

// Exact closed-form models. Each reproduces its target family on the
// stated domain; out-of-domain parameters throw DomainError.
LocalModel ghz_model_222();                  // ghz(1/4)
LocalModel ghz_model_322(double v);          // ghz(v), 0 <= v <= 1/3
LocalModel ghz_model_333();                  // ghz(v) at v = 2b - 3 + 1/b
LocalModel w_model(double v);                // w_dist(v), 0 <= v <= v_c
LocalModel bilocal_boundary_model(double X); // bilocal_xy(X, 1-X), X in [0,1]

// Entry permutation of a behaviour table: output value o of party p becomes
// output_perms[p][o], and likewise for inputs.
Behaviour relabel(const Behaviour& b,
                  const std::vector<std::vector<int>>& output_perms,
                  const std::vector<std::vector<int>>& input_perms);

// Slope of the RMSE-vs-visibility line beyond the critical point for a
// symmetric family: sqrt(sum (p0 - p1)^2 / N).
double error_slope(const Behaviour& p1, const Behaviour& p0);

}  // namespace netlocal
