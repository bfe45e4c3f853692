#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "netlocal/analytic.hpp"
#include "netlocal/errors.hpp"
#include "netlocal/optimizer.hpp"
#include "netlocal/parameters.hpp"
#include "netlocal/rng.hpp"
#include "netlocal/serialization.hpp"
#include "netlocal/targets.hpp"

using namespace netlocal;

namespace {

// Feasible point with clearance from every constraint, so central
// differences stay inside the feasible set.
ParameterVector interior_point(const ParameterLayout& layout, std::uint64_t seed,
                               double margin) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        ParameterVector v = random_feasible(layout, derive_seed(seed, attempt));
        bool ok = true;
        for (const auto& block : layout.blocks) {
            double sum = 0.0;
            for (int i = 0; i < block.stored_length && ok; ++i) {
                const double p = v[block.offset + static_cast<std::size_t>(i)];
                ok = p >= margin;
                sum += p;
            }
            if (!ok || sum > 1.0 - margin) {
                ok = false;
                break;
            }
        }
        if (ok) return v;
    }
}

// Exact projection onto {x >= 0, sum x <= 1} by enumerating active sets;
// exponential in the block length, used as an oracle for short blocks.
std::vector<double> qp_projection(const std::vector<double>& y) {
    const int K = static_cast<int>(y.size());
    std::vector<double> best;
    double best_dist = 0.0;
    for (int zero_mask = 0; zero_mask < (1 << K); ++zero_mask) {
        for (int sum_active = 0; sum_active < 2; ++sum_active) {
            std::vector<double> x(K, 0.0);
            int free_count = 0;
            double free_sum = 0.0;
            for (int i = 0; i < K; ++i) {
                if (!(zero_mask & (1 << i))) {
                    ++free_count;
                    free_sum += y[i];
                }
            }
            if (sum_active && free_count == 0) continue;
            const double theta = sum_active ? (free_sum - 1.0) / free_count : 0.0;
            for (int i = 0; i < K; ++i) {
                if (!(zero_mask & (1 << i))) x[i] = y[i] - theta;
            }
            bool feasible = true;
            double sum = 0.0;
            for (double xi : x) {
                feasible &= xi >= -1e-12;
                sum += xi;
            }
            feasible &= sum <= 1.0 + 1e-12;
            if (!feasible) continue;
            double dist = 0.0;
            for (int i = 0; i < K; ++i) dist += (x[i] - y[i]) * (x[i] - y[i]);
            if (best.empty() || dist < best_dist) {
                best = x;
                best_dist = dist;
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("rmse_of") {
    CHECK(rmse_of(0.0, 64) == 0.0);
    CHECK(rmse_of(0.06, 8) == doctest::Approx(std::sqrt(0.0075)).epsilon(1e-15));
    CHECK(rmse_of(64e-8, 64) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK_THROWS_AS(rmse_of(-1.0, 8), DomainError);
    CHECK_THROWS_AS(rmse_of(1.0, 0), DomainError);
}

TEST_CASE("cost: exact models, closed forms, self-targets") {
    // analytic (3,2,2) model vs its own family point
    const auto model = ghz_model_322(0.3);
    const auto [vec, layout] = pack_parameters(model);
    CHECK(cost(vec, layout, ghz(0.3)) <= 1e-24);

    // uniform model vs ghz(v) costs 3 v^2 / 8
    const auto uniform = uniform_model(make_triangle(2), {2, 2, 2});
    const auto [uvec, ulayout] = pack_parameters(uniform);
    CHECK(cost(uvec, ulayout, ghz(0.4)) == doctest::Approx(0.06).epsilon(1e-14));

    // any model against its own behaviour
    const auto self = evaluate_model(model);
    CHECK(cost(vec, layout, self) <= 1e-28);

    ParameterVector bad = vec;
    bad[0] = -0.5;
    CHECK_THROWS_AS(cost(bad, layout, ghz(0.3)), FeasibilityError);
    CHECK_THROWS_AS(cost_gradient(bad, layout, ghz(0.3)), FeasibilityError);
}

TEST_CASE("gradient vanishes at an exact fit") {
    const auto [vec, layout] = pack_parameters(ghz_model_322(0.2));
    const auto grad = cost_gradient(vec, layout, ghz(0.2));
    for (double g : grad) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("gradient matches central finite differences") {
    struct Scenario {
        NetworkTopology topo;
        std::vector<int> cards;
        Behaviour target;
    };
    const std::vector<Scenario> scenarios = {
        {make_bilocal(), {4, 4}, bilocal_ij(0.4, 0.3)},
        {make_triangle(2), {3, 3, 3}, ghz(0.35)},
    };
    const double h = 1e-6;
    for (const auto& sc : scenarios) {
        const auto layout = ParameterLayout::create(sc.topo, sc.cards);
        for (int rep = 0; rep < 10; ++rep) {
            const auto x = interior_point(layout, 1000 + rep, 1e-4);
            const auto grad = cost_gradient(x, layout, sc.target);
            for (std::size_t i = 0; i < x.size(); i += 7) {  // sampled coordinates
                ParameterVector xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd =
                    (cost(xp, layout, sc.target) - cost(xm, layout, sc.target)) / (2 * h);
                const double scale = std::max({1.0, std::abs(grad[i]), std::abs(fd)});
                CHECK(std::abs(grad[i] - fd) / scale <= 1e-5);
            }
        }
    }
}

TEST_CASE("gradient responds linearly to a target perturbation") {
    const auto layout = ParameterLayout::create(make_triangle(2), {2, 2, 2});
    const auto x = interior_point(layout, 77, 1e-3);
    Behaviour base = evaluate_model(unpack_parameters(x, layout));
    // d cost / d eps at eps = 0 for target = base - eps * e_k is 2 * p_k' ...
    // probe first-order linearity of the gradient in the perturbation size
    auto grad_at = [&](double eps) {
        Behaviour t = base;
        t.data[0] += eps;
        t.data[1] -= eps;  // stay normalized
        return cost_gradient(x, layout, t);
    };
    const auto g1 = grad_at(1e-4);
    const auto g2 = grad_at(2e-4);
    const auto g0 = grad_at(0.0);
    for (std::size_t i = 0; i < g0.size(); ++i) {
        const double d1 = g1[i] - g0[i];
        const double d2 = g2[i] - g0[i];
        CHECK(std::abs(d2 - 2.0 * d1) <= 1e-9);
    }
}

TEST_CASE("project_feasible: fixed cases") {
    const auto layout = ParameterLayout::create(make_bilocal(2, 1), {2, 1});
    // blocks: source0 (len 1), source1 (len 0), responses 2+4+2 cells of len 1
    ParameterVector v(layout.total_stored, 0.2);
    CHECK(project_feasible(v, layout) == v);

    v[0] = 1.2;
    const auto projected = project_feasible(v, layout);
    CHECK(projected[0] == 1.0);

    // a 2-long block: use a triangle source of cardinality 3
    const auto layout3 = ParameterLayout::create(make_triangle(2), {3, 1, 1});
    ParameterVector w(layout3.total_stored, 0.0);
    w[0] = 0.8;
    w[1] = 0.8;
    const auto proj3 = project_feasible(w, layout3);
    CHECK(proj3[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(proj3[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("project_feasible matches the active-set oracle and is idempotent") {
    const auto layout = ParameterLayout::create(make_triangle(2), {4, 3, 2});
    std::mt19937_64 eng(4242);
    std::uniform_real_distribution<double> wide(-1.5, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        ParameterVector v(layout.total_stored);
        for (double& x : v) x = wide(eng);
        const auto projected = project_feasible(v, layout);
        CHECK_NOTHROW(check_feasible(projected, layout, 0.0));
        CHECK(project_feasible(projected, layout) == projected);  // bit-exact

        for (const auto& block : layout.blocks) {
            if (block.stored_length == 0) continue;
            std::vector<double> y(v.begin() + block.offset,
                                  v.begin() + block.offset + block.stored_length);
            const auto oracle = qp_projection(y);
            for (int i = 0; i < block.stored_length; ++i) {
                CHECK(projected[block.offset + static_cast<std::size_t>(i)] ==
                      doctest::Approx(oracle[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("solve_single returns immediately from an exact model") {
    const auto [vec, layout] = pack_parameters(ghz_model_322(0.25));
    SolverSettings settings;
    const auto out = solve_single(vec, layout, ghz(0.25), settings);
    CHECK(out.cost <= 1e-24);
    CHECK(out.iterations == 0);
    CHECK(out.reason == "converged");
    CHECK_THROWS_AS(
        solve_single(ParameterVector(layout.total_stored, -1.0), layout, ghz(0.25), settings),
        FeasibilityError);
}

TEST_CASE("solve_single recovers a perturbed analytic optimum to machine precision") {
    const auto [vec, layout] = pack_parameters(ghz_model_322(0.2));
    std::mt19937_64 eng(909);
    std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
    ParameterVector start = vec;
    for (double& x : start) x += noise(eng);
    start = project_feasible(start, layout);

    SolverSettings settings;
    settings.stop_at_cost_target = false;
    const auto out = solve_single(start, layout, ghz(0.2), settings);
    CHECK(out.cost <= 1e-16);
    CHECK_NOTHROW(check_feasible(out.x, layout, 1e-12));
}

TEST_CASE("solve_single cost is monotone in the iteration budget") {
    const auto layout = ParameterLayout::create(make_triangle(2), {2, 2, 2});
    const auto start = random_feasible(layout, 555);
    SolverSettings settings;
    settings.stop_at_cost_target = false;
    const Behaviour target = ghz(0.5);
    double previous = cost(start, layout, target);
    for (int budget = 1; budget <= 40; ++budget) {
        settings.max_iterations = budget;
        const auto out = solve_single(start, layout, target, settings);
        CHECK(out.cost <= previous + 1e-18);
        previous = out.cost;
    }
}

TEST_CASE("random_feasible is deterministic and feasible") {
    const auto layout = ParameterLayout::create(make_bilocal(), {4, 4});
    const auto a = random_feasible(layout, 31337);
    const auto b = random_feasible(layout, 31337);
    CHECK(a == b);
    CHECK(random_feasible(layout, 31338) != a);
    for (int rep = 0; rep < 20; ++rep) {
        CHECK_NOTHROW(check_feasible(random_feasible(layout, rep), layout, 0.0));
    }
}

TEST_CASE("fit is deterministic across thread counts") {
    const Behaviour target = ghz(0.3);
    SolverSettings settings;
    settings.restarts = 8;
    settings.max_iterations = 300;
    settings.master_seed = 2024;

    settings.threads = 1;
    const auto serial = fit(target, make_triangle(2), {3, 2, 2}, settings);
    settings.threads = 2;
    const auto threaded = fit(target, make_triangle(2), {3, 2, 2}, settings);

    REQUIRE(serial.per_restart.size() == threaded.per_restart.size());
    for (std::size_t r = 0; r < serial.per_restart.size(); ++r) {
        CHECK(serial.per_restart[r].seed == threaded.per_restart[r].seed);
        CHECK(serial.per_restart[r].cost == threaded.per_restart[r].cost);  // bit-exact
        CHECK(serial.per_restart[r].iterations == threaded.per_restart[r].iterations);
        CHECK(serial.per_restart[r].reason == threaded.per_restart[r].reason);
    }
    CHECK(fit_result_to_json(serial) == fit_result_to_json(threaded));

    // invariants on the result record
    double best = serial.per_restart[0].cost;
    for (const auto& rec : serial.per_restart) best = std::min(best, rec.cost);
    CHECK(serial.best_cost == best);
    CHECK(serial.best_rmse == rmse_of(serial.best_cost, target.data.size()));
}

TEST_CASE("fit succeeds on ghz(0.25) with (2,2,2) cardinalities") {
    SolverSettings settings;
    settings.restarts = 50;
    settings.master_seed = 42;
    const auto result = fit(ghz(0.25), make_triangle(2), {2, 2, 2}, settings);
    CHECK(result.success);
    CHECK(result.best_rmse <= 1e-6);
    CHECK(validate(result.best_model).empty());
}

TEST_CASE("fit fails on ghz(0.34) with (3,2,2) cardinalities") {
    SolverSettings settings;
    settings.restarts = 20;
    settings.master_seed = 7;
    const auto result = fit(ghz(0.34), make_triangle(2), {3, 2, 2}, settings);
    CHECK_FALSE(result.success);
    CHECK(result.best_rmse > 1e-6);
}

TEST_CASE("fit succeeds on w(0.58) with (3,2,2) cardinalities") {
    SolverSettings settings;
    settings.restarts = 50;
    settings.master_seed = 11;
    const auto result = fit(w_dist(0.58), make_triangle(2), {3, 2, 2}, settings);
    CHECK(result.success);
}

TEST_CASE("fit beyond the boundary approaches the predicted error floor") {
    // ghz(0.45) with (3,3,3): best rmse should sit near 0.2165 * (0.45 - v_c)
    SolverSettings settings;
    settings.restarts = 20;
    settings.master_seed = 3;
    const auto result = fit(ghz(0.45), make_triangle(2), {3, 3, 3}, settings);
    CHECK_FALSE(result.success);
    const double predicted =
        (std::sqrt(3.0) / 8.0) * (0.45 - ghz_critical_visibility());
    CHECK(result.best_rmse == doctest::Approx(predicted).epsilon(0.25));
}

TEST_CASE("every restart yields a feasible terminal point") {
    const auto layout = ParameterLayout::create(make_bilocal(), {2, 4});
    SolverSettings settings;
    settings.max_iterations = 150;
    for (int rep = 0; rep < 5; ++rep) {
        const auto start = random_feasible(layout, 600 + rep);
        const auto out = solve_single(start, layout, bilocal_xy(0.5, 0.5), settings);
        CHECK_NOTHROW(check_feasible(out.x, layout, 1e-12));
    }
}

TEST_CASE("fit rejects inconsistent inputs") {
    SolverSettings settings;
    settings.restarts = 0;
    CHECK_THROWS_AS(fit(ghz(0.2), make_triangle(2), {2, 2, 2}, settings), DomainError);
    settings.restarts = 1;
    CHECK_THROWS_AS(fit(ghz(0.2), make_bilocal(), {2, 2}, settings), StructuralError);
    CHECK_THROWS_AS(fit(ghz(0.2), make_triangle(2), {2, 2}, settings), StructuralError);
}
