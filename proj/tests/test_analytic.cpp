#include <doctest.h>

#include <cmath>

#include "netlocal/analytic.hpp"
#include "netlocal/errors.hpp"
#include "netlocal/model.hpp"
#include "netlocal/targets.hpp"
#include "test_helpers.hpp"

using namespace netlocal;

TEST_CASE("quartic roots match their defining polynomials") {
    const double a = ghz_param_a();
    const double b = ghz_param_b();
    const double vg = ghz_critical_visibility();
    const double vw = w_critical_visibility();

    CHECK(a == doctest::Approx(0.45442257435107214).epsilon(1e-11));
    CHECK(b == doctest::Approx(0.38611289550124506).epsilon(1e-11));
    CHECK(vg == doctest::Approx(0.3621418794092688).epsilon(1e-11));
    CHECK(vw == doctest::Approx(0.596646757202915).epsilon(1e-11));

    CHECK(std::abs(12 * std::pow(a, 4) - 8 * std::pow(a, 3) + 6 * a * a - 1) <= 1e-9);
    CHECK(std::abs(4 * std::pow(b, 4) - 8 * b + 3) <= 1e-9);
    CHECK(std::abs(3 * std::pow(vg, 4) + 28 * std::pow(vg, 3) + 66 * vg * vg - 36 * vg + 3) <=
          1e-9);
    CHECK(std::abs(4 * std::pow(vw, 4) - 30 * std::pow(vw, 3) + 63 * vw * vw + 108 * vw - 81) <=
          1e-9);

    // the two independent routes to the (3,3,3) critical visibility agree
    CHECK(std::abs((2.0 * b - 3.0 + 1.0 / b) - vg) <= 1e-9);
}

TEST_CASE("poly_root selection rules") {
    // largest real root picks 0.362... over the smaller 0.104... root
    QuarticSpec ghz_quartic{{3.0, -36.0, 66.0, 28.0, 3.0}, QuarticSpec::Rule::LargestReal};
    const double r = poly_root(ghz_quartic);
    CHECK(r == doctest::Approx(0.3621418794092688).epsilon(1e-11));
    CHECK(std::abs(ghz_quartic(r)) <= 1e-9);

    // an interval whose endpoints agree in sign is rejected
    QuarticSpec no_root{{1.0, 0.0, 0.0, 0.0, 1.0}, QuarticSpec::Rule::UniqueInInterval, 0.0,
                        1.0};
    CHECK_THROWS_AS(poly_root(no_root), SelectionError);
    no_root.rule = QuarticSpec::Rule::LargestReal;
    CHECK_THROWS_AS(poly_root(no_root), SelectionError);

    QuarticSpec degenerate{{1.0, 0.0, 0.0, 0.0, 0.0}, QuarticSpec::Rule::LargestReal};
    CHECK_THROWS_AS(poly_root(degenerate), SelectionError);
}

TEST_CASE("ghz_model_222 reproduces ghz(1/4)") {
    const auto model = ghz_model_222();
    CHECK(validate(model).empty());
    const auto behaviour = evaluate_model(model);
    CHECK(behaviour.data[0] == doctest::Approx(7.0 / 32.0).epsilon(1e-15));
    CHECK(max_abs_difference(behaviour, ghz(0.25)) <= 1e-15);
    CHECK(max_abs_difference(behaviour, testutil::naive_behaviour(model)) <= 1e-15);
    // party symmetry of the evaluated table
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                CHECK(behaviour.data[(a * 2 + b) * 2 + c] ==
                      doctest::Approx(behaviour.data[(b * 2 + c) * 2 + a]).epsilon(1e-15));
            }
}

TEST_CASE("ghz_model_322 covers [0, 1/3]") {
    for (double v : {0.0, 0.1, 0.2, 1.0 / 3.0, 0.25}) {
        const auto model = ghz_model_322(v);
        CHECK(validate(model).empty());
        CHECK(max_abs_difference(evaluate_model(model), ghz(v)) <= 1e-12);
    }
    // at the edge of the domain Alice's (0,0) entry hits zero
    const auto critical = ghz_model_322(1.0 / 3.0);
    CHECK(std::abs(critical.responses[0].data[0]) <= 1e-15);
    const auto flat = evaluate_model(ghz_model_322(0.0));
    for (double p : flat.data) CHECK(p == doctest::Approx(0.125).epsilon(1e-14));

    CHECK_THROWS_AS(ghz_model_322(0.34), DomainError);
    CHECK_THROWS_AS(ghz_model_322(-0.01), DomainError);
}

TEST_CASE("ghz_model_333 hits the critical visibility") {
    const auto model = ghz_model_333();
    CHECK(validate(model).empty());
    const double a = ghz_param_a();
    const double b = ghz_param_b();
    CHECK(1.0 - a - b >= 0.0);
    CHECK(1.0 - a - b <= 1.0);

    const double v = 2.0 * b - 3.0 + 1.0 / b;
    CHECK(max_abs_difference(evaluate_model(model), ghz(v)) <= 1e-10);
    CHECK(max_abs_difference(evaluate_model(model), testutil::naive_behaviour(model)) <=
          1e-15);
}

TEST_CASE("w_model covers [0, v_c]") {
    const double vc = w_critical_visibility();
    for (double v : {0.0, 0.3, 0.5, vc}) {
        const auto model = w_model(v);
        CHECK(validate(model).empty());
        CHECK(max_abs_difference(evaluate_model(model), w_dist(v)) <= 1e-12);
    }
    // Alice's off-diagonal entries reach exactly 1 at v_c
    const auto critical = w_model(vc);
    const auto& alice = critical.responses[0].data;
    CHECK(std::abs(alice[1] - 1.0) <= 1e-9);
    CHECK(std::abs(alice[2] - 1.0) <= 1e-9);

    CHECK_THROWS_AS(w_model(vc + 1e-6), DomainError);
    CHECK_THROWS_AS(w_model(-0.01), DomainError);
}

TEST_CASE("analytic models track their families across the domain") {
    for (int k = 0; k <= 20; ++k) {
        const double v322 = (1.0 / 3.0) * k / 20.0;
        CHECK(max_abs_difference(evaluate_model(ghz_model_322(v322)), ghz(v322)) <= 1e-10);
        const double vw = w_critical_visibility() * k / 20.0;
        CHECK(max_abs_difference(evaluate_model(w_model(vw)), w_dist(vw)) <= 1e-10);
        const double X = static_cast<double>(k) / 20.0;
        CHECK(max_abs_difference(evaluate_model(bilocal_boundary_model(X)),
                                 bilocal_xy(X, 1.0 - X)) <= 1e-10);
    }
}

TEST_CASE("bilocal boundary model") {
    for (double X : {0.0, 0.25, 0.5, 1.0}) {
        const auto model = bilocal_boundary_model(X);
        CHECK(validate(model).empty());
        const auto behaviour = evaluate_model(model);
        CHECK(max_abs_difference(behaviour, bilocal_xy(X, 1.0 - X)) <= 1e-12);
        CHECK(max_abs_difference(behaviour, testutil::naive_behaviour(model)) <= 1e-15);
    }
    const int o000[] = {0, 0, 0}, in000[] = {0, 0, 0};
    CHECK(evaluate_model(bilocal_boundary_model(1.0)).at(o000, in000) ==
          doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK_THROWS_AS(bilocal_boundary_model(1.1), DomainError);
    CHECK_THROWS_AS(bilocal_boundary_model(-0.1), DomainError);
}

TEST_CASE("relabel permutes entries") {
    const auto b = bilocal_xy(0.4, 0.3);
    const std::vector<std::vector<int>> id_out = {{0, 1}, {0, 1}, {0, 1}};
    const std::vector<std::vector<int>> id_in = id_out;

    CHECK(max_abs_difference(relabel(b, id_out, id_in), b) == 0.0);

    // flipping Bob's output negates both slice coordinates
    const std::vector<std::vector<int>> flip_bob = {{0, 1}, {1, 0}, {0, 1}};
    const auto flipped = relabel(b, flip_bob, id_in);
    CHECK(max_abs_difference(flipped, bilocal_xy(-0.4, -0.3)) <= 1e-15);
    CHECK(flipped.check().empty());

    // involution
    CHECK(max_abs_difference(relabel(flipped, flip_bob, id_in), b) == 0.0);

    // a global output flip fixes the ghz family
    const auto g = ghz(0.37);
    const std::vector<std::vector<int>> flip_all = {{1, 0}, {1, 0}, {1, 0}};
    const std::vector<std::vector<int>> id_in1 = {{0}, {0}, {0}};
    CHECK(max_abs_difference(relabel(g, flip_all, id_in1), g) <= 1e-16);

    // composition with the inverse is exact for a non-involutive permutation
    const auto e = ejm(0.3);
    const std::vector<std::vector<int>> sigma = {{1, 2, 3, 0}, {1, 2, 3, 0}, {1, 2, 3, 0}};
    const std::vector<std::vector<int>> sigma_inv = {{3, 0, 1, 2}, {3, 0, 1, 2}, {3, 0, 1, 2}};
    const auto permuted = relabel(e, sigma, id_in1);
    CHECK(max_abs_difference(relabel(permuted, sigma_inv, id_in1), e) == 0.0);
    // ejm is invariant under a simultaneous output relabelling
    CHECK(max_abs_difference(permuted, e) <= 1e-16);

    CHECK_THROWS_AS(relabel(g, {{0, 1}, {0, 1}}, id_in1), StructuralError);
    CHECK_THROWS_AS(relabel(g, {{0, 0}, {0, 1}, {0, 1}}, id_in1), StructuralError);
}

TEST_CASE("input relabelling moves bilocal slice coordinates") {
    // swapping Bob's input exchanges the roles of p_X and p_Y up to the
    // z-dependence, so probe the (X, 0) <-> (0, X)-like mapping numerically
    const auto b = bilocal_xy(0.6, 0.0);
    const std::vector<std::vector<int>> id_out = {{0, 1}, {0, 1}, {0, 1}};
    const std::vector<std::vector<int>> swap_bob_in = {{0, 1}, {1, 0}, {0, 1}};
    const auto swapped = relabel(b, id_out, swap_bob_in);
    CHECK(swapped.check().empty());
    // total mass per input tuple survives any relabelling
    const auto again = relabel(swapped, id_out, swap_bob_in);
    CHECK(max_abs_difference(again, b) == 0.0);
}

TEST_CASE("error_slope reproduces the paper's slopes") {
    const auto p0 = ghz(0.0);
    CHECK(error_slope(ghz(1.0), p0) ==
          doctest::Approx(std::sqrt(3.0) / 8.0).epsilon(1e-15));
    CHECK(error_slope(w_dist(1.0), p0) ==
          doctest::Approx(std::sqrt(15.0) / 24.0).epsilon(1e-15));
    CHECK(error_slope(p0, p0) == 0.0);
    CHECK_THROWS_AS(error_slope(ghz(1.0), ejm(0.0)), StructuralError);
}
