#include <doctest.h>

#include <cmath>
#include <sstream>

#include "netlocal/errors.hpp"
#include "netlocal/experiments.hpp"
#include "netlocal/optimizer.hpp"
#include "netlocal/rng.hpp"
#include "netlocal/targets.hpp"
#include "netlocal/topology.hpp"

using namespace netlocal;

namespace {

SolverSettings fast_settings() {
    SolverSettings s;
    s.restarts = 10;
    s.max_iterations = 600;
    s.master_seed = 17;
    return s;
}

}  // namespace

TEST_CASE("visibility_sweep is deterministic and ordered") {
    const auto family = [](double v) { return ghz(v); };
    const std::vector<double> vs = {0.1, 0.22, 0.15};
    const auto a = visibility_sweep(family, vs, make_triangle(2), {2, 2, 2}, fast_settings());
    const auto b = visibility_sweep(family, vs, make_triangle(2), {2, 2, 2}, fast_settings());
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a[i].x == vs[i]);  // input order, not sorted
        CHECK(a[i].rmse == b[i].rmse);
        CHECK(a[i].cost == b[i].cost);
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].restarts == 10);
        CHECK(a[i].rmse == doctest::Approx(std::sqrt(a[i].cost / 8.0)).epsilon(1e-12));
        CHECK(a[i].success);  // all three sit below v_c = 1/4
    }
    CHECK(a[0].seed != a[1].seed);  // per-point streams
}

TEST_CASE("sweep points above the (2,2,2) critical visibility fail") {
    const auto records = visibility_sweep([](double v) { return ghz(v); }, {0.1, 0.32},
                                          make_triangle(2), {2, 2, 2}, fast_settings());
    CHECK(records[0].success);
    CHECK_FALSE(records[1].success);
    CHECK(records[1].rmse > 1e-4);
}

TEST_CASE("re-running the fit of a sweep point reproduces the recorded rmse") {
    const auto family = [](double v) { return ghz(v); };
    const std::vector<double> vs = {0.15, 0.22};
    const auto settings = fast_settings();
    const auto records =
        visibility_sweep(family, vs, make_triangle(2), {2, 2, 2}, settings);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        SolverSettings point = settings;
        point.master_seed = derive_seed(settings.master_seed, i);
        const auto again = fit(family(vs[i]), make_triangle(2), {2, 2, 2}, point);
        CHECK(records[i].cost == again.best_cost);
        const auto b = evaluate_model(again.best_model);
        double c2 = 0.0;
        const auto target = family(vs[i]);
        for (std::size_t k = 0; k < b.data.size(); ++k) {
            const double d = b.data[k] - target.data[k];
            c2 += d * d;
        }
        CHECK(rmse_of(c2, 8) == doctest::Approx(records[i].rmse).epsilon(1e-12));
    }
}

TEST_CASE("grid_sweep is row-major with skipped points recorded") {
    int calls = 0;
    const auto family = [&calls](double x, double y) {
        ++calls;
        if (x > 0.9 && y > 0.9) {
            throw InvalidFamilyPoint("synthetic corner");
        }
        return bilocal_ij(x, y);
    };
    auto settings = fast_settings();
    settings.restarts = 4;
    settings.max_iterations = 200;
    const std::vector<double> xs = {0.0, 1.0};
    const std::vector<double> ys = {0.0, 1.0};
    const auto records = grid_sweep(family, xs, ys, make_bilocal(), {4, 4}, settings);
    REQUIRE(records.size() == 4);
    CHECK(records[0].x == 0.0);
    CHECK(records[0].y == 0.0);
    CHECK(records[1].x == 0.0);
    CHECK(records[1].y == 1.0);
    CHECK(records[2].x == 1.0);
    CHECK(records[2].y == 0.0);
    CHECK(records[3].x == 1.0);
    CHECK(records[3].y == 1.0);
    CHECK(records[3].skipped);
    CHECK_FALSE(records[3].success);
    CHECK(std::isnan(records[3].rmse));
    CHECK_FALSE(records[0].skipped);
    CHECK(records[0].success);  // product point is trivially bilocal
}

TEST_CASE("critical_visibility brackets and converges") {
    SolverSettings settings = fast_settings();
    settings.restarts = 16;
    const auto family = [](double v) { return ghz(v); };
    const double vc = critical_visibility(family, make_triangle(2), {2, 2, 2}, 1e-6,
                                          0.18, 0.32, 0.02, settings);
    CHECK(vc == doctest::Approx(0.25).epsilon(0.12));

    CHECK_THROWS_AS(critical_visibility(family, make_triangle(2), {2, 2, 2}, 1e-6, 0.4,
                                        0.5, 0.02, settings),
                    BracketError);  // already failing at v_lo
    CHECK_THROWS_AS(critical_visibility(family, make_triangle(2), {2, 2, 2}, 1e-6, 0.05,
                                        0.10, 0.02, settings),
                    BracketError);  // still succeeding at v_hi
    CHECK_THROWS_AS(critical_visibility(family, make_triangle(2), {2, 2, 2}, 1e-6, 0.3,
                                        0.2, 0.02, settings),
                    DomainError);
}

TEST_CASE("slope_fit recovers synthetic lines") {
    std::vector<SweepRecord> records;
    for (int k = 0; k < 6; ++k) {
        SweepRecord rec;
        rec.x = 0.4 + 0.05 * k;
        rec.rmse = 0.216 * (rec.x - 0.36);
        rec.success = false;
        records.push_back(rec);
    }
    const auto line = slope_fit(records, 0.0, 1.0);
    CHECK(line.slope == doctest::Approx(0.216).epsilon(1e-12));
    CHECK(line.intercept == doctest::Approx(-0.216 * 0.36).epsilon(1e-10));
    CHECK(line.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(line.points == 6);

    // constant records fit a zero slope exactly
    for (auto& rec : records) rec.rmse = 0.125;
    const auto flat = slope_fit(records, 0.0, 1.0);
    CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(flat.r2 == 1.0);

    // successful records are excluded; too few points is an error
    for (auto& rec : records) rec.success = true;
    CHECK_THROWS_AS(slope_fit(records, 0.0, 1.0), DomainError);
}

TEST_CASE("ejm_cardinality_table smallest cell") {
    SolverSettings settings = fast_settings();
    settings.restarts = 12;
    const auto rows = ejm_cardinality_table(2, settings, 1e-4, 0.02, 0.0, 0.2);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].c_alpha == 2);
    CHECK(rows[0].c_beta == 2);
    CHECK(rows[0].c_gamma == 2);
    // paper reports 0.005 for this cell
    CHECK(rows[0].v_critical <= 0.05);
    CHECK(rows[0].threshold == 1e-4);
}

TEST_CASE("csv emitters") {
    SweepRecord rec;
    rec.x = 0.3;
    rec.y = -0.25;
    rec.rmse = 1.0 / 3.0;
    rec.cost = 8.0 * rec.rmse * rec.rmse;
    rec.success = true;
    rec.restarts = 50;
    rec.seed = 12345678901234567890ull;
    rec.wall_ms = 12.5;

    std::ostringstream sweep;
    write_sweep_csv(sweep, {rec});
    const std::string text = sweep.str();
    CHECK(text.find("v,rmse,cost,success,restarts,seed,wall_ms\n") == 0);
    CHECK(text.find("0.33333333333333331") != std::string::npos);  // 17 digits
    CHECK(text.find("12345678901234567890") != std::string::npos);

    std::ostringstream grid;
    rec.skipped = false;
    write_grid_csv(grid, {rec});
    CHECK(grid.str().find("x,y,rmse,cost,success,skipped,seed,wall_ms\n") == 0);
    CHECK(grid.str().find("-0.25,") != std::string::npos);

    std::ostringstream ejm_os;
    write_ejm_csv(ejm_os, {{4, 4, 4, 0.318, 1e-4, 0.01}});
    CHECK(ejm_os.str().find("c_alpha,c_beta,c_gamma,v_critical,threshold,v_tol\n") == 0);
    CHECK(ejm_os.str().find("4,4,4,0.318") != std::string::npos);

    // round trip one float through the emitted text
    const auto pos = text.find("0.33333333333333331");
    const double parsed = std::stod(text.substr(pos));
    CHECK(parsed == rec.rmse);
}
