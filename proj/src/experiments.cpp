#include "netlocal/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "netlocal/errors.hpp"
#include "netlocal/rng.hpp"
#include "netlocal/targets.hpp"

namespace netlocal {

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

SweepRecord run_point(const Behaviour& target, const NetworkTopology& topo,
                      const std::vector<int>& cards, SolverSettings settings,
                      std::uint64_t point_seed) {
    settings.master_seed = point_seed;
    SweepRecord rec;
    rec.cardinalities = cards;
    rec.restarts = settings.restarts;
    rec.seed = point_seed;
    const double t0 = now_ms();
    const FitResult fr = fit(target, topo, cards, settings);
    rec.wall_ms = now_ms() - t0;
    rec.rmse = fr.best_rmse;
    rec.cost = fr.best_cost;
    rec.success = fr.success;
    return rec;
}

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

std::vector<SweepRecord> visibility_sweep(const Family1D& family,
                                          const std::vector<double>& v_values,
                                          const NetworkTopology& topo,
                                          const std::vector<int>& cardinalities,
                                          const SolverSettings& settings) {
    std::vector<SweepRecord> records;
    records.reserve(v_values.size());
    for (std::size_t i = 0; i < v_values.size(); ++i) {
        const std::uint64_t point_seed = derive_seed(settings.master_seed, i);
        SweepRecord rec = run_point(family(v_values[i]), topo, cardinalities, settings,
                                    point_seed);
        rec.x = v_values[i];
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<SweepRecord> grid_sweep(const Family2D& family,
                                    const std::vector<double>& x_values,
                                    const std::vector<double>& y_values,
                                    const NetworkTopology& topo,
                                    const std::vector<int>& cardinalities,
                                    const SolverSettings& settings) {
    std::vector<SweepRecord> records;
    records.reserve(x_values.size() * y_values.size());
    std::size_t index = 0;
    for (double x : x_values) {
        for (double y : y_values) {
            const std::uint64_t point_seed = derive_seed(settings.master_seed, index++);
            SweepRecord rec;
            try {
                rec = run_point(family(x, y), topo, cardinalities, settings, point_seed);
            } catch (const InvalidFamilyPoint&) {
                rec.cardinalities = cardinalities;
                rec.restarts = settings.restarts;
                rec.seed = point_seed;
                rec.skipped = true;
                rec.rmse = std::nan("");
                rec.cost = std::nan("");
            }
            rec.x = x;
            rec.y = y;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

double critical_visibility(const Family1D& family, const NetworkTopology& topo,
                           const std::vector<int>& cardinalities,
                           double rmse_threshold, double v_lo, double v_hi,
                           double v_tol, const SolverSettings& settings) {
    if (!(v_lo < v_hi) || !(v_tol > 0.0)) {
        throw DomainError("critical_visibility: requires v_lo < v_hi and v_tol > 0");
    }
    SolverSettings point_settings = settings;
    point_settings.rmse_threshold = rmse_threshold;
    std::uint64_t eval_index = 0;
    auto succeeds = [&](double v) {
        point_settings.master_seed = derive_seed(settings.master_seed, eval_index++);
        return fit(family(v), topo, cardinalities, point_settings).success;
    };

    if (!succeeds(v_lo)) {
        throw BracketError("critical_visibility: fit fails already at v_lo = " +
                           std::to_string(v_lo));
    }
    if (succeeds(v_hi)) {
        throw BracketError("critical_visibility: fit still succeeds at v_hi = " +
                           std::to_string(v_hi));
    }
    while (v_hi - v_lo > v_tol) {
        const double mid = 0.5 * (v_lo + v_hi);
        if (succeeds(mid)) {
            v_lo = mid;
        } else {
            v_hi = mid;
        }
    }
    return 0.5 * (v_lo + v_hi);
}

std::vector<EjmTableRow> ejm_cardinality_table(int c_max, const SolverSettings& settings,
                                               double threshold, double v_tol,
                                               double v_lo, double v_hi) {
    if (c_max < 2) throw DomainError("ejm_cardinality_table: c_max must be >= 2");
    const NetworkTopology topo = make_triangle(4);
    std::vector<EjmTableRow> rows;
    std::uint64_t row_index = 0;
    for (int ca = 2; ca <= c_max; ++ca) {
        for (int cb = 2; cb <= ca; ++cb) {
            for (int cg = 2; cg <= cb; ++cg) {
                SolverSettings row_settings = settings;
                row_settings.master_seed = derive_seed(settings.master_seed, row_index++);
                EjmTableRow row;
                row.c_alpha = ca;
                row.c_beta = cb;
                row.c_gamma = cg;
                row.threshold = threshold;
                row.v_tol = v_tol;
                row.v_critical = critical_visibility(
                    [](double v) { return ejm(v); }, topo, {ca, cb, cg}, threshold,
                    v_lo, v_hi, v_tol, row_settings);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

SlopeFit slope_fit(const std::vector<SweepRecord>& records, double v_min, double v_max) {
    std::vector<std::pair<double, double>> points;
    for (const auto& rec : records) {
        if (!rec.skipped && !rec.success && rec.x >= v_min && rec.x <= v_max) {
            points.emplace_back(rec.x, rec.rmse);
        }
    }
    if (points.size() < 3) {
        throw DomainError("slope_fit: needs at least 3 failed records in range, got " +
                          std::to_string(points.size()));
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    SlopeFit out;
    out.points = static_cast<int>(points.size());
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
        const double e = y - (out.intercept + out.slope * x);
        ss_res += e * e;
    }
    out.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "v,rmse,cost,success,restarts,seed,wall_ms\n";
    for (const auto& r : records) {
        os << fmt(r.x) << ',' << fmt(r.rmse) << ',' << fmt(r.cost) << ','
           << (r.success ? 1 : 0) << ',' << r.restarts << ',' << r.seed << ','
           << fmt(r.wall_ms) << '\n';
    }
}

void write_grid_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "x,y,rmse,cost,success,skipped,seed,wall_ms\n";
    for (const auto& r : records) {
        os << fmt(r.x) << ',' << fmt(r.y) << ',' << fmt(r.rmse) << ',' << fmt(r.cost)
           << ',' << (r.success ? 1 : 0) << ',' << (r.skipped ? 1 : 0) << ',' << r.seed
           << ',' << fmt(r.wall_ms) << '\n';
    }
}

void write_ejm_csv(std::ostream& os, const std::vector<EjmTableRow>& rows) {
    os << "c_alpha,c_beta,c_gamma,v_critical,threshold,v_tol\n";
    for (const auto& r : rows) {
        os << r.c_alpha << ',' << r.c_beta << ',' << r.c_gamma << ','
           << fmt(r.v_critical) << ',' << fmt(r.threshold) << ',' << fmt(r.v_tol) << '\n';
    }
}

}  // namespace netlocal
