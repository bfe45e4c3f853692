#include "netlocal/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netlocal/errors.hpp"
#include "netlocal/targets.hpp"

namespace netlocal {

double QuarticSpec::operator()(double x) const {
    // Horner
    double y = coefficients[4];
    for (int k = 3; k >= 0; --k) y = y * x + coefficients[k];
    return y;
}

namespace {

double bisect(const QuarticSpec& p, double lo, double hi, double tol) {
    double flo = p(lo);
    double fhi = p(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw SelectionError("poly_root: endpoints of [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] have equal signs");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at machine resolution
        const double fm = p(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// All real roots inside [lo, hi], located by a sign scan over a grid fine
// enough for well-separated quartic roots.
std::vector<double> real_roots_in(const QuarticSpec& p, double lo, double hi, double tol) {
    constexpr int kGrid = 4096;
    std::vector<double> roots;
    double prev_x = lo;
    double prev_f = p(lo);
    for (int i = 1; i <= kGrid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / kGrid;
        const double f = p(x);
        if (prev_f == 0.0) {
            roots.push_back(prev_x);
        } else if (f != 0.0 && (f > 0.0) != (prev_f > 0.0)) {
            roots.push_back(bisect(p, prev_x, x, tol));
        }
        prev_x = x;
        prev_f = f;
    }
    if (prev_f == 0.0) roots.push_back(prev_x);
    return roots;
}

}  // namespace

double poly_root(const QuarticSpec& spec, double tol) {
    if (spec.coefficients[4] == 0.0) {
        throw SelectionError("poly_root: leading coefficient is zero");
    }
    if (spec.rule == QuarticSpec::Rule::UniqueInInterval) {
        return bisect(spec, spec.lo, spec.hi, tol);
    }
    // LargestReal: scan within the Cauchy bound on root magnitudes
    double bound = 0.0;
    for (int k = 0; k < 4; ++k) {
        bound = std::max(bound, std::abs(spec.coefficients[k] / spec.coefficients[4]));
    }
    bound += 1.0;
    const auto roots = real_roots_in(spec, -bound, bound, tol);
    if (roots.empty()) {
        throw SelectionError("poly_root: no real root found");
    }
    return roots.back();
}

double ghz_param_a() {
    static const double value =
        poly_root({{-1.0, 0.0, 6.0, -8.0, 12.0}, QuarticSpec::Rule::UniqueInInterval, 0.0, 1.0});
    return value;
}

double ghz_param_b() {
    static const double value =
        poly_root({{3.0, -8.0, 0.0, 0.0, 4.0}, QuarticSpec::Rule::UniqueInInterval, 0.0, 1.0});
    return value;
}

double ghz_critical_visibility() {
    static const double value =
        poly_root({{3.0, -36.0, 66.0, 28.0, 3.0}, QuarticSpec::Rule::LargestReal});
    return value;
}

double w_critical_visibility() {
    static const double value =
        poly_root({{-81.0, 108.0, 63.0, -30.0, 4.0}, QuarticSpec::Rule::UniqueInInterval, 0.0, 1.0});
    return value;
}

namespace {

// Triangle response from the outcome-0 matrix over the party's two hidden
// axes in increasing source index; outcome 1 is the complement.
ResponseFunction triangle_binary_response(int party, const std::vector<int>& axis_cards,
                                          const std::vector<double>& outcome0) {
    ResponseFunction resp;
    resp.party = party;
    resp.shape = {2, 1, axis_cards[0], axis_cards[1]};
    resp.data.resize(2 * outcome0.size());
    for (std::size_t i = 0; i < outcome0.size(); ++i) {
        resp.data[i] = outcome0[i];
        resp.data[outcome0.size() + i] = 1.0 - outcome0[i];
    }
    return resp;
}

std::vector<double> transpose(const std::vector<double>& mat, int rows, int cols) {
    std::vector<double> out(mat.size());
    for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
            out[static_cast<std::size_t>(col) * rows + r] =
                mat[static_cast<std::size_t>(r) * cols + col];
        }
    }
    return out;
}

// Triangle model from the paper's notation: sources alpha(0), beta(1),
// gamma(2); Alice's matrix is indexed [beta, gamma], Bob's [gamma, alpha],
// Charles's [alpha, beta]. Bob's matrix is transposed into the increasing
// source-index layout [alpha, gamma].
LocalModel triangle_model(const std::vector<std::vector<double>>& source_probs,
                          const std::vector<double>& alice_bg,
                          const std::vector<double>& bob_ga,
                          const std::vector<double>& charles_ab) {
    LocalModel model;
    model.topology = make_triangle(2);
    std::vector<int> cards;
    for (const auto& probs : source_probs) {
        model.sources.push_back({static_cast<int>(probs.size()), probs});
        cards.push_back(static_cast<int>(probs.size()));
    }
    const int ca = cards[0], cb = cards[1], cg = cards[2];
    model.responses.push_back(triangle_binary_response(0, {cb, cg}, alice_bg));
    model.responses.push_back(
        triangle_binary_response(1, {ca, cg}, transpose(bob_ga, cg, ca)));
    model.responses.push_back(triangle_binary_response(2, {ca, cb}, charles_ab));
    return model;
}

}  // namespace

LocalModel ghz_model_222() {
    const std::vector<double> r = {0.0, 0.5, 0.5, 1.0};
    return triangle_model({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}, r, r, r);
}

LocalModel ghz_model_322(double v) {
    if (!(v >= 0.0 && v <= 1.0 / 3.0)) {
        throw DomainError("ghz_model_322: v must lie in [0, 1/3], got " + std::to_string(v));
    }
    const double lo = (1.0 - 3.0 * v) / (2.0 * (1.0 - v));
    const double hi = (1.0 + v) / (2.0 * (1.0 - v));
    return triangle_model({{v / 2.0, 1.0 - v, v / 2.0}, {0.5, 0.5}, {0.5, 0.5}},
                          {lo, 0.5, 0.5, hi},
                          {1.0, 0.0, 0.0, 1.0, 1.0, 0.0},   // [gamma][alpha], 2x3
                          {1.0, 1.0, 0.0, 1.0, 0.0, 0.0});  // [alpha][beta], 3x2
}

LocalModel ghz_model_333() {
    const double a = ghz_param_a();
    const double b = ghz_param_b();
    const std::vector<double> source = {a, b, 1.0 - a - b};
    const std::vector<double> r = {0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    return triangle_model({source, source, source}, r, r, r);
}

LocalModel w_model(double v) {
    const double vc = w_critical_visibility();
    if (!(v >= 0.0 && v <= vc + 1e-12)) {
        throw DomainError("w_model: v must lie in [0, v_c], got " + std::to_string(v));
    }
    const double u = std::sqrt(3.0 * (1.0 - v) / (3.0 + v));
    const double edge = (3.0 + v) / 12.0 - (1.0 - v) / (4.0 * u);
    const double mid = ((1.0 - v) / 4.0) * (1.0 + 1.0 / u) * (1.0 + 1.0 / u);
    const double q = (3.0 + v) / 6.0 + u * v * (9.0 - v) / (18.0 * (1.0 - v));
    return triangle_model(
        {{edge, mid, edge}, {u / (1.0 + u), 1.0 / (1.0 + u)}, {u / (1.0 + u), 1.0 / (1.0 + u)}},
        {0.5, q, q, 3.0 * (1.0 - v) / (2.0 * (3.0 + v))},
        {1.0, 0.0, 0.0, 1.0, 1.0, 0.0},   // [gamma][alpha], 2x3
        {0.0, 0.0, 0.0, 1.0, 1.0, 1.0});  // [alpha][beta], 3x2
}

LocalModel bilocal_boundary_model(double X) {
    if (!(X >= 0.0 && X <= 1.0)) {
        throw DomainError("bilocal_boundary_model: X must lie in [0,1], got " +
                          std::to_string(X));
    }
    const double Y = 1.0 - X;
    LocalModel model;
    model.topology = make_bilocal(2, 2);
    model.sources.push_back({2, {0.75, 0.25}});
    model.sources.push_back({4, {Y / 2.0, X / 2.0, Y / 2.0, X / 2.0}});

    // Alice outputs 0 exactly when lambda = 0, for either input.
    ResponseFunction alice;
    alice.party = 0;
    alice.shape = {2, 2, 2};
    alice.data = {1, 0, 1, 0,   // outcome 0: [x][lambda]
                  0, 1, 0, 1};  // outcome 1
    model.responses.push_back(std::move(alice));

    // Bob, outcome 0, [y][lambda][mu]
    const double pb0[2][2][4] = {
        {{0.5, 1.0, 0.5, 0.0}, {0.5, 0.0, 0.5, 1.0}},
        {{1.0, 0.5, 0.0, 0.5}, {0.0, 0.5, 1.0, 0.5}},
    };
    ResponseFunction bob;
    bob.party = 1;
    bob.shape = {2, 2, 2, 4};
    bob.data.resize(2 * 2 * 2 * 4);
    for (int y = 0; y < 2; ++y)
        for (int lam = 0; lam < 2; ++lam)
            for (int mu = 0; mu < 4; ++mu) {
                const std::size_t cell = (static_cast<std::size_t>(y) * 2 + lam) * 4 + mu;
                bob.data[cell] = pb0[y][lam][mu];
                bob.data[16 + cell] = 1.0 - pb0[y][lam][mu];
            }
    model.responses.push_back(std::move(bob));

    // Charles, outcome 0, [z][mu]
    const double pc0[2][4] = {{1, 1, 0, 0}, {0, 1, 1, 0}};
    ResponseFunction charles;
    charles.party = 2;
    charles.shape = {2, 2, 4};
    charles.data.resize(2 * 2 * 4);
    for (int z = 0; z < 2; ++z)
        for (int mu = 0; mu < 4; ++mu) {
            const std::size_t cell = static_cast<std::size_t>(z) * 4 + mu;
            charles.data[cell] = pc0[z][mu];
            charles.data[8 + cell] = 1.0 - pc0[z][mu];
        }
    model.responses.push_back(std::move(charles));
    return model;
}

Behaviour relabel(const Behaviour& b,
                  const std::vector<std::vector<int>>& output_perms,
                  const std::vector<std::vector<int>>& input_perms) {
    const std::size_t n_parties = b.outputs.size();
    if (output_perms.size() != n_parties || input_perms.size() != n_parties) {
        throw StructuralError("relabel: one output and one input permutation per party");
    }
    for (std::size_t p = 0; p < n_parties; ++p) {
        auto is_permutation = [](const std::vector<int>& perm, int size) {
            if (static_cast<int>(perm.size()) != size) return false;
            std::vector<bool> seen(size, false);
            for (int v : perm) {
                if (v < 0 || v >= size || seen[v]) return false;
                seen[v] = true;
            }
            return true;
        };
        if (!is_permutation(output_perms[p], b.outputs[p]) ||
            !is_permutation(input_perms[p], b.inputs[p])) {
            throw StructuralError("relabel: permutation sizes must match cardinalities (party " +
                                  std::to_string(p) + ")");
        }
    }

    Behaviour out = b;
    std::vector<int> outs(n_parties), ins(n_parties);
    std::vector<int> new_outs(n_parties), new_ins(n_parties);
    const std::size_t n_out = b.output_count();
    const std::size_t n_in = b.input_count();
    for (std::size_t o = 0; o < n_out; ++o) {
        std::size_t rem = o;
        for (std::size_t p = n_parties; p-- > 0;) {
            outs[p] = static_cast<int>(rem % static_cast<std::size_t>(b.outputs[p]));
            rem /= static_cast<std::size_t>(b.outputs[p]);
        }
        for (std::size_t p = 0; p < n_parties; ++p) new_outs[p] = output_perms[p][outs[p]];
        for (std::size_t ix = 0; ix < n_in; ++ix) {
            std::size_t rem_in = ix;
            for (std::size_t p = n_parties; p-- > 0;) {
                ins[p] = static_cast<int>(rem_in % static_cast<std::size_t>(b.inputs[p]));
                rem_in /= static_cast<std::size_t>(b.inputs[p]);
            }
            for (std::size_t p = 0; p < n_parties; ++p) new_ins[p] = input_perms[p][ins[p]];
            out.at(new_outs, new_ins) = b.data[o * n_in + ix];
        }
    }
    return out;
}

double error_slope(const Behaviour& p1, const Behaviour& p0) {
    if (!p1.same_shape(p0) || p1.data.size() != p0.data.size()) {
        throw StructuralError("error_slope: behaviour shapes differ");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < p1.data.size(); ++k) {
        const double d = p0.data[k] - p1.data[k];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(p1.data.size()));
}

}  // namespace netlocal
