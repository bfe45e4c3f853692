#include "netlocal/targets.hpp"

#include <cmath>
#include <string>

#include "netlocal/errors.hpp"
#include "netlocal/serialization.hpp"

namespace netlocal {

namespace {

void require_unit_interval(double v, const char* family) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(family) + ": v must lie in [0,1], got " +
                          std::to_string(v));
    }
}

int parity(int n) { return (n % 2 == 0) ? 1 : -1; }

// Shared scan: tiny negative rounding residue is flushed to zero, anything
// beyond tolerance is an invalid family point.
void finalize_combination(Behaviour& b, const char* family) {
    double most_negative = 0.0;
    for (double& p : b.data) {
        if (p < most_negative) most_negative = p;
        if (p < 0.0 && p >= -tol::structural) p = 0.0;
    }
    if (most_negative < -tol::structural) {
        throw InvalidFamilyPoint(std::string(family) +
                                 ": combination leaves the simplex, most negative entry " +
                                 std::to_string(most_negative));
    }
}

}  // namespace

Behaviour bilocal_ij(double I, double J) {
    if (!(std::abs(I) <= 1.0 && std::abs(J) <= 1.0)) {
        throw DomainError("bilocal_ij: requires |I| <= 1 and |J| <= 1");
    }
    Behaviour b;
    b.outputs = {2, 2, 2};
    b.inputs = {2, 2, 2};
    b.data.resize(64);
    int outs[3], ins[3];
    for (outs[0] = 0; outs[0] < 2; ++outs[0])
        for (outs[1] = 0; outs[1] < 2; ++outs[1])
            for (outs[2] = 0; outs[2] < 2; ++outs[2])
                for (ins[0] = 0; ins[0] < 2; ++ins[0])
                    for (ins[1] = 0; ins[1] < 2; ++ins[1])
                        for (ins[2] = 0; ins[2] < 2; ++ins[2]) {
                            const int abc = outs[0] + outs[1] + outs[2];
                            double value = 1.0;
                            if (ins[1] == 0) value += I * parity(abc);
                            if (ins[1] == 1) value += J * parity(ins[0] + ins[2] + abc);
                            b.at(outs, ins) = value / 8.0;
                        }
    finalize_combination(b, "bilocal_ij");
    return b;
}

Behaviour bilocal_xy(double X, double Y) {
    if (!(std::abs(X) <= 1.0 && std::abs(Y) <= 1.0)) {
        throw DomainError("bilocal_xy: requires X, Y in [-1,1]");
    }
    Behaviour b;
    b.outputs = {2, 2, 2};
    b.inputs = {2, 2, 2};
    b.data.resize(64);
    int outs[3], ins[3];
    for (outs[0] = 0; outs[0] < 2; ++outs[0])
        for (outs[1] = 0; outs[1] < 2; ++outs[1])
            for (outs[2] = 0; outs[2] < 2; ++outs[2])
                for (ins[0] = 0; ins[0] < 2; ++ins[0])
                    for (ins[1] = 0; ins[1] < 2; ++ins[1])
                        for (ins[2] = 0; ins[2] < 2; ++ins[2]) {
                            const int abc = outs[0] + outs[1] + outs[2];
                            const double base = (outs[0] == 0 ? 1.5 : 0.5) / 8.0;
                            double value = 1.0;
                            if (ins[1] == 0) value += X * parity(abc);
                            if (ins[1] == 1) value += Y * parity(ins[2] + abc);
                            b.at(outs, ins) = base * value;
                        }
    finalize_combination(b, "bilocal_xy");
    return b;
}

Behaviour ghz(double v) {
    require_unit_interval(v, "ghz");
    Behaviour b = uniform_behaviour({2, 2, 2}, {1, 1, 1});
    for (double& p : b.data) p *= 1.0 - v;
    b.data[0] += v / 2.0;  // (0,0,0)
    b.data[7] += v / 2.0;  // (1,1,1)
    return b;
}

Behaviour w_dist(double v) {
    require_unit_interval(v, "w_dist");
    Behaviour b = uniform_behaviour({2, 2, 2}, {1, 1, 1});
    for (double& p : b.data) p *= 1.0 - v;
    b.data[1] += v / 3.0;  // (0,0,1)
    b.data[2] += v / 3.0;  // (0,1,0)
    b.data[4] += v / 3.0;  // (1,0,0)
    return b;
}

Behaviour ejm(double v) {
    require_unit_interval(v, "ejm");
    Behaviour b;
    b.outputs = {4, 4, 4};
    b.inputs = {1, 1, 1};
    b.data.resize(64);
    for (int a = 0; a < 4; ++a)
        for (int bb = 0; bb < 4; ++bb)
            for (int c = 0; c < 4; ++c) {
                double p_ejm;
                if (a == bb && bb == c) {
                    p_ejm = 25.0 / 256.0;
                } else if (a != bb && bb != c && a != c) {
                    p_ejm = 5.0 / 256.0;
                } else {
                    p_ejm = 1.0 / 256.0;
                }
                b.data[(a * 4 + bb) * 4 + c] = v * p_ejm + (1.0 - v) / 64.0;
            }
    return b;
}

bool brgp_satisfied(double I, double J) {
    return std::sqrt(std::abs(I)) + std::sqrt(std::abs(J)) <= 1.0;
}

Behaviour mix_with_uniform(const Behaviour& p1, double v) {
    require_unit_interval(v, "mix_with_uniform");
    Behaviour b = p1;
    const double noise = (1.0 - v) / static_cast<double>(p1.output_count());
    for (double& p : b.data) p = v * p + noise;
    return b;
}

Behaviour FamilySpec::build() const {
    switch (kind) {
        case Kind::BilocalIJ: return bilocal_ij(p1, p2);
        case Kind::BilocalXY: return bilocal_xy(p1, p2);
        case Kind::GHZ: return ghz(p1);
        case Kind::W: return w_dist(p1);
        case Kind::EJM: return ejm(p1);
        case Kind::CustomFile: return load_behaviour(path);
    }
    throw DomainError("FamilySpec: unknown family kind");
}

}  // namespace netlocal
