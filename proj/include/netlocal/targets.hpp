#pragma once

#include <string>

#include "netlocal/behaviour.hpp"

namespace netlocal {

// A named, parameterized target-distribution family.
struct FamilySpec {
    enum class Kind { BilocalIJ, BilocalXY, GHZ, W, EJM, CustomFile };
    Kind kind = Kind::GHZ;
    double p1 = 0.0;   // I, X, or v
    double p2 = 0.0;   // J or Y
    std::string path;  // CustomFile

    Behaviour build() const;
};

// Bilocal slice p = I*p_I + J*p_J + (1-I-J)*p_0 over binary inputs/outputs.
// Requires |I| <= 1 and |J| <= 1; throws InvalidFamilyPoint when the affine
// combination leaves the probability simplex.
Behaviour bilocal_ij(double I, double J);

// Bilocal slice p = X*p_X + Y*p_Y + (1-X-Y)*p_0 with the biased-Alice
// marginal (1/2 + delta_{a,0})/8 baseline.
Behaviour bilocal_xy(double X, double Y);

// Triangle, binary outputs: v/2 + (1-v)/8 on a=b=c, (1-v)/8 elsewhere.
Behaviour ghz(double v);

// Triangle, binary outputs: v/3 + (1-v)/8 on a+b+c=1, (1-v)/8 elsewhere.
Behaviour w_dist(double v);

// Triangle, four outputs: v*p_EJM + (1-v)/64, where p_EJM is 25/256 on
// a=b=c, 5/256 on all-distinct and 1/256 when exactly two agree.
Behaviour ejm(double v);

// BRGP inequality sqrt|I| + sqrt|J| <= 1.
bool brgp_satisfied(double I, double J);

// v*p1 + (1-v)*uniform, v in [0,1].
Behaviour mix_with_uniform(const Behaviour& p1, double v);

}  // namespace netlocal
