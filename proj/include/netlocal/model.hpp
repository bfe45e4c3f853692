#pragma once

#include <string>
#include <vector>

#include "netlocal/behaviour.hpp"
#include "netlocal/tolerances.hpp"
#include "netlocal/topology.hpp"

namespace netlocal {

struct SourceDistribution {
    int cardinality = 0;
    std::vector<double> probabilities;  // length == cardinality, sums to 1
};

// Dense response array with layout [output, input, hidden_1, ..., hidden_k],
// row-major, hidden axes ordered by increasing source index.
struct ResponseFunction {
    int party = 0;
    std::vector<int> shape;  // [m, M, c_1, ..., c_k]
    std::vector<double> data;

    // prod of the hidden-axis cardinalities
    std::size_t hidden_size() const;
};

struct LocalModel {
    NetworkTopology topology;
    std::vector<SourceDistribution> sources;   // one per source
    std::vector<ResponseFunction> responses;   // one per party
};

struct Violation {
    std::string block;  // e.g. "source 1", "response of party 2, row (input 0, hidden 3)"
    std::string kind;   // "shape" | "nonnegativity" | "normalization"
    double magnitude = 0.0;

    std::string to_string() const;
};

// Empty iff all structural invariants hold within `tolerance`: shapes match
// the topology, probabilities are nonnegative, and every simplex (source
// distribution, response column over outputs) sums to 1.
std::vector<Violation> validate(const LocalModel& model,
                                double tolerance = tol::structural);

// Model with uniform sources of the given cardinalities and uniform
// response functions.
LocalModel uniform_model(const NetworkTopology& topo,
                         const std::vector<int>& cardinalities);

// Exact contraction over all hidden-value tuples:
//   p(outs|ins) = sum_h prod_s p_s(h_s) * prod_p resp_p(out_p | in_p, h).
// Throws StructuralError on shape mismatches, naming the offending block.
Behaviour evaluate_model(const LocalModel& model);

}  // namespace netlocal
