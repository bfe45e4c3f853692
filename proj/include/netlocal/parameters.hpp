#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "netlocal/model.hpp"
#include "netlocal/tolerances.hpp"
#include "netlocal/topology.hpp"

namespace netlocal {

// One probability simplex of the model, stored with its last coordinate
// dropped: the free coordinates must be nonnegative and sum to at most 1.
struct SimplexBlock {
    bool is_source = false;
    int source = -1;          // owning source, when is_source
    int party = -1;           // owning party, otherwise
    int input = -1;           // flattened input value j
    std::size_t hidden = 0;   // flattened hidden tuple index
    int full_length = 0;      // L
    int stored_length = 0;    // L - 1
    std::size_t offset = 0;   // first stored coordinate in the flat vector

    std::string name() const;
};

// Block decomposition of the free parameters of (topology, cardinalities).
// Source blocks come first in source order, then response blocks per party
// in row-major (input, hidden) order — matching the response array layout.
struct ParameterLayout {
    NetworkTopology topology;
    std::vector<int> cardinalities;
    std::vector<SimplexBlock> blocks;
    std::size_t total_stored = 0;

    static ParameterLayout create(const NetworkTopology& topo,
                                  const std::vector<int>& cardinalities);
};

using ParameterVector = std::vector<double>;

std::pair<ParameterVector, ParameterLayout> pack_parameters(const LocalModel& model);

LocalModel unpack_parameters(const ParameterVector& vector,
                             const ParameterLayout& layout);

// Throws FeasibilityError naming the first offending block.
void check_feasible(const ParameterVector& vector, const ParameterLayout& layout,
                    double tolerance = tol::structural);

}  // namespace netlocal
