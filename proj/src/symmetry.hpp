#pragma once

// Scenario automorphisms: simultaneous party and source permutations that
// preserve the wiring, cardinalities, and a given target behaviour. Used to
// seed group-invariant restarts, which reach symmetric optima that flat
// random starts in the full parameter space practically never hit.

#include <cstdint>
#include <vector>

#include "netlocal/behaviour.hpp"
#include "netlocal/parameters.hpp"
#include "netlocal/topology.hpp"

namespace netlocal::detail {

struct Automorphism {
    std::vector<int> party_map;   // p -> party_map[p]
    std::vector<int> source_map;  // s -> source_map[s]
};

// All automorphisms of (topo, cards) fixing `target`; always contains the
// identity. Party and source counts are expected to be small.
std::vector<Automorphism> target_preserving_automorphisms(
    const NetworkTopology& topo, const std::vector<int>& cards,
    const Behaviour& target);

// Flat-Dirichlet sample constrained to the group-invariant subspace: one
// draw per block orbit, replicated along the orbit.
ParameterVector random_feasible_invariant(const ParameterLayout& layout,
                                          std::uint64_t seed,
                                          const std::vector<Automorphism>& group);

}  // namespace netlocal::detail
