#pragma once

#include <vector>

namespace netlocal {

// A network scenario: independent sources, each wired to a subset of the
// parties. Parties without measurement choices carry input cardinality 1,
// so scenarios with and without inputs share one code path.
struct NetworkTopology {
    int party_count = 0;
    int source_count = 0;
    std::vector<int> outputs;              // output cardinality m_i per party, >= 2
    std::vector<int> inputs;               // input cardinality M_i per party, >= 1
    std::vector<std::vector<int>> wiring;  // per source: strictly increasing party indices

    // Sources connected to `party`, in increasing source index.
    std::vector<int> sources_of(int party) const;

    // Throws StructuralError if cardinalities or wiring are malformed.
    void check() const;

    bool operator==(const NetworkTopology&) const = default;
};

// Three parties, two sources: lambda -> {Alice, Bob}, mu -> {Bob, Charles}.
NetworkTopology make_bilocal(int outputs = 2, int inputs = 2);

// Three parties, three sources, no inputs: alpha -> {B, C}, beta -> {A, C},
// gamma -> {A, B}.
NetworkTopology make_triangle(int outputs = 2);

// Dimension of the set of behaviours over the given parties in the
// Collins-Gisin parameterization: prod_i (M_i (m_i - 1) + 1) - 1.
// Throws StructuralError on an empty party list.
long long collins_gisin_dimension(const std::vector<int>& outputs,
                                  const std::vector<int>& inputs);

// Upper bound on the hidden-variable cardinality of `source`: the minimum of
// the Collins-Gisin dimension gap and the deterministic-strategy counts of
// parties wired to this source alone.
long long cardinality_upper_bound(const NetworkTopology& topo, int source);

// Free parameters of a model: (c - 1) per source plus
// (m - 1) * M * prod(connected source cardinalities) per party.
long long num_free_parameters(const NetworkTopology& topo,
                              const std::vector<int>& cardinalities);

}  // namespace netlocal
