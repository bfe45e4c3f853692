#pragma once

// Internal contraction machinery shared by evaluate_model and the
// optimizer's cost/gradient/Jacobian kernels. Not part of the public API.

#include <cstddef>
#include <vector>

#include "netlocal/topology.hpp"

namespace netlocal::detail {

// Index tables for contracting a model over all hidden-value tuples.
// Global hidden tuples are enumerated row-major over sources (source 0
// slowest); global input tuples row-major over parties.
struct ContractionPlan {
    int n_parties = 0;
    int n_sources = 0;
    std::vector<int> m;  // outputs per party
    std::vector<int> M;  // inputs per party
    std::vector<int> c;  // cardinality per source

    std::size_t n_hidden = 1;   // prod c
    std::size_t n_inputs = 1;   // prod M
    std::size_t n_outputs = 1;  // prod m

    std::vector<std::vector<int>> party_sources;
    std::vector<std::size_t> party_hidden_size;      // Hp per party
    std::vector<std::size_t> response_size;          // m*M*Hp per party

    // [p][h] -> party p's local hidden index at global hidden tuple h
    std::vector<std::vector<std::size_t>> party_hidden;
    // [s][h] -> value of source s at global hidden tuple h
    std::vector<std::vector<int>> source_value;
    // [p][ix] -> input value of party p at global input index ix
    std::vector<std::vector<int>> party_input;

    // Flat "full coordinate" space: all source entries (source 0 first),
    // then all response entries party by party.
    std::size_t source_offset(int s) const { return source_offsets_[s]; }
    std::size_t response_offset(int p) const { return response_offsets_[p]; }
    std::size_t full_size() const { return full_size_; }

    ContractionPlan(const NetworkTopology& topo, const std::vector<int>& cards);

    std::vector<std::size_t> source_offsets_;
    std::vector<std::size_t> response_offsets_;
    std::size_t full_size_ = 0;
};

// p(outs|ins) table from full model arrays. `sources[s]` points at c_s
// probabilities; `responses[p]` at the party's dense response array.
// `table` must hold n_outputs*n_inputs entries; it is overwritten.
void contract(const ContractionPlan& plan,
              const double* const* sources,
              const double* const* responses,
              double* table);

// Jacobian d p_k / d e over the flat full coordinate space, row-major
// [table entry k][full coordinate]. `jac` must hold
// n_outputs*n_inputs*full_size() entries; it is overwritten. When `table`
// is non-null the behaviour table is produced in the same pass.
void contraction_jacobian(const ContractionPlan& plan,
                          const double* const* sources,
                          const double* const* responses,
                          double* jac,
                          double* table = nullptr);

}  // namespace netlocal::detail
