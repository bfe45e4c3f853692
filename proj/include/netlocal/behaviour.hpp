#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "netlocal/tolerances.hpp"

namespace netlocal {

// Dense conditional probability table p(outputs | inputs). Row-major with
// all output axes first (party 0 slowest), then all input axes.
struct Behaviour {
    std::vector<int> outputs;  // m_i per party
    std::vector<int> inputs;   // M_i per party
    std::vector<double> data;

    std::size_t output_count() const;
    std::size_t input_count() const;
    std::size_t size() const { return data.size(); }

    std::size_t index(std::span<const int> outs, std::span<const int> ins) const;
    double at(std::span<const int> outs, std::span<const int> ins) const;
    double& at(std::span<const int> outs, std::span<const int> ins);

    // Nonnegativity and per-input-tuple normalization violations, one
    // message each; empty means valid.
    std::vector<std::string> check(double norm_tol = tol::behaviour_norm) const;

    bool same_shape(const Behaviour& other) const {
        return outputs == other.outputs && inputs == other.inputs;
    }
};

Behaviour uniform_behaviour(std::vector<int> outputs, std::vector<int> inputs);

// Largest |difference| over all entries; shapes must match.
double max_abs_difference(const Behaviour& a, const Behaviour& b);

}  // namespace netlocal
