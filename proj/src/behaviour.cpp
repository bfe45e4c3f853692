#include "netlocal/behaviour.hpp"

#include <cmath>
#include <cstdlib>

#include "netlocal/errors.hpp"

namespace netlocal {

namespace {

std::size_t product(const std::vector<int>& dims) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

std::size_t flatten(std::span<const int> values, const std::vector<int>& dims) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(values[i]);
    }
    return idx;
}

}  // namespace

std::size_t Behaviour::output_count() const { return product(outputs); }
std::size_t Behaviour::input_count() const { return product(inputs); }

std::size_t Behaviour::index(std::span<const int> outs, std::span<const int> ins) const {
    return flatten(outs, outputs) * input_count() + flatten(ins, inputs);
}

double Behaviour::at(std::span<const int> outs, std::span<const int> ins) const {
    return data[index(outs, ins)];
}

double& Behaviour::at(std::span<const int> outs, std::span<const int> ins) {
    return data[index(outs, ins)];
}

std::vector<std::string> Behaviour::check(double norm_tol) const {
    std::vector<std::string> violations;
    const std::size_t n_out = output_count();
    const std::size_t n_in = input_count();
    if (data.size() != n_out * n_in) {
        violations.push_back("behaviour: data size " + std::to_string(data.size()) +
                             " does not match shape " + std::to_string(n_out * n_in));
        return violations;
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (!std::isfinite(data[k])) {
            violations.push_back("behaviour: non-finite entry at flat index " +
                                 std::to_string(k));
            return violations;
        }
        if (data[k] < 0.0) {
            violations.push_back("behaviour: negative entry " + std::to_string(data[k]) +
                                 " at flat index " + std::to_string(k));
        }
    }
    for (std::size_t ix = 0; ix < n_in; ++ix) {
        double sum = 0.0;
        for (std::size_t o = 0; o < n_out; ++o) sum += data[o * n_in + ix];
        if (std::abs(sum - 1.0) > norm_tol) {
            violations.push_back("behaviour: outputs for input tuple " + std::to_string(ix) +
                                 " sum to " + std::to_string(sum));
        }
    }
    return violations;
}

Behaviour uniform_behaviour(std::vector<int> outputs, std::vector<int> inputs) {
    Behaviour b;
    b.outputs = std::move(outputs);
    b.inputs = std::move(inputs);
    const std::size_t n_out = b.output_count();
    b.data.assign(n_out * b.input_count(), 1.0 / static_cast<double>(n_out));
    return b;
}

double max_abs_difference(const Behaviour& a, const Behaviour& b) {
    if (!a.same_shape(b) || a.data.size() != b.data.size()) {
        throw StructuralError("max_abs_difference: behaviour shapes differ");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        worst = std::max(worst, std::abs(a.data[k] - b.data[k]));
    }
    return worst;
}

}  // namespace netlocal
