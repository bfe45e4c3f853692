#include "netlocal/topology.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "netlocal/errors.hpp"

namespace netlocal {

std::vector<int> NetworkTopology::sources_of(int party) const {
    std::vector<int> result;
    for (int s = 0; s < source_count; ++s) {
        if (std::binary_search(wiring[s].begin(), wiring[s].end(), party)) {
            result.push_back(s);
        }
    }
    return result;
}

void NetworkTopology::check() const {
    if (party_count < 1) {
        throw StructuralError("topology: party_count must be >= 1");
    }
    if (source_count < 1) {
        throw StructuralError("topology: source_count must be >= 1");
    }
    if (static_cast<int>(outputs.size()) != party_count ||
        static_cast<int>(inputs.size()) != party_count) {
        throw StructuralError("topology: outputs/inputs length != party_count");
    }
    if (static_cast<int>(wiring.size()) != source_count) {
        throw StructuralError("topology: wiring length != source_count");
    }
    for (int p = 0; p < party_count; ++p) {
        if (outputs[p] < 2) {
            throw StructuralError("topology: party " + std::to_string(p) +
                                  " has output cardinality < 2");
        }
        if (inputs[p] < 1) {
            throw StructuralError("topology: party " + std::to_string(p) +
                                  " has input cardinality < 1");
        }
    }
    for (int s = 0; s < source_count; ++s) {
        const auto& conn = wiring[s];
        if (conn.empty()) {
            throw StructuralError("topology: source " + std::to_string(s) +
                                  " connects to no party");
        }
        for (std::size_t k = 0; k < conn.size(); ++k) {
            if (conn[k] < 0 || conn[k] >= party_count) {
                throw StructuralError("topology: source " + std::to_string(s) +
                                      " lists party index out of range");
            }
            if (k > 0 && conn[k] <= conn[k - 1]) {
                throw StructuralError("topology: source " + std::to_string(s) +
                                      " wiring not strictly increasing");
            }
        }
    }
}

NetworkTopology make_bilocal(int outputs, int inputs) {
    NetworkTopology topo;
    topo.party_count = 3;
    topo.source_count = 2;
    topo.outputs = {outputs, outputs, outputs};
    topo.inputs = {inputs, inputs, inputs};
    topo.wiring = {{0, 1}, {1, 2}};
    topo.check();
    return topo;
}

NetworkTopology make_triangle(int outputs) {
    NetworkTopology topo;
    topo.party_count = 3;
    topo.source_count = 3;
    topo.outputs = {outputs, outputs, outputs};
    topo.inputs = {1, 1, 1};
    topo.wiring = {{1, 2}, {0, 2}, {0, 1}};
    topo.check();
    return topo;
}

long long collins_gisin_dimension(const std::vector<int>& outputs,
                                  const std::vector<int>& inputs) {
    if (outputs.empty() || outputs.size() != inputs.size()) {
        throw StructuralError("collins_gisin_dimension: empty or mismatched party list");
    }
    long long dim = 1;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (outputs[i] < 1 || inputs[i] < 1) {
            throw StructuralError("collins_gisin_dimension: cardinalities must be >= 1");
        }
        dim *= static_cast<long long>(inputs[i]) * (outputs[i] - 1) + 1;
    }
    return dim - 1;
}

namespace {

// m^M with saturation; cardinality bounds stay exact far below the cap.
long long saturating_pow(long long m, int e) {
    long long r = 1;
    const long long cap = std::numeric_limits<long long>::max() / 2;
    for (int i = 0; i < e; ++i) {
        if (r > cap / m) return cap;
        r *= m;
    }
    return r;
}

}  // namespace

long long cardinality_upper_bound(const NetworkTopology& topo, int source) {
    topo.check();
    if (source < 0 || source >= topo.source_count) {
        throw StructuralError("cardinality_upper_bound: source index out of range");
    }

    long long bound =
        collins_gisin_dimension(topo.outputs, topo.inputs);
    // Subtract the dimension of the behaviour of parties the source never
    // reaches (zero when it reaches everyone).
    std::vector<int> rest_out, rest_in;
    for (int p = 0; p < topo.party_count; ++p) {
        if (!std::binary_search(topo.wiring[source].begin(),
                                topo.wiring[source].end(), p)) {
            rest_out.push_back(topo.outputs[p]);
            rest_in.push_back(topo.inputs[p]);
        }
    }
    if (!rest_out.empty()) {
        bound -= collins_gisin_dimension(rest_out, rest_in);
    }

    // Parties receiving only this source need no more values than their
    // deterministic strategy count.
    for (int p : topo.wiring[source]) {
        if (topo.sources_of(p).size() == 1) {
            bound = std::min(bound, saturating_pow(topo.outputs[p], topo.inputs[p]));
        }
    }
    return bound;
}

long long num_free_parameters(const NetworkTopology& topo,
                              const std::vector<int>& cardinalities) {
    topo.check();
    if (static_cast<int>(cardinalities.size()) != topo.source_count) {
        throw StructuralError("num_free_parameters: one cardinality per source required");
    }
    long long total = 0;
    for (int c : cardinalities) {
        if (c < 1) {
            throw StructuralError("num_free_parameters: cardinalities must be >= 1");
        }
        total += c - 1;
    }
    for (int p = 0; p < topo.party_count; ++p) {
        long long hidden = 1;
        for (int s : topo.sources_of(p)) hidden *= cardinalities[s];
        total += static_cast<long long>(topo.outputs[p] - 1) * topo.inputs[p] * hidden;
    }
    return total;
}

}  // namespace netlocal
