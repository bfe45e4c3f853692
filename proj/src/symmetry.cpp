#include "symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netlocal/rng.hpp"

namespace netlocal::detail {

namespace {

bool behaviour_fixed_by(const Behaviour& b, const std::vector<int>& party_map) {
    const std::size_t n_parties = b.outputs.size();
    const std::size_t n_out = b.output_count();
    const std::size_t n_in = b.input_count();
    std::vector<int> outs(n_parties), ins(n_parties);
    std::vector<int> pouts(n_parties), pins(n_parties);
    for (std::size_t o = 0; o < n_out; ++o) {
        std::size_t rem = o;
        for (std::size_t p = n_parties; p-- > 0;) {
            outs[p] = static_cast<int>(rem % static_cast<std::size_t>(b.outputs[p]));
            rem /= static_cast<std::size_t>(b.outputs[p]);
        }
        for (std::size_t ix = 0; ix < n_in; ++ix) {
            std::size_t rem_in = ix;
            for (std::size_t p = n_parties; p-- > 0;) {
                ins[p] = static_cast<int>(rem_in % static_cast<std::size_t>(b.inputs[p]));
                rem_in /= static_cast<std::size_t>(b.inputs[p]);
            }
            for (std::size_t p = 0; p < n_parties; ++p) {
                pouts[party_map[p]] = outs[p];
                pins[party_map[p]] = ins[p];
            }
            if (std::abs(b.at(pouts, pins) - b.data[o * n_in + ix]) > 1e-12) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

std::vector<Automorphism> target_preserving_automorphisms(
    const NetworkTopology& topo, const std::vector<int>& cards,
    const Behaviour& target) {
    std::vector<Automorphism> group;
    const int n = topo.party_count;
    const int S = topo.source_count;
    if (n > 6 || S > 6) {
        group.push_back({std::vector<int>(n), std::vector<int>(S)});
        std::iota(group.back().party_map.begin(), group.back().party_map.end(), 0);
        std::iota(group.back().source_map.begin(), group.back().source_map.end(), 0);
        return group;
    }

    std::vector<int> party_perm(n), source_perm(S);
    std::iota(party_perm.begin(), party_perm.end(), 0);
    do {
        bool parties_ok = true;
        for (int p = 0; p < n && parties_ok; ++p) {
            parties_ok = topo.outputs[party_perm[p]] == topo.outputs[p] &&
                         topo.inputs[party_perm[p]] == topo.inputs[p];
        }
        if (!parties_ok) continue;

        // image of each source's wiring under the party permutation
        std::vector<std::vector<int>> mapped(S);
        for (int s = 0; s < S; ++s) {
            mapped[s].reserve(topo.wiring[s].size());
            for (int p : topo.wiring[s]) mapped[s].push_back(party_perm[p]);
            std::sort(mapped[s].begin(), mapped[s].end());
        }

        std::iota(source_perm.begin(), source_perm.end(), 0);
        do {
            bool sources_ok = true;
            for (int s = 0; s < S && sources_ok; ++s) {
                sources_ok = cards[source_perm[s]] == cards[s] &&
                             topo.wiring[source_perm[s]] == mapped[s];
            }
            if (!sources_ok) continue;
            if (!behaviour_fixed_by(target, party_perm)) continue;
            group.push_back({party_perm, source_perm});
        } while (std::next_permutation(source_perm.begin(), source_perm.end()));
    } while (std::next_permutation(party_perm.begin(), party_perm.end()));
    return group;
}

namespace {

// Stable block identifier -> index lookup for a layout.
struct BlockIndex {
    const ParameterLayout& layout;
    std::vector<std::size_t> source_block;                 // source -> block index
    std::vector<std::vector<std::size_t>> response_block;  // party -> (j*Hp + h) -> index
    std::vector<std::size_t> hidden_sizes;

    explicit BlockIndex(const ParameterLayout& l) : layout(l) {
        const auto& topo = l.topology;
        source_block.resize(topo.source_count);
        response_block.resize(topo.party_count);
        hidden_sizes.resize(topo.party_count);
        for (int p = 0; p < topo.party_count; ++p) {
            std::size_t hp = 1;
            for (int s : topo.sources_of(p)) hp *= static_cast<std::size_t>(l.cardinalities[s]);
            hidden_sizes[p] = hp;
            response_block[p].resize(static_cast<std::size_t>(topo.inputs[p]) * hp);
        }
        for (std::size_t bi = 0; bi < l.blocks.size(); ++bi) {
            const auto& block = l.blocks[bi];
            if (block.is_source) {
                source_block[block.source] = bi;
            } else {
                response_block[block.party][static_cast<std::size_t>(block.input) *
                                                hidden_sizes[block.party] +
                                            block.hidden] = bi;
            }
        }
    }
};

// Image of block `bi` under g: same stored-coordinate order, possibly a
// different block of the layout.
std::size_t map_block(const BlockIndex& index, const Automorphism& g, std::size_t bi) {
    const auto& layout = index.layout;
    const auto& topo = layout.topology;
    const auto& block = layout.blocks[bi];
    if (block.is_source) {
        return index.source_block[g.source_map[block.source]];
    }
    const int p = block.party;
    const int q = g.party_map[p];
    const auto p_sources = topo.sources_of(p);
    const auto q_sources = topo.sources_of(q);

    // decode the hidden tuple over p's axes, re-encode over q's
    std::vector<int> values(p_sources.size());
    std::size_t rem = block.hidden;
    for (std::size_t k = p_sources.size(); k-- > 0;) {
        const int c = layout.cardinalities[p_sources[k]];
        values[k] = static_cast<int>(rem % static_cast<std::size_t>(c));
        rem /= static_cast<std::size_t>(c);
    }
    std::size_t hidden = 0;
    for (int sq : q_sources) {
        // the value of axis sq comes from the p-axis it is the image of
        int value = -1;
        for (std::size_t k = 0; k < p_sources.size(); ++k) {
            if (g.source_map[p_sources[k]] == sq) {
                value = values[k];
                break;
            }
        }
        hidden = hidden * static_cast<std::size_t>(layout.cardinalities[sq]) +
                 static_cast<std::size_t>(value);
    }
    return index.response_block[q][static_cast<std::size_t>(block.input) *
                                       index.hidden_sizes[q] +
                                   hidden];
}

}  // namespace

ParameterVector random_feasible_invariant(const ParameterLayout& layout,
                                          std::uint64_t seed,
                                          const std::vector<Automorphism>& group) {
    std::mt19937_64 eng(seed);
    ParameterVector v(layout.total_stored);
    const BlockIndex index(layout);
    std::vector<bool> assigned(layout.blocks.size(), false);
    std::vector<double> sample;
    for (std::size_t bi = 0; bi < layout.blocks.size(); ++bi) {
        if (assigned[bi]) continue;
        const auto& block = layout.blocks[bi];
        if (block.stored_length == 0) {
            assigned[bi] = true;
            continue;
        }
        sample.resize(static_cast<std::size_t>(block.full_length));
        double sum = 0.0;
        for (double& e : sample) {
            e = exponential_1(eng);
            sum += e;
        }
        for (const auto& g : group) {
            const std::size_t image = map_block(index, g, bi);
            const auto& dst = layout.blocks[image];
            for (int i = 0; i < dst.stored_length; ++i) {
                v[dst.offset + static_cast<std::size_t>(i)] = sample[i] / sum;
            }
            assigned[image] = true;
        }
    }
    return v;
}

}  // namespace netlocal::detail
