#include "contraction.hpp"

#include <cstring>

#include "netlocal/errors.hpp"

namespace netlocal::detail {

ContractionPlan::ContractionPlan(const NetworkTopology& topo,
                                 const std::vector<int>& cards) {
    topo.check();
    if (static_cast<int>(cards.size()) != topo.source_count) {
        throw StructuralError("contraction: one cardinality per source required");
    }
    n_parties = topo.party_count;
    n_sources = topo.source_count;
    m = topo.outputs;
    M = topo.inputs;
    c = cards;
    for (int s = 0; s < n_sources; ++s) {
        if (c[s] < 1) throw StructuralError("contraction: source cardinality < 1");
        n_hidden *= static_cast<std::size_t>(c[s]);
    }
    for (int p = 0; p < n_parties; ++p) {
        n_inputs *= static_cast<std::size_t>(M[p]);
        n_outputs *= static_cast<std::size_t>(m[p]);
    }

    party_sources.resize(n_parties);
    party_hidden_size.assign(n_parties, 1);
    response_size.assign(n_parties, 0);
    for (int p = 0; p < n_parties; ++p) {
        party_sources[p] = topo.sources_of(p);
        for (int s : party_sources[p]) {
            party_hidden_size[p] *= static_cast<std::size_t>(c[s]);
        }
        response_size[p] = static_cast<std::size_t>(m[p]) * M[p] * party_hidden_size[p];
    }

    // decode tables over hidden tuples
    party_hidden.assign(n_parties, std::vector<std::size_t>(n_hidden));
    source_value.assign(n_sources, std::vector<int>(n_hidden));
    std::vector<int> digits(n_sources);
    for (std::size_t h = 0; h < n_hidden; ++h) {
        std::size_t rem = h;
        for (int s = n_sources - 1; s >= 0; --s) {
            digits[s] = static_cast<int>(rem % static_cast<std::size_t>(c[s]));
            rem /= static_cast<std::size_t>(c[s]);
        }
        for (int s = 0; s < n_sources; ++s) source_value[s][h] = digits[s];
        for (int p = 0; p < n_parties; ++p) {
            std::size_t hp = 0;
            for (int s : party_sources[p]) {
                hp = hp * static_cast<std::size_t>(c[s]) +
                     static_cast<std::size_t>(digits[s]);
            }
            party_hidden[p][h] = hp;
        }
    }

    party_input.assign(n_parties, std::vector<int>(n_inputs));
    for (std::size_t ix = 0; ix < n_inputs; ++ix) {
        std::size_t rem = ix;
        for (int p = n_parties - 1; p >= 0; --p) {
            party_input[p][ix] = static_cast<int>(rem % static_cast<std::size_t>(M[p]));
            rem /= static_cast<std::size_t>(M[p]);
        }
    }

    source_offsets_.resize(n_sources);
    std::size_t off = 0;
    for (int s = 0; s < n_sources; ++s) {
        source_offsets_[s] = off;
        off += static_cast<std::size_t>(c[s]);
    }
    response_offsets_.resize(n_parties);
    for (int p = 0; p < n_parties; ++p) {
        response_offsets_[p] = off;
        off += response_size[p];
    }
    full_size_ = off;
}

void contract(const ContractionPlan& plan,
              const double* const* sources,
              const double* const* responses,
              double* table) {
    const int n = plan.n_parties;
    const std::size_t n_in = plan.n_inputs;
    const std::size_t n_out = plan.n_outputs;
    std::memset(table, 0, n_out * n_in * sizeof(double));

    std::vector<double> weights(plan.n_hidden);
    for (std::size_t h = 0; h < plan.n_hidden; ++h) {
        double w = 1.0;
        for (int s = 0; s < plan.n_sources; ++s) {
            w *= sources[s][plan.source_value[s][h]];
        }
        weights[h] = w;
    }

    std::vector<std::size_t> stride(n), base(n);
    std::vector<const double*> fiber(n);
    std::vector<int> digit(n);
    for (int p = 0; p < n; ++p) {
        stride[p] = static_cast<std::size_t>(plan.M[p]) * plan.party_hidden_size[p];
    }

    for (std::size_t ix = 0; ix < n_in; ++ix) {
        for (int p = 0; p < n; ++p) {
            base[p] = static_cast<std::size_t>(plan.party_input[p][ix]) *
                      plan.party_hidden_size[p];
        }
        for (std::size_t h = 0; h < plan.n_hidden; ++h) {
            const double w = weights[h];
            if (w == 0.0) continue;
            for (int p = 0; p < n; ++p) {
                fiber[p] = responses[p] + base[p] + plan.party_hidden[p][h];
            }
            std::fill(digit.begin(), digit.end(), 0);
            for (std::size_t o = 0; o < n_out; ++o) {
                double prod = w;
                for (int p = 0; p < n; ++p) {
                    prod *= fiber[p][static_cast<std::size_t>(digit[p]) * stride[p]];
                }
                table[o * n_in + ix] += prod;
                for (int p = n - 1; p >= 0; --p) {
                    if (++digit[p] < plan.m[p]) break;
                    digit[p] = 0;
                }
            }
        }
    }
}

void contraction_jacobian(const ContractionPlan& plan,
                          const double* const* sources,
                          const double* const* responses,
                          double* jac,
                          double* table) {
    const int n = plan.n_parties;
    const int S = plan.n_sources;
    const std::size_t n_in = plan.n_inputs;
    const std::size_t n_out = plan.n_outputs;
    const std::size_t full = plan.full_size();
    std::memset(jac, 0, n_out * n_in * full * sizeof(double));
    if (table) std::memset(table, 0, n_out * n_in * sizeof(double));

    // per hidden tuple: source weight and leave-one-source-out products
    std::vector<double> weights(plan.n_hidden);
    std::vector<double> weight_excl(static_cast<std::size_t>(S) * plan.n_hidden);
    std::vector<double> spre(S + 1), ssuf(S + 1);
    for (std::size_t h = 0; h < plan.n_hidden; ++h) {
        spre[0] = 1.0;
        for (int s = 0; s < S; ++s) {
            spre[s + 1] = spre[s] * sources[s][plan.source_value[s][h]];
        }
        ssuf[S] = 1.0;
        for (int s = S - 1; s >= 0; --s) {
            ssuf[s] = ssuf[s + 1] * sources[s][plan.source_value[s][h]];
        }
        weights[h] = spre[S];
        for (int s = 0; s < S; ++s) {
            weight_excl[static_cast<std::size_t>(s) * plan.n_hidden + h] =
                spre[s] * ssuf[s + 1];
        }
    }

    std::vector<std::size_t> stride(n), base(n), coord(n);
    std::vector<const double*> fiber(n);
    std::vector<int> digit(n);
    std::vector<double> pre(n + 1), suf(n + 1), f(n);
    for (int p = 0; p < n; ++p) {
        stride[p] = static_cast<std::size_t>(plan.M[p]) * plan.party_hidden_size[p];
    }

    for (std::size_t ix = 0; ix < n_in; ++ix) {
        for (int p = 0; p < n; ++p) {
            base[p] = static_cast<std::size_t>(plan.party_input[p][ix]) *
                      plan.party_hidden_size[p];
        }
        for (std::size_t h = 0; h < plan.n_hidden; ++h) {
            const double w = weights[h];
            for (int p = 0; p < n; ++p) {
                const std::size_t cell = base[p] + plan.party_hidden[p][h];
                fiber[p] = responses[p] + cell;
                coord[p] = plan.response_offset(p) + cell;
            }
            std::fill(digit.begin(), digit.end(), 0);
            for (std::size_t o = 0; o < n_out; ++o) {
                pre[0] = 1.0;
                for (int p = 0; p < n; ++p) {
                    f[p] = fiber[p][static_cast<std::size_t>(digit[p]) * stride[p]];
                    pre[p + 1] = pre[p] * f[p];
                }
                suf[n] = 1.0;
                for (int p = n - 1; p >= 0; --p) suf[p] = suf[p + 1] * f[p];

                double* row = jac + (o * n_in + ix) * full;
                for (int p = 0; p < n; ++p) {
                    row[coord[p] + static_cast<std::size_t>(digit[p]) * stride[p]] +=
                        w * pre[p] * suf[p + 1];
                }
                const double resp_prod = pre[n];
                if (table) table[o * n_in + ix] += w * resp_prod;
                for (int s = 0; s < S; ++s) {
                    row[plan.source_offset(s) + plan.source_value[s][h]] +=
                        weight_excl[static_cast<std::size_t>(s) * plan.n_hidden + h] *
                        resp_prod;
                }
                for (int p = n - 1; p >= 0; --p) {
                    if (++digit[p] < plan.m[p]) break;
                    digit[p] = 0;
                }
            }
        }
    }
}

}  // namespace netlocal::detail
