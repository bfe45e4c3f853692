#include "netlocal/parameters.hpp"

#include <sstream>

#include "netlocal/errors.hpp"

namespace netlocal {

std::string SimplexBlock::name() const {
    std::ostringstream os;
    if (is_source) {
        os << "source " << source;
    } else {
        os << "response of party " << party << ", column (input " << input
           << ", hidden " << hidden << ")";
    }
    return os.str();
}

ParameterLayout ParameterLayout::create(const NetworkTopology& topo,
                                        const std::vector<int>& cardinalities) {
    topo.check();
    if (static_cast<int>(cardinalities.size()) != topo.source_count) {
        throw StructuralError("parameter layout: one cardinality per source required");
    }
    ParameterLayout layout;
    layout.topology = topo;
    layout.cardinalities = cardinalities;

    std::size_t offset = 0;
    for (int s = 0; s < topo.source_count; ++s) {
        const int c = cardinalities[s];
        if (c < 1) throw StructuralError("parameter layout: cardinality < 1");
        SimplexBlock block;
        block.is_source = true;
        block.source = s;
        block.full_length = c;
        block.stored_length = c - 1;
        block.offset = offset;
        offset += static_cast<std::size_t>(block.stored_length);
        layout.blocks.push_back(block);
    }
    for (int p = 0; p < topo.party_count; ++p) {
        std::size_t hidden = 1;
        for (int s : topo.sources_of(p)) hidden *= static_cast<std::size_t>(cardinalities[s]);
        for (int j = 0; j < topo.inputs[p]; ++j) {
            for (std::size_t h = 0; h < hidden; ++h) {
                SimplexBlock block;
                block.is_source = false;
                block.party = p;
                block.input = j;
                block.hidden = h;
                block.full_length = topo.outputs[p];
                block.stored_length = topo.outputs[p] - 1;
                block.offset = offset;
                offset += static_cast<std::size_t>(block.stored_length);
                layout.blocks.push_back(block);
            }
        }
    }
    layout.total_stored = offset;
    return layout;
}

std::pair<ParameterVector, ParameterLayout> pack_parameters(const LocalModel& model) {
    // Reuse evaluate_model's shape validation through a cheap call path:
    // building the layout requires a consistent topology, and the copies
    // below require consistent array sizes.
    const auto violations = validate(model);
    for (const auto& v : violations) {
        if (v.kind == "shape") throw StructuralError(v.block);
    }

    std::vector<int> cards;
    for (const auto& src : model.sources) cards.push_back(src.cardinality);
    ParameterLayout layout = ParameterLayout::create(model.topology, cards);

    ParameterVector vector(layout.total_stored);
    for (const auto& block : layout.blocks) {
        if (block.is_source) {
            const auto& probs = model.sources[block.source].probabilities;
            for (int i = 0; i < block.stored_length; ++i) {
                vector[block.offset + static_cast<std::size_t>(i)] = probs[i];
            }
        } else {
            const auto& resp = model.responses[block.party];
            const std::size_t hidden = resp.hidden_size();
            const std::size_t stride = static_cast<std::size_t>(resp.shape[1]) * hidden;
            const std::size_t cell =
                static_cast<std::size_t>(block.input) * hidden + block.hidden;
            for (int o = 0; o < block.stored_length; ++o) {
                vector[block.offset + static_cast<std::size_t>(o)] =
                    resp.data[cell + static_cast<std::size_t>(o) * stride];
            }
        }
    }
    return {std::move(vector), std::move(layout)};
}

LocalModel unpack_parameters(const ParameterVector& vector,
                             const ParameterLayout& layout) {
    if (vector.size() != layout.total_stored) {
        throw StructuralError("unpack: vector length does not match layout");
    }
    check_feasible(vector, layout);

    LocalModel model = uniform_model(layout.topology, layout.cardinalities);
    for (const auto& block : layout.blocks) {
        double partial = 0.0;
        if (block.is_source) {
            auto& probs = model.sources[block.source].probabilities;
            for (int i = 0; i < block.stored_length; ++i) {
                probs[i] = vector[block.offset + static_cast<std::size_t>(i)];
                partial += probs[i];
            }
            probs[block.full_length - 1] = 1.0 - partial;
        } else {
            auto& resp = model.responses[block.party];
            const std::size_t hidden = resp.hidden_size();
            const std::size_t stride = static_cast<std::size_t>(resp.shape[1]) * hidden;
            const std::size_t cell =
                static_cast<std::size_t>(block.input) * hidden + block.hidden;
            for (int o = 0; o < block.stored_length; ++o) {
                const double p = vector[block.offset + static_cast<std::size_t>(o)];
                resp.data[cell + static_cast<std::size_t>(o) * stride] = p;
                partial += p;
            }
            resp.data[cell + static_cast<std::size_t>(block.full_length - 1) * stride] =
                1.0 - partial;
        }
    }
    return model;
}

void check_feasible(const ParameterVector& vector, const ParameterLayout& layout,
                    double tolerance) {
    if (vector.size() != layout.total_stored) {
        throw FeasibilityError("parameter vector length does not match layout");
    }
    for (const auto& block : layout.blocks) {
        double sum = 0.0;
        for (int i = 0; i < block.stored_length; ++i) {
            const double p = vector[block.offset + static_cast<std::size_t>(i)];
            if (p < -tolerance) {
                throw FeasibilityError(block.name() + ": coordinate " + std::to_string(i) +
                                       " is negative (" + std::to_string(p) + ")");
            }
            sum += p;
        }
        if (sum > 1.0 + tolerance) {
            throw FeasibilityError(block.name() + ": stored coordinates sum to " +
                                   std::to_string(sum) + " > 1");
        }
    }
}

}  // namespace netlocal
