#include "netlocal/model.hpp"

#include <cmath>
#include <sstream>

#include "contraction.hpp"
#include "netlocal/errors.hpp"

namespace netlocal {

std::size_t ResponseFunction::hidden_size() const {
    std::size_t n = 1;
    for (std::size_t i = 2; i < shape.size(); ++i) n *= static_cast<std::size_t>(shape[i]);
    return n;
}

std::string Violation::to_string() const {
    std::ostringstream os;
    os << block << ": " << kind << " violation of magnitude " << magnitude;
    return os.str();
}

namespace {

// Expected response shape for party p given the source cardinalities.
std::vector<int> expected_shape(const NetworkTopology& topo,
                                const std::vector<int>& cards, int p) {
    std::vector<int> shape = {topo.outputs[p], topo.inputs[p]};
    for (int s : topo.sources_of(p)) shape.push_back(cards[s]);
    return shape;
}

std::vector<int> model_cardinalities(const LocalModel& model) {
    std::vector<int> cards;
    cards.reserve(model.sources.size());
    for (const auto& src : model.sources) cards.push_back(src.cardinality);
    return cards;
}

// Shape consistency, throwing on the first mismatch.
void check_shapes(const LocalModel& model) {
    const auto& topo = model.topology;
    topo.check();
    if (static_cast<int>(model.sources.size()) != topo.source_count) {
        throw StructuralError("model: expected " + std::to_string(topo.source_count) +
                              " sources, got " + std::to_string(model.sources.size()));
    }
    for (int s = 0; s < topo.source_count; ++s) {
        const auto& src = model.sources[s];
        if (src.cardinality < 1 ||
            src.probabilities.size() != static_cast<std::size_t>(src.cardinality)) {
            throw StructuralError("model: source " + std::to_string(s) +
                                  " has inconsistent cardinality/probabilities");
        }
    }
    if (static_cast<int>(model.responses.size()) != topo.party_count) {
        throw StructuralError("model: expected " + std::to_string(topo.party_count) +
                              " responses, got " + std::to_string(model.responses.size()));
    }
    const auto cards = model_cardinalities(model);
    for (int p = 0; p < topo.party_count; ++p) {
        const auto& resp = model.responses[p];
        if (resp.party != p) {
            throw StructuralError("model: response at position " + std::to_string(p) +
                                  " belongs to party " + std::to_string(resp.party));
        }
        if (resp.shape != expected_shape(topo, cards, p)) {
            throw StructuralError("model: response of party " + std::to_string(p) +
                                  " has a shape inconsistent with the wiring");
        }
        std::size_t expected_size = 1;
        for (int d : resp.shape) expected_size *= static_cast<std::size_t>(d);
        if (resp.data.size() != expected_size) {
            throw StructuralError("model: response of party " + std::to_string(p) +
                                  " has data size inconsistent with its shape");
        }
    }
}

}  // namespace

std::vector<Violation> validate(const LocalModel& model, double tolerance) {
    std::vector<Violation> violations;
    try {
        check_shapes(model);
    } catch (const StructuralError& e) {
        violations.push_back({"model", "shape", 0.0});
        violations.back().block = e.what();
        return violations;
    }

    for (std::size_t s = 0; s < model.sources.size(); ++s) {
        const std::string block = "source " + std::to_string(s);
        double sum = 0.0;
        for (double p : model.sources[s].probabilities) {
            sum += p;
            if (p < -tolerance) violations.push_back({block, "nonnegativity", -p});
        }
        if (std::abs(sum - 1.0) > tolerance) {
            violations.push_back({block, "normalization", std::abs(sum - 1.0)});
        }
    }

    for (const auto& resp : model.responses) {
        const int m = resp.shape[0];
        const int M = resp.shape[1];
        const std::size_t hidden = resp.hidden_size();
        const std::size_t stride = static_cast<std::size_t>(M) * hidden;
        for (int j = 0; j < M; ++j) {
            for (std::size_t h = 0; h < hidden; ++h) {
                const std::size_t cell = static_cast<std::size_t>(j) * hidden + h;
                const std::string block = "response of party " + std::to_string(resp.party) +
                                          ", column (input " + std::to_string(j) +
                                          ", hidden " + std::to_string(h) + ")";
                double sum = 0.0;
                for (int o = 0; o < m; ++o) {
                    const double p = resp.data[cell + static_cast<std::size_t>(o) * stride];
                    sum += p;
                    if (p < -tolerance) violations.push_back({block, "nonnegativity", -p});
                }
                if (std::abs(sum - 1.0) > tolerance) {
                    violations.push_back({block, "normalization", std::abs(sum - 1.0)});
                }
            }
        }
    }
    return violations;
}

LocalModel uniform_model(const NetworkTopology& topo,
                         const std::vector<int>& cardinalities) {
    topo.check();
    if (static_cast<int>(cardinalities.size()) != topo.source_count) {
        throw StructuralError("uniform_model: one cardinality per source required");
    }
    LocalModel model;
    model.topology = topo;
    for (int s = 0; s < topo.source_count; ++s) {
        const int c = cardinalities[s];
        if (c < 1) throw StructuralError("uniform_model: cardinality < 1");
        model.sources.push_back({c, std::vector<double>(c, 1.0 / c)});
    }
    for (int p = 0; p < topo.party_count; ++p) {
        ResponseFunction resp;
        resp.party = p;
        resp.shape = expected_shape(topo, cardinalities, p);
        std::size_t size = 1;
        for (int d : resp.shape) size *= static_cast<std::size_t>(d);
        resp.data.assign(size, 1.0 / topo.outputs[p]);
        model.responses.push_back(std::move(resp));
    }
    return model;
}

Behaviour evaluate_model(const LocalModel& model) {
    check_shapes(model);
    const auto cards = model_cardinalities(model);
    detail::ContractionPlan plan(model.topology, cards);

    std::vector<const double*> sources(model.sources.size());
    for (std::size_t s = 0; s < model.sources.size(); ++s) {
        sources[s] = model.sources[s].probabilities.data();
    }
    std::vector<const double*> responses(model.responses.size());
    for (std::size_t p = 0; p < model.responses.size(); ++p) {
        responses[p] = model.responses[p].data.data();
    }

    Behaviour behaviour;
    behaviour.outputs = model.topology.outputs;
    behaviour.inputs = model.topology.inputs;
    behaviour.data.resize(plan.n_outputs * plan.n_inputs);
    detail::contract(plan, sources.data(), responses.data(), behaviour.data.data());
    return behaviour;
}

}  // namespace netlocal
