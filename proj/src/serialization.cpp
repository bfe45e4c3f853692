#include "netlocal/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "netlocal/errors.hpp"

namespace netlocal {

namespace {

using nlohmann::json;

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void append_doubles(std::string& out, const std::vector<double>& values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += fmt(values[i]);
    }
    out += ']';
}

void append_ints(std::string& out, const std::vector<int>& values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    out += ']';
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputDataError("malformed JSON");
    return j;
}

std::vector<int> int_list(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw InputDataError(std::string("missing or non-array field \"") + key + "\"");
    }
    std::vector<int> out;
    for (const auto& e : j[key]) {
        if (!e.is_number_integer()) {
            throw InputDataError(std::string("field \"") + key + "\" must hold integers");
        }
        out.push_back(e.get<int>());
    }
    return out;
}

std::vector<double> double_list(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw InputDataError(std::string("missing or non-array field \"") + key + "\"");
    }
    std::vector<double> out;
    for (const auto& e : j[key]) {
        if (!e.is_number()) {
            throw InputDataError(std::string("field \"") + key + "\" must hold numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

NetworkTopology topology_from(const json& j) {
    NetworkTopology topo;
    topo.outputs = int_list(j, "outputs");
    topo.inputs = int_list(j, "inputs");
    if (!j.contains("wiring") || !j["wiring"].is_array()) {
        throw InputDataError("topology: missing or non-array \"wiring\"");
    }
    for (const auto& conn : j["wiring"]) {
        if (!conn.is_array()) throw InputDataError("topology: wiring entries must be arrays");
        std::vector<int> parties;
        for (const auto& e : conn) {
            if (!e.is_number_integer()) {
                throw InputDataError("topology: wiring entries must hold integers");
            }
            parties.push_back(e.get<int>());
        }
        topo.wiring.push_back(std::move(parties));
    }
    topo.party_count = static_cast<int>(topo.outputs.size());
    topo.source_count = static_cast<int>(topo.wiring.size());
    try {
        topo.check();
    } catch (const StructuralError& e) {
        throw InputDataError(e.what());
    }
    return topo;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputDataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputDataError("cannot write " + path);
    out << text;
}

}  // namespace

std::string topology_to_json(const NetworkTopology& t) {
    std::string out = "{\"outputs\":";
    append_ints(out, t.outputs);
    out += ",\"inputs\":";
    append_ints(out, t.inputs);
    out += ",\"wiring\":[";
    for (std::size_t s = 0; s < t.wiring.size(); ++s) {
        if (s) out += ',';
        append_ints(out, t.wiring[s]);
    }
    out += "]}";
    return out;
}

std::string behaviour_to_json(const Behaviour& b) {
    std::string out = "{\"outputs\":";
    append_ints(out, b.outputs);
    out += ",\"inputs\":";
    append_ints(out, b.inputs);
    out += ",\"data\":";
    append_doubles(out, b.data);
    out += "}";
    return out;
}

std::string model_to_json(const LocalModel& m) {
    std::string out = "{\"topology\":";
    out += topology_to_json(m.topology);
    out += ",\"sources\":[";
    for (std::size_t s = 0; s < m.sources.size(); ++s) {
        if (s) out += ',';
        out += "{\"cardinality\":" + std::to_string(m.sources[s].cardinality) +
               ",\"probabilities\":";
        append_doubles(out, m.sources[s].probabilities);
        out += "}";
    }
    out += "],\"responses\":[";
    for (std::size_t p = 0; p < m.responses.size(); ++p) {
        if (p) out += ',';
        out += "{\"party\":" + std::to_string(m.responses[p].party) + ",\"shape\":";
        append_ints(out, m.responses[p].shape);
        out += ",\"data\":";
        append_doubles(out, m.responses[p].data);
        out += "}";
    }
    out += "]}";
    return out;
}

std::string fit_result_to_json(const FitResult& r) {
    std::string out = "{\"success\":";
    out += r.success ? "true" : "false";
    out += ",\"best_rmse\":" + fmt(r.best_rmse);
    out += ",\"best_cost\":" + fmt(r.best_cost);
    out += ",\"model\":" + model_to_json(r.best_model);
    out += ",\"restarts\":[";
    for (std::size_t i = 0; i < r.per_restart.size(); ++i) {
        const auto& rec = r.per_restart[i];
        if (i) out += ',';
        out += "{\"seed\":" + std::to_string(rec.seed);
        out += ",\"cost\":" + fmt(rec.cost);
        out += ",\"iterations\":" + std::to_string(rec.iterations);
        out += ",\"reason\":\"" + rec.reason + "\"}";
    }
    out += "]}";
    return out;
}

Behaviour behaviour_from_json(const std::string& text) {
    const json j = parse(text);
    Behaviour b;
    b.outputs = int_list(j, "outputs");
    b.inputs = int_list(j, "inputs");
    b.data = double_list(j, "data");
    const auto violations = b.check();
    if (!violations.empty()) throw InputDataError(violations.front());
    return b;
}

NetworkTopology topology_from_json(const std::string& text) {
    return topology_from(parse(text));
}

LocalModel model_from_json(const std::string& text) {
    const json j = parse(text);
    if (!j.contains("topology")) throw InputDataError("model: missing \"topology\"");
    LocalModel m;
    m.topology = topology_from(j["topology"]);
    if (!j.contains("sources") || !j["sources"].is_array()) {
        throw InputDataError("model: missing or non-array \"sources\"");
    }
    for (const auto& js : j["sources"]) {
        SourceDistribution src;
        if (!js.contains("cardinality") || !js["cardinality"].is_number_integer()) {
            throw InputDataError("model: source without integer \"cardinality\"");
        }
        src.cardinality = js["cardinality"].get<int>();
        src.probabilities = double_list(js, "probabilities");
        m.sources.push_back(std::move(src));
    }
    if (!j.contains("responses") || !j["responses"].is_array()) {
        throw InputDataError("model: missing or non-array \"responses\"");
    }
    for (const auto& jr : j["responses"]) {
        ResponseFunction resp;
        if (!jr.contains("party") || !jr["party"].is_number_integer()) {
            throw InputDataError("model: response without integer \"party\"");
        }
        resp.party = jr["party"].get<int>();
        resp.shape = int_list(jr, "shape");
        resp.data = double_list(jr, "data");
        m.responses.push_back(std::move(resp));
    }
    const auto violations = validate(m);
    if (!violations.empty()) {
        throw InputDataError("model: " + violations.front().to_string());
    }
    return m;
}

Behaviour load_behaviour(const std::string& path) {
    return behaviour_from_json(read_file(path));
}

void save_behaviour(const Behaviour& b, const std::string& path) {
    write_file(path, behaviour_to_json(b) + "\n");
}

LocalModel load_model(const std::string& path) {
    return model_from_json(read_file(path));
}

void save_model(const LocalModel& m, const std::string& path) {
    write_file(path, model_to_json(m) + "\n");
}

NetworkTopology load_topology(const std::string& path) {
    return topology_from_json(read_file(path));
}

}  // namespace netlocal
