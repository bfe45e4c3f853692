#pragma once

#include <string>

#include "netlocal/behaviour.hpp"
#include "netlocal/model.hpp"
#include "netlocal/optimizer.hpp"
#include "netlocal/topology.hpp"

namespace netlocal {

// JSON text for the fixed wire schemas. Numbers are written as decimals
// with 17 significant digits so binary64 values round-trip exactly; key
// order is fixed, so identical inputs serialize byte-identically.
std::string behaviour_to_json(const Behaviour& b);
std::string model_to_json(const LocalModel& m);
std::string topology_to_json(const NetworkTopology& t);
std::string fit_result_to_json(const FitResult& r);

Behaviour behaviour_from_json(const std::string& text);
LocalModel model_from_json(const std::string& text);
NetworkTopology topology_from_json(const std::string& text);

// File round trips. Loaders throw InputDataError on malformed contents,
// negative entries, or broken normalization.
Behaviour load_behaviour(const std::string& path);
void save_behaviour(const Behaviour& b, const std::string& path);
LocalModel load_model(const std::string& path);
void save_model(const LocalModel& m, const std::string& path);
NetworkTopology load_topology(const std::string& path);

}  // namespace netlocal
