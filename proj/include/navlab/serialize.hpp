#ifndef navlab_serialize_hpp
#define navlab_serialize_hpp

#include <string>

#include <json.hpp>

#include "navlab/geometry.hpp"
#include "navlab/measure.hpp"
#include "navlab/routing.hpp"
#include "navlab/sampler.hpp"
#include "navlab/setsystem.hpp"

namespace navlab {

using json = nlohmann::ordered_json;

std::string to_string(GeometryKind kind);

/// Non-finite values become null.
json number(double x);

json to_json(const CoherenceReport& r);
json to_json(const AxiomReport& r);
json to_json(const ShrinkageReport& r);
json to_json(const ScaleSetReport& r);
json to_json(const CoherenceConstants& c);
json to_json(const IsotropyLemmaReport& r);
json to_json(const CostGeometry& cg);
json to_json(const EntropicSolution& s);
json to_json(const SandwichParams& s);
json to_json(const Thresholds& t);
json to_json(const BatchStats& b);
json to_json(const EdgeProfile& m);
/// Summary only: n, gamma, seed, edge count and byScale.
json summary_json(const EdgeSet& e);

}

#endif /* navlab_serialize_hpp */
