#pragma once

#include "rezone/brep.hpp"
#include "rezone/proposal.hpp"
#include "rezone/zone_graph.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rezone {

struct GenerationExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedResult : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One sketch + extrude + Boolean on the integer grid: a rectangle on an
// axis-aligned plane swept dir*extent cells deep.
struct SynthOp {
  int axis = 2;    // sketch plane normal axis
  int dir = 1;     // +1 or -1 along the axis
  int level = 0;   // sketch plane coordinate
  int u0 = 0, u1 = 1, v0 = 0, v1 = 1;  // rectangle in the two cross axes
  int extent = 1;
  BoolType type = BoolType::Union;
};

struct SynthProgram {
  int grid = 4;
  std::vector<SynthOp> ops;
};

struct SynthConfig {
  int min_ops = 2;
  int max_ops = 4;
  int grid = 4;
  int max_attempts = 50000;
};

struct ZoneOp {
  std::vector<int> zones;
  BoolType type = BoolType::Union;
  std::string canonical_key;
};

struct ExecutedProgram {
  BRep brep;
  ZoneGraph zone_graph;  // built without simplification, classified
  std::vector<ZoneOp> gt_zone_ops;
};

// Rejection-samples programs until every invariant holds, including the
// zone-level round trip through the final model's arrangement.
SynthProgram generate_program(uint64_t seed, const SynthConfig& cfg);

// Evaluates the op sequence over grid cells, extracts the boundary B-rep,
// and re-expresses each op as a zone set against the final zone graph.
ExecutedProgram execute_program(const SynthProgram& p);

nlohmann::ordered_json program_to_json(const SynthProgram& p);
SynthProgram program_from_json(const nlohmann::json& doc);

nlohmann::ordered_json zone_ops_to_json(const std::vector<ZoneOp>& ops);
std::vector<ZoneOp> zone_ops_from_json(const nlohmann::json& doc);

}  // namespace rezone
