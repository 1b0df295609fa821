#pragma once

#include <map>
#include <string>

#include "snnsc/graph.hpp"

namespace snnsc {

// All parameter groups of the system plus the hash of the architecture
// config they were built under. Groups absent from a stage's checkpoint are
// simply missing from the map.
struct ModelParams {
  uint64_t config_hash = 0;
  std::map<ParamRole, ParamGroup> groups;

  ParamGroup& group(ParamRole r) {
    auto [it, inserted] = groups.try_emplace(r);
    if (inserted) it->second.role = r;
    return it->second;
  }
  const ParamGroup& group(ParamRole r) const { return groups.at(r); }
  bool has(ParamRole r) const { return groups.count(r) != 0; }
};

// Binary container, little-endian. Layout documented in the repo README;
// load(save(x)) round-trips bit-exactly.
void save_checkpoint(const ModelParams& m, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace snnsc
