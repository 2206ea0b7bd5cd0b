#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rmp/scenario.hpp"

namespace rmp {

// A built-in coefficient family. Parameters travel as JSON text.
struct ModelFamily {
  std::string name;
  std::string defaults_json;  // complete scenario document
  std::function<std::shared_ptr<const CoefficientSet>(const std::string& params)> build;
  // Declared assumption constants for the given parameters, Theta and V.
  std::function<AssumptionConstants(const std::string& params, const ThetaSpace&,
                                    const ControlSpace&, double probe_radius)>
      constants;
  bool bounded_terminal = true;
};

const ModelFamily& find_family(const std::string& name);
std::vector<std::string> family_names();

}  // namespace rmp
