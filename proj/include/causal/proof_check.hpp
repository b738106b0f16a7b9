// Independent re-validation of a proven tableau report. Nothing is searched:
// every production is replayed from its recorded parameters.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace causal {

struct ProofCheck {
  bool ok = false;
  std::vector<std::string> problems;
};

ProofCheck check_proof(const nlohmann::json& report);

}  // namespace causal
