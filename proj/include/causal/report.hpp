// JSON proof reports and DOT pictures of tableaux.

#pragma once

#include <string>

#include "causal/tableau.hpp"
#include "json.hpp"

namespace causal {

struct ReportSources {
  std::string model;     // rendered model text
  std::string property;  // rendered property text
};

/// Report with `"format": 1`. `stats.time_ms` is the only field that varies
/// between identical runs; pass include_time = false to omit it.
nlohmann::json to_json(const Tableau& tableau, const Verdict& verdict,
                       const ReportSources& sources, bool include_time = true);

nlohmann::json run_to_json(const Explorer& ex, const Run& run);

/// Solid tree edges labeled by rule, dashed covering edges, bottom marks on
/// contradictory leaves.
std::string export_dot(const Tableau& tableau);

}  // namespace causal
