#pragma once

#include <string>

#include "enkbf/suites.hpp"

namespace enkbf {

// CSV layouts are fixed; floats are written with the shortest decimal
// form that round-trips, so identical runs produce byte-identical files.

void write_diagnostics_csv(const std::string& path,
                           const std::vector<CycleDiagnostics>& diagnostics);

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);

void write_ecdf_csv(const std::string& path,
                    const std::vector<std::pair<double, double>>& ecdf);

void write_inflation_fields_csv(
    const std::string& path,
    const std::vector<std::tuple<long, int, double>>& fields);

// One JSON object with the RunSummary fields plus the resolved config.
void write_summary_json(const std::string& path, const RunSummary& summary,
                        const ExperimentConfig& cfg);

std::string summary_json_string(const RunSummary& summary,
                                const ExperimentConfig& cfg);

}  // namespace enkbf
