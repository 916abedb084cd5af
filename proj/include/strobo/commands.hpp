#pragma once

#include <string>
#include <vector>

#include "strobo/config.hpp"
#include "strobo/error.hpp"

namespace strobo {

struct RunReport {
  std::string command;
  json config;
  json results;
  json versions = {{"schema", kSchemaVersion}, {"artifact", kArtifactVersion}};

  bool operator==(const RunReport&) const = default;
};

json report_to_json(const RunReport& r);
RunReport report_from_json(const json& j);

json to_json(const SpanningVerdict& v);
json to_json(const InjectivityVerdict& v);
json to_json(const ReconstructionReport& r);

RunReport cmd_analyze(const ExperimentConfig& config, Execution exec = Execution::Parallel);

/// Both forward models at the configured times; shot noise (if any) on the exact one.
RunReport cmd_simulate(const ExperimentConfig& config, Execution exec = Execution::Parallel);
std::vector<MeasurementRecord> simulate_data(const ExperimentConfig& config, DataModel model,
                                             Execution exec = Execution::Parallel);

RunReport cmd_reconstruct(const ExperimentConfig& config, const std::vector<MeasurementRecord>& data,
                          Execution exec = Execution::Parallel);

RunReport cmd_validate_model(const ExperimentConfig& config, Execution exec = Execution::Parallel);

/// 0 is success; each listed error kind has its own code, anything else is 1.
int exit_code(ErrorKind kind);

}  // namespace strobo
