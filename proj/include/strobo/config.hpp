#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "strobo/core_types.hpp"
#include "strobo/measurement.hpp"
#include "strobo/reconstruct.hpp"
#include "strobo/spectral.hpp"

namespace strobo {

using json = nlohmann::json;

struct AutoTimes {
  double horizon = 0.0;
  int grid = 0;
  bool operator==(const AutoTimes&) const = default;
};

struct ProjectorSpec {
  std::string label;
  CVector vector;
  bool operator==(const ProjectorSpec& o) const {
    return label == o.label && vector.size() == o.vector.size() && vector == o.vector;
  }
};

struct ScanSpec {
  double t_min = 0.0;
  double t_max = 3.141592653589793;
  int points = 101;
  bool operator==(const ScanSpec&) const = default;
};

/// Named preset ("sigma_y", "diag:[1,2]", ...) or dense entries.
using HamiltonianSpec = std::variant<std::string, CMatrix>;
using TimesSpec = std::variant<std::vector<double>, AutoTimes>;
using TruthSpec = std::variant<CVector, BlochParameters>;

struct ExperimentConfig {
  int dimension = 0;
  HamiltonianSpec hamiltonian;
  std::vector<ProjectorSpec> projectors;
  TimesSpec times;
  std::optional<TruthSpec> truth;
  std::optional<std::int64_t> shots;  // empty: "exact"
  std::uint64_t seed = 0;
  ReconstructionMode mode = ReconstructionMode::Factored;
  int injectivity_attempts = 64;
  ScanSpec scan;

  HermitianOperator build_hamiltonian() const;
  std::vector<Projector> build_projectors() const;
  std::optional<StateVector> build_truth() const;
  /// Explicit times as given, or t_1 = 0 plus grid-searched instants.
  std::vector<double> resolve_times(const MinimalPolynomialInfo& info,
                                    Execution exec = Execution::Parallel) const;

  bool operator==(const ExperimentConfig& o) const;
};

inline constexpr const char* kSchemaVersion = "1.0.0";
inline constexpr const char* kArtifactVersion = "0.1.0";

/// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c);

/// `path` may also be "preset:<name>" for a built-in fixture.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Names of built-in presets and their JSON text.
std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

json complex_to_json(Complex z);
Complex complex_from_json(const json& j, const std::string& field);
json vector_to_json(const CVector& v);
json matrix_to_json(const CMatrix& m);

json record_to_json(const MeasurementRecord& r);
MeasurementRecord record_from_json(const json& j, const std::string& field);
std::vector<MeasurementRecord> records_from_json(const json& j);
json records_to_json(const std::vector<MeasurementRecord>& records);

std::vector<MeasurementRecord> load_records(const std::string& path);

/// Newline-terminated UTF-8 text, 2-space indentation.
std::string dump(const json& j);

}  // namespace strobo
