#include "strobo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strobo/frame.hpp"
#include "strobo/injectivity.hpp"
#include "strobo/kernels.hpp"

namespace strobo {

namespace {

json state_json(const StateVector& s) { return vector_to_json(s.components()); }

RunReport make_report(std::string command, const ExperimentConfig& config, json results) {
  RunReport r;
  r.command = std::move(command);
  r.config = config_to_json(config);
  r.results = std::move(results);
  return r;
}

StateVector require_truth(const ExperimentConfig& config, const char* command) {
  auto truth = config.build_truth();
  if (!truth) throw Error(ErrorKind::ConfigError, std::string("field 'truth': required by ") + command);
  return *truth;
}

void check_data_times(const ExperimentConfig& config, const std::vector<MeasurementRecord>& data) {
  const auto* explicit_times = std::get_if<std::vector<double>>(&config.times);
  if (!explicit_times) return;
  for (const auto& r : data) {
    const bool known = std::any_of(explicit_times->begin(), explicit_times->end(), [&](double t) {
      return std::abs(t - r.time) <= 1e-9 * std::max(1.0, std::abs(t));
    });
    if (!known) {
      throw Error(ErrorKind::DataMismatch, "record time " + std::to_string(r.time) + " for '" +
                                               r.projector_label + "' is not a configured instant");
    }
  }
}

}  // namespace

json to_json(const SpanningVerdict& v) {
  return {{"spans", v.spans}, {"rank", v.rank}, {"defect_dimension", v.defect_dimension}};
}

json to_json(const InjectivityVerdict& v) {
  json j = {{"status", std::string(to_string(v.status))},
            {"nullspace_dimension", v.nullspace_dimension},
            {"effective_frame_size", v.effective_frame_size},
            {"meets_4d_minus_4", v.advisory_4d4}};
  if (v.witness) {
    j["witness"] = matrix_to_json(v.witness->entries());
    const auto [x, y] = ambiguous_pair(*v.witness);
    j["ambiguous_pair"] = {vector_to_json(x), vector_to_json(y)};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json to_json(const ReconstructionReport& r) {
  const auto& d = r.diagnostics;
  json diag = {{"mu", d.mu},
               {"times", d.times},
               {"det_lambda", d.det_lambda},
               {"spanning", to_json(d.spanning)},
               {"injectivity", to_json(d.injectivity)},
               {"residual", d.residual},
               {"model_discrepancy_max", d.model_discrepancy_max},
               {"starts", d.starts}};
  if (d.lambda_condition) diag["lambda_condition"] = *d.lambda_condition;
  json j = {{"recovered_state", state_json(r.recovered_state)},
            {"method", std::string(to_string(r.method))},
            {"diagnostics", std::move(diag)}};
  j["fidelity_to_truth"] = r.fidelity_to_truth ? json(*r.fidelity_to_truth) : json(nullptr);
  if (r.recovered_state.dim() == 2) {
    const auto b = state_to_bloch(r.recovered_state);
    j["bloch"] = {{"theta", b.theta}, {"phi", b.phi}};
  }
  return j;
}

json report_to_json(const RunReport& r) {
  return {{"command", r.command}, {"versions", r.versions}, {"config", r.config}, {"results", r.results}};
}

RunReport report_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "report: expected an object");
  for (const char* key : {"command", "versions", "config", "results"}) {
    if (!j.contains(key)) throw Error(ErrorKind::ConfigError, std::string("report: missing field '") + key + "'");
  }
  const json& v = j.at("versions");
  if (!v.is_object() || !v.contains("schema") || !v.at("schema").is_string()) {
    throw Error(ErrorKind::ConfigError, "report: missing schema version");
  }
  RunReport r;
  r.command = j.at("command").get<std::string>();
  r.versions = v;
  r.config = j.at("config");
  r.results = j.at("results");
  return r;
}

RunReport cmd_analyze(const ExperimentConfig& config, Execution exec) {
  const auto h = config.build_hamiltonian();
  const auto projectors = config.build_projectors();
  const auto info = minimal_polynomial(h);

  json results;
  results["mu"] = info.mu;
  std::vector<double> eigenvalues(info.distinct_eigenvalues.begin(), info.distinct_eigenvalues.end());
  results["distinct_eigenvalues"] = eigenvalues;

  const auto times = config.resolve_times(info, exec);
  const auto lm = lambda_matrix(info, times);
  results["times"] = times;
  results["invertible_times"] = check_theorem1(lm, info.mu);
  results["det_lambda"] = lm.entries.rows() == lm.entries.cols() ? std::abs(lm.entries.determinant()) : 0.0;

  const Frame frame = build_frame(h, projectors);
  results["frame_size"] = frame.size();
  results["spanning"] = to_json(check_necessary_condition(frame, h.dim()));
  WitnessSearchOptions opt;
  opt.attempts = config.injectivity_attempts;
  opt.seed = config.seed;
  opt.execution = exec;
  results["injectivity"] = to_json(check_injectivity(frame, opt));
  return make_report("analyze", config, std::move(results));
}

std::vector<MeasurementRecord> simulate_data(const ExperimentConfig& config, DataModel model,
                                             Execution exec) {
  const auto truth = require_truth(config, "simulate");
  const auto h = config.build_hamiltonian();
  const auto info = minimal_polynomial(h);
  const auto times = config.resolve_times(info, exec);
  const auto shots = model == DataModel::Exact ? config.shots : std::nullopt;
  return simulate_records(h, truth, config.build_projectors(), times, model, shots, config.seed, exec);
}

RunReport cmd_simulate(const ExperimentConfig& config, Execution exec) {
  const auto truth = require_truth(config, "simulate");
  json results;
  results["truth"] = state_json(truth);
  results["exact"] = records_to_json(simulate_data(config, DataModel::Exact, exec));
  results["factored"] = records_to_json(simulate_data(config, DataModel::Factored, exec));
  return make_report("simulate", config, std::move(results));
}

RunReport cmd_reconstruct(const ExperimentConfig& config, const std::vector<MeasurementRecord>& data,
                          Execution exec) {
  if (data.empty()) throw Error(ErrorKind::DataMismatch, "data file holds no records");
  check_data_times(config, data);
  ReconstructOptions opt;
  opt.truth = config.build_truth();
  opt.seed = config.seed;
  opt.injectivity_attempts = config.injectivity_attempts;
  opt.execution = exec;
  const auto report = reconstruct_dynamic(config.build_hamiltonian(), config.build_projectors(), data,
                                          config.mode, opt);
  json results = to_json(report);
  results["mode"] = std::string(to_string(config.mode));
  results["record_count"] = data.size();
  return make_report("reconstruct", config, std::move(results));
}

RunReport cmd_validate_model(const ExperimentConfig& config, Execution exec) {
  const auto truth = require_truth(config, "validate-model");
  const auto h = config.build_hamiltonian();
  const auto projectors = config.build_projectors();
  const auto& scan = config.scan;

  std::vector<double> grid(static_cast<std::size_t>(scan.points));
  for (int g = 0; g < scan.points; ++g) {
    grid[static_cast<std::size_t>(g)] = scan.t_min + (scan.t_max - scan.t_min) * g / (scan.points - 1);
  }

  json per = json::array();
  double overall = 0.0;
  for (const auto& p : projectors) {
    const auto profile = exec == Execution::Parallel
                             ? kernels::discrepancy_profile_parallel(h, truth, p, grid)
                             : kernels::discrepancy_profile_serial(h, truth, p, grid);
    const auto top = std::max_element(profile.begin(), profile.end());
    const double mean = std::accumulate(profile.begin(), profile.end(), 0.0) / static_cast<double>(profile.size());
    overall = std::max(overall, *top);
    per.push_back({{"projector", p.label},
                   {"max", *top},
                   {"argmax_time", grid[static_cast<std::size_t>(top - profile.begin())]},
                   {"mean", mean},
                   {"profile", profile}});
  }
  json results = {{"grid", {{"t_min", scan.t_min}, {"t_max", scan.t_max}, {"points", scan.points}}},
                  {"projectors", std::move(per)},
                  {"max_discrepancy", overall}};
  return make_report("validate-model", config, std::move(results));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return 2;
    case ErrorKind::SingularLambda: return 3;
    case ErrorKind::FrameDeficient: return 4;
    case ErrorKind::NonConvergence: return 5;
    case ErrorKind::DataMismatch: return 6;
    case ErrorKind::InconsistentData: return 7;
    case ErrorKind::NoInvertibleTimes: return 8;
    default: return 1;
  }
}

}  // namespace strobo
