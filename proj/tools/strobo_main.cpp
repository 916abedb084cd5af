#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "strobo/commands.hpp"
#include "strobo/config.hpp"
#include "strobo/log.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw strobo::Error(strobo::ErrorKind::ConfigError, "cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stroboscopic phase retrieval: frame analysis, simulation and reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string data_model = "exact";
  bool serial = false;
  bool verbose = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file or preset:<name>")->required();
    sub->add_option("--out", out_path, "report path (default stdout)");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--mode", mode, "factored or exact-fit")->check(CLI::IsMember({"factored", "exact-fit"}));
    sub->add_flag("--serial", serial, "disable OpenMP fan-out");
    sub->add_flag("-v,--verbose", verbose, "log progress to stderr");
  };

  auto* analyze = app.add_subcommand("analyze", "minimal polynomial, time choice, spanning and injectivity");
  add_common(analyze);
  auto* simulate = app.add_subcommand("simulate", "measurement records under both forward models");
  add_common(simulate);
  simulate->add_option("--data", data_path, "also write one model's records as a data file");
  simulate->add_option("--data-model", data_model, "records written to --data")
      ->check(CLI::IsMember({"exact", "factored"}));
  auto* reconstruct = app.add_subcommand("reconstruct", "recover the initial state from a data file");
  add_common(reconstruct);
  reconstruct->add_option("--data", data_path, "measurement records")->required();
  auto* validate = app.add_subcommand("validate-model", "scan the factored-model discrepancy over time");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  if (verbose) strobo::log().set_level(spdlog::level::info);
  const auto exec = serial ? strobo::Execution::Serial : strobo::Execution::Parallel;

  try {
    auto config = strobo::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!mode.empty()) config.mode = strobo::parse_mode(mode);

    strobo::RunReport report;
    if (analyze->parsed()) {
      report = strobo::cmd_analyze(config, exec);
    } else if (simulate->parsed()) {
      report = strobo::cmd_simulate(config, exec);
      if (!data_path.empty()) {
        const auto model = data_model == "factored" ? strobo::DataModel::Factored : strobo::DataModel::Exact;
        write_text(data_path, strobo::dump(strobo::records_to_json(strobo::simulate_data(config, model, exec))));
      }
    } else if (reconstruct->parsed()) {
      report = strobo::cmd_reconstruct(config, strobo::load_records(data_path), exec);
    } else {
      report = strobo::cmd_validate_model(config, exec);
    }
    write_text(out_path, strobo::dump(strobo::report_to_json(report)));
  } catch (const strobo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return strobo::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
