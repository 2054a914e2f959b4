#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qsplit/stencil.hpp"
#include "qsplit/version.hpp"
#include "qsplit_cli/config.hpp"
#include "qsplit_cli/runner.hpp"

namespace {

using namespace qsplit;
using namespace qsplit::cli;

void print_violations(const std::exception& e) {
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : c->violations()) std::cerr << "  " << v << '\n';
  } else {
    std::cerr << "error: " << e.what() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-step Fourier solver and Trotter-error harness for convection and diffusion on the torus"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::vector<std::string> overrides;
  auto* run_cmd = app.add_subcommand("run", "run the configured experiment");
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config.output)");
  run_cmd->add_option("--threads", threads, "worker threads for scans")->check(CLI::PositiveNumber);
  run_cmd->add_option("--override", overrides, "key=value applied on top of the config");

  auto* validate_cmd = app.add_subcommand("validate", "check a configuration without running it");
  validate_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  validate_cmd->add_option("--override", overrides, "key=value applied on top of the config");

  int order = 1;
  auto* stencil_cmd = app.add_subcommand("stencil", "print centred first-derivative stencil weights");
  stencil_cmd->add_option("--p", order, "stencil order p")->required()->check(CLI::Range(1, kMaxStencilOrder));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (*stencil_cmd) {
    const auto a = stencil_coefficients(order);
    std::cout << "k,a_k\n";
    std::cout.precision(17);
    for (int k = -order; k <= order; ++k) std::cout << k << ',' << a[k] << '\n';
    std::cerr << "moment residual " << moment_residual(a) << '\n';
    return kExitOk;
  }

  RunConfig config;
  try {
    config = load_config(config_path, overrides);
  } catch (const std::exception& e) {
    print_violations(e);
    const int code = classify(e);
    if (*run_cmd) {
      nlohmann::json echo = nullptr;
      try {
        std::ifstream in(config_path, std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        echo = parse_config_text(text.str());
      } catch (const std::exception&) {
      }
      std::string dir = out_dir;
      if (dir.empty()) {
        dir = echo.is_object() && echo.contains("output") && echo["output"].is_string()
                  ? echo["output"].get<std::string>()
                  : RunConfig{}.output;
      }
      write_error_report(dir, echo, e, code);
    }
    return code;
  }

  if (*validate_cmd) {
    std::cout << "ok: " << to_string(config.experiment) << " on " << to_string(config.equation) << '\n';
    return kExitOk;
  }

  RunOptions options;
  if (!out_dir.empty()) options.out = out_dir;
  options.threads = threads;
  const auto outcome = run(config, options);
  const auto& report = outcome.report;
  if (outcome.exit_code != kExitOk) {
    std::cerr << "error: " << report["error"]["message"].get<std::string>() << '\n';
  } else {
    std::cout << report["experiment"].get<std::string>() << ": ok ("
              << (options.out ? *options.out : std::filesystem::path(config.output)).string() << ")\n";
  }
  return outcome.exit_code;
}
