// mfi-lab: batch runner for multiscale functional inequality experiments.
//
//   mfi-lab run <config.json> [--workers N] [--out DIR]
//   mfi-lab report <glob>
//
// Exit status: 0 success, 2 invalid config or arguments, 3 runtime failure.

#include <glob.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mfilab/error.hpp"
#include "mfilab/experiment.hpp"
#include "mfilab/io.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kRuntime = 3;

int exit_code(const mfilab::Error& e) {
  switch (e.code()) {
    case mfilab::ErrorCode::ConfigValidation:
    case mfilab::ErrorCode::MixedReportKinds:
      return kValidation;
    default:
      return kRuntime;
  }
}

std::vector<std::filesystem::path> expand(const std::string& pattern) {
  glob_t g{};
  std::vector<std::filesystem::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  return out;  // glob sorts matches
}

int workers_from_env() {
  const char* env = std::getenv("MFI_LAB_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    throw mfilab::Error(mfilab::ErrorCode::ConfigValidation,
                        "MFI_LAB_WORKERS: expected a positive integer");
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo checks of multiscale functional inequalities"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment config");
  std::string config_path;
  std::optional<int> workers;
  std::string out_dir;
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--workers", workers, "worker threads (default MFI_LAB_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory, overrides the config");

  auto* report = app.add_subcommand("report", "tabulate MfiReport files as CSV");
  std::string pattern;
  report->add_option("glob", pattern, "report files, e.g. 'out/*/report_*.json'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (run->parsed()) {
      const int n = workers ? *workers : workers_from_env();
      nlohmann::json config;
      try {
        config = nlohmann::json::parse(mfilab::read_text(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "mfi-lab: " << config_path << ": " << e.what() << "\n";
        return kValidation;
      }
      std::optional<std::filesystem::path> out;
      if (!out_dir.empty()) out = out_dir;
      const auto outcome = mfilab::run_experiment(config, out, n);
      for (const auto& a : outcome.artifacts) {
        std::cout << (outcome.output / a).string() << "\n";
      }
      return 0;
    }
    const auto files = expand(pattern);
    if (files.empty()) {
      std::cerr << "mfi-lab: no files match " << pattern << "\n";
      return kValidation;
    }
    std::cout << mfilab::report_table(files);
    return 0;
  } catch (const mfilab::Error& e) {
    std::cerr << "mfi-lab: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "mfi-lab: " << e.what() << "\n";
    return kRuntime;
  }
}
