#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mfilab/models.hpp"
#include "mfilab/observables.hpp"
#include "mfilab/weights.hpp"

namespace mfilab {

/// {"family": exponential | stretched-exp | exp-log | compact | gaussian |
/// radius-law | tabulated, ...}. The gaussian and radius-law families read
/// their covariance or radius law from the model unless given explicitly.
WeightFunction weight_from_json(const nlohmann::json& j, const std::string& key,
                                const FieldModel& model);

/// An array of observable objects, or an object keyed "0", "1", ...
std::vector<Observable> observables_from_json(const BoxSpec& box, const nlohmann::json& j,
                                              const std::string& key);

struct RunOutcome {
  std::filesystem::path output;
  /// Artifact file names relative to `output`, manifest last.
  std::vector<std::string> artifacts;
  nlohmann::json manifest;
};

/// Runs one experiment config (flat dotted keys or nested). `out` overrides the
/// config's output directory. Artifacts do not depend on `workers`.
/// Throws ConfigValidation for bad configs and other Errors at run time.
RunOutcome run_experiment(const nlohmann::json& config,
                          const std::optional<std::filesystem::path>& out, int workers);

/// One CSV row per MfiReport file, sorted by model id. Throws
/// MixedReportKinds when the reports disagree on the inequality.
std::string report_table(const std::vector<std::filesystem::path>& files);

}  // namespace mfilab
