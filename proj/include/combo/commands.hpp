#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "combo/io.hpp"
#include "combo/pipeline.hpp"

namespace combo {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitMissingData = 3;
inline constexpr int kExitValidationFailed = 4;

// Sampling knobs for the offline experiments (model comparison, window
// sweep, staleness).
struct EvalConfig {
  int train_window_days = 7;
  int eval_day = 7;
  int train_queries_per_day = 250;
  int top_k = 10;
  long long window_sweep_total_sample = 70000;
  std::vector<int> window_sweep_values = {1, 2, 3, 5, 7};
  int staleness_horizon_days = 6;
  long long staleness_sample_rows_per_day = 6000;
};

struct ExperimentSpec {
  SimConfig sim;
  ForestConfig forest;
  LogRegConfig logreg;
  EmbedNetConfig embed_net;
  SkipGramConfig skipgram;
  PipelineConfig pipeline;
  EvalConfig eval;

  // Fully resolved view, written next to every command's outputs.
  nlohmann::json to_json() const;
};

ExperimentSpec load_spec(const std::optional<std::filesystem::path>& config_path,
                         std::optional<std::uint64_t> seed_override);

EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json eval_config_to_json(const EvalConfig& config);

struct CommandOptions {
  std::filesystem::path out_dir;
  std::filesystem::path data_dir;  // simulate output consumed by the others
  bool write_labels = false;
  bool with_stability = false;
  bool with_staleness = false;
  bool with_window_sweep = false;
  std::optional<double> budget_override;
  std::optional<int> window_override;
  std::optional<FeatureMode> feature_mode_override;
  int top_k = 10;
  int neighbor_airports = 5;
  int neighbor_k = 5;
};

int cmd_simulate(const ExperimentSpec& spec, const CommandOptions& options);
int cmd_eval_models(const ExperimentSpec& spec, const CommandOptions& options);
int cmd_pipeline(const ExperimentSpec& spec, const CommandOptions& options);
int cmd_embed(const ExperimentSpec& spec, const CommandOptions& options);

}  // namespace combo
