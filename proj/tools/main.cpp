#include <CLI11.hpp>

#include "combo/commands.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_data) {
  cmd->add_option("--config", args.config_path, "experiment config JSON");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  if (needs_data) {
    cmd->add_option("--data", args.data_dir,
                    "directory produced by `simulate`")
        ->required();
  }
  cmd->add_option("--seed", args.seed, "override every config seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

combo::ExperimentSpec spec_for(const CommonArgs& args) {
  std::optional<std::filesystem::path> config;
  if (!args.config_path.empty()) config = args.config_path;
  std::optional<std::uint64_t> seed;
  if (args.seed_set) seed = args.seed;
  return combo::load_spec(config, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Synthetic flight-fare marketplace, competitiveness models, and a "
      "day-sliced retraining pipeline"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  CommonArgs eval_args;
  CommonArgs pipe_args;
  CommonArgs embed_args;

  auto* simulate = app.add_subcommand(
      "simulate", "generate a marketplace and per-day ground truth");
  add_common(simulate, sim_args, false);
  bool write_labels = false;
  simulate->add_flag("--write-labels", write_labels,
                     "also write labeled instances per day");

  auto* eval_models = app.add_subcommand(
      "eval-models", "train the model zoo and emit AUC table and curves");
  add_common(eval_models, eval_args, true);
  int eval_window = 0;
  eval_models->add_option("--window", eval_window, "training window in days");

  auto* pipeline = app.add_subcommand(
      "pipeline", "run the daily retraining and serving loop");
  add_common(pipeline, pipe_args, true);
  double budget = 0.0;
  int pipe_window = 0;
  bool with_stability = false;
  bool with_staleness = false;
  bool with_window_sweep = false;
  std::string feature_mode;
  pipeline->add_option("--budget", budget, "quote-request budget in (0,1]");
  pipeline->add_option("--window", pipe_window, "training window in days");
  pipeline->add_flag("--stability", with_stability,
                     "emit day-over-day rule stability CSV");
  pipeline->add_flag("--staleness", with_staleness,
                     "emit one-off vs daily-retrained AUC series");
  pipeline->add_flag("--window-sweep", with_window_sweep,
                     "emit training-window AUC sweep");
  pipeline
      ->add_option("--feature-mode", feature_mode,
                   "forest features: onehot|trace|cotrained")
      ->check(CLI::IsMember({"onehot", "trace", "cotrained"}));

  auto* embed = app.add_subcommand(
      "embed", "train trace embeddings and report nearest neighbors");
  add_common(embed, embed_args, true);
  int neighbor_airports = 5;
  embed->add_option("--airports", neighbor_airports,
                    "number of sample airports in the neighbor report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      combo::CommandOptions options;
      options.out_dir = sim_args.out_dir;
      options.write_labels = write_labels;
      return combo::cmd_simulate(spec_for(sim_args), options);
    }
    if (eval_models->parsed()) {
      combo::CommandOptions options;
      options.out_dir = eval_args.out_dir;
      options.data_dir = eval_args.data_dir;
      if (eval_window > 0) options.window_override = eval_window;
      return combo::cmd_eval_models(spec_for(eval_args), options);
    }
    if (pipeline->parsed()) {
      combo::CommandOptions options;
      options.out_dir = pipe_args.out_dir;
      options.data_dir = pipe_args.data_dir;
      if (budget > 0.0) options.budget_override = budget;
      if (pipe_window > 0) options.window_override = pipe_window;
      options.with_stability = with_stability;
      options.with_staleness = with_staleness;
      options.with_window_sweep = with_window_sweep;
      if (!feature_mode.empty())
        options.feature_mode_override = combo::io::feature_mode_from_name(feature_mode);
      return combo::cmd_pipeline(spec_for(pipe_args), options);
    }
    combo::CommandOptions options;
    options.out_dir = embed_args.out_dir;
    options.data_dir = embed_args.data_dir;
    options.neighbor_airports = neighbor_airports;
    return combo::cmd_embed(spec_for(embed_args), options);
  } catch (const combo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == combo::ErrorCode::InvalidConfig
               ? combo::kExitInvalidConfig
               : combo::kExitFailure;
  }
}
