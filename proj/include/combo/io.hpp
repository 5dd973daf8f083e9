#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "combo/construct.hpp"
#include "combo/embed.hpp"
#include "combo/pipeline.hpp"
#include "combo/simgen.hpp"

namespace combo::io {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir);

// Exclusive per-output-directory lock; released on destruction.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path lock_path_;
};

nlohmann::json world_to_json(const World& world);
World world_from_json(const nlohmann::json& j);
void write_world(const World& world, const fs::path& path);
World read_world(const fs::path& path);

// One JSON record per query, quotes nested.
void write_ground_truth_day(const GroundTruthDay& day, const fs::path& path);
GroundTruthDay read_ground_truth_day(const fs::path& path);

void write_instances_jsonl(const LabeledDay& day, const fs::path& path);

void write_curve_csv(const CostRecallCurve& curve, const fs::path& path);

struct AucRow {
  std::string model;
  std::string feature_mode;
  double auc = 0.0;
};
void write_auc_csv(const std::vector<AucRow>& rows, const fs::path& path);

void write_rules_csv(const RuleSet& rules, const fs::path& path);

void write_day_report_json(const DayReport& report, const fs::path& path);

void write_run_summary_csv(const std::vector<DayReport>& reports,
                           const fs::path& path);

void write_stability_csv(const std::vector<DayReport>& reports,
                         const fs::path& path);

void write_staleness_csv(const StalenessSeries& series, const fs::path& path);

void write_window_sweep_csv(const std::vector<WindowSweepRow>& rows,
                            const fs::path& path);

void write_gap_csv(const std::vector<GapRow>& rows, const fs::path& path);

// `airport_code, v0..v{dim-1}` rows, sorted by code.
void write_embeddings_csv(const EmbeddingTable& table, const Catalog& catalog,
                          const fs::path& path);

void write_neighbors_csv(
    const std::vector<std::pair<AirportId, std::vector<Neighbor>>>& rows,
    const Catalog& catalog, const fs::path& path);

void write_model_json(const Scorer& scorer, const fs::path& path);

void write_json_file(const nlohmann::json& j, const fs::path& path);
nlohmann::json read_json_file(const fs::path& path);

std::string format_double(double value);

// Config sections. Parsing rejects unknown keys; absent keys keep defaults.
nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json forest_config_to_json(const ForestConfig& config);
ForestConfig forest_config_from_json(const nlohmann::json& j);
nlohmann::json logreg_config_to_json(const LogRegConfig& config);
LogRegConfig logreg_config_from_json(const nlohmann::json& j);
nlohmann::json embed_net_config_to_json(const EmbedNetConfig& config);
EmbedNetConfig embed_net_config_from_json(const nlohmann::json& j);
nlohmann::json skipgram_config_to_json(const SkipGramConfig& config);
SkipGramConfig skipgram_config_from_json(const nlohmann::json& j);
nlohmann::json pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

ScorerKind scorer_kind_from_name(const std::string& name);
FeatureMode feature_mode_from_name(const std::string& name);

}  // namespace combo::io
