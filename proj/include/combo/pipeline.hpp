#pragma once

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "combo/construct.hpp"
#include "combo/eval.hpp"
#include "combo/models.hpp"

namespace combo {

struct Rule {
  AirportId origin = 0;
  AirportId destination = 0;
  AirlineId airline = 0;

  auto operator<=>(const Rule&) const = default;
};

// Serving artifact: (origin, destination, airline) triples containing at
// least one predicted-positive instance at the operating threshold.
struct RuleSet {
  Day day = 0;
  std::map<Rule, double> rules;  // rule -> max instance score
  double source_threshold = 0.0;
  double budget = 0.0;

  bool contains(const Rule& r) const { return rules.count(r) > 0; }
};

struct StabilityReport {
  Day day = 0;
  double retained_frac = 0.0;
  double dropped_frac = 0.0;
  double added_frac = 0.0;  // relative to the previous day's rule count
};

struct ModelConfig {
  ScorerKind kind = ScorerKind::RandomForest;
  FeatureMode feature_mode = FeatureMode::OneHot;
  ForestConfig forest;
  LogRegConfig logreg;
  double bandit_alpha0 = 1.0;
  double bandit_beta0 = 1.0;
  EmbedNetConfig embed_net;
  SkipGramConfig skipgram;
};

struct PipelineConfig {
  int train_window_days = 7;
  double budget = 0.05;
  double ground_truth_traffic = 0.05;
  double challenger_traffic = 0.05;
  double validation_fraction = 0.05;  // of the most recent ground-truth day
  bool carry_over = true;
  double validation_auc_floor = 55.0;       // cost-recall AUC, percent
  double validation_rate_band = 2.0;        // rate within budget/band..budget*band
  std::uint64_t seed = 7;
  ModelConfig model;
  std::optional<ModelConfig> challenger;

  void validate() const;
};

struct TrafficPartition {
  std::vector<int> ground_truth;  // query positions within the day
  std::vector<int> challenger;
  std::vector<int> serving;
};

// Disjoint, exhaustive, seeded-hash partition by query id.
TrafficPartition allocate_traffic(const std::vector<SearchQuery>& queries,
                                  double ground_truth_fraction,
                                  double challenger_fraction,
                                  std::uint64_t seed);

// LabeledDay restricted to the given query positions.
LabeledDay slice_labeled(const LabeledDay& full,
                         const std::vector<int>& query_positions);

// retained/dropped relative to prev; added relative to prev as well.
StabilityReport stability_report(const RuleSet& prev, const RuleSet& curr);

// Hash-ordered fixed-size validation subset of a day's queries; the
// training set is exactly the complement.
std::vector<int> validation_positions(const LabeledDay& latest, double fraction,
                                      std::uint64_t seed);

// Trains the configured model. `window_queries` feeds trace embeddings when
// the feature mode needs them; the oracle kind is rejected here.
ScorerPtr train_model(const std::vector<Instance>& train_instances,
                      const std::vector<SearchQuery>& window_queries,
                      int n_airports, int n_airlines, const ModelConfig& config);

struct DayReport {
  Day day = 0;
  bool trained = false;
  bool gate_passed = false;
  bool served = false;
  double val_auc = 0.0;
  double val_positive_rate = 0.0;
  double threshold = 0.0;
  double offline_expected_recall = 0.0;
  double realized_recall = 0.0;   // NaN when the served slice had no combos
  double realized_cost = 0.0;
  int rules_extracted = 0;
  int rules_served = 0;
  std::optional<StabilityReport> stability;
  std::optional<double> challenger_realized_recall;
  std::optional<double> challenger_realized_cost;
  // Fresh extraction of the day (absent when the gate failed); lets callers
  // audit the carry-over invariant.
  std::optional<RuleSet> extracted_rules;
};

struct GroundTruthSample {
  LabeledDay labels;
  std::vector<SearchQuery> queries;
};

struct PipelineState {
  PipelineConfig config;
  std::map<Day, GroundTruthSample> ground_truth_history;  // labeled 5% samples
  std::optional<RuleSet> last_extracted;
  std::optional<RuleSet> last_served;
  std::optional<RuleSet> challenger_last_extracted;
  std::optional<RuleSet> challenger_last_served;
  ScorerPtr current_model;
  double current_offline_recall = 0.0;
  double current_threshold = 0.0;
};

// One day of the production loop: train on the trailing window of
// ground-truth samples (validation slice excluded), gate, extract rules at
// the budget, apply carry-over, serve, then bank today's ground truth.
DayReport run_day(PipelineState& state, const GroundTruthDay& day_data,
                  const LabeledDay& full_labels, const World& world);

struct PipelineRun {
  std::vector<DayReport> reports;          // every day, warmup included
  std::vector<RuleSet> served_rules;       // one per served day
  PipelineState final_state;
};

PipelineRun run_pipeline(const World& world,
                         const std::vector<GroundTruthDay>& days,
                         const std::vector<LabeledDay>& labels,
                         const PipelineConfig& config);

struct WindowSweepRow {
  int window_days = 0;
  double auc = 0.0;
};

// Equal total training size for every N: total_sample/N rows from each of
// the N days before `eval_index`, evaluated on that day.
std::vector<WindowSweepRow> sweep_training_window(
    const std::vector<LabeledDay>& history, int eval_index,
    const std::vector<int>& n_values, long long total_sample,
    const ModelConfig& model, const std::vector<GroundTruthDay>& day_data,
    int n_airports, int n_airlines, std::uint64_t seed);

struct StalenessSeries {
  std::vector<Day> days;
  std::vector<double> one_off_auc;
  std::vector<double> daily_auc;
};

// One-off model trained before day t0 vs a model retrained every day,
// evaluated on days t0+1..t0+horizon.
StalenessSeries staleness_experiment(const std::vector<LabeledDay>& history,
                                     const std::vector<GroundTruthDay>& day_data,
                                     int t0, int horizon_days, int window_days,
                                     long long sample_rows_per_day,
                                     const ModelConfig& model, int n_airports,
                                     int n_airlines, std::uint64_t seed);

struct GapRow {
  Day day = 0;
  double offline_recall = 0.0;
  double realized_recall = 0.0;
  double relative_gap = 0.0;  // (offline - realized) / offline
};

std::vector<GapRow> production_gap_report(const std::vector<DayReport>& reports);

}  // namespace combo
