#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "combo/pipeline.hpp"
#include "test_support.hpp"

using namespace combo;

namespace {

// Small drifting world that runs the full loop in a couple of seconds.
SimConfig pipeline_world_config(std::uint64_t seed = 7) {
  SimConfig config;
  config.seed = seed;
  config.n_airports = 10;
  config.n_regions = 2;
  config.n_airlines = 8;
  config.n_users = 150;
  config.queries_per_day = 400;
  config.n_days = 8;
  return config;
}

PipelineConfig small_pipeline(std::uint64_t seed = 7) {
  PipelineConfig config;
  config.train_window_days = 3;
  // small toy days: widen the ground-truth slice and loosen the gate so the
  // loop itself (not gate noise) is under test
  config.ground_truth_traffic = 0.3;
  config.validation_fraction = 0.2;
  config.validation_auc_floor = 45.0;
  config.validation_rate_band = 5.0;
  config.challenger_traffic = 0.05;
  config.seed = seed;
  config.model.forest.n_trees = 15;
  config.model.forest.max_depth = 8;
  config.model.forest.min_samples_leaf = 10;
  config.model.forest.n_threads = 2;
  return config;
}

struct RunFixture {
  World world;
  std::vector<GroundTruthDay> days;
  std::vector<LabeledDay> labels;
};

RunFixture build_fixture(std::uint64_t seed = 7) {
  RunFixture fixture{generate_world(pipeline_world_config(seed)), {}, {}};
  for (Day d = 0; d < fixture.world.config.n_days; ++d) {
    fixture.days.push_back(generate_day(fixture.world, d));
    fixture.labels.push_back(label_day(fixture.days.back(), fixture.world, 10));
  }
  return fixture;
}

RuleSet rules_from(std::initializer_list<int> ids, Day day = 1) {
  RuleSet rules;
  rules.day = day;
  for (int id : ids) rules.rules.emplace(Rule{id, id + 1, 0}, 1.0);
  return rules;
}

}  // namespace

TEST_CASE("allocate_traffic partitions by seeded hash") {
  std::vector<SearchQuery> queries;
  for (int i = 0; i < 2000; ++i)
    queries.push_back(make_query(i, i % 50, 0, 1, 0, 1, 2));
  const TrafficPartition part = allocate_traffic(queries, 0.05, 0.05, 7);
  const std::size_t total =
      part.ground_truth.size() + part.challenger.size() + part.serving.size();
  CHECK(total == queries.size());
  CHECK(std::abs(static_cast<int>(part.ground_truth.size()) - 100) <= 30);
  CHECK(std::abs(static_cast<int>(part.challenger.size()) - 100) <= 30);

  // disjointness
  std::set<int> seen;
  for (const auto* bucket : {&part.ground_truth, &part.challenger, &part.serving})
    for (int i : *bucket) CHECK(seen.insert(i).second);

  // determinism
  const TrafficPartition again = allocate_traffic(queries, 0.05, 0.05, 7);
  CHECK(again.ground_truth == part.ground_truth);
  CHECK(again.serving == part.serving);

  try {
    allocate_traffic(queries, 0.6, 0.6, 7);
    FAIL("expected InvalidFractions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFractions);
  }
}

TEST_CASE("stability report set arithmetic") {
  // prev {r1..r8}, curr {r1..r7, r9}
  const RuleSet prev = rules_from({1, 2, 3, 4, 5, 6, 7, 8});
  const RuleSet curr = rules_from({1, 2, 3, 4, 5, 6, 7, 9}, 2);
  const StabilityReport report = stability_report(prev, curr);
  CHECK(report.retained_frac == doctest::Approx(0.875));
  CHECK(report.dropped_frac == doctest::Approx(0.125));
  CHECK(report.added_frac == doctest::Approx(0.125));
  CHECK(report.retained_frac + report.dropped_frac == doctest::Approx(1.0));

  const StabilityReport same = stability_report(prev, prev);
  CHECK(same.retained_frac == 1.0);
  CHECK(same.added_frac == 0.0);

  const StabilityReport disjoint =
      stability_report(rules_from({1, 2, 3, 4, 5}), rules_from({6, 7, 8, 9, 10}));
  CHECK(disjoint.retained_frac == 0.0);
  CHECK(disjoint.dropped_frac == 1.0);
  CHECK(disjoint.added_frac == 1.0);

  try {
    stability_report(RuleSet{}, curr);
    FAIL("expected EmptyPreviousRules");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPreviousRules);
  }
}

TEST_CASE("validation slice is deterministic and its complement trains") {
  const RunFixture fixture = build_fixture();
  const LabeledDay& day = fixture.labels[2];
  const auto val = validation_positions(day, 0.05, 99);
  const auto val2 = validation_positions(day, 0.05, 99);
  CHECK(val == val2);
  CHECK(static_cast<int>(val.size()) ==
        std::max(1, static_cast<int>(std::ceil(0.05 * day.n_queries))));
  // row-id audit: validation slice and its complement never share a query
  std::set<int> val_set(val.begin(), val.end());
  std::vector<int> train_positions;
  for (int qi = 0; qi < day.n_queries; ++qi)
    if (!val_set.count(qi)) train_positions.push_back(qi);
  CHECK(train_positions.size() + val.size() ==
        static_cast<std::size_t>(day.n_queries));
  const LabeledDay val_slice = slice_labeled(day, val);
  const LabeledDay train_slice = slice_labeled(day, train_positions);
  std::set<QueryId> val_ids;
  for (const auto& inst : val_slice.instances) val_ids.insert(inst.query_id);
  for (const auto& inst : train_slice.instances)
    CHECK(val_ids.count(inst.query_id) == 0);
}

TEST_CASE("slice_labeled keeps combos of kept queries only") {
  const RunFixture fixture = build_fixture();
  const LabeledDay& full = fixture.labels[0];
  std::vector<int> keep = {0, 5, 9, 17};
  const LabeledDay slice = slice_labeled(full, keep);
  CHECK(slice.n_queries == 4);
  CHECK(slice.instances.size() == 4u * 2u * static_cast<std::size_t>(full.n_airlines));
  std::set<QueryId> kept_ids;
  for (const auto& inst : slice.instances) kept_ids.insert(inst.query_id);
  CHECK(kept_ids.size() == 4);
  for (const auto& combo : slice.competitive_combos)
    CHECK(kept_ids.count(combo.query_id) == 1);
  // count identity for the slice
  CHECK(slice.all_combos_count ==
        4LL * full.n_airlines * (full.n_airlines - 1));
}

TEST_CASE("run_day demands the full training window") {
  const RunFixture fixture = build_fixture();
  PipelineState state;
  state.config = small_pipeline();
  try {
    run_day(state, fixture.days[5], fixture.labels[5], fixture.world);
    FAIL("expected InsufficientHistory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientHistory);
  }
}

TEST_CASE("pipeline run serves n_days minus window and carries over") {
  const RunFixture fixture = build_fixture();
  const PipelineConfig config = small_pipeline();
  const PipelineRun run = run_pipeline(fixture.world, fixture.days,
                                       fixture.labels, config);
  REQUIRE(run.reports.size() == 8);
  int served = 0;
  for (const auto& r : run.reports) served += r.served ? 1 : 0;
  CHECK(served == 8 - config.train_window_days);

  // carry-over superset invariant: every serving set contains the rules
  // freshly extracted on the previous served day
  std::size_t idx = 0;
  const RuleSet* prev_extracted = nullptr;
  for (const auto& r : run.reports) {
    if (!r.served) continue;
    const RuleSet& served_rules = run.served_rules[idx++];
    CHECK(static_cast<int>(served_rules.rules.size()) == r.rules_served);
    if (prev_extracted != nullptr) {
      for (const auto& [rule, score] : prev_extracted->rules) {
        (void)score;
        CHECK(served_rules.contains(rule));
      }
    }
    if (r.extracted_rules) prev_extracted = &*r.extracted_rules;
  }

  // stability identity on reported days
  for (const auto& r : run.reports) {
    if (!r.stability) continue;
    CHECK(r.stability->retained_frac + r.stability->dropped_frac ==
          doctest::Approx(1.0));
    CHECK(r.stability->added_frac >= 0.0);
  }

  // realized cost should be in the ballpark of the budget (carry-over and
  // drift push it around but not by orders of magnitude)
  for (const auto& r : run.reports) {
    if (!r.served) continue;
    CHECK(r.realized_cost >= 0.0);
    CHECK(r.realized_cost <= 1.0);
  }
}

TEST_CASE("pipeline runs are reproducible") {
  const RunFixture fixture = build_fixture();
  const PipelineConfig config = small_pipeline();
  const PipelineRun a = run_pipeline(fixture.world, fixture.days,
                                     fixture.labels, config);
  const PipelineRun b = run_pipeline(fixture.world, fixture.days,
                                     fixture.labels, config);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].val_auc == b.reports[i].val_auc);
    CHECK(a.reports[i].threshold == b.reports[i].threshold);
    CHECK(a.reports[i].rules_served == b.reports[i].rules_served);
    const bool both_nan = std::isnan(a.reports[i].realized_recall) &&
                          std::isnan(b.reports[i].realized_recall);
    CHECK((both_nan ||
           a.reports[i].realized_recall == b.reports[i].realized_recall));
  }
}

TEST_CASE("an impossible gate never serves") {
  const RunFixture fixture = build_fixture();
  PipelineConfig config = small_pipeline();
  config.validation_auc_floor = 101.0;  // no model can pass
  const PipelineRun run = run_pipeline(fixture.world, fixture.days,
                                       fixture.labels, config);
  for (const auto& r : run.reports) {
    CHECK_FALSE(r.gate_passed);
    CHECK_FALSE(r.served);
  }
  try {
    production_gap_report(run.reports);
    FAIL("expected NoServedDays");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoServedDays);
  }
}

TEST_CASE("gate failure day keeps serving yesterday's rules") {
  const RunFixture fixture = build_fixture();
  const PipelineConfig config = small_pipeline();
  const Day first_served = config.train_window_days;

  PipelineState state;
  state.config = config;
  std::optional<RuleSet> rules_after_first_day;
  for (Day d = 0; d < static_cast<Day>(fixture.days.size()); ++d) {
    const auto& day_data = fixture.days[static_cast<std::size_t>(d)];
    const auto& labels = fixture.labels[static_cast<std::size_t>(d)];
    if (d < first_served) {
      // warmup: bank the ground-truth sample by hand
      const TrafficPartition part = allocate_traffic(
          day_data.queries, config.ground_truth_traffic,
          config.challenger_traffic, config.seed);
      GroundTruthSample sample;
      sample.labels = slice_labeled(labels, part.ground_truth);
      for (int qi : part.ground_truth)
        sample.queries.push_back(day_data.queries[static_cast<std::size_t>(qi)]);
      state.ground_truth_history.emplace(d, std::move(sample));
      continue;
    }
    // force the gate shut right after the first served day
    if (d == first_served + 1) state.config.validation_auc_floor = 101.0;
    const DayReport report = run_day(state, day_data, labels, fixture.world);
    if (d == first_served) {
      REQUIRE(report.gate_passed);
      rules_after_first_day = state.last_served;
    }
    if (d == first_served + 1) {
      CHECK_FALSE(report.gate_passed);
      CHECK(report.served);
      REQUIRE(state.last_served.has_value());
      REQUIRE(rules_after_first_day.has_value());
      CHECK(state.last_served->rules == rules_after_first_day->rules);
      break;
    }
  }
}

TEST_CASE("window sweep uses equal totals and rejects short history") {
  const RunFixture fixture = build_fixture();
  ModelConfig model;
  model.kind = ScorerKind::Bandit;
  const std::vector<int> n_values = {1, 2, 3};
  const auto rows = sweep_training_window(fixture.labels, 4, n_values, 3000,
                                          model, fixture.days, 10, 8, 11);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.auc > 0.0);
    CHECK(row.auc <= 100.0);
  }
  try {
    sweep_training_window(fixture.labels, 2, {5}, 3000, model, fixture.days,
                          10, 8, 11);
    FAIL("expected InsufficientHistory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientHistory);
  }
}

TEST_CASE("staleness horizon zero gives empty series") {
  const RunFixture fixture = build_fixture();
  ModelConfig model;
  model.kind = ScorerKind::Bandit;
  const StalenessSeries series = staleness_experiment(
      fixture.labels, fixture.days, 3, 0, 3, 2000, model, 10, 8, 5);
  CHECK(series.days.empty());
  CHECK(series.one_off_auc.empty());
  CHECK(series.daily_auc.empty());
}

TEST_CASE("staleness series cover the horizon") {
  const RunFixture fixture = build_fixture();
  ModelConfig model;
  model.kind = ScorerKind::Bandit;
  const StalenessSeries series = staleness_experiment(
      fixture.labels, fixture.days, 3, 4, 3, 2000, model, 10, 8, 5);
  REQUIRE(series.days.size() == 4);
  REQUIRE(series.one_off_auc.size() == 4);
  REQUIRE(series.daily_auc.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(series.days[i] == 4 + static_cast<Day>(i));
    CHECK(series.one_off_auc[i] > 0.0);
    CHECK(series.daily_auc[i] > 0.0);
  }
}

TEST_CASE("production gap report has one row per served day") {
  const RunFixture fixture = build_fixture();
  const PipelineRun run = run_pipeline(fixture.world, fixture.days,
                                       fixture.labels, small_pipeline());
  const auto rows = production_gap_report(run.reports);
  int defined_days = 0;
  for (const auto& r : run.reports)
    defined_days += (r.served && std::isfinite(r.realized_recall)) ? 1 : 0;
  CHECK(static_cast<int>(rows.size()) == defined_days);
  for (const auto& row : rows) {
    CHECK(row.offline_recall >= 0.0);
    CHECK(row.realized_recall >= 0.0);
  }
}
