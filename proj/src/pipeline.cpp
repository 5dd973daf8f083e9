#include "combo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "combo/rng.hpp"

namespace combo {
namespace {

double hash_unit(std::uint64_t seed, std::uint64_t key) {
  return (mix64(seed, key) >> 11) * 0x1.0p-53;
}

std::vector<Instance> sample_instances(const LabeledDay& day, long long rows,
                                       Rng& rng) {
  const std::size_t n = day.instances.size();
  if (rows >= static_cast<long long>(n)) return day.instances;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (long long i = 0; i < rows; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          rng.uniform_index(n - static_cast<std::size_t>(i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(rows));
  for (long long i = 0; i < rows; ++i)
    out.push_back(day.instances[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  return out;
}

std::vector<SearchQuery> queries_of_days(const std::vector<GroundTruthDay>& days,
                                         int from, int to) {
  std::vector<SearchQuery> out;
  for (int d = from; d <= to; ++d) {
    const auto& q = days[static_cast<std::size_t>(d)].queries;
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

double curve_auc_for(const ScorerPtr& scorer, const LabeledDay& day) {
  return sweep_curve(score_all(*scorer, day.instances), day).auc_percent;
}

}  // namespace

void PipelineConfig::validate() const {
  if (train_window_days < 1) fail(ErrorCode::InvalidConfig, "window < 1");
  if (budget <= 0.0 || budget > 1.0)
    fail(ErrorCode::InvalidConfig, "budget must be in (0,1]");
  if (ground_truth_traffic < 0.0 || challenger_traffic < 0.0 ||
      ground_truth_traffic + challenger_traffic > 1.0)
    fail(ErrorCode::InvalidFractions, "traffic fractions must sum to <= 1");
  if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
    fail(ErrorCode::InvalidConfig, "validation_fraction must be in (0,1)");
  if (validation_rate_band < 1.0)
    fail(ErrorCode::InvalidConfig, "validation_rate_band must be >= 1");
}

TrafficPartition allocate_traffic(const std::vector<SearchQuery>& queries,
                                  double ground_truth_fraction,
                                  double challenger_fraction,
                                  std::uint64_t seed) {
  if (ground_truth_fraction < 0.0 || challenger_fraction < 0.0 ||
      ground_truth_fraction + challenger_fraction > 1.0)
    fail(ErrorCode::InvalidFractions,
         "fractions " + std::to_string(ground_truth_fraction) + " + " +
             std::to_string(challenger_fraction) + " exceed 1");
  TrafficPartition part;
  for (int i = 0; i < static_cast<int>(queries.size()); ++i) {
    const double u = hash_unit(mix64(seed, 0x7fa11c0u),
                               static_cast<std::uint64_t>(
                                   queries[static_cast<std::size_t>(i)].query_id));
    if (u < ground_truth_fraction) {
      part.ground_truth.push_back(i);
    } else if (u < ground_truth_fraction + challenger_fraction) {
      part.challenger.push_back(i);
    } else {
      part.serving.push_back(i);
    }
  }
  return part;
}

LabeledDay slice_labeled(const LabeledDay& full,
                         const std::vector<int>& query_positions) {
  LabeledDay out;
  out.day = full.day;
  out.n_airlines = full.n_airlines;
  out.n_queries = static_cast<int>(query_positions.size());
  out.instances.reserve(static_cast<std::size_t>(out.n_queries) * 2 *
                        static_cast<std::size_t>(full.n_airlines));
  std::unordered_map<QueryId, char> kept;
  for (int qi : query_positions) {
    const std::size_t begin = static_cast<std::size_t>(
        full.instance_index(qi, 0, LegDirection::Outbound));
    for (std::size_t k = 0; k < 2 * static_cast<std::size_t>(full.n_airlines); ++k)
      out.instances.push_back(full.instances[begin + k]);
    kept.emplace(full.instances[begin].query_id, 1);
  }
  for (const auto& combo : full.competitive_combos) {
    if (kept.count(combo.query_id)) out.competitive_combos.push_back(combo);
  }
  out.all_combos_count = static_cast<long long>(out.n_queries) *
                         full.n_airlines * (full.n_airlines - 1);
  return out;
}

StabilityReport stability_report(const RuleSet& prev, const RuleSet& curr) {
  if (prev.rules.empty())
    fail(ErrorCode::EmptyPreviousRules,
         "day " + std::to_string(prev.day) + " has no rules");
  long long retained = 0;
  for (const auto& [rule, score] : prev.rules) {
    (void)score;
    if (curr.contains(rule)) ++retained;
  }
  long long added = 0;
  for (const auto& [rule, score] : curr.rules) {
    (void)score;
    if (!prev.contains(rule)) ++added;
  }
  const double prev_n = static_cast<double>(prev.rules.size());
  StabilityReport report;
  report.day = curr.day;
  report.retained_frac = static_cast<double>(retained) / prev_n;
  report.dropped_frac = 1.0 - report.retained_frac;
  report.added_frac = static_cast<double>(added) / prev_n;
  return report;
}

ScorerPtr train_model(const std::vector<Instance>& train_instances,
                      const std::vector<SearchQuery>& window_queries,
                      int n_airports, int n_airlines,
                      const ModelConfig& config) {
  switch (config.kind) {
    case ScorerKind::Popularity:
      return train_popularity(train_instances);
    case ScorerKind::LogReg:
      return train_logreg(train_instances,
                          FeatureEncoder(FeatureMode::OneHot, n_airports,
                                         n_airlines),
                          config.logreg);
    case ScorerKind::Bandit:
      return train_bandit(train_instances, config.bandit_alpha0,
                          config.bandit_beta0);
    case ScorerKind::RandomForest: {
      if (config.feature_mode == FeatureMode::OneHot) {
        return train_forest(train_instances,
                            FeatureEncoder(FeatureMode::OneHot, n_airports,
                                           n_airlines),
                            config.forest);
      }
      if (config.feature_mode == FeatureMode::TraceEmbed) {
        const auto corpus = build_traces(window_queries);
        const auto table = train_skipgram(corpus, config.skipgram);
        return train_forest(train_instances,
                            FeatureEncoder(FeatureMode::TraceEmbed, n_airports,
                                           n_airlines, table),
                            config.forest);
      }
      const auto net = std::make_shared<EmbedNet>(train_embed_net(
          train_instances, n_airports, n_airlines, config.embed_net));
      return train_forest(
          train_instances,
          FeatureEncoder(FeatureMode::CoTrainedEmbed, n_airports, n_airlines,
                         net->origin_table(), net->destination_table()),
          config.forest);
    }
    case ScorerKind::EmbedNet: {
      const auto net = std::make_shared<EmbedNet>(train_embed_net(
          train_instances, n_airports, n_airlines, config.embed_net));
      return make_embed_net_scorer(net);
    }
    case ScorerKind::Oracle:
      fail(ErrorCode::InvalidConfig, "oracle cannot be trained in the pipeline");
  }
  fail(ErrorCode::InvalidConfig, "unknown scorer kind");
}

// Validation slice: a fixed-size, hash-ordered subset of the most recent
// ground-truth day's queries.
std::vector<int> validation_positions(const LabeledDay& latest,
                                      double fraction, std::uint64_t seed) {
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(latest.n_queries));
  for (int qi = 0; qi < latest.n_queries; ++qi) {
    const QueryId qid =
        latest.instances[static_cast<std::size_t>(
                             latest.instance_index(qi, 0, LegDirection::Outbound))]
            .query_id;
    ranked.emplace_back(hash_unit(mix64(seed, 0x7a15dceu),
                                  static_cast<std::uint64_t>(qid)),
                        qi);
  }
  std::sort(ranked.begin(), ranked.end());
  const int take = std::max(
      1, static_cast<int>(std::ceil(fraction * latest.n_queries)));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take && i < static_cast<int>(ranked.size()); ++i)
    out.push_back(ranked[static_cast<std::size_t>(i)].second);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

RuleSet extract_rules(const ScorerPtr& model, const LabeledDay& sample,
                      double budget, Day day) {
  const auto scores = score_all(*model, sample.instances);
  const auto curve = sweep_curve(scores, sample);
  const auto decision = pick_budget(curve, budget);
  RuleSet rules;
  rules.day = day;
  rules.source_threshold = decision.threshold;
  rules.budget = budget;
  for (std::size_t i = 0; i < sample.instances.size(); ++i) {
    if (scores[i] < decision.threshold) continue;
    const auto& inst = sample.instances[i];
    const Rule rule{inst.features.origin, inst.features.destination,
                    inst.airline};
    auto [it, inserted] = rules.rules.emplace(rule, scores[i]);
    if (!inserted) it->second = std::max(it->second, scores[i]);
  }
  return rules;
}

RuleSet union_rules(const RuleSet& today, const RuleSet* yesterday) {
  RuleSet served = today;
  if (yesterday) {
    for (const auto& [rule, score] : yesterday->rules) {
      auto [it, inserted] = served.rules.emplace(rule, score);
      if (!inserted) it->second = std::max(it->second, score);
    }
  }
  return served;
}

struct ServedMetrics {
  double recall = std::numeric_limits<double>::quiet_NaN();
  double cost = 0.0;
};

// Realized performance on one traffic slice: a combination is constructible
// when both of its airlines have a serving rule on the query's route; cost
// counts the authorized leg quotes against all possible ones.
ServedMetrics evaluate_served(const RuleSet& rules, const LabeledDay& slice) {
  ServedMetrics metrics;
  if (slice.n_queries == 0) return metrics;
  long long requested = 0;
  for (int qi = 0; qi < slice.n_queries; ++qi) {
    const auto& first = slice.instances[static_cast<std::size_t>(
        slice.instance_index(qi, 0, LegDirection::Outbound))];
    for (AirlineId a = 0; a < slice.n_airlines; ++a) {
      if (rules.contains(
              {first.features.origin, first.features.destination, a}))
        ++requested;
    }
  }
  metrics.cost = static_cast<double>(requested) /
                 (static_cast<double>(slice.n_queries) * slice.n_airlines);
  if (!slice.competitive_combos.empty()) {
    std::unordered_map<QueryId, std::pair<AirportId, AirportId>> route_of;
    for (int qi = 0; qi < slice.n_queries; ++qi) {
      const auto& inst = slice.instances[static_cast<std::size_t>(
          slice.instance_index(qi, 0, LegDirection::Outbound))];
      route_of[inst.query_id] = {inst.features.origin,
                                 inst.features.destination};
    }
    long long constructed = 0;
    for (const auto& combo : slice.competitive_combos) {
      const auto [o, d] = route_of.at(combo.query_id);
      if (rules.contains({o, d, combo.outbound_airline}) &&
          rules.contains({o, d, combo.inbound_airline}))
        ++constructed;
    }
    metrics.recall = static_cast<double>(constructed) /
                     static_cast<double>(slice.competitive_combos.size());
  }
  return metrics;
}

void bank_ground_truth(PipelineState& state, const GroundTruthDay& day_data,
                       const LabeledDay& full_labels,
                       const TrafficPartition& part) {
  GroundTruthSample sample;
  sample.labels = slice_labeled(full_labels, part.ground_truth);
  sample.queries.reserve(part.ground_truth.size());
  for (int qi : part.ground_truth)
    sample.queries.push_back(day_data.queries[static_cast<std::size_t>(qi)]);
  state.ground_truth_history.emplace(day_data.day, std::move(sample));
}

}  // namespace

DayReport run_day(PipelineState& state, const GroundTruthDay& day_data,
                  const LabeledDay& full_labels, const World& world) {
  state.config.validate();
  const Day day = day_data.day;
  const int window = state.config.train_window_days;
  for (Day d = day - window; d < day; ++d) {
    if (!state.ground_truth_history.count(d))
      fail(ErrorCode::InsufficientHistory,
           "day " + std::to_string(day) + " needs labeled history for day " +
               std::to_string(d));
  }

  const TrafficPartition part =
      allocate_traffic(day_data.queries, state.config.ground_truth_traffic,
                       state.config.challenger_traffic, state.config.seed);

  DayReport report;
  report.day = day;

  // Window assembly: full days except the newest, which loses its
  // validation slice.
  const LabeledDay& newest = state.ground_truth_history.at(day - 1).labels;
  const auto val_positions = validation_positions(
      newest, state.config.validation_fraction, state.config.seed);
  std::vector<int> train_positions;
  {
    std::vector<char> is_val(static_cast<std::size_t>(newest.n_queries), 0);
    for (int qi : val_positions) is_val[static_cast<std::size_t>(qi)] = 1;
    for (int qi = 0; qi < newest.n_queries; ++qi)
      if (!is_val[static_cast<std::size_t>(qi)]) train_positions.push_back(qi);
  }
  const LabeledDay val_slice = slice_labeled(newest, val_positions);
  LabeledDay window_sample;  // rule-extraction sample: whole window
  window_sample.day = day;
  window_sample.n_airlines = newest.n_airlines;
  std::vector<Instance> train_instances;
  std::vector<SearchQuery> window_queries;
  for (Day d = day - window; d < day; ++d) {
    const GroundTruthSample& gt = state.ground_truth_history.at(d);
    window_sample.n_queries += gt.labels.n_queries;
    window_sample.instances.insert(window_sample.instances.end(),
                                   gt.labels.instances.begin(),
                                   gt.labels.instances.end());
    window_sample.competitive_combos.insert(
        window_sample.competitive_combos.end(),
        gt.labels.competitive_combos.begin(),
        gt.labels.competitive_combos.end());
    window_sample.all_combos_count += gt.labels.all_combos_count;
    window_queries.insert(window_queries.end(), gt.queries.begin(),
                          gt.queries.end());
    if (d == day - 1) {
      const LabeledDay train_slice = slice_labeled(gt.labels, train_positions);
      train_instances.insert(train_instances.end(),
                             train_slice.instances.begin(),
                             train_slice.instances.end());
    } else {
      train_instances.insert(train_instances.end(), gt.labels.instances.begin(),
                             gt.labels.instances.end());
    }
  }

  bool trained = false;
  ScorerPtr model;
  RuleSet extracted;
  double val_auc = 0.0;
  double val_rate = 0.0;
  double offline_recall = 0.0;
  bool gate = false;
  try {
    model = train_model(train_instances, window_queries,
                        world.catalog.n_airports(), world.catalog.n_airlines(),
                        state.config.model);
    trained = true;
    extracted = extract_rules(model, window_sample, state.config.budget, day);
    const auto val_scores = score_all(*model, val_slice.instances);
    const auto val_curve = sweep_curve(val_scores, val_slice);
    val_auc = val_curve.auc_percent;
    const auto predicted = apply_threshold(val_scores, extracted.source_threshold);
    val_rate = quote_request_rate(predicted, val_slice);
    try {
      offline_recall = pick_budget(val_curve, state.config.budget).recall;
    } catch (const Error&) {
      offline_recall = recall_at_10(predicted, val_slice);
    }
    gate = val_auc >= state.config.validation_auc_floor &&
           val_rate >= state.config.budget / state.config.validation_rate_band &&
           val_rate <= state.config.budget * state.config.validation_rate_band;
  } catch (const Error&) {
    gate = false;  // unlabelable validation slice or extraction failure
  }

  report.trained = trained;
  report.gate_passed = gate;
  report.val_auc = val_auc;
  report.val_positive_rate = val_rate;

  std::optional<RuleSet> serve_set;
  if (gate) {
    if (state.last_extracted && !state.last_extracted->rules.empty()) {
      report.stability = stability_report(*state.last_extracted, extracted);
    }
    serve_set = state.config.carry_over
                    ? union_rules(extracted, state.last_extracted
                                                 ? &*state.last_extracted
                                                 : nullptr)
                    : extracted;
    state.last_extracted = extracted;
    state.current_model = model;
    state.current_offline_recall = offline_recall;
    state.current_threshold = extracted.source_threshold;
    report.threshold = extracted.source_threshold;
    report.rules_extracted = static_cast<int>(extracted.rules.size());
    report.extracted_rules = extracted;
  } else if (state.last_served) {
    // Gate failed: yesterday's serving set stays live.
    serve_set = *state.last_served;
    report.threshold = state.current_threshold;
  }

  if (serve_set) {
    report.served = true;
    report.rules_served = static_cast<int>(serve_set->rules.size());
    report.offline_expected_recall =
        gate ? offline_recall : state.current_offline_recall;
    const LabeledDay serving_slice = slice_labeled(full_labels, part.serving);
    const ServedMetrics metrics = evaluate_served(*serve_set, serving_slice);
    report.realized_recall = metrics.recall;
    report.realized_cost = metrics.cost;
    state.last_served = *serve_set;
  }

  // Challenger arm: trained and served on its own slice, no gate.
  if (state.config.challenger) {
    try {
      const auto challenger_model =
          train_model(train_instances, window_queries,
                      world.catalog.n_airports(), world.catalog.n_airlines(),
                      *state.config.challenger);
      RuleSet challenger_rules = extract_rules(challenger_model, window_sample,
                                               state.config.budget, day);
      RuleSet challenger_serve =
          state.config.carry_over
              ? union_rules(challenger_rules,
                            state.challenger_last_extracted
                                ? &*state.challenger_last_extracted
                                : nullptr)
              : challenger_rules;
      const LabeledDay challenger_slice =
          slice_labeled(full_labels, part.challenger);
      const ServedMetrics metrics =
          evaluate_served(challenger_serve, challenger_slice);
      report.challenger_realized_recall = metrics.recall;
      report.challenger_realized_cost = metrics.cost;
      state.challenger_last_extracted = challenger_rules;
      state.challenger_last_served = challenger_serve;
    } catch (const Error&) {
      // Challenger failures never block the champion.
    }
  }

  bank_ground_truth(state, day_data, full_labels, part);
  return report;
}

PipelineRun run_pipeline(const World& world,
                         const std::vector<GroundTruthDay>& days,
                         const std::vector<LabeledDay>& labels,
                         const PipelineConfig& config) {
  config.validate();
  if (days.size() != labels.size())
    fail(ErrorCode::InvalidConfig, "days/labels size mismatch");
  PipelineRun run;
  run.final_state.config = config;
  PipelineState& state = run.final_state;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const Day day = days[i].day;
    if (day < config.train_window_days) {
      const TrafficPartition part =
          allocate_traffic(days[i].queries, config.ground_truth_traffic,
                           config.challenger_traffic, config.seed);
      bank_ground_truth(state, days[i], labels[i], part);
      DayReport report;
      report.day = day;
      run.reports.push_back(report);
      continue;
    }
    DayReport report = run_day(state, days[i], labels[i], world);
    if (report.served && state.last_served)
      run.served_rules.push_back(*state.last_served);
    run.reports.push_back(report);
  }
  return run;
}

std::vector<WindowSweepRow> sweep_training_window(
    const std::vector<LabeledDay>& history, int eval_index,
    const std::vector<int>& n_values, long long total_sample,
    const ModelConfig& model, const std::vector<GroundTruthDay>& day_data,
    int n_airports, int n_airlines, std::uint64_t seed) {
  if (n_values.empty()) fail(ErrorCode::InvalidConfig, "no window sizes");
  const int max_n = *std::max_element(n_values.begin(), n_values.end());
  if (eval_index < max_n || eval_index >= static_cast<int>(history.size()))
    fail(ErrorCode::InsufficientHistory,
         "need " + std::to_string(max_n) + " days before eval day " +
             std::to_string(eval_index));

  std::vector<WindowSweepRow> rows;
  for (int n : n_values) {
    if (n < 1) fail(ErrorCode::InvalidConfig, "window size < 1");
    const long long per_day = total_sample / n;
    std::vector<Instance> train;
    for (int d = eval_index - n; d < eval_index; ++d) {
      Rng rng(mix64(seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(d)));
      const auto sampled =
          sample_instances(history[static_cast<std::size_t>(d)], per_day, rng);
      train.insert(train.end(), sampled.begin(), sampled.end());
    }
    const auto window_queries =
        day_data.empty() ? std::vector<SearchQuery>{}
                         : queries_of_days(day_data, eval_index - n,
                                           eval_index - 1);
    const auto scorer =
        train_model(train, window_queries, n_airports, n_airlines, model);
    rows.push_back({n, curve_auc_for(scorer,
                                     history[static_cast<std::size_t>(eval_index)])});
  }
  return rows;
}

StalenessSeries staleness_experiment(const std::vector<LabeledDay>& history,
                                     const std::vector<GroundTruthDay>& day_data,
                                     int t0, int horizon_days, int window_days,
                                     long long sample_rows_per_day,
                                     const ModelConfig& model, int n_airports,
                                     int n_airlines, std::uint64_t seed) {
  if (horizon_days < 0) fail(ErrorCode::InvalidConfig, "negative horizon");
  StalenessSeries series;
  if (horizon_days == 0) return series;
  if (t0 < window_days ||
      t0 + horizon_days >= static_cast<int>(history.size()))
    fail(ErrorCode::InsufficientHistory,
         "need window before t0 and horizon after it");

  const auto train_at = [&](int day) {
    std::vector<Instance> train;
    for (int d = day - window_days; d < day; ++d) {
      Rng rng(mix64(seed, 0x57a1eu, static_cast<std::uint64_t>(d)));
      const auto sampled = sample_instances(history[static_cast<std::size_t>(d)],
                                            sample_rows_per_day, rng);
      train.insert(train.end(), sampled.begin(), sampled.end());
    }
    const auto window_queries =
        day_data.empty()
            ? std::vector<SearchQuery>{}
            : queries_of_days(day_data, day - window_days, day - 1);
    return train_model(train, window_queries, n_airports, n_airlines, model);
  };

  const ScorerPtr one_off = train_at(t0);
  for (int k = 1; k <= horizon_days; ++k) {
    const int day = t0 + k;
    const LabeledDay& eval_day = history[static_cast<std::size_t>(day)];
    series.days.push_back(eval_day.day);
    series.one_off_auc.push_back(curve_auc_for(one_off, eval_day));
    series.daily_auc.push_back(curve_auc_for(train_at(day), eval_day));
  }
  return series;
}

std::vector<GapRow> production_gap_report(const std::vector<DayReport>& reports) {
  std::vector<GapRow> rows;
  for (const auto& r : reports) {
    if (!r.served || !std::isfinite(r.realized_recall)) continue;
    GapRow row;
    row.day = r.day;
    row.offline_recall = r.offline_expected_recall;
    row.realized_recall = r.realized_recall;
    row.relative_gap =
        r.offline_expected_recall > 0.0
            ? (r.offline_expected_recall - r.realized_recall) /
                  r.offline_expected_recall
            : 0.0;
    rows.push_back(row);
  }
  if (rows.empty()) fail(ErrorCode::NoServedDays, "nothing was served");
  return rows;
}

}  // namespace combo
