#include "combo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include "combo/rng.hpp"

namespace combo {

namespace fs = std::filesystem;

nlohmann::json ExperimentSpec::to_json() const {
  return {{"sim", io::sim_config_to_json(sim)},
          {"forest", io::forest_config_to_json(forest)},
          {"logreg", io::logreg_config_to_json(logreg)},
          {"embed_net", io::embed_net_config_to_json(embed_net)},
          {"skipgram", io::skipgram_config_to_json(skipgram)},
          {"pipeline", io::pipeline_config_to_json(pipeline)},
          {"eval", eval_config_to_json(eval)}};
}

nlohmann::json eval_config_to_json(const EvalConfig& c) {
  return {{"train_window_days", c.train_window_days},
          {"eval_day", c.eval_day},
          {"train_queries_per_day", c.train_queries_per_day},
          {"top_k", c.top_k},
          {"window_sweep_total_sample", c.window_sweep_total_sample},
          {"window_sweep_values", c.window_sweep_values},
          {"staleness_horizon_days", c.staleness_horizon_days},
          {"staleness_sample_rows_per_day", c.staleness_sample_rows_per_day}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "eval must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "train_window_days") c.train_window_days = value.get<int>();
    else if (key == "eval_day") c.eval_day = value.get<int>();
    else if (key == "train_queries_per_day")
      c.train_queries_per_day = value.get<int>();
    else if (key == "top_k") c.top_k = value.get<int>();
    else if (key == "window_sweep_total_sample")
      c.window_sweep_total_sample = value.get<long long>();
    else if (key == "window_sweep_values")
      c.window_sweep_values = value.get<std::vector<int>>();
    else if (key == "staleness_horizon_days")
      c.staleness_horizon_days = value.get<int>();
    else if (key == "staleness_sample_rows_per_day")
      c.staleness_sample_rows_per_day = value.get<long long>();
    else
      fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in section eval");
  }
  return c;
}

ExperimentSpec load_spec(const std::optional<fs::path>& config_path,
                         std::optional<std::uint64_t> seed_override) {
  ExperimentSpec spec;
  if (config_path) {
    const nlohmann::json j = io::read_json_file(*config_path);
    if (!j.is_object())
      fail(ErrorCode::InvalidConfig, "config root must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "sim") spec.sim = io::sim_config_from_json(value);
      else if (key == "forest") spec.forest = io::forest_config_from_json(value);
      else if (key == "logreg") spec.logreg = io::logreg_config_from_json(value);
      else if (key == "embed_net")
        spec.embed_net = io::embed_net_config_from_json(value);
      else if (key == "skipgram")
        spec.skipgram = io::skipgram_config_from_json(value);
      else if (key == "pipeline")
        spec.pipeline = io::pipeline_config_from_json(value);
      else if (key == "eval") spec.eval = eval_config_from_json(value);
      else
        fail(ErrorCode::InvalidConfig, "unknown config section: " + key);
    }
  }
  if (seed_override) {
    spec.sim.seed = *seed_override;
    spec.pipeline.seed = *seed_override;
    spec.forest.seed = *seed_override;
    spec.logreg.seed = *seed_override;
    spec.embed_net.seed = *seed_override;
    spec.skipgram.seed = *seed_override;
  }
  // The pipeline's model inherits the per-family sections.
  spec.pipeline.model.forest = spec.forest;
  spec.pipeline.model.logreg = spec.logreg;
  spec.pipeline.model.embed_net = spec.embed_net;
  spec.pipeline.model.skipgram = spec.skipgram;
  if (spec.pipeline.challenger) {
    const ScorerKind kind = spec.pipeline.challenger->kind;
    const FeatureMode mode = spec.pipeline.challenger->feature_mode;
    ModelConfig challenger = spec.pipeline.model;
    challenger.kind = kind;
    challenger.feature_mode = mode;
    spec.pipeline.challenger = challenger;
  }
  return spec;
}

namespace {

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::InvalidConfig:
      case ErrorCode::InvalidFractions:
      case ErrorCode::InvalidDates:
      case ErrorCode::SameOriginDestination:
      case ErrorCode::DuplicateId:
      case ErrorCode::EmptyCatalog:
        return kExitInvalidConfig;
      case ErrorCode::MissingData:
        return kExitMissingData;
      case ErrorCode::ValidationFailed:
        return kExitValidationFailed;
      default:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

fs::path day_dir(const fs::path& root, Day day) {
  return root / "days" / std::to_string(day);
}

struct LoadedData {
  World world;
  std::vector<GroundTruthDay> days;
};

LoadedData load_data(const fs::path& data_dir) {
  if (data_dir.empty())
    fail(ErrorCode::MissingData, "no --data directory given");
  LoadedData data;
  data.world = io::read_world(data_dir / "world.json");
  data.days.reserve(static_cast<std::size_t>(data.world.config.n_days));
  for (Day d = 0; d < data.world.config.n_days; ++d) {
    data.days.push_back(
        io::read_ground_truth_day(day_dir(data_dir, d) / "ground_truth.jsonl"));
  }
  return data;
}

std::vector<LabeledDay> label_all(const LoadedData& data, int top_k) {
  std::vector<LabeledDay> labels;
  labels.reserve(data.days.size());
  for (const auto& day : data.days)
    labels.push_back(label_day(day, data.world, top_k));
  return labels;
}

// Share of the query stream carried by the most popular quarter of routes.
double top_quarter_route_share(const std::vector<GroundTruthDay>& days,
                               const World& world) {
  std::vector<long long> counts(
      static_cast<std::size_t>(world.routes.size()), 0);
  long long total = 0;
  for (const auto& day : days) {
    for (const auto& q : day.queries) {
      const int r = world.routes.index_of(q.origin, q.destination);
      if (r >= 0) {
        ++counts[static_cast<std::size_t>(r)];
        ++total;
      }
    }
  }
  std::sort(counts.rbegin(), counts.rend());
  const std::size_t quarter = std::max<std::size_t>(1, counts.size() / 4);
  long long top = 0;
  for (std::size_t i = 0; i < quarter; ++i) top += counts[i];
  return total > 0 ? static_cast<double>(top) / static_cast<double>(total) : 0.0;
}

// Deterministic per-day query sample used by the offline experiments.
std::vector<int> sample_query_positions(int n_queries, int sample,
                                        std::uint64_t seed) {
  std::vector<int> positions(static_cast<std::size_t>(n_queries));
  std::iota(positions.begin(), positions.end(), 0);
  if (sample >= n_queries) return positions;
  Rng rng(seed);
  for (int i = 0; i < sample; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          rng.uniform_index(static_cast<std::uint64_t>(
                              n_queries - i));
    std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
  }
  positions.resize(static_cast<std::size_t>(sample));
  std::sort(positions.begin(), positions.end());
  return positions;
}

}  // namespace

int cmd_simulate(const ExperimentSpec& spec, const CommandOptions& options) {
  return run_guarded([&] {
    io::DirLock lock(options.out_dir);
    const World world = generate_world(spec.sim);
    io::write_world(world, options.out_dir / "world.json");

    std::vector<GroundTruthDay> days;
    std::vector<LabeledDay> labels;
    days.reserve(static_cast<std::size_t>(spec.sim.n_days));
    for (Day d = 0; d < spec.sim.n_days; ++d) {
      days.push_back(generate_day(world, d));
      const auto& day = days.back();
      io::write_ground_truth_day(day,
                                 day_dir(options.out_dir, d) / "ground_truth.jsonl");
      labels.push_back(label_day(day, world, options.top_k));
      if (options.write_labels) {
        io::write_instances_jsonl(labels.back(),
                                  day_dir(options.out_dir, d) / "instances.jsonl");
      }
    }

    // Per-day calibration rows plus an aggregate.
    {
      std::ofstream out(options.out_dir / "dataset_stats.csv");
      out << "day,positive_rate,combo_prone_share,share_h0_3,share_h4_10,"
             "share_h11plus\n";
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const DayStats s = compute_stats({labels[i]}, world);
        out << days[i].day << "," << io::format_double(s.positive_instance_rate)
            << "," << io::format_double(s.combo_prone_competitive_share) << ","
            << io::format_double(s.horizon_bucket_share[0]) << ","
            << io::format_double(s.horizon_bucket_share[1]) << ","
            << io::format_double(s.horizon_bucket_share[2]) << "\n";
      }
      const DayStats all = compute_stats(labels, world);
      out << "all," << io::format_double(all.positive_instance_rate) << ","
          << io::format_double(all.combo_prone_competitive_share) << ","
          << io::format_double(all.horizon_bucket_share[0]) << ","
          << io::format_double(all.horizon_bucket_share[1]) << ","
          << io::format_double(all.horizon_bucket_share[2]) << "\n";
    }
    io::write_json_file(spec.to_json(), options.out_dir / "resolved_config.json");

    const DayStats stats = compute_stats(labels, world);
    std::cout << "simulated " << spec.sim.n_days << " days, "
              << spec.sim.queries_per_day << " queries/day\n"
              << "  positive instance rate: "
              << io::format_double(stats.positive_instance_rate) << "\n"
              << "  competitive combos touching combo-prone airlines: "
              << io::format_double(stats.combo_prone_competitive_share) << "\n"
              << "  queries with a competitive combo, by horizon bucket "
                 "(0-3 / 4-10 / 11+): "
              << io::format_double(stats.horizon_bucket_share[0]) << " / "
              << io::format_double(stats.horizon_bucket_share[1]) << " / "
              << io::format_double(stats.horizon_bucket_share[2]) << "\n"
              << "  top 25% of routes carry "
              << io::format_double(top_quarter_route_share(days, world))
              << " of queries\n";
  });
}

int cmd_eval_models(const ExperimentSpec& spec, const CommandOptions& options) {
  return run_guarded([&] {
    io::DirLock lock(options.out_dir);
    const LoadedData data = load_data(options.data_dir);
    const World& world = data.world;
    const int window = options.window_override.value_or(spec.eval.train_window_days);
    const int eval_day = spec.eval.eval_day;
    if (eval_day < window || eval_day >= world.config.n_days)
      fail(ErrorCode::MissingData,
           "eval day " + std::to_string(eval_day) + " needs " +
               std::to_string(window) + " labeled days before it");

    // Train on per-day query samples from the window, evaluate on the full
    // next day.
    std::vector<Instance> train;
    std::vector<SearchQuery> window_queries;
    for (Day d = eval_day - window; d < eval_day; ++d) {
      const LabeledDay labeled =
          label_day(data.days[static_cast<std::size_t>(d)], world, options.top_k);
      const auto positions = sample_query_positions(
          labeled.n_queries, spec.eval.train_queries_per_day,
          mix64(spec.pipeline.seed, 0xe7a1u, static_cast<std::uint64_t>(d)));
      const LabeledDay slice = slice_labeled(labeled, positions);
      train.insert(train.end(), slice.instances.begin(), slice.instances.end());
      const auto& day_queries = data.days[static_cast<std::size_t>(d)].queries;
      window_queries.insert(window_queries.end(), day_queries.begin(),
                            day_queries.end());
    }
    const LabeledDay eval_labels =
        label_day(data.days[static_cast<std::size_t>(eval_day)], world,
                  options.top_k);

    const int n_airports = world.catalog.n_airports();
    const int n_airlines = world.catalog.n_airlines();

    const auto trace_corpus = build_traces(window_queries);
    const auto trace_table = train_skipgram(trace_corpus, spec.skipgram);
    const auto net = std::make_shared<EmbedNet>(
        train_embed_net(train, n_airports, n_airlines, spec.embed_net));

    struct Row {
      std::string name;
      std::string mode;
      ScorerPtr scorer;
    };
    std::vector<Row> rows;
    rows.push_back({"popularity", "-", train_popularity(train)});
    rows.push_back({"logreg", "onehot",
                    train_logreg(train,
                                 FeatureEncoder(FeatureMode::OneHot, n_airports,
                                                n_airlines),
                                 spec.logreg)});
    rows.push_back({"bandit", "-", train_bandit(train)});
    rows.push_back({"forest", "onehot",
                    train_forest(train,
                                 FeatureEncoder(FeatureMode::OneHot, n_airports,
                                                n_airlines),
                                 spec.forest)});
    rows.push_back({"forest", "trace",
                    train_forest(train,
                                 FeatureEncoder(FeatureMode::TraceEmbed,
                                                n_airports, n_airlines,
                                                trace_table),
                                 spec.forest)});
    rows.push_back({"forest", "cotrained",
                    train_forest(train,
                                 FeatureEncoder(FeatureMode::CoTrainedEmbed,
                                                n_airports, n_airlines,
                                                net->origin_table(),
                                                net->destination_table()),
                                 spec.forest)});
    rows.push_back({"embednet", "cotrained", make_embed_net_scorer(net)});
    rows.push_back({"oracle", "-", make_oracle(eval_labels.instances)});

    std::vector<io::AucRow> auc_rows;
    for (const auto& row : rows) {
      const auto scores = score_all(*row.scorer, eval_labels.instances);
      const auto curve = sweep_curve(scores, eval_labels);
      auc_rows.push_back({row.name, row.mode, curve.auc_percent});
      const std::string file =
          row.mode == "-" ? row.name : row.name + "_" + row.mode;
      io::write_curve_csv(curve, options.out_dir / "curves" / (file + ".csv"));
      std::cout << row.name << (row.mode == "-" ? "" : " (" + row.mode + ")")
                << ": AUC " << io::format_double(curve.auc_percent) << "\n";
    }
    io::write_auc_csv(auc_rows, options.out_dir / "models_auc.csv");
    io::write_model_json(*rows[3].scorer,
                         options.out_dir / "model_forest_onehot.json");
    io::write_json_file(spec.to_json(), options.out_dir / "resolved_config.json");
  });
}

int cmd_pipeline(const ExperimentSpec& spec, const CommandOptions& options) {
  return run_guarded([&] {
    io::DirLock lock(options.out_dir);
    const LoadedData data = load_data(options.data_dir);
    const World& world = data.world;
    PipelineConfig config = spec.pipeline;
    if (options.budget_override) config.budget = *options.budget_override;
    if (options.window_override)
      config.train_window_days = *options.window_override;
    if (options.feature_mode_override)
      config.model.feature_mode = *options.feature_mode_override;
    config.validate();

    const std::vector<LabeledDay> labels = label_all(data, options.top_k);
    const PipelineRun run = run_pipeline(world, data.days, labels, config);

    std::size_t served_index = 0;
    for (const auto& report : run.reports) {
      if (!report.served) continue;
      const fs::path dir = day_dir(options.out_dir, report.day);
      io::write_rules_csv(run.served_rules[served_index], dir / "rules.csv");
      io::write_day_report_json(report, dir / "report.json");
      const auto it = run.final_state.ground_truth_history.find(report.day);
      if (it != run.final_state.ground_truth_history.end())
        io::write_instances_jsonl(it->second.labels, dir / "ground_truth.jsonl");
      ++served_index;
    }
    io::write_run_summary_csv(run.reports, options.out_dir / "run_summary.csv");
    try {
      io::write_gap_csv(production_gap_report(run.reports),
                        options.out_dir / "production_gap.csv");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoServedDays) throw;
    }
    if (options.with_stability)
      io::write_stability_csv(run.reports, options.out_dir / "stability.csv");
    if (options.with_window_sweep) {
      const auto rows = sweep_training_window(
          labels, spec.eval.eval_day, spec.eval.window_sweep_values,
          spec.eval.window_sweep_total_sample, config.model, data.days,
          world.catalog.n_airports(), world.catalog.n_airlines(), config.seed);
      io::write_window_sweep_csv(rows, options.out_dir / "window_sweep.csv");
    }
    if (options.with_staleness) {
      const auto series = staleness_experiment(
          labels, data.days, config.train_window_days,
          spec.eval.staleness_horizon_days, config.train_window_days,
          spec.eval.staleness_sample_rows_per_day, config.model,
          world.catalog.n_airports(), world.catalog.n_airlines(), config.seed);
      io::write_staleness_csv(series, options.out_dir / "staleness.csv");
    }
    io::write_json_file(spec.to_json(), options.out_dir / "resolved_config.json");

    int served = 0;
    for (const auto& r : run.reports) served += r.served ? 1 : 0;
    std::cout << "pipeline run: " << served << " served days of "
              << run.reports.size() << "\n";
    if (served == 0)
      fail(ErrorCode::ValidationFailed, "no day passed the validation gate");
  });
}

int cmd_embed(const ExperimentSpec& spec, const CommandOptions& options) {
  return run_guarded([&] {
    io::DirLock lock(options.out_dir);
    const LoadedData data = load_data(options.data_dir);
    std::vector<SearchQuery> queries;
    for (const auto& day : data.days)
      queries.insert(queries.end(), day.queries.begin(), day.queries.end());
    const auto corpus = build_traces(queries);
    if (corpus.sequences.empty())
      fail(ErrorCode::EmptyCorpus,
           "no user kept >= 10 searches; simulate more days or queries per "
           "day, or reduce n_users");
    const auto table = train_skipgram(corpus, spec.skipgram);
    io::write_embeddings_csv(table, data.world.catalog,
                             options.out_dir / "embeddings.csv");

    // Top neighbors for the busiest airports present in the table.
    std::vector<AirportId> sample;
    {
      std::vector<std::pair<double, AirportId>> ranked;
      for (const auto& airport : data.world.catalog.airports()) {
        if (table.contains(airport.id))
          ranked.emplace_back(-airport.popularity_weight, airport.id);
      }
      std::sort(ranked.begin(), ranked.end());
      for (int i = 0; i < options.neighbor_airports &&
                      i < static_cast<int>(ranked.size());
           ++i)
        sample.push_back(ranked[static_cast<std::size_t>(i)].second);
    }
    std::vector<std::pair<AirportId, std::vector<Neighbor>>> neighbor_rows;
    const int k = std::min(options.neighbor_k,
                           static_cast<int>(table.vectors.size()) - 1);
    for (AirportId a : sample) {
      const auto neighbors = nearest_neighbors(table, a, k);
      neighbor_rows.emplace_back(a, neighbors);
      std::cout << data.world.catalog.airport(a).code << " (region "
                << data.world.catalog.airport(a).region_id << "):";
      for (const auto& n : neighbors) {
        std::cout << "  " << data.world.catalog.airport(n.airport).code << " "
                  << io::format_double(n.cosine);
      }
      std::cout << "\n";
    }
    io::write_neighbors_csv(neighbor_rows, data.world.catalog,
                            options.out_dir / "neighbors.csv");
    io::write_json_file(spec.to_json(), options.out_dir / "resolved_config.json");
  });
}

}  // namespace combo
