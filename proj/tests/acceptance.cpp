// Acceptance suite: runs every advertised guarantee end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "combo/commands.hpp"
#include "combo/eval.hpp"
#include "combo/io.hpp"
#include "combo/pipeline.hpp"
#include "test_support.hpp"

using namespace combo;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", criterion,
              name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3f", v);
  return buffer;
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared per-seed artifacts for criteria 2-5.
struct SeedEval {
  double pop = 0.0;
  double logreg = 0.0;
  double bandit = 0.0;
  double forest_onehot = 0.0;
  double forest_trace = 0.0;
  double forest_cotrained = 0.0;
  double embednet = 0.0;
  double oracle = 0.0;
  bool oracle_geometry_ok = false;
  bool dominance_ok = false;
  double seed_seconds = 0.0;
  DayStats stats;  // days 0..6 of the same world
};

// ---------------------------------------------------------------------------
// Criterion 1: Eq.(1)/Eq.(2) against the brute-force oracle on toy days.

void criterion_1() {
  const auto start = Clock::now();
  Rng rng(20240901);
  const World world = testsup::toy_world(6, 4, 3);
  double worst = 0.0;
  long long checks = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n_queries = 1 + static_cast<int>(rng.uniform_index(5));
    const int n_airlines = 2 + static_cast<int>(rng.uniform_index(3));
    const GroundTruthDay gt =
        testsup::random_toy_day(n_queries, n_airlines, rng, rep);
    const LabeledDay day = label_day(gt, world, 10);
    if (day.competitive_combos.empty()) continue;

    // independent view of the day for the set-based oracle
    testsup::BruteDay brute;
    brute.total_instances = static_cast<long long>(day.instances.size());
    for (const auto& combo : day.competitive_combos) {
      brute.combos[combo.query_id].insert(
          {combo.outbound_airline, combo.inbound_airline});
    }
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<bool> predicted(day.instances.size());
      std::set<std::tuple<QueryId, AirlineId, int>> predicted_set;
      const double keep = rng.uniform01();
      for (std::size_t i = 0; i < day.instances.size(); ++i) {
        predicted[i] = rng.uniform01() < keep;
        if (predicted[i]) {
          const auto& inst = day.instances[i];
          predicted_set.insert(
              {inst.query_id, inst.airline,
               inst.direction == LegDirection::Outbound ? 0 : 1});
        }
      }
      const double lib_recall = recall_at_10(predicted, day);
      const double lib_cost = quote_request_rate(predicted, day);
      worst = std::max(worst, std::abs(lib_recall - testsup::brute_recall(
                                                        brute, predicted_set)));
      worst = std::max(worst,
                       std::abs(lib_cost - testsup::brute_cost(brute, predicted_set)));
      checks += 2;
    }
  }
  const double runtime = elapsed(start);
  report(1, "metric exactness vs brute force", worst <= 1e-12 && runtime < 10.0,
         std::to_string(checks) + " checks, max abs err " + fmt(worst) +
             ", " + fmt(runtime) + "s");
}

// ---------------------------------------------------------------------------
// Criteria 2-5 share five default worlds.

SeedEval run_seed_eval(std::uint64_t seed) {
  const auto start = Clock::now();
  SeedEval out;
  SimConfig sim;  // spec defaults
  sim.seed = seed;
  sim.n_days = 8;  // window 7 + evaluation day
  const World world = generate_world(sim);
  std::vector<GroundTruthDay> days;
  std::vector<LabeledDay> labels;
  for (Day d = 0; d < sim.n_days; ++d) {
    days.push_back(generate_day(world, d));
    labels.push_back(label_day(days.back(), world, 10));
  }
  out.stats = compute_stats({labels.begin(), labels.begin() + 7}, world);

  // ground-truth style training sample: 250 queries per window day
  std::vector<Instance> train;
  std::vector<SearchQuery> window_queries;
  Rng srng(mix64(seed, 0xacce97));
  for (Day d = 0; d < 7; ++d) {
    std::vector<int> positions(labels[static_cast<std::size_t>(d)].n_queries);
    std::iota(positions.begin(), positions.end(), 0);
    for (int i = 0; i < 250; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) +
                            srng.uniform_index(positions.size() -
                                               static_cast<std::size_t>(i));
      std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
    }
    positions.resize(250);
    std::sort(positions.begin(), positions.end());
    const LabeledDay slice =
        slice_labeled(labels[static_cast<std::size_t>(d)], positions);
    train.insert(train.end(), slice.instances.begin(), slice.instances.end());
    const auto& q = days[static_cast<std::size_t>(d)].queries;
    window_queries.insert(window_queries.end(), q.begin(), q.end());
  }
  const LabeledDay& eval_day = labels[7];
  const int n_airports = world.catalog.n_airports();
  const int n_airlines = world.catalog.n_airlines();

  std::vector<CostRecallCurve> model_curves;
  const auto eval_scorer = [&](const ScorerPtr& scorer) {
    const CostRecallCurve curve =
        sweep_curve(score_all(*scorer, eval_day.instances), eval_day);
    model_curves.push_back(curve);
    return curve.auc_percent;
  };

  out.pop = eval_scorer(train_popularity(train));
  LogRegConfig logreg_config;
  logreg_config.seed = seed;
  out.logreg = eval_scorer(train_logreg(
      train, FeatureEncoder(FeatureMode::OneHot, n_airports, n_airlines),
      logreg_config));
  out.bandit = eval_scorer(train_bandit(train));
  ForestConfig forest_config;
  forest_config.seed = seed;
  out.forest_onehot = eval_scorer(train_forest(
      train, FeatureEncoder(FeatureMode::OneHot, n_airports, n_airlines),
      forest_config));
  SkipGramConfig sg_config;
  sg_config.seed = seed;
  const auto trace_table =
      train_skipgram(build_traces(window_queries), sg_config);
  out.forest_trace = eval_scorer(train_forest(
      train,
      FeatureEncoder(FeatureMode::TraceEmbed, n_airports, n_airlines,
                     trace_table),
      forest_config));
  EmbedNetConfig net_config;
  net_config.seed = seed;
  const auto net = std::make_shared<EmbedNet>(
      train_embed_net(train, n_airports, n_airlines, net_config));
  out.forest_cotrained = eval_scorer(train_forest(
      train,
      FeatureEncoder(FeatureMode::CoTrainedEmbed, n_airports, n_airlines,
                     net->origin_table(), net->destination_table()),
      forest_config));
  out.embednet = eval_scorer(make_embed_net_scorer(net));

  const CostRecallCurve oracle_curve = sweep_curve(
      score_all(*make_oracle(eval_day.instances), eval_day), eval_day);
  out.oracle = oracle_curve.auc_percent;

  // oracle geometry: AUC = 100*(1 - p/2) within 0.5
  double p = 0.0;
  for (const auto& inst : eval_day.instances) p += inst.label ? 1.0 : 0.0;
  p /= static_cast<double>(eval_day.instances.size());
  out.oracle_geometry_ok =
      std::abs(out.oracle - 100.0 * (1.0 - p / 2.0)) <= 0.5;

  // dominance: oracle recall at its first swept cost >= c beats every model
  // point, and no model AUC exceeds the oracle's
  const auto oracle_recall_at = [&](double cost) {
    for (const auto& pt : oracle_curve.points) {
      if (pt.cost >= cost - 1e-12) return pt.recall;
    }
    return oracle_curve.points.back().recall;
  };
  out.dominance_ok = true;
  for (const auto& curve : model_curves) {
    if (curve.auc_percent > out.oracle + 1e-9) out.dominance_ok = false;
    for (const auto& pt : curve.points) {
      if (oracle_recall_at(pt.cost) < pt.recall - 1e-9) {
        out.dominance_ok = false;
        break;
      }
    }
  }
  out.seed_seconds = elapsed(start);
  return out;
}

void criteria_2_to_5(const std::vector<SeedEval>& seeds) {
  // criterion 2
  bool geometry = true;
  bool dominance = true;
  for (const auto& s : seeds) {
    geometry = geometry && s.oracle_geometry_ok;
    dominance = dominance && s.dominance_ok;
  }
  report(2, "oracle geometry and dominance", geometry && dominance,
         std::string("geometry ") + (geometry ? "ok" : "violated") +
             ", dominance " + (dominance ? "ok" : "violated") + " on " +
             std::to_string(seeds.size()) + " seeds");

  // criterion 3: seed-median ordering with margins
  std::vector<double> pop;
  std::vector<double> logreg;
  std::vector<double> bandit;
  std::vector<double> forest;
  std::vector<double> runtime;
  for (const auto& s : seeds) {
    pop.push_back(s.pop);
    logreg.push_back(s.logreg);
    bandit.push_back(s.bandit);
    forest.push_back(s.forest_onehot);
    runtime.push_back(s.seed_seconds);
  }
  const double med_pop = median(pop);
  const double med_logreg = median(logreg);
  const double med_bandit = median(bandit);
  const double med_forest = median(forest);
  const double max_runtime = *std::max_element(runtime.begin(), runtime.end());
  const bool ordering = med_forest >= med_bandit &&
                        med_bandit >= med_pop + 15.0 &&
                        med_logreg >= med_pop + 10.0;
  report(3, "model ordering (forest >= bandit >= pop+15, logreg >= pop+10)",
         ordering && max_runtime < 180.0,
         "medians: pop " + fmt(med_pop) + ", logreg " + fmt(med_logreg) +
             ", bandit " + fmt(med_bandit) + ", forest " + fmt(med_forest) +
             "; slowest seed " + fmt(max_runtime) + "s");

  // criterion 4: representation non-inferiority (medians) + gradient checks
  std::vector<double> cotrained;
  for (const auto& s : seeds) cotrained.push_back(s.forest_cotrained);
  const double med_cotrained = median(cotrained);
  bool gradients_ok = true;
  {
    // embed-net gradient check at rel err < 1e-4
    EmbedNetConfig config;
    config.embedding_dim = 4;
    config.hidden_widths = {8, 4};
    config.seed = 5;
    EmbedNet net(6, 3, config);
    Rng rng(99);
    std::vector<Instance> batch;
    for (int i = 0; i < 8; ++i) {
      Instance inst;
      inst.query_id = i;
      inst.airline = static_cast<AirlineId>(rng.uniform_index(3));
      inst.direction =
          rng.bernoulli(0.5) ? LegDirection::Inbound : LegDirection::Outbound;
      inst.label = rng.bernoulli(0.4);
      inst.features.origin = static_cast<AirportId>(rng.uniform_index(6));
      inst.features.destination = static_cast<AirportId>(rng.uniform_index(6));
      inst.features.airline = inst.airline;
      inst.features.direction = inst.direction;
      inst.features.horizon = static_cast<int>(rng.uniform_index(25));
      inst.features.trip_length = 1 + static_cast<int>(rng.uniform_index(12));
      inst.features.search_day_of_week = static_cast<int>(rng.uniform_index(7));
      inst.features.departure_day_of_week =
          static_cast<int>(rng.uniform_index(7));
      inst.features.route_popularity = rng.uniform01() * 0.05;
      batch.push_back(inst);
    }
    std::vector<double> analytic;
    net.loss_and_gradient(batch, &analytic);
    EmbedNet probe = net;
    const auto numeric = testsup::finite_difference(
        [&](const std::vector<double>& p) {
          probe.set_flat_parameters(p);
          return probe.loss_and_gradient(batch, nullptr);
        },
        net.flat_parameters());
    gradients_ok = testsup::max_relative_error(analytic, numeric) < 1e-4;
  }
  report(4, "co-trained representation non-inferior, gradient check",
         med_cotrained >= median(forest) - 1.0 && gradients_ok,
         "median forest(cotrained) " + fmt(med_cotrained) +
             " vs forest(onehot) " + fmt(median(forest)) +
             "; embed-net gradient " + (gradients_ok ? "ok" : "bad"));

  // criterion 5: generator calibration on the same worlds (7-day samples)
  bool calibration = true;
  std::string detail;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const DayStats& s = seeds[i].stats;
    const bool rate_ok = s.positive_instance_rate >= 0.05 &&
                         s.positive_instance_rate <= 0.15;
    const bool monotone = s.horizon_bucket_share[0] >= s.horizon_bucket_share[1] &&
                          s.horizon_bucket_share[1] >= s.horizon_bucket_share[2];
    const bool prone_ok = s.combo_prone_competitive_share >= 0.60;
    calibration = calibration && rate_ok && monotone && prone_ok;
    if (i == 0) {
      detail = "seed1: rate " + fmt(s.positive_instance_rate) + ", buckets " +
               fmt(s.horizon_bucket_share[0]) + "/" +
               fmt(s.horizon_bucket_share[1]) + "/" +
               fmt(s.horizon_bucket_share[2]) + ", prone " +
               fmt(s.combo_prone_competitive_share);
    }
  }
  report(5, "generator calibration (rate, horizon monotone, prone share)",
         calibration, detail + (calibration ? "; all seeds ok" : "; violated"));
}

// ---------------------------------------------------------------------------
// Criterion 6: staleness direction and drift-free ablation.

void criterion_6() {
  const auto run_arm = [&](bool drifting, std::uint64_t seed) {
    SimConfig sim;
    sim.seed = seed;
    sim.n_days = 15;  // window 7 + t0 + horizon 6
    if (!drifting) {
      sim.horizon_surge_scale = 0.0;   // time-invariant price dynamics
      sim.asymmetry_drift_sigma = 0.0;
      sim.airline_day_sigma = 0.0;
    }
    const World world = generate_world(sim);
    std::vector<GroundTruthDay> days;
    std::vector<LabeledDay> labels;
    for (Day d = 0; d < sim.n_days; ++d) {
      days.push_back(generate_day(world, d));
      labels.push_back(label_day(days.back(), world, 10));
    }
    ModelConfig model;
    model.forest.seed = seed;
    const StalenessSeries series = staleness_experiment(
        labels, days, 7, 6, 7, 4000, model, world.catalog.n_airports(),
        world.catalog.n_airlines(), seed);
    double one_off = 0.0;
    double daily = 0.0;
    for (std::size_t i = 3; i < 6; ++i) {
      one_off += series.one_off_auc[i];
      daily += series.daily_auc[i];
    }
    return std::pair(daily / 3.0, one_off / 3.0);
  };

  std::vector<double> drift_delta;
  std::vector<double> ablation_delta;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [daily, one_off] = run_arm(true, seed);
    drift_delta.push_back(daily - one_off);
    const auto [a_daily, a_one_off] = run_arm(false, seed);
    ablation_delta.push_back(std::abs(a_daily - a_one_off));
  }
  const double med_drift = median(drift_delta);
  const double med_ablation = median(ablation_delta);
  report(6, "staleness direction and drift-free ablation",
         med_drift >= 0.0 && med_ablation < 1.0,
         "median daily-minus-one-off " + fmt(med_drift) +
             " (drifting), median |delta| " + fmt(med_ablation) +
             " (ablation)");
}

// ---------------------------------------------------------------------------
// Criterion 7: stability arithmetic + carry-over audit of a pipeline run.

void criterion_7(const PipelineRun& run) {
  Rng rng(321);
  bool arithmetic = true;
  for (int rep = 0; rep < 50; ++rep) {
    RuleSet prev;
    RuleSet curr;
    prev.day = 0;
    curr.day = 1;
    const int n_prev = 1 + static_cast<int>(rng.uniform_index(40));
    const int n_curr = static_cast<int>(rng.uniform_index(40));
    std::set<int> prev_ids;
    for (int i = 0; i < n_prev; ++i) {
      const int id = static_cast<int>(rng.uniform_index(60));
      prev.rules.emplace(Rule{id, id + 1, id % 5}, 1.0);
      prev_ids.insert(id);
    }
    std::set<int> curr_ids;
    for (int i = 0; i < n_curr; ++i) {
      const int id = static_cast<int>(rng.uniform_index(60));
      curr.rules.emplace(Rule{id, id + 1, id % 5}, 1.0);
      curr_ids.insert(id);
    }
    const StabilityReport got = stability_report(prev, curr);
    // hand-computed expectations on the id sets
    long long retained = 0;
    for (int id : prev_ids) retained += curr_ids.count(id) ? 1 : 0;
    long long added = 0;
    for (int id : curr_ids) added += prev_ids.count(id) ? 0 : 1;
    const double n = static_cast<double>(prev_ids.size());
    arithmetic = arithmetic &&
                 got.retained_frac == static_cast<double>(retained) / n &&
                 got.dropped_frac == 1.0 - static_cast<double>(retained) / n &&
                 got.added_frac == static_cast<double>(added) / n;
  }

  // carry-over superset invariant across the full default run
  bool carry_over = true;
  std::size_t served_index = 0;
  const RuleSet* prev_extracted = nullptr;
  for (const auto& r : run.reports) {
    if (!r.served) continue;
    const RuleSet& served = run.served_rules[served_index++];
    if (prev_extracted != nullptr) {
      for (const auto& [rule, score] : prev_extracted->rules) {
        (void)score;
        if (!served.contains(rule)) {
          carry_over = false;
          break;
        }
      }
    }
    if (r.extracted_rules) prev_extracted = &*r.extracted_rules;
  }
  report(7, "stability arithmetic and carry-over invariant",
         arithmetic && carry_over,
         std::string("50 random set pairs ") +
             (arithmetic ? "exact" : "mismatch") + ", carry-over " +
             (carry_over ? "holds" : "violated"));
}

// ---------------------------------------------------------------------------
// Criterion 8: embedding semantics in a two-region world.

void criterion_8() {
  std::vector<double> separations;
  std::vector<double> neighbor_shares;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig sim;
    sim.seed = seed;
    sim.n_airports = 16;
    sim.n_regions = 2;
    sim.n_airlines = 10;
    sim.n_users = 300;
    sim.queries_per_day = 1500;
    sim.n_days = 10;
    const World world = generate_world(sim);
    std::vector<SearchQuery> queries;
    for (Day d = 0; d < sim.n_days; ++d) {
      const GroundTruthDay day = generate_day(world, d);
      queries.insert(queries.end(), day.queries.begin(), day.queries.end());
    }
    SkipGramConfig config;
    config.seed = seed;
    const EmbeddingTable table = train_skipgram(build_traces(queries), config);

    double intra = 0.0;
    double inter = 0.0;
    long long n_intra = 0;
    long long n_inter = 0;
    for (const auto& [a, va] : table.vectors) {
      for (const auto& [b, vb] : table.vectors) {
        if (a >= b) continue;
        const double c = cosine_similarity(va, vb);
        if (world.catalog.airport(a).region_id ==
            world.catalog.airport(b).region_id) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
    separations.push_back(intra / static_cast<double>(n_intra) -
                          inter / static_cast<double>(n_inter));

    long long same_region = 0;
    long long total = 0;
    for (const auto& [a, va] : table.vectors) {
      (void)va;
      for (const auto& neighbor : nearest_neighbors(table, a, 3)) {
        same_region += world.catalog.airport(neighbor.airport).region_id ==
                               world.catalog.airport(a).region_id
                           ? 1
                           : 0;
        ++total;
      }
    }
    neighbor_shares.push_back(static_cast<double>(same_region) /
                              static_cast<double>(total));
  }
  const double med_sep = median(separations);
  const double med_share = median(neighbor_shares);
  report(8, "embedding semantics in a two-region world",
         med_sep > 0.0 && med_share >= 0.60,
         "median intra-inter cosine gap " + fmt(med_sep) +
             ", median top-3 same-region share " + fmt(med_share));
}

// ---------------------------------------------------------------------------
// Criteria 9 and 10: full default pipeline, twice, under the clock.

struct PipelineArtifacts {
  PipelineRun run;
  double first_run_seconds = 0.0;
  bool byte_identical = false;
};

PipelineArtifacts criterion_9_10() {
  PipelineArtifacts out;
  const auto start = Clock::now();

  SimConfig sim;  // full default world: 21 days x 2000 queries
  const World world = generate_world(sim);
  std::vector<GroundTruthDay> days;
  std::vector<LabeledDay> labels;
  for (Day d = 0; d < sim.n_days; ++d) {
    days.push_back(generate_day(world, d));
    labels.push_back(label_day(days.back(), world, 10));
  }
  PipelineConfig config;  // defaults: window 7, budget 5%, carry-over on
  config.model.forest.n_threads = 0;
  out.run = run_pipeline(world, days, labels, config);
  out.first_run_seconds = elapsed(start);

  const fs::path dir = fs::temp_directory_path() / "combo_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_run_summary_csv(out.run.reports, dir / "run_a.csv");

  const PipelineRun second = run_pipeline(world, days, labels, config);
  io::write_run_summary_csv(second.reports, dir / "run_b.csv");
  std::ifstream a(dir / "run_a.csv", std::ios::binary);
  std::ifstream b(dir / "run_b.csv", std::ios::binary);
  std::ostringstream sa;
  std::ostringstream sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  out.byte_identical = !sa.str().empty() && sa.str() == sb.str();
  fs::remove_all(dir);

  int served = 0;
  for (const auto& r : out.run.reports) served += r.served ? 1 : 0;
  report(9, "pipeline determinism (byte-identical run summaries)",
         out.byte_identical,
         out.byte_identical ? "two runs byte-identical" : "summaries differ");
  report(10, "desk-scale budget (full default pipeline)",
         out.first_run_seconds < 300.0 && served == 14,
         fmt(out.first_run_seconds) + "s for 21 days, " +
             std::to_string(served) + " served days");
  return out;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  std::printf("acceptance suite (deterministic seeds)\n");

  criterion_1();

  std::vector<SeedEval> seeds;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    seeds.push_back(run_seed_eval(seed));
  criteria_2_to_5(seeds);

  criterion_6();

  const PipelineArtifacts pipeline = criterion_9_10();
  criterion_7(pipeline.run);
  criterion_8();

  std::printf("acceptance total: %.1fs, %d failure(s)\n", elapsed(start),
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
