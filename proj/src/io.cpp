#include "combo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace combo::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingData, "cannot read " + path.string());
  return in;
}

nlohmann::json quote_to_json(const LegQuote& q) {
  return {{"airline", q.airline},
          {"direction", direction_name(q.direction)},
          {"price", q.price}};
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
  if (!fs::is_directory(dir))
    fail(ErrorCode::IoError, dir.string() + " is not a directory");
}

DirLock::DirLock(const fs::path& dir) {
  ensure_dir(dir);
  lock_path_ = dir / ".lock";
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (f == nullptr)
    fail(ErrorCode::IoError,
         "output directory is locked by another run: " + lock_path_.string());
  std::fclose(f);
}

DirLock::~DirLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

nlohmann::json world_to_json(const World& world) {
  nlohmann::json config = sim_config_to_json(world.config);
  nlohmann::json airports = nlohmann::json::array();
  for (const auto& a : world.catalog.airports()) {
    airports.push_back({{"id", a.id},
                        {"code", a.code},
                        {"region_id", a.region_id},
                        {"popularity_weight", a.popularity_weight},
                        {"price_level",
                         world.airport_price_level[static_cast<std::size_t>(a.id)]}});
  }
  nlohmann::json airlines = nlohmann::json::array();
  for (const auto& a : world.catalog.airlines()) {
    airlines.push_back(
        {{"id", a.id},
         {"code", a.code},
         {"strategy",
          a.strategy == PricingStrategy::Budget ? "budget" : "traditional"},
         {"roundtrip_discount", a.roundtrip_discount},
         {"asym_outbound", a.asym_outbound},
         {"asym_inbound", a.asym_inbound},
         {"price_factor",
          world.airline_price_factor[static_cast<std::size_t>(a.id)]},
         {"combo_prone",
          static_cast<bool>(world.airline_combo_prone[static_cast<std::size_t>(a.id)])}});
  }
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : world.routes.routes()) {
    routes.push_back(
        {{"origin", r.origin}, {"destination", r.destination}, {"share", r.share}});
  }
  nlohmann::json asym = nlohmann::json::array();
  for (const auto& pair : world.asym_schedule)
    asym.push_back({pair[0], pair[1]});
  return {{"config", config},
          {"airports", airports},
          {"airlines", airlines},
          {"routes", routes},
          {"user_home_region", world.user_home_region},
          {"region_pair_surge", world.region_pair_surge},
          {"asym_schedule", asym},
          {"day_shock", world.day_shock}};
}

World world_from_json(const nlohmann::json& j) {
  World world;
  world.config = sim_config_from_json(j.at("config"));
  std::vector<Airport> airports;
  for (const auto& a : j.at("airports")) {
    Airport airport;
    airport.id = a.at("id").get<AirportId>();
    airport.code = a.at("code").get<std::string>();
    airport.region_id = a.at("region_id").get<int>();
    airport.popularity_weight = a.at("popularity_weight").get<double>();
    world.airport_price_level.push_back(a.at("price_level").get<double>());
    airports.push_back(std::move(airport));
  }
  std::vector<Airline> airlines;
  for (const auto& a : j.at("airlines")) {
    Airline airline;
    airline.id = a.at("id").get<AirlineId>();
    airline.code = a.at("code").get<std::string>();
    airline.strategy = a.at("strategy").get<std::string>() == "budget"
                           ? PricingStrategy::Budget
                           : PricingStrategy::Traditional;
    airline.roundtrip_discount = a.at("roundtrip_discount").get<double>();
    airline.asym_outbound = a.at("asym_outbound").get<double>();
    airline.asym_inbound = a.at("asym_inbound").get<double>();
    world.airline_price_factor.push_back(a.at("price_factor").get<double>());
    world.airline_combo_prone.push_back(a.at("combo_prone").get<bool>());
    airlines.push_back(std::move(airline));
  }
  world.catalog = validate_catalog(std::move(airports), std::move(airlines));
  std::vector<RouteTable::Route> routes;
  for (const auto& r : j.at("routes")) {
    routes.push_back({r.at("origin").get<AirportId>(),
                      r.at("destination").get<AirportId>(),
                      r.at("share").get<double>()});
  }
  world.routes = RouteTable(std::move(routes));
  world.user_home_region = j.at("user_home_region").get<std::vector<int>>();
  world.region_pair_surge =
      j.at("region_pair_surge").get<std::vector<double>>();
  for (const auto& pair : j.at("asym_schedule"))
    world.asym_schedule.push_back({pair.at(0).get<double>(),
                                   pair.at(1).get<double>()});
  world.day_shock = j.at("day_shock").get<std::vector<double>>();
  return world;
}

void write_world(const World& world, const fs::path& path) {
  write_json_file(world_to_json(world), path);
}

World read_world(const fs::path& path) {
  return world_from_json(read_json_file(path));
}

void write_ground_truth_day(const GroundTruthDay& day, const fs::path& path) {
  auto out = open_out(path);
  std::size_t leg_pos = 0;
  std::size_t rt_pos = 0;
  for (const auto& q : day.queries) {
    nlohmann::json legs = nlohmann::json::array();
    while (leg_pos < day.leg_quotes.size() &&
           day.leg_quotes[leg_pos].query_id == q.query_id) {
      legs.push_back(quote_to_json(day.leg_quotes[leg_pos]));
      ++leg_pos;
    }
    nlohmann::json rts = nlohmann::json::array();
    while (rt_pos < day.roundtrip_quotes.size() &&
           day.roundtrip_quotes[rt_pos].query_id == q.query_id) {
      rts.push_back({{"airline", day.roundtrip_quotes[rt_pos].airline},
                     {"price", day.roundtrip_quotes[rt_pos].price}});
      ++rt_pos;
    }
    const nlohmann::json record = {
        {"query_id", q.query_id},   {"user_id", q.user_id},
        {"origin", q.origin},       {"destination", q.destination},
        {"search_day", q.search_day}, {"departure_day", q.departure_day},
        {"return_day", q.return_day}, {"leg_quotes", legs},
        {"roundtrip_quotes", rts}};
    out << record.dump() << "\n";
  }
}

GroundTruthDay read_ground_truth_day(const fs::path& path) {
  auto in = open_in(path);
  GroundTruthDay day;
  bool first = true;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json record = nlohmann::json::parse(line);
    const SearchQuery q = make_query(
        record.at("query_id").get<QueryId>(), record.at("user_id").get<UserId>(),
        record.at("origin").get<AirportId>(),
        record.at("destination").get<AirportId>(),
        record.at("search_day").get<Day>(), record.at("departure_day").get<Day>(),
        record.at("return_day").get<Day>());
    if (first) {
      day.day = q.search_day;
      first = false;
    }
    day.queries.push_back(q);
    for (const auto& leg : record.at("leg_quotes")) {
      day.leg_quotes.push_back(
          {q.query_id, leg.at("airline").get<AirlineId>(),
           leg.at("direction").get<std::string>() == "out"
               ? LegDirection::Outbound
               : LegDirection::Inbound,
           leg.at("price").get<double>()});
    }
    for (const auto& rt : record.at("roundtrip_quotes")) {
      day.roundtrip_quotes.push_back({q.query_id,
                                      rt.at("airline").get<AirlineId>(),
                                      rt.at("price").get<double>()});
    }
  }
  if (first) fail(ErrorCode::MissingData, "empty ground truth " + path.string());
  return day;
}

void write_instances_jsonl(const LabeledDay& day, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& inst : day.instances) {
    const nlohmann::json record = {
        {"query_id", inst.query_id},
        {"airline", inst.airline},
        {"direction", direction_name(inst.direction)},
        {"label", inst.label},
        {"features",
         {{"origin", inst.features.origin},
          {"destination", inst.features.destination},
          {"horizon", inst.features.horizon},
          {"trip_length", inst.features.trip_length},
          {"search_day_of_week", inst.features.search_day_of_week},
          {"departure_day_of_week", inst.features.departure_day_of_week},
          {"route_popularity", inst.features.route_popularity}}}};
    out << record.dump() << "\n";
  }
}

void write_curve_csv(const CostRecallCurve& curve, const fs::path& path) {
  auto out = open_out(path);
  out << "cost,recall\n";
  for (const auto& p : curve.points)
    out << format_double(p.cost) << "," << format_double(p.recall) << "\n";
}

void write_auc_csv(const std::vector<AucRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << "model,feature_mode,auc\n";
  for (const auto& row : rows)
    out << row.model << "," << row.feature_mode << ","
        << format_double(row.auc) << "\n";
}

void write_rules_csv(const RuleSet& rules, const fs::path& path) {
  auto out = open_out(path);
  out << "origin,destination,airline,score\n";
  for (const auto& [rule, score] : rules.rules) {
    out << rule.origin << "," << rule.destination << "," << rule.airline << ","
        << format_double(score) << "\n";
  }
}

void write_day_report_json(const DayReport& report, const fs::path& path) {
  nlohmann::json j = {
      {"day", report.day},
      {"trained", report.trained},
      {"gate_passed", report.gate_passed},
      {"served", report.served},
      {"val_auc", report.val_auc},
      {"val_positive_rate", report.val_positive_rate},
      {"threshold", report.threshold},
      {"offline_expected_recall", report.offline_expected_recall},
      {"realized_recall", std::isfinite(report.realized_recall)
                              ? nlohmann::json(report.realized_recall)
                              : nlohmann::json(nullptr)},
      {"realized_cost", report.realized_cost},
      {"rules_extracted", report.rules_extracted},
      {"rules_served", report.rules_served}};
  if (report.stability) {
    j["stability"] = {{"retained_frac", report.stability->retained_frac},
                      {"dropped_frac", report.stability->dropped_frac},
                      {"added_frac", report.stability->added_frac}};
  }
  if (report.challenger_realized_recall) {
    j["challenger"] = {
        {"realized_recall", *report.challenger_realized_recall},
        {"realized_cost", report.challenger_realized_cost.value_or(0.0)}};
  }
  write_json_file(j, path);
}

void write_run_summary_csv(const std::vector<DayReport>& reports,
                           const fs::path& path) {
  auto out = open_out(path);
  out << "day,gate_passed,val_auc,threshold,rules_extracted,rules_served,"
         "offline_recall,realized_recall,realized_cost,retained_frac,"
         "dropped_frac,added_frac\n";
  for (const auto& r : reports) {
    if (!r.served) continue;
    out << r.day << "," << (r.gate_passed ? 1 : 0) << ","
        << format_double(r.val_auc) << "," << format_double(r.threshold) << ","
        << r.rules_extracted << "," << r.rules_served << ","
        << format_double(r.offline_expected_recall) << ","
        << format_double(r.realized_recall) << ","
        << format_double(r.realized_cost) << ",";
    if (r.stability) {
      out << format_double(r.stability->retained_frac) << ","
          << format_double(r.stability->dropped_frac) << ","
          << format_double(r.stability->added_frac);
    } else {
      out << ",,";
    }
    out << "\n";
  }
}

void write_stability_csv(const std::vector<DayReport>& reports,
                         const fs::path& path) {
  auto out = open_out(path);
  out << "day,retained_frac,dropped_frac,added_frac\n";
  for (const auto& r : reports) {
    if (!r.stability) continue;
    out << r.day << "," << format_double(r.stability->retained_frac) << ","
        << format_double(r.stability->dropped_frac) << ","
        << format_double(r.stability->added_frac) << "\n";
  }
}

void write_staleness_csv(const StalenessSeries& series, const fs::path& path) {
  auto out = open_out(path);
  out << "day,one_off_auc,daily_auc\n";
  for (std::size_t i = 0; i < series.days.size(); ++i) {
    out << series.days[i] << "," << format_double(series.one_off_auc[i]) << ","
        << format_double(series.daily_auc[i]) << "\n";
  }
}

void write_window_sweep_csv(const std::vector<WindowSweepRow>& rows,
                            const fs::path& path) {
  auto out = open_out(path);
  out << "window_days,auc\n";
  for (const auto& row : rows)
    out << row.window_days << "," << format_double(row.auc) << "\n";
}

void write_gap_csv(const std::vector<GapRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << "day,offline_recall,realized_recall,relative_gap\n";
  for (const auto& row : rows) {
    out << row.day << "," << format_double(row.offline_recall) << ","
        << format_double(row.realized_recall) << ","
        << format_double(row.relative_gap) << "\n";
  }
}

void write_embeddings_csv(const EmbeddingTable& table, const Catalog& catalog,
                          const fs::path& path) {
  auto out = open_out(path);
  out << "airport_code";
  for (int d = 0; d < table.dim; ++d) out << ",v" << d;
  out << "\n";
  // Catalog order keeps the file stable across runs.
  for (const auto& airport : catalog.airports()) {
    const auto it = table.vectors.find(airport.id);
    if (it == table.vectors.end()) continue;
    out << airport.code;
    for (double v : it->second) out << "," << format_double(v);
    out << "\n";
  }
}

void write_neighbors_csv(
    const std::vector<std::pair<AirportId, std::vector<Neighbor>>>& rows,
    const Catalog& catalog, const fs::path& path) {
  auto out = open_out(path);
  out << "airport,rank,neighbor,cosine\n";
  for (const auto& [airport, neighbors] : rows) {
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      out << catalog.airport(airport).code << "," << (k + 1) << ","
          << catalog.airport(neighbors[k].airport).code << ","
          << format_double(neighbors[k].cosine) << "\n";
    }
  }
}

void write_model_json(const Scorer& scorer, const fs::path& path) {
  write_json_file(scorer.to_json(), path);
}

void write_json_file(const nlohmann::json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const fs::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig,
         "bad JSON in " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Config sections

namespace {

// Assigns fields present in `j`, rejecting keys that match nothing.
class SectionReader {
 public:
  explicit SectionReader(const nlohmann::json& j) : j_(j) {
    if (!j.is_object()) fail(ErrorCode::InvalidConfig, "section must be an object");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      pending_.insert(key);
    }
  }

  template <typename T>
  void field(const char* key, T& target) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      target = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::InvalidConfig, std::string("bad value for key ") + key);
    }
    pending_.erase(key);
  }

  void finish(const char* section) const {
    if (!pending_.empty())
      fail(ErrorCode::InvalidConfig, std::string("unknown key '") +
                                         *pending_.begin() + "' in section " +
                                         section);
  }

 private:
  const nlohmann::json& j_;
  std::set<std::string> pending_;
};

}  // namespace

nlohmann::json sim_config_to_json(const SimConfig& c) {
  return {{"seed", c.seed},
          {"n_airports", c.n_airports},
          {"n_regions", c.n_regions},
          {"n_airlines", c.n_airlines},
          {"budget_airline_fraction", c.budget_airline_fraction},
          {"combo_prone_airline_fraction", c.combo_prone_airline_fraction},
          {"n_users", c.n_users},
          {"queries_per_day", c.queries_per_day},
          {"n_days", c.n_days},
          {"route_zipf_exponent", c.route_zipf_exponent},
          {"horizon_geometric_p", c.horizon_geometric_p},
          {"price_noise_sigma", c.price_noise_sigma},
          {"horizon_surge_scale", c.horizon_surge_scale},
          {"horizon_surge_decay", c.horizon_surge_decay},
          {"discount_range", c.discount_range},
          {"asymmetry_range", c.asymmetry_range},
          {"trip_length_max", c.trip_length_max},
          {"home_region_bias", c.home_region_bias},
          {"price_factor_jitter", c.price_factor_jitter},
          {"oneway_premium", c.oneway_premium},
          {"airline_day_sigma", c.airline_day_sigma},
          {"asymmetry_drift_sigma", c.asymmetry_drift_sigma},
          {"region_surge_range", c.region_surge_range}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  SectionReader reader(j);
  reader.field("seed", c.seed);
  reader.field("n_airports", c.n_airports);
  reader.field("n_regions", c.n_regions);
  reader.field("n_airlines", c.n_airlines);
  reader.field("budget_airline_fraction", c.budget_airline_fraction);
  reader.field("combo_prone_airline_fraction", c.combo_prone_airline_fraction);
  reader.field("n_users", c.n_users);
  reader.field("queries_per_day", c.queries_per_day);
  reader.field("n_days", c.n_days);
  reader.field("route_zipf_exponent", c.route_zipf_exponent);
  reader.field("horizon_geometric_p", c.horizon_geometric_p);
  reader.field("price_noise_sigma", c.price_noise_sigma);
  reader.field("horizon_surge_scale", c.horizon_surge_scale);
  reader.field("horizon_surge_decay", c.horizon_surge_decay);
  reader.field("discount_range", c.discount_range);
  reader.field("asymmetry_range", c.asymmetry_range);
  reader.field("trip_length_max", c.trip_length_max);
  reader.field("home_region_bias", c.home_region_bias);
  reader.field("price_factor_jitter", c.price_factor_jitter);
  reader.field("oneway_premium", c.oneway_premium);
  reader.field("airline_day_sigma", c.airline_day_sigma);
  reader.field("asymmetry_drift_sigma", c.asymmetry_drift_sigma);
  reader.field("region_surge_range", c.region_surge_range);
  reader.finish("sim");
  return c;
}

nlohmann::json forest_config_to_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"min_samples_leaf", c.min_samples_leaf},
          {"bootstrap", c.bootstrap},
          {"max_bins", c.max_bins},
          {"n_threads", c.n_threads},
          {"seed", c.seed}};
}

ForestConfig forest_config_from_json(const nlohmann::json& j) {
  ForestConfig c;
  SectionReader reader(j);
  reader.field("n_trees", c.n_trees);
  reader.field("max_depth", c.max_depth);
  reader.field("min_samples_leaf", c.min_samples_leaf);
  reader.field("bootstrap", c.bootstrap);
  reader.field("max_bins", c.max_bins);
  reader.field("n_threads", c.n_threads);
  reader.field("seed", c.seed);
  reader.finish("forest");
  return c;
}

nlohmann::json logreg_config_to_json(const LogRegConfig& c) {
  return {{"l2", c.l2},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

LogRegConfig logreg_config_from_json(const nlohmann::json& j) {
  LogRegConfig c;
  SectionReader reader(j);
  reader.field("l2", c.l2);
  reader.field("learning_rate", c.learning_rate);
  reader.field("epochs", c.epochs);
  reader.field("batch_size", c.batch_size);
  reader.field("seed", c.seed);
  reader.finish("logreg");
  return c;
}

nlohmann::json embed_net_config_to_json(const EmbedNetConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"hidden_widths", c.hidden_widths},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"seed", c.seed}};
}

EmbedNetConfig embed_net_config_from_json(const nlohmann::json& j) {
  EmbedNetConfig c;
  SectionReader reader(j);
  reader.field("embedding_dim", c.embedding_dim);
  reader.field("hidden_widths", c.hidden_widths);
  reader.field("epochs", c.epochs);
  reader.field("batch_size", c.batch_size);
  reader.field("learning_rate", c.learning_rate);
  reader.field("momentum", c.momentum);
  reader.field("seed", c.seed);
  reader.finish("embed_net");
  return c;
}

nlohmann::json skipgram_config_to_json(const SkipGramConfig& c) {
  return {{"dim", c.dim},
          {"window", c.window},
          {"negatives", c.negatives},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

SkipGramConfig skipgram_config_from_json(const nlohmann::json& j) {
  SkipGramConfig c;
  SectionReader reader(j);
  reader.field("dim", c.dim);
  reader.field("window", c.window);
  reader.field("negatives", c.negatives);
  reader.field("epochs", c.epochs);
  reader.field("learning_rate", c.learning_rate);
  reader.field("seed", c.seed);
  reader.finish("skipgram");
  return c;
}

ScorerKind scorer_kind_from_name(const std::string& name) {
  if (name == "popularity") return ScorerKind::Popularity;
  if (name == "logreg") return ScorerKind::LogReg;
  if (name == "bandit") return ScorerKind::Bandit;
  if (name == "forest") return ScorerKind::RandomForest;
  if (name == "embednet") return ScorerKind::EmbedNet;
  if (name == "oracle") return ScorerKind::Oracle;
  fail(ErrorCode::InvalidConfig, "unknown model kind: " + name);
}

FeatureMode feature_mode_from_name(const std::string& name) {
  if (name == "onehot") return FeatureMode::OneHot;
  if (name == "trace") return FeatureMode::TraceEmbed;
  if (name == "cotrained") return FeatureMode::CoTrainedEmbed;
  fail(ErrorCode::InvalidConfig, "unknown feature mode: " + name);
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  nlohmann::json j = {{"train_window_days", c.train_window_days},
                      {"budget", c.budget},
                      {"ground_truth_traffic", c.ground_truth_traffic},
                      {"challenger_traffic", c.challenger_traffic},
                      {"validation_fraction", c.validation_fraction},
                      {"carry_over", c.carry_over},
                      {"validation_auc_floor", c.validation_auc_floor},
                      {"validation_rate_band", c.validation_rate_band},
                      {"seed", c.seed},
                      {"model_kind", scorer_kind_name(c.model.kind)},
                      {"feature_mode",
                       feature_mode_name(c.model.feature_mode)}};
  if (c.challenger) {
    j["challenger_model_kind"] = scorer_kind_name(c.challenger->kind);
    j["challenger_feature_mode"] = feature_mode_name(c.challenger->feature_mode);
  }
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  SectionReader reader(j);
  reader.field("train_window_days", c.train_window_days);
  reader.field("budget", c.budget);
  reader.field("ground_truth_traffic", c.ground_truth_traffic);
  reader.field("challenger_traffic", c.challenger_traffic);
  reader.field("validation_fraction", c.validation_fraction);
  reader.field("carry_over", c.carry_over);
  reader.field("validation_auc_floor", c.validation_auc_floor);
  reader.field("validation_rate_band", c.validation_rate_band);
  reader.field("seed", c.seed);
  std::string kind = scorer_kind_name(c.model.kind);
  std::string mode = feature_mode_name(c.model.feature_mode);
  reader.field("model_kind", kind);
  reader.field("feature_mode", mode);
  c.model.kind = scorer_kind_from_name(kind);
  c.model.feature_mode = feature_mode_from_name(mode);
  std::string challenger_kind;
  std::string challenger_mode = "onehot";
  reader.field("challenger_model_kind", challenger_kind);
  reader.field("challenger_feature_mode", challenger_mode);
  if (!challenger_kind.empty()) {
    ModelConfig challenger = c.model;
    challenger.kind = scorer_kind_from_name(challenger_kind);
    challenger.feature_mode = feature_mode_from_name(challenger_mode);
    c.challenger = challenger;
  }
  reader.finish("pipeline");
  return c;
}

}  // namespace combo::io
