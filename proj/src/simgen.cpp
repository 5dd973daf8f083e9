#include "combo/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace combo {
namespace {

std::string letter_code(int index, int width) {
  std::string code(static_cast<std::size_t>(width), 'A');
  for (int i = width - 1; i >= 0; --i) {
    code[static_cast<std::size_t>(i)] = static_cast<char>('A' + index % 26);
    index /= 26;
  }
  return code;
}

double reflect_into(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return x;
}

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] > 0.0) || !(r[1] > 0.0) || r[0] > r[1] || r[1] > 1.0)
    fail(ErrorCode::InvalidConfig,
         std::string(name) + " must satisfy 0 < lo <= hi <= 1");
}

}  // namespace

void SimConfig::validate() const {
  if (n_airports < 2) fail(ErrorCode::InvalidConfig, "n_airports < 2");
  if (n_airlines < 1) fail(ErrorCode::InvalidConfig, "n_airlines < 1");
  if (n_regions < 1 || n_regions > n_airports)
    fail(ErrorCode::InvalidConfig, "n_regions must be in [1, n_airports]");
  if (n_users < 1) fail(ErrorCode::InvalidConfig, "n_users < 1");
  if (queries_per_day < 1) fail(ErrorCode::InvalidConfig, "queries_per_day < 1");
  if (n_days < 1) fail(ErrorCode::InvalidConfig, "n_days < 1");
  if (budget_airline_fraction < 0.0 || budget_airline_fraction > 1.0 ||
      combo_prone_airline_fraction < 0.0 || combo_prone_airline_fraction > 1.0)
    fail(ErrorCode::InvalidConfig, "airline fractions must be in [0,1]");
  const int n_budget = static_cast<int>(budget_airline_fraction * n_airlines);
  const int n_prone =
      static_cast<int>(combo_prone_airline_fraction * n_airlines);
  if (n_budget + n_prone > n_airlines)
    fail(ErrorCode::InvalidConfig,
         "budget and combo-prone airline sets must fit disjointly");
  if (route_zipf_exponent < 0.0)
    fail(ErrorCode::InvalidConfig, "route_zipf_exponent < 0");
  if (horizon_geometric_p <= 0.0 || horizon_geometric_p > 1.0)
    fail(ErrorCode::InvalidConfig, "horizon_geometric_p must be in (0,1]");
  if (price_noise_sigma < 0.0)
    fail(ErrorCode::InvalidConfig, "price_noise_sigma < 0");
  if (horizon_surge_scale < 0.0)
    fail(ErrorCode::InvalidConfig, "horizon_surge_scale < 0");
  if (horizon_surge_decay <= 0.0)
    fail(ErrorCode::InvalidConfig, "horizon_surge_decay <= 0");
  check_range(discount_range, "discount_range");
  check_range(asymmetry_range, "asymmetry_range");
  if (trip_length_max < 1) fail(ErrorCode::InvalidConfig, "trip_length_max < 1");
  if (home_region_bias < 0.0 || home_region_bias > 1.0)
    fail(ErrorCode::InvalidConfig, "home_region_bias must be in [0,1]");
  if (airline_day_sigma < 0.0 || asymmetry_drift_sigma < 0.0)
    fail(ErrorCode::InvalidConfig, "day/drift sigmas must be >= 0");
  if (price_factor_jitter < 0.0 || price_factor_jitter >= 1.0)
    fail(ErrorCode::InvalidConfig, "price_factor_jitter must be in [0,1)");
  if (oneway_premium <= 0.0)
    fail(ErrorCode::InvalidConfig, "oneway_premium must be positive");
  if (region_surge_range[0] <= 0.0 ||
      region_surge_range[0] > region_surge_range[1])
    fail(ErrorCode::InvalidConfig, "region_surge_range must be 0 < lo <= hi");
}

double World::asym(Day day, AirlineId airline, LegDirection d) const {
  const auto& pair =
      asym_schedule[static_cast<std::size_t>(day) * catalog.n_airlines() +
                    static_cast<std::size_t>(airline)];
  return pair[d == LegDirection::Outbound ? 0 : 1];
}

double World::shock(Day day, AirlineId airline) const {
  return day_shock[static_cast<std::size_t>(day) * catalog.n_airlines() +
                   static_cast<std::size_t>(airline)];
}

double World::surge_scale(int route_index) const {
  const auto& r = routes.route(route_index);
  const int ro = catalog.airport(r.origin).region_id;
  const int rd = catalog.airport(r.destination).region_id;
  return config.horizon_surge_scale *
         region_pair_surge[static_cast<std::size_t>(ro) * config.n_regions +
                           static_cast<std::size_t>(rd)];
}

World generate_world(const SimConfig& config) {
  config.validate();
  Rng rng(mix64(config.seed, 0x0157a9d3u));

  // Airports: round-robin regions, lognormal base price levels.
  std::vector<Airport> airports;
  airports.reserve(static_cast<std::size_t>(config.n_airports));
  std::vector<double> price_level(static_cast<std::size_t>(config.n_airports));
  for (int i = 0; i < config.n_airports; ++i) {
    Airport a;
    a.id = i;
    a.code = letter_code(i, 3);
    a.region_id = i % config.n_regions;
    airports.push_back(a);
    price_level[static_cast<std::size_t>(i)] =
        100.0 * rng.lognormal_unit(0.25);
  }

  // Routes: all ordered pairs; Zipf popularity over a random rank order so
  // popularity is uncorrelated with region structure and price levels.
  std::vector<RouteTable::Route> routes;
  routes.reserve(static_cast<std::size_t>(config.n_airports) *
                 (config.n_airports - 1));
  for (int o = 0; o < config.n_airports; ++o) {
    for (int d = 0; d < config.n_airports; ++d) {
      if (o != d) routes.push_back({o, d, 0.0});
    }
  }
  std::vector<int> rank(routes.size());
  std::iota(rank.begin(), rank.end(), 0);
  rng.shuffle(rank);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    routes[i].share =
        1.0 / std::pow(static_cast<double>(rank[i]) + 1.0,
                       config.route_zipf_exponent);
    total_weight += routes[i].share;
  }
  for (auto& r : routes) r.share /= total_weight;

  for (auto& a : airports) {
    double w = 0.0;
    for (const auto& r : routes) {
      if (r.origin == a.id || r.destination == a.id) w += r.share;
    }
    a.popularity_weight = w / 2.0;
  }

  // Airlines: a shuffled order determines the disjoint Budget and
  // combo-prone subsets.
  const int n_budget =
      static_cast<int>(config.budget_airline_fraction * config.n_airlines);
  const int n_prone =
      static_cast<int>(config.combo_prone_airline_fraction * config.n_airlines);
  std::vector<int> order(static_cast<std::size_t>(config.n_airlines));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  // Every combo-prone airline discounts the same direction; opposite-facing
  // cheap legs would pair into permanently competitive combinations.
  const bool cheap_outbound = rng.bernoulli(0.5);

  std::vector<Airline> airlines(static_cast<std::size_t>(config.n_airlines));
  std::vector<double> price_factor(static_cast<std::size_t>(config.n_airlines));
  std::vector<bool> combo_prone(static_cast<std::size_t>(config.n_airlines),
                                false);
  for (int i = 0; i < config.n_airlines; ++i) {
    const int id = order[static_cast<std::size_t>(i)];
    Airline& a = airlines[static_cast<std::size_t>(id)];
    a.id = id;
    a.code = letter_code(id, 2);
    price_factor[static_cast<std::size_t>(id)] = rng.uniform(
        1.0 - config.price_factor_jitter, 1.0 + config.price_factor_jitter);
    if (i < n_budget) {
      a.strategy = PricingStrategy::Budget;
      a.roundtrip_discount = 1.0;
    } else {
      a.strategy = PricingStrategy::Traditional;
      a.roundtrip_discount =
          rng.uniform(config.discount_range[0], config.discount_range[1]);
      if (i < n_budget + n_prone) {
        combo_prone[static_cast<std::size_t>(id)] = true;
        const double factor =
            rng.uniform(config.asymmetry_range[0], config.asymmetry_range[1]);
        if (cheap_outbound) {
          a.asym_outbound = factor;
        } else {
          a.asym_inbound = factor;
        }
      }
    }
  }

  std::vector<int> user_home(static_cast<std::size_t>(config.n_users));
  for (auto& h : user_home)
    h = static_cast<int>(rng.uniform_index(
        static_cast<std::uint64_t>(config.n_regions)));

  std::vector<double> region_surge(
      static_cast<std::size_t>(config.n_regions) * config.n_regions);
  for (auto& s : region_surge)
    s = rng.uniform(config.region_surge_range[0], config.region_surge_range[1]);

  // Planted dynamics. The asymmetry of combo-prone airlines follows a
  // reflected random walk inside asymmetry_range (day-over-day drift); every
  // airline additionally gets an i.i.d. day-level fare shock.
  const std::size_t n_days = static_cast<std::size_t>(config.n_days);
  const std::size_t n_air = static_cast<std::size_t>(config.n_airlines);
  std::vector<std::array<double, 2>> asym_schedule(n_days * n_air);
  std::vector<double> day_shock(n_days * n_air);
  for (std::size_t a = 0; a < n_air; ++a) {
    asym_schedule[a] = {airlines[a].asym_outbound, airlines[a].asym_inbound};
  }
  for (std::size_t d = 1; d < n_days; ++d) {
    for (std::size_t a = 0; a < n_air; ++a) {
      auto prev = asym_schedule[(d - 1) * n_air + a];
      if (combo_prone[a] && config.asymmetry_drift_sigma > 0.0) {
        // Only the direction that carries the planted asymmetry walks.
        for (std::size_t k = 0; k < 2; ++k) {
          if (asym_schedule[a][k] < 1.0) {
            prev[k] = reflect_into(
                prev[k] + config.asymmetry_drift_sigma * rng.normal(),
                config.asymmetry_range[0], config.asymmetry_range[1]);
          }
        }
      }
      asym_schedule[d * n_air + a] = prev;
    }
  }
  for (std::size_t i = 0; i < day_shock.size(); ++i)
    day_shock[i] = rng.lognormal_unit(config.airline_day_sigma);

  World world{config,
              validate_catalog(std::move(airports), std::move(airlines)),
              RouteTable(std::move(routes)),
              std::move(user_home),
              std::move(price_level),
              std::move(price_factor),
              std::move(combo_prone),
              std::move(region_surge),
              std::move(asym_schedule),
              std::move(day_shock)};
  return world;
}

namespace {

double leg_price_impl(const World& world, int route_index, AirlineId airline,
                      int horizon, Day day, double noise, double asym,
                      double premium) {
  const auto& r = world.routes.route(route_index);
  const double base =
      0.5 * (world.airport_price_level[static_cast<std::size_t>(r.origin)] +
             world.airport_price_level[static_cast<std::size_t>(r.destination)]);
  const double factor =
      world.airline_price_factor[static_cast<std::size_t>(airline)] *
      world.shock(day, airline);
  const double surge =
      1.0 + world.surge_scale(route_index) *
                std::exp(-horizon / world.config.horizon_surge_decay);
  return base * factor * premium * asym * surge * noise;
}

void check_quote_args(const World& world, int route_index, AirlineId airline,
                      int horizon) {
  if (route_index < 0 || route_index >= world.routes.size())
    fail(ErrorCode::UnknownRoute, "route index " + std::to_string(route_index));
  if (airline < 0 || airline >= world.catalog.n_airlines())
    fail(ErrorCode::UnknownAirline, "airline id " + std::to_string(airline));
  if (horizon < 0)
    fail(ErrorCode::InvalidConfig, "horizon must be >= 0");
}

}  // namespace

double price_leg(const World& world, int route_index, AirlineId airline,
                 LegDirection direction, int horizon, Day day, double noise) {
  check_quote_args(world, route_index, airline, horizon);
  return leg_price_impl(world, route_index, airline, horizon, day, noise,
                        world.asym(day, airline, direction),
                        world.config.oneway_premium);
}

double price_roundtrip(const World& world, int route_index, AirlineId airline,
                       int departure_horizon, int return_horizon, Day day,
                       double noise_out, double noise_in) {
  check_quote_args(world, route_index, airline, departure_horizon);
  if (return_horizon < departure_horizon)
    fail(ErrorCode::InvalidConfig, "return horizon before departure horizon");
  const auto& a = world.catalog.airline(airline);
  if (a.strategy == PricingStrategy::Budget) {
    return price_leg(world, route_index, airline, LegDirection::Outbound,
                     departure_horizon, day, noise_out) +
           price_leg(world, route_index, airline, LegDirection::Inbound,
                     return_horizon, day, noise_in);
  }
  const double sym_out =
      leg_price_impl(world, route_index, airline, departure_horizon, day,
                     noise_out, 1.0, 1.0);
  const double sym_in =
      leg_price_impl(world, route_index, airline, departure_horizon, day,
                     noise_in, 1.0, 1.0);
  return (sym_out + sym_in) * a.roundtrip_discount;
}

GroundTruthDay generate_day(const World& world, Day day) {
  const SimConfig& config = world.config;
  if (day < 0 || day >= config.n_days)
    fail(ErrorCode::InvalidDay, "day " + std::to_string(day) + " outside 0.." +
                                    std::to_string(config.n_days - 1));

  // Cumulative route weights, global and per origin region.
  const auto& routes = world.routes.routes();
  std::vector<double> cum_global(routes.size());
  std::vector<std::vector<int>> region_routes(
      static_cast<std::size_t>(config.n_regions));
  std::vector<std::vector<double>> cum_region(
      static_cast<std::size_t>(config.n_regions));
  double acc = 0.0;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    acc += routes[i].share;
    cum_global[i] = acc;
    const int region = world.catalog.airport(routes[i].origin).region_id;
    region_routes[static_cast<std::size_t>(region)].push_back(
        static_cast<int>(i));
  }
  for (int r = 0; r < config.n_regions; ++r) {
    double sum = 0.0;
    for (int idx : region_routes[static_cast<std::size_t>(r)]) {
      sum += routes[static_cast<std::size_t>(idx)].share;
      cum_region[static_cast<std::size_t>(r)].push_back(sum);
    }
  }
  const auto pick = [](const std::vector<double>& cum, double u) {
    const double target = u * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    return static_cast<int>(std::min<std::ptrdiff_t>(
        it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size()) - 1));
  };

  Rng rng(mix64(config.seed, 0xda7a0d41u, static_cast<std::uint64_t>(day)));
  GroundTruthDay out;
  out.day = day;
  out.queries.reserve(static_cast<std::size_t>(config.queries_per_day));
  const std::size_t per_query =
      static_cast<std::size_t>(world.catalog.n_airlines());
  out.leg_quotes.reserve(out.queries.capacity() * per_query * 2);
  out.roundtrip_quotes.reserve(out.queries.capacity() * per_query);

  for (int i = 0; i < config.queries_per_day; ++i) {
    const QueryId qid =
        static_cast<QueryId>(day) * config.queries_per_day + i;
    const UserId user = static_cast<UserId>(
        rng.uniform_index(static_cast<std::uint64_t>(config.n_users)));
    const int home = world.user_home_region[static_cast<std::size_t>(user)];
    int route_index;
    if (rng.bernoulli(config.home_region_bias) &&
        !region_routes[static_cast<std::size_t>(home)].empty()) {
      const int k = pick(cum_region[static_cast<std::size_t>(home)],
                         rng.uniform01());
      route_index =
          region_routes[static_cast<std::size_t>(home)][static_cast<std::size_t>(k)];
    } else {
      route_index = pick(cum_global, rng.uniform01());
    }
    const auto& route = routes[static_cast<std::size_t>(route_index)];
    const int horizon = rng.geometric(config.horizon_geometric_p);
    const int trip_length = 1 + static_cast<int>(rng.uniform_index(
                                    static_cast<std::uint64_t>(
                                        config.trip_length_max)));
    const SearchQuery query =
        make_query(qid, user, route.origin, route.destination, day,
                   day + horizon, day + horizon + trip_length);
    out.queries.push_back(query);

    const int h_dep = query.horizon();
    const int h_ret = query.return_day - query.search_day;
    for (AirlineId a = 0; a < world.catalog.n_airlines(); ++a) {
      const double noise_out = rng.lognormal_unit(config.price_noise_sigma);
      const double noise_in = rng.lognormal_unit(config.price_noise_sigma);
      const double leg_out = price_leg(world, route_index, a,
                                       LegDirection::Outbound, h_dep, day,
                                       noise_out);
      const double leg_in = price_leg(world, route_index, a,
                                      LegDirection::Inbound, h_ret, day,
                                      noise_in);
      out.leg_quotes.push_back({qid, a, LegDirection::Outbound, leg_out});
      out.leg_quotes.push_back({qid, a, LegDirection::Inbound, leg_in});
      out.roundtrip_quotes.push_back(
          {qid, a,
           price_roundtrip(world, route_index, a, h_dep, h_ret, day, noise_out,
                           noise_in)});
    }
  }
  return out;
}

}  // namespace combo
