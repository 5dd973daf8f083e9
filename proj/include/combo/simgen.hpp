#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "combo/domain.hpp"
#include "combo/rng.hpp"

namespace combo {

struct SimConfig {
  std::uint64_t seed = 42;
  int n_airports = 40;
  int n_regions = 5;
  int n_airlines = 20;
  double budget_airline_fraction = 0.3;
  double combo_prone_airline_fraction = 0.3;
  int n_users = 2000;
  int queries_per_day = 2000;
  int n_days = 21;
  double route_zipf_exponent = 1.0;
  double horizon_geometric_p = 0.08;
  double price_noise_sigma = 0.10;
  double horizon_surge_scale = 1.5;   // c
  double horizon_surge_decay = 10.0;  // tau, days
  std::array<double, 2> discount_range = {0.70, 0.95};
  std::array<double, 2> asymmetry_range = {0.55, 1.0};

  // Stream shape and planted dynamics.
  int trip_length_max = 14;            // trip length uniform on 1..max
  double home_region_bias = 0.80;      // share of searches leaving home region
  double price_factor_jitter = 0.03;   // airline base fare spread, +-
  double oneway_premium = 1.28;        // one-way markup over round-trip-component fares
  double airline_day_sigma = 0.04;     // day-level shock on airline fares
  double asymmetry_drift_sigma = 0.04; // daily random walk of one-way asymmetry
  std::array<double, 2> region_surge_range = {0.6, 1.4};

  void validate() const;
};

// Everything generate_day needs, fixed for the lifetime of a simulation.
struct World {
  SimConfig config;
  Catalog catalog;
  RouteTable routes;
  std::vector<int> user_home_region;           // n_users
  std::vector<double> airport_price_level;     // n_airports
  std::vector<double> airline_price_factor;    // n_airlines
  std::vector<bool> airline_combo_prone;       // n_airlines
  std::vector<double> region_pair_surge;       // n_regions^2, multiplies c
  // Per-day planted dynamics, precomputed so days can be generated
  // independently: [day * n_airlines + airline].
  std::vector<std::array<double, 2>> asym_schedule;  // {out, in} factors
  std::vector<double> day_shock;                     // fare shock multiplier

  double asym(Day day, AirlineId airline, LegDirection d) const;
  double shock(Day day, AirlineId airline) const;
  double surge_scale(int route_index) const;  // c * region pair factor
};

// One day of fully constructed ground truth: every airline quoted on both
// legs and on the round trip for every query.
struct GroundTruthDay {
  Day day = 0;
  std::vector<SearchQuery> queries;
  std::vector<LegQuote> leg_quotes;            // 2 per (query, airline)
  std::vector<RoundTripQuote> roundtrip_quotes;  // 1 per (query, airline)
};

World generate_world(const SimConfig& config);

// One-way fare: base(route) * airline factor * direction asymmetry *
// (1 + c*exp(-horizon/tau)) * noise. `noise` is the lognormal draw made by
// the caller (1.0 disables it); `day` selects the planted dynamics.
double price_leg(const World& world, int route_index, AirlineId airline,
                 LegDirection direction, int horizon, Day day, double noise);

// Budget airlines: exact sum of the two leg quotes (same noise draws, legs
// priced at their own lead times). Traditional airlines: discounted sum of
// symmetric legs, both priced at the departure lead time -- the round trip
// product ignores one-way asymmetry and the longer inbound lead time, which
// is what a combination can exploit.
double price_roundtrip(const World& world, int route_index, AirlineId airline,
                       int departure_horizon, int return_horizon, Day day,
                       double noise_out, double noise_in);

GroundTruthDay generate_day(const World& world, Day day);

}  // namespace combo
