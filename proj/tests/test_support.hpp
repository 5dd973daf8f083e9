#pragma once

// Shared test fixtures: hand-rolled oracles kept independent of the library
// paths they check, plus small world builders.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "combo/construct.hpp"
#include "combo/domain.hpp"
#include "combo/rng.hpp"
#include "combo/simgen.hpp"

namespace testsup {

using namespace combo;

// ---------------------------------------------------------------------------
// Brute-force labeling oracle. Builds every offer explicitly, sorts with the
// documented tie rule, takes the cheapest top_k, and derives labels by
// scanning -- no shared code with construct.cpp.

struct BruteOffer {
  double price = 0.0;
  int kind = 0;  // 0 round trip, 1 combination
  AirlineId out_airline = 0;
  AirlineId in_airline = 0;
};

struct BruteQueryLabels {
  QueryId query_id = 0;
  std::set<std::pair<AirlineId, AirlineId>> competitive_combos;
  std::set<std::pair<AirlineId, int>> positive;  // (airline, direction 0/1)
};

inline BruteQueryLabels brute_force_labels(
    QueryId query_id, const std::vector<std::array<double, 2>>& leg_prices,
    const std::vector<double>& roundtrip_prices, int top_k) {
  const int n = static_cast<int>(roundtrip_prices.size());
  std::vector<BruteOffer> offers;
  for (AirlineId a = 0; a < n; ++a)
    offers.push_back({roundtrip_prices[static_cast<std::size_t>(a)], 0, a, a});
  for (AirlineId a = 0; a < n; ++a) {
    for (AirlineId b = 0; b < n; ++b) {
      if (a == b) continue;
      offers.push_back({leg_prices[static_cast<std::size_t>(a)][0] +
                            leg_prices[static_cast<std::size_t>(b)][1],
                        1, a, b});
    }
  }
  std::sort(offers.begin(), offers.end(),
            [](const BruteOffer& x, const BruteOffer& y) {
              return std::tie(x.price, x.kind, x.out_airline, x.in_airline) <
                     std::tie(y.price, y.kind, y.out_airline, y.in_airline);
            });
  BruteQueryLabels out;
  out.query_id = query_id;
  const int limit = std::min<int>(top_k, static_cast<int>(offers.size()));
  for (int i = 0; i < limit; ++i) {
    if (offers[static_cast<std::size_t>(i)].kind != 1) continue;
    const auto& o = offers[static_cast<std::size_t>(i)];
    out.competitive_combos.insert({o.out_airline, o.in_airline});
    out.positive.insert({o.out_airline, 0});
    out.positive.insert({o.in_airline, 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independent Eq.(1)/Eq.(2) oracle on explicit sets.

struct BruteDay {
  // per query: competitive combos as airline pairs
  std::map<QueryId, std::set<std::pair<AirlineId, AirlineId>>> combos;
  long long total_instances = 0;
};

inline double brute_recall(
    const BruteDay& day,
    const std::set<std::tuple<QueryId, AirlineId, int>>& predicted) {
  long long total = 0;
  long long constructed = 0;
  for (const auto& [qid, combos] : day.combos) {
    for (const auto& [a, b] : combos) {
      ++total;
      if (predicted.count({qid, a, 0}) && predicted.count({qid, b, 1}))
        ++constructed;
    }
  }
  return static_cast<double>(constructed) / static_cast<double>(total);
}

inline double brute_cost(
    const BruteDay& day,
    const std::set<std::tuple<QueryId, AirlineId, int>>& predicted) {
  return static_cast<double>(predicted.size()) /
         static_cast<double>(day.total_instances);
}

// ---------------------------------------------------------------------------
// Central finite differences for gradient checks.

inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> at, double h = 1e-6) {
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double keep = at[i];
    at[i] = keep + h;
    const double up = f(at);
    at[i] = keep - h;
    const double down = f(at);
    at[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Small worlds

inline SimConfig tiny_config(std::uint64_t seed = 7) {
  SimConfig config;
  config.seed = seed;
  config.n_airports = 8;
  config.n_regions = 2;
  config.n_airlines = 6;
  config.n_users = 60;
  config.queries_per_day = 120;
  config.n_days = 10;
  return config;
}

// Deterministic toy ground-truth day with hand-set airline count; prices are
// drawn from the rng so that every query still has complete quotes.
inline GroundTruthDay random_toy_day(int n_queries, int n_airlines, Rng& rng,
                                     Day day = 0) {
  GroundTruthDay out;
  out.day = day;
  for (int i = 0; i < n_queries; ++i) {
    const QueryId qid = day * 1000 + i;
    SearchQuery q = make_query(qid, i % 3, 0, 1, day, day + i % 4,
                               day + i % 4 + 1 + i % 3);
    out.queries.push_back(q);
    for (AirlineId a = 0; a < n_airlines; ++a) {
      const double leg_out = 40.0 + 60.0 * rng.uniform01();
      const double leg_in = 40.0 + 60.0 * rng.uniform01();
      out.leg_quotes.push_back({qid, a, LegDirection::Outbound, leg_out});
      out.leg_quotes.push_back({qid, a, LegDirection::Inbound, leg_in});
      const double rt = (leg_out + leg_in) * (0.75 + 0.3 * rng.uniform01());
      out.roundtrip_quotes.push_back({qid, a, rt});
    }
  }
  return out;
}

// A World whose catalog matches a toy day, for label_day calls that only
// need airline count and route shares.
inline World toy_world(int n_airports, int n_airlines, std::uint64_t seed = 3) {
  SimConfig config;
  config.seed = seed;
  config.n_airports = n_airports;
  config.n_regions = 1;
  config.n_airlines = n_airlines;
  config.n_users = 4;
  config.queries_per_day = 4;
  config.n_days = 40;
  config.airline_day_sigma = 0.0;
  config.asymmetry_drift_sigma = 0.0;
  return generate_world(config);
}

}  // namespace testsup
