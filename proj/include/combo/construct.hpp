#pragma once

#include <vector>

#include "combo/domain.hpp"
#include "combo/simgen.hpp"

namespace combo {

enum class OfferKind : std::uint8_t { RoundTrip = 0, Combination = 1 };

struct Offer {
  OfferKind kind = OfferKind::RoundTrip;
  AirlineId outbound_airline = 0;
  AirlineId inbound_airline = 0;  // == outbound_airline for round trips
  double price = 0.0;
};

// Full price-ascending result page. Ties rank round trips before
// combinations, then by ascending airline id pair.
struct SearchResultPage {
  QueryId query_id = 0;
  std::vector<Offer> offers;
  int top_k = 10;
};

struct LabeledDay {
  Day day = 0;
  int n_airlines = 0;
  int n_queries = 0;
  std::vector<Instance> instances;  // query-major, airline, direction
  std::vector<CombinationItinerary> competitive_combos;
  long long all_combos_count = 0;

  // Fixed layout: instances[q*2A + a*2 + d].
  int instance_index(int query_pos, AirlineId airline, LegDirection d) const {
    return query_pos * 2 * n_airlines + airline * 2 +
           (d == LegDirection::Outbound ? 0 : 1);
  }
};

// All ordered pairs of distinct airlines; price is the exact leg sum.
std::vector<CombinationItinerary> build_combinations(
    const SearchQuery& query, const std::vector<LegQuote>& leg_quotes);

SearchResultPage rank_results(QueryId query_id,
                              const std::vector<RoundTripQuote>& roundtrips,
                              const std::vector<CombinationItinerary>& combos,
                              int top_k = 10);

// Labels every (airline, direction) instance of every query: positive iff
// some combination inside the query's top_k uses that airline on that leg.
LabeledDay label_day(const GroundTruthDay& day, const World& world,
                     int top_k = 10);

struct DayStats {
  double positive_instance_rate = 0.0;
  double combo_prone_competitive_share = 0.0;  // competitive combos touching
                                               // a combo-prone airline
  // Share of queries with at least one competitive combination, bucketed by
  // booking horizon 0-3, 4-10, 11+.
  std::array<double, 3> horizon_bucket_share = {0.0, 0.0, 0.0};
  long long competitive_combos = 0;
  long long total_instances = 0;
};

DayStats compute_stats(const std::vector<LabeledDay>& days, const World& world);

}  // namespace combo
