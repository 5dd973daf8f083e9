#include "combo/construct.hpp"

#include <algorithm>
#include <cmath>

namespace combo {
namespace {

// Quote completeness for one query: exactly one leg quote per (airline,
// direction). Returns prices indexed [airline][direction].
std::vector<std::array<double, 2>> leg_price_grid(
    const SearchQuery& query, const std::vector<LegQuote>& leg_quotes,
    int n_airlines) {
  std::vector<std::array<double, 2>> grid(
      static_cast<std::size_t>(n_airlines), {-1.0, -1.0});
  for (const auto& q : leg_quotes) {
    if (q.query_id != query.query_id) continue;
    if (q.airline < 0 || q.airline >= n_airlines)
      fail(ErrorCode::UnknownAirline,
           "leg quote airline " + std::to_string(q.airline));
    auto& slot = grid[static_cast<std::size_t>(q.airline)]
                     [q.direction == LegDirection::Outbound ? 0 : 1];
    if (slot >= 0.0)
      fail(ErrorCode::IncompleteQuotes,
           "duplicate leg quote for query " + std::to_string(query.query_id));
    slot = q.price;
  }
  for (const auto& pair : grid) {
    if (pair[0] < 0.0 || pair[1] < 0.0)
      fail(ErrorCode::IncompleteQuotes,
           "missing leg quote for query " + std::to_string(query.query_id));
  }
  return grid;
}

bool offer_less(const Offer& a, const Offer& b) {
  if (a.price != b.price) return a.price < b.price;
  if (a.kind != b.kind) return a.kind == OfferKind::RoundTrip;
  if (a.outbound_airline != b.outbound_airline)
    return a.outbound_airline < b.outbound_airline;
  return a.inbound_airline < b.inbound_airline;
}

}  // namespace

std::vector<CombinationItinerary> build_combinations(
    const SearchQuery& query, const std::vector<LegQuote>& leg_quotes) {
  int max_airline = -1;
  for (const auto& q : leg_quotes) {
    if (q.query_id == query.query_id) max_airline = std::max(max_airline, q.airline);
  }
  const int n_airlines = max_airline + 1;
  if (n_airlines == 0)
    fail(ErrorCode::IncompleteQuotes,
         "no leg quotes for query " + std::to_string(query.query_id));
  const auto grid = leg_price_grid(query, leg_quotes, n_airlines);

  std::vector<CombinationItinerary> combos;
  combos.reserve(static_cast<std::size_t>(n_airlines) * (n_airlines - 1));
  for (AirlineId out = 0; out < n_airlines; ++out) {
    for (AirlineId in = 0; in < n_airlines; ++in) {
      if (out == in) continue;
      combos.push_back({query.query_id, out, in,
                        grid[static_cast<std::size_t>(out)][0] +
                            grid[static_cast<std::size_t>(in)][1]});
    }
  }
  return combos;
}

SearchResultPage rank_results(QueryId query_id,
                              const std::vector<RoundTripQuote>& roundtrips,
                              const std::vector<CombinationItinerary>& combos,
                              int top_k) {
  SearchResultPage page;
  page.query_id = query_id;
  page.top_k = top_k;
  page.offers.reserve(roundtrips.size() + combos.size());
  for (const auto& rt : roundtrips) {
    if (rt.query_id == query_id)
      page.offers.push_back(
          {OfferKind::RoundTrip, rt.airline, rt.airline, rt.price});
  }
  for (const auto& c : combos) {
    if (c.query_id == query_id)
      page.offers.push_back({OfferKind::Combination, c.outbound_airline,
                             c.inbound_airline, c.price});
  }
  if (page.offers.empty())
    fail(ErrorCode::NoOffers, "query " + std::to_string(query_id));
  std::sort(page.offers.begin(), page.offers.end(), offer_less);
  return page;
}

LabeledDay label_day(const GroundTruthDay& day, const World& world,
                     int top_k) {
  const int n_airlines = world.catalog.n_airlines();
  LabeledDay out;
  out.day = day.day;
  out.n_airlines = n_airlines;
  out.n_queries = static_cast<int>(day.queries.size());
  out.instances.resize(static_cast<std::size_t>(out.n_queries) * 2 *
                       static_cast<std::size_t>(n_airlines));

  // Quotes are generated query-major; index them once instead of scanning.
  std::size_t leg_pos = 0;
  std::size_t rt_pos = 0;
  std::vector<LegQuote> query_legs;
  std::vector<RoundTripQuote> query_rts;
  for (int qi = 0; qi < out.n_queries; ++qi) {
    const SearchQuery& query = day.queries[static_cast<std::size_t>(qi)];
    query_legs.clear();
    query_rts.clear();
    while (leg_pos < day.leg_quotes.size() &&
           day.leg_quotes[leg_pos].query_id == query.query_id) {
      query_legs.push_back(day.leg_quotes[leg_pos++]);
    }
    while (rt_pos < day.roundtrip_quotes.size() &&
           day.roundtrip_quotes[rt_pos].query_id == query.query_id) {
      query_rts.push_back(day.roundtrip_quotes[rt_pos++]);
    }
    if (static_cast<int>(query_legs.size()) != 2 * n_airlines ||
        static_cast<int>(query_rts.size()) != n_airlines)
      fail(ErrorCode::IncompleteQuotes,
           "query " + std::to_string(query.query_id) + " has " +
               std::to_string(query_legs.size()) + " leg quotes and " +
               std::to_string(query_rts.size()) + " round trips");

    const auto combos = build_combinations(query, query_legs);
    out.all_combos_count += static_cast<long long>(combos.size());
    const auto page = rank_results(query.query_id, query_rts, combos, top_k);

    const int route_index = world.routes.index_of(query.origin,
                                                  query.destination);
    const double route_share =
        route_index >= 0 ? world.routes.route(route_index).share : 0.0;
    for (AirlineId a = 0; a < n_airlines; ++a) {
      for (int d = 0; d < 2; ++d) {
        const LegDirection dir =
            d == 0 ? LegDirection::Outbound : LegDirection::Inbound;
        Instance& inst =
            out.instances[static_cast<std::size_t>(out.instance_index(qi, a, dir))];
        inst.query_id = query.query_id;
        inst.airline = a;
        inst.direction = dir;
        inst.label = false;
        inst.features = FeatureVector{
            query.origin,
            query.destination,
            a,
            dir,
            query.horizon(),
            query.trip_length(),
            ((query.search_day % 7) + 7) % 7,
            ((query.departure_day % 7) + 7) % 7,
            route_share,
        };
      }
    }
    const int limit = std::min<int>(top_k, static_cast<int>(page.offers.size()));
    for (int k = 0; k < limit; ++k) {
      const Offer& offer = page.offers[static_cast<std::size_t>(k)];
      if (offer.kind != OfferKind::Combination) continue;
      out.competitive_combos.push_back({query.query_id, offer.outbound_airline,
                                        offer.inbound_airline, offer.price});
      out.instances[static_cast<std::size_t>(out.instance_index(
                        qi, offer.outbound_airline, LegDirection::Outbound))]
          .label = true;
      out.instances[static_cast<std::size_t>(out.instance_index(
                        qi, offer.inbound_airline, LegDirection::Inbound))]
          .label = true;
    }
  }
  return out;
}

DayStats compute_stats(const std::vector<LabeledDay>& days,
                       const World& world) {
  DayStats stats;
  long long positives = 0;
  long long prone_combos = 0;
  std::array<long long, 3> bucket_queries = {0, 0, 0};
  std::array<long long, 3> bucket_with_combo = {0, 0, 0};
  for (const auto& day : days) {
    stats.total_instances += static_cast<long long>(day.instances.size());
    stats.competitive_combos +=
        static_cast<long long>(day.competitive_combos.size());
    for (const auto& inst : day.instances)
      if (inst.label) ++positives;
    for (const auto& combo : day.competitive_combos) {
      if (world.airline_combo_prone[static_cast<std::size_t>(
              combo.outbound_airline)] ||
          world.airline_combo_prone[static_cast<std::size_t>(
              combo.inbound_airline)])
        ++prone_combos;
    }
    // Bucket queries by horizon; a query counts once.
    for (int qi = 0; qi < day.n_queries; ++qi) {
      const auto& first = day.instances[static_cast<std::size_t>(
          day.instance_index(qi, 0, LegDirection::Outbound))];
      const int h = first.features.horizon;
      const int bucket = h <= 3 ? 0 : (h <= 10 ? 1 : 2);
      ++bucket_queries[static_cast<std::size_t>(bucket)];
      bool any = false;
      for (AirlineId a = 0; a < day.n_airlines && !any; ++a) {
        for (int d = 0; d < 2 && !any; ++d) {
          any = day.instances[static_cast<std::size_t>(day.instance_index(
                                  qi, a,
                                  d == 0 ? LegDirection::Outbound
                                         : LegDirection::Inbound))]
                    .label;
        }
      }
      if (any) ++bucket_with_combo[static_cast<std::size_t>(bucket)];
    }
  }
  if (stats.total_instances > 0)
    stats.positive_instance_rate =
        static_cast<double>(positives) / static_cast<double>(stats.total_instances);
  if (stats.competitive_combos > 0)
    stats.combo_prone_competitive_share =
        static_cast<double>(prone_combos) /
        static_cast<double>(stats.competitive_combos);
  for (std::size_t b = 0; b < 3; ++b) {
    stats.horizon_bucket_share[b] =
        bucket_queries[b] > 0 ? static_cast<double>(bucket_with_combo[b]) /
                                    static_cast<double>(bucket_queries[b])
                              : 0.0;
  }
  return stats;
}

}  // namespace combo
