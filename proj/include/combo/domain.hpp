#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "combo/error.hpp"

namespace combo {

using AirportId = std::int32_t;
using AirlineId = std::int32_t;
using QueryId = std::int64_t;
using UserId = std::int32_t;
using Day = std::int32_t;

struct Airport {
  AirportId id = 0;
  std::string code;  // 3 letters, unique
  int region_id = 0;
  double popularity_weight = 1.0;  // marginal share of query traffic
};

enum class PricingStrategy { Budget, Traditional };

struct Airline {
  AirlineId id = 0;
  std::string code;  // 2 letters, unique
  PricingStrategy strategy = PricingStrategy::Traditional;
  double roundtrip_discount = 1.0;  // Budget keeps exactly 1.0
  double asym_outbound = 1.0;       // one-way price factors per direction
  double asym_inbound = 1.0;
};

enum class LegDirection : std::uint8_t { Outbound = 0, Inbound = 1 };

inline const char* direction_name(LegDirection d) {
  return d == LegDirection::Outbound ? "out" : "in";
}

struct SearchQuery {
  QueryId query_id = 0;
  UserId user_id = 0;
  AirportId origin = 0;
  AirportId destination = 0;
  Day search_day = 0;
  Day departure_day = 0;
  Day return_day = 0;

  int horizon() const { return departure_day - search_day; }
  int trip_length() const { return return_day - departure_day; }
};

struct LegQuote {
  QueryId query_id = 0;
  AirlineId airline = 0;
  LegDirection direction = LegDirection::Outbound;
  double price = 0.0;
};

struct RoundTripQuote {
  QueryId query_id = 0;
  AirlineId airline = 0;
  double price = 0.0;
};

// One outbound leg plus one inbound leg from a different airline; the price
// is the exact sum of the two leg quotes.
struct CombinationItinerary {
  QueryId query_id = 0;
  AirlineId outbound_airline = 0;
  AirlineId inbound_airline = 0;
  double price = 0.0;
};

struct FeatureVector {
  AirportId origin = 0;
  AirportId destination = 0;
  AirlineId airline = 0;
  LegDirection direction = LegDirection::Outbound;
  int horizon = 0;
  int trip_length = 0;
  int search_day_of_week = 0;
  int departure_day_of_week = 0;
  double route_popularity = 0.0;
};

// Classifier unit: does any competitive combination of this query use this
// airline on this leg direction?
struct Instance {
  QueryId query_id = 0;
  AirlineId airline = 0;
  LegDirection direction = LegDirection::Outbound;
  bool label = false;
  FeatureVector features;
};

class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<Airport> airports, std::vector<Airline> airlines);

  const std::vector<Airport>& airports() const { return airports_; }
  const std::vector<Airline>& airlines() const { return airlines_; }
  int n_airports() const { return static_cast<int>(airports_.size()); }
  int n_airlines() const { return static_cast<int>(airlines_.size()); }

  const Airport& airport(AirportId id) const;
  const Airline& airline(AirlineId id) const;
  AirportId airport_by_code(const std::string& code) const;

 private:
  std::vector<Airport> airports_;
  std::vector<Airline> airlines_;
  std::unordered_map<std::string, AirportId> airport_code_index_;
  std::unordered_map<std::string, AirlineId> airline_code_index_;
};

// Ordered (origin, destination) pairs with normalized popularity shares.
class RouteTable {
 public:
  struct Route {
    AirportId origin = 0;
    AirportId destination = 0;
    double share = 0.0;  // normalized popularity
  };

  RouteTable() = default;
  explicit RouteTable(std::vector<Route> routes);

  const std::vector<Route>& routes() const { return routes_; }
  int size() const { return static_cast<int>(routes_.size()); }
  const Route& route(int index) const { return routes_[index]; }

  int index_of(AirportId origin, AirportId destination) const;  // -1 if absent
  double share(AirportId origin, AirportId destination) const;

 private:
  static std::uint64_t key(AirportId o, AirportId d) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(o)) << 32) |
           static_cast<std::uint32_t>(d);
  }
  std::vector<Route> routes_;
  std::unordered_map<std::uint64_t, int> index_;
};

// Rejects duplicate ids/codes, empty lists, and airline pricing invariant
// violations (Budget discount must be exactly 1, Traditional strictly < 1).
Catalog validate_catalog(std::vector<Airport> airports,
                         std::vector<Airline> airlines);

SearchQuery make_query(QueryId query_id, UserId user_id, AirportId origin,
                       AirportId destination, Day search_day,
                       Day departure_day, Day return_day);

}  // namespace combo
