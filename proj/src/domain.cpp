#include "combo/domain.hpp"

#include <utility>

namespace combo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::InvalidDates: return "InvalidDates";
    case ErrorCode::SameOriginDestination: return "SameOriginDestination";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownRoute: return "UnknownRoute";
    case ErrorCode::UnknownAirline: return "UnknownAirline";
    case ErrorCode::UnknownAirport: return "UnknownAirport";
    case ErrorCode::InvalidDay: return "InvalidDay";
    case ErrorCode::IncompleteQuotes: return "IncompleteQuotes";
    case ErrorCode::NoOffers: return "NoOffers";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MissingEmbeddingTable: return "MissingEmbeddingTable";
    case ErrorCode::NoCompetitiveCombos: return "NoCompetitiveCombos";
    case ErrorCode::EmptyInstanceSet: return "EmptyInstanceSet";
    case ErrorCode::MalformedCurve: return "MalformedCurve";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::EmptyPreviousRules: return "EmptyPreviousRules";
    case ErrorCode::InvalidFractions: return "InvalidFractions";
    case ErrorCode::NoServedDays: return "NoServedDays";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Catalog::Catalog(std::vector<Airport> airports, std::vector<Airline> airlines)
    : airports_(std::move(airports)), airlines_(std::move(airlines)) {
  for (const auto& a : airports_) airport_code_index_[a.code] = a.id;
  for (const auto& a : airlines_) airline_code_index_[a.code] = a.id;
}

const Airport& Catalog::airport(AirportId id) const {
  if (id < 0 || id >= n_airports())
    fail(ErrorCode::UnknownAirport, "airport id " + std::to_string(id));
  return airports_[static_cast<std::size_t>(id)];
}

const Airline& Catalog::airline(AirlineId id) const {
  if (id < 0 || id >= n_airlines())
    fail(ErrorCode::UnknownAirline, "airline id " + std::to_string(id));
  return airlines_[static_cast<std::size_t>(id)];
}

AirportId Catalog::airport_by_code(const std::string& code) const {
  auto it = airport_code_index_.find(code);
  if (it == airport_code_index_.end())
    fail(ErrorCode::UnknownAirport, "airport code " + code);
  return it->second;
}

RouteTable::RouteTable(std::vector<Route> routes) : routes_(std::move(routes)) {
  for (int i = 0; i < static_cast<int>(routes_.size()); ++i) {
    index_[key(routes_[i].origin, routes_[i].destination)] = i;
  }
}

int RouteTable::index_of(AirportId origin, AirportId destination) const {
  auto it = index_.find(key(origin, destination));
  return it == index_.end() ? -1 : it->second;
}

double RouteTable::share(AirportId origin, AirportId destination) const {
  const int i = index_of(origin, destination);
  if (i < 0)
    fail(ErrorCode::UnknownRoute, std::to_string(origin) + "->" +
                                      std::to_string(destination));
  return routes_[static_cast<std::size_t>(i)].share;
}

Catalog validate_catalog(std::vector<Airport> airports,
                         std::vector<Airline> airlines) {
  if (airports.empty()) fail(ErrorCode::EmptyCatalog, "no airports");
  if (airlines.empty()) fail(ErrorCode::EmptyCatalog, "no airlines");

  // Ids must be the compact range 0..n-1 in order; codes must be unique.
  std::unordered_map<std::string, int> seen_codes;
  for (int i = 0; i < static_cast<int>(airports.size()); ++i) {
    const auto& a = airports[static_cast<std::size_t>(i)];
    if (a.id != i)
      fail(ErrorCode::DuplicateId,
           "airport ids must be compact 0..n-1, got " + std::to_string(a.id) +
               " at position " + std::to_string(i));
    if (!seen_codes.emplace(a.code, i).second)
      fail(ErrorCode::DuplicateId, "airport code " + a.code);
    if (a.popularity_weight <= 0.0)
      fail(ErrorCode::InvalidConfig,
           "airport " + a.code + " popularity_weight must be positive");
    if (a.region_id < 0)
      fail(ErrorCode::InvalidConfig, "airport " + a.code + " region_id < 0");
  }
  seen_codes.clear();
  for (int i = 0; i < static_cast<int>(airlines.size()); ++i) {
    const auto& a = airlines[static_cast<std::size_t>(i)];
    if (a.id != i)
      fail(ErrorCode::DuplicateId,
           "airline ids must be compact 0..n-1, got " + std::to_string(a.id) +
               " at position " + std::to_string(i));
    if (!seen_codes.emplace(a.code, i).second)
      fail(ErrorCode::DuplicateId, "airline code " + a.code);
    if (a.strategy == PricingStrategy::Budget && a.roundtrip_discount != 1.0)
      fail(ErrorCode::InvalidConfig,
           "budget airline " + a.code + " must have roundtrip_discount 1.0");
    if (a.strategy == PricingStrategy::Traditional &&
        a.roundtrip_discount >= 1.0)
      fail(ErrorCode::InvalidConfig,
           "traditional airline " + a.code + " needs roundtrip_discount < 1");
    if (a.roundtrip_discount <= 0.0 || a.asym_outbound <= 0.0 ||
        a.asym_inbound <= 0.0)
      fail(ErrorCode::InvalidConfig,
           "airline " + a.code + " pricing factors must be positive");
  }
  return Catalog(std::move(airports), std::move(airlines));
}

SearchQuery make_query(QueryId query_id, UserId user_id, AirportId origin,
                       AirportId destination, Day search_day,
                       Day departure_day, Day return_day) {
  if (origin == destination)
    fail(ErrorCode::SameOriginDestination,
         "origin == destination (" + std::to_string(origin) + ")");
  if (search_day > departure_day || departure_day > return_day)
    fail(ErrorCode::InvalidDates,
         "need search_day <= departure_day <= return_day, got " +
             std::to_string(search_day) + ", " + std::to_string(departure_day) +
             ", " + std::to_string(return_day));
  return SearchQuery{query_id, user_id,       origin,
                     destination, search_day, departure_day, return_day};
}

}  // namespace combo
