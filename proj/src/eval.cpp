#include "combo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace combo {
namespace {

// Instance indices of each competitive combination's two legs.
struct ComboLegs {
  int outbound_instance = 0;
  int inbound_instance = 0;
};

std::vector<ComboLegs> competitive_combo_legs(const LabeledDay& day) {
  std::unordered_map<QueryId, int> query_pos;
  query_pos.reserve(static_cast<std::size_t>(day.n_queries));
  for (int qi = 0; qi < day.n_queries; ++qi) {
    const auto& inst = day.instances[static_cast<std::size_t>(
        day.instance_index(qi, 0, LegDirection::Outbound))];
    query_pos.emplace(inst.query_id, qi);
  }
  std::vector<ComboLegs> legs;
  legs.reserve(day.competitive_combos.size());
  for (const auto& combo : day.competitive_combos) {
    const int qi = query_pos.at(combo.query_id);
    legs.push_back({day.instance_index(qi, combo.outbound_airline,
                                       LegDirection::Outbound),
                    day.instance_index(qi, combo.inbound_airline,
                                       LegDirection::Inbound)});
  }
  return legs;
}

}  // namespace

double recall_at_10(const std::vector<bool>& predicted,
                    const LabeledDay& day) {
  if (day.competitive_combos.empty())
    fail(ErrorCode::NoCompetitiveCombos,
         "day " + std::to_string(day.day) + " has no competitive combos");
  const auto legs = competitive_combo_legs(day);
  long long constructed = 0;
  for (const auto& combo : legs) {
    if (predicted[static_cast<std::size_t>(combo.outbound_instance)] &&
        predicted[static_cast<std::size_t>(combo.inbound_instance)])
      ++constructed;
  }
  return static_cast<double>(constructed) /
         static_cast<double>(legs.size());
}

double quote_request_rate(const std::vector<bool>& predicted,
                          const LabeledDay& day) {
  if (day.instances.empty())
    fail(ErrorCode::EmptyInstanceSet, "day " + std::to_string(day.day));
  long long count = 0;
  for (bool p : predicted)
    if (p) ++count;
  return static_cast<double>(count) / static_cast<double>(day.instances.size());
}

CostRecallCurve sweep_curve(const std::vector<double>& scores,
                            const LabeledDay& day, int max_points) {
  if (day.instances.empty())
    fail(ErrorCode::EmptyInstanceSet, "day " + std::to_string(day.day));
  if (scores.size() != day.instances.size())
    fail(ErrorCode::InvalidConfig, "scores/instances size mismatch");
  if (day.competitive_combos.empty())
    fail(ErrorCode::NoCompetitiveCombos,
         "day " + std::to_string(day.day) + " has no competitive combos");
  for (double s : scores)
    if (!std::isfinite(s)) fail(ErrorCode::NonFiniteLoss, "non-finite score");

  const std::size_t n = scores.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    return a < b;
  });

  // Thresholds: the distinct score values, descending; subsample by rank
  // quantiles when there are too many, always keeping the extremes.
  std::vector<double> thresholds;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = scores[static_cast<std::size_t>(order[i])];
    if (thresholds.empty() || s < thresholds.back()) thresholds.push_back(s);
  }
  if (static_cast<int>(thresholds.size()) > max_points) {
    std::vector<double> picked;
    picked.reserve(static_cast<std::size_t>(max_points));
    const double last = static_cast<double>(thresholds.size() - 1);
    for (int k = 0; k < max_points; ++k) {
      const std::size_t idx = static_cast<std::size_t>(
          std::llround(last * k / static_cast<double>(max_points - 1)));
      if (picked.empty() || thresholds[idx] < picked.back())
        picked.push_back(thresholds[idx]);
    }
    thresholds = std::move(picked);
  }

  // Each competitive combo needs both legs; count down as legs arrive.
  const auto legs = competitive_combo_legs(day);
  std::vector<std::vector<int>> combos_of_instance(n);
  for (int c = 0; c < static_cast<int>(legs.size()); ++c) {
    combos_of_instance[static_cast<std::size_t>(legs[static_cast<std::size_t>(c)]
                                                    .outbound_instance)]
        .push_back(c);
    combos_of_instance[static_cast<std::size_t>(legs[static_cast<std::size_t>(c)]
                                                    .inbound_instance)]
        .push_back(c);
  }
  std::vector<int> needed(legs.size(), 2);

  CostRecallCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t pos = 0;
  long long predicted = 0;
  long long constructed = 0;
  const double total_combos = static_cast<double>(legs.size());
  for (double t : thresholds) {
    while (pos < n && scores[static_cast<std::size_t>(order[pos])] >= t) {
      const int inst = order[pos];
      ++predicted;
      for (int c : combos_of_instance[static_cast<std::size_t>(inst)]) {
        if (--needed[static_cast<std::size_t>(c)] == 0) ++constructed;
      }
      ++pos;
    }
    curve.points.push_back({static_cast<double>(predicted) / static_cast<double>(n),
                            static_cast<double>(constructed) / total_combos, t});
  }
  // Pad to cost 1 at final recall; the sweep already ends there whenever the
  // minimum score is among the thresholds.
  if (curve.points.back().cost < 1.0) {
    curve.points.push_back({1.0, curve.points.back().recall,
                            curve.points.back().threshold});
  }
  curve.auc_percent = auc(curve);
  return curve;
}

double auc(const CostRecallCurve& curve) {
  if (curve.points.empty()) fail(ErrorCode::MalformedCurve, "empty curve");
  double area = 0.0;
  // Implicit origin in front, implicit right padding behind.
  CurvePoint prev{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (const auto& p : curve.points) {
    if (p.cost < prev.cost)
      fail(ErrorCode::MalformedCurve, "cost must be non-decreasing");
    area += (p.cost - prev.cost) * 0.5 * (p.recall + prev.recall);
    prev = p;
  }
  if (prev.cost < 1.0) area += (1.0 - prev.cost) * prev.recall;
  return 100.0 * area;
}

BudgetDecision pick_budget(const CostRecallCurve& curve, double budget) {
  if (budget <= 0.0 || budget > 1.0)
    fail(ErrorCode::InvalidConfig, "budget must be in (0,1]");
  const CurvePoint* best = nullptr;
  for (const auto& p : curve.points) {
    if (p.cost > 0.0 && p.cost <= budget) best = &p;
  }
  if (best == nullptr)
    fail(ErrorCode::BudgetTooSmall,
         "no nonempty curve point fits budget " + std::to_string(budget));
  return BudgetDecision{best->threshold, {}, best->cost, best->recall};
}

std::vector<bool> apply_threshold(const std::vector<double>& scores,
                                  double threshold) {
  std::vector<bool> predicted(scores.size(), false);
  for (std::size_t i = 0; i < scores.size(); ++i)
    predicted[i] = scores[i] >= threshold;
  return predicted;
}

}  // namespace combo
