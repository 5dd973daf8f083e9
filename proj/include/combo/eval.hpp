#pragma once

#include <limits>
#include <vector>

#include "combo/construct.hpp"

namespace combo {

struct CurvePoint {
  double cost = 0.0;
  double recall = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
};

// Monotone trade-off between quote-request rate and combination recall.
// Points start at (0,0) and end at cost 1; recall is non-decreasing.
struct CostRecallCurve {
  std::vector<CurvePoint> points;
  double auc_percent = 0.0;
};

struct BudgetDecision {
  double threshold = 0.0;
  std::vector<int> predicted_positive_instances;  // instance indices; may be
                                                  // empty when derived from a
                                                  // curve alone
  double cost = 0.0;
  double recall = 0.0;
};

// Share of competitive combinations that are constructible from the
// predicted-positive instances: a combination counts only when BOTH its
// (outbound airline, outbound) and (inbound airline, inbound) instances are
// predicted. `predicted` is indexed like LabeledDay::instances.
double recall_at_10(const std::vector<bool>& predicted, const LabeledDay& day);

double quote_request_rate(const std::vector<bool>& predicted,
                          const LabeledDay& day);

// Descending-score threshold sweep over per-instance scores; one point per
// distinct score, quantile-subsampled above `max_points`.
CostRecallCurve sweep_curve(const std::vector<double>& scores,
                            const LabeledDay& day, int max_points = 1024);

// Trapezoidal area in percent, over cost in [0,1].
double auc(const CostRecallCurve& curve);

// Point with the largest nonzero cost <= budget.
BudgetDecision pick_budget(const CostRecallCurve& curve, double budget = 0.05);

// Predicted-positive instance set at a fixed threshold (score >= threshold).
std::vector<bool> apply_threshold(const std::vector<double>& scores,
                                  double threshold);

}  // namespace combo
