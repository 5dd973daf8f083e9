#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "combo/domain.hpp"
#include "combo/embed.hpp"

namespace combo {

enum class ScorerKind { Popularity, LogReg, Bandit, RandomForest, EmbedNet, Oracle };
enum class FeatureMode { OneHot, TraceEmbed, CoTrainedEmbed };

const char* scorer_kind_name(ScorerKind kind);
const char* feature_mode_name(FeatureMode mode);

// Dense per-instance features. OneHot expands origin/destination/airline;
// the embedding modes substitute location vectors for the location one-hots.
class FeatureEncoder {
 public:
  FeatureEncoder(FeatureMode mode, int n_airports, int n_airlines,
                 EmbeddingTable origin_table = {},
                 EmbeddingTable destination_table = {});

  int dim() const { return dim_; }
  FeatureMode mode() const { return mode_; }
  void encode(const Instance& instance, double* out) const;
  std::vector<double> encode_matrix(const std::vector<Instance>& instances) const;

 private:
  FeatureMode mode_;
  int n_airports_ = 0;
  int n_airlines_ = 0;
  int dim_ = 0;
  EmbeddingTable origin_table_;
  EmbeddingTable destination_table_;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const Instance& instance) const = 0;
  virtual ScorerKind kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using ScorerPtr = std::shared_ptr<const Scorer>;

std::vector<double> score_all(const Scorer& scorer,
                              const std::vector<Instance>& instances);

struct ForestConfig {
  int n_trees = 50;
  int max_depth = 12;
  int min_samples_leaf = 20;
  bool bootstrap = true;
  int max_bins = 32;
  int n_threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 1;
};

struct LogRegConfig {
  double l2 = 1e-4;
  double learning_rate = 0.5;
  int epochs = 8;
  int batch_size = 256;
  std::uint64_t seed = 1;
};

// Frequency of the instance's (origin, destination, airline) triple in the
// training set; labels are ignored.
ScorerPtr train_popularity(const std::vector<Instance>& instances);

ScorerPtr train_logreg(const std::vector<Instance>& instances,
                       const FeatureEncoder& encoder, const LogRegConfig& config);

// Beta-Bernoulli posterior mean per (origin, destination, airline,
// direction) arm; unseen arms fall back to the global posterior mean.
ScorerPtr train_bandit(const std::vector<Instance>& instances,
                       double alpha0 = 1.0, double beta0 = 1.0);

ScorerPtr train_forest(const std::vector<Instance>& instances,
                       const FeatureEncoder& encoder, const ForestConfig& config);

// Perfect-future scorer over a labeled evaluation set: 1 on its positive
// instances, 0 elsewhere.
ScorerPtr make_oracle(const std::vector<Instance>& labeled_instances);

ScorerPtr make_embed_net_scorer(std::shared_ptr<const EmbedNet> net);

// Log-loss helpers used by training and by the finite-difference tests.
// Rows are encoder output; `weights` holds dim coefficients then the bias.
double logreg_loss(const std::vector<double>& matrix, int dim,
                   const std::vector<char>& labels,
                   const std::vector<double>& weights, double l2);
std::vector<double> logreg_gradient(const std::vector<double>& matrix, int dim,
                                    const std::vector<char>& labels,
                                    const std::vector<double>& weights,
                                    double l2);

// Single CART node; leaves keep the positive fraction of their rows.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  double predict(const double* row) const;
};

// Greedy Gini split on one feature over explicit candidate thresholds;
// exposed so tests can compare against an exhaustive scan.
struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double weighted_impurity = 0.0;
};

}  // namespace combo
