#include "combo/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "combo/rng.hpp"

namespace combo {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::uint64_t triple_key(AirportId o, AirportId d, AirlineId a) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(o)) << 40) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d)) << 20) |
         static_cast<std::uint32_t>(a);
}

std::uint64_t arm_key(const Instance& inst) {
  return (triple_key(inst.features.origin, inst.features.destination,
                     inst.airline)
          << 1) |
         (inst.direction == LegDirection::Inbound ? 1u : 0u);
}

std::uint64_t instance_key(const Instance& inst) {
  return (static_cast<std::uint64_t>(inst.query_id) << 20) ^
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(inst.airline))
          << 1) ^
         (inst.direction == LegDirection::Inbound ? 1u : 0u);
}

}  // namespace

const char* scorer_kind_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::Popularity: return "popularity";
    case ScorerKind::LogReg: return "logreg";
    case ScorerKind::Bandit: return "bandit";
    case ScorerKind::RandomForest: return "forest";
    case ScorerKind::EmbedNet: return "embednet";
    case ScorerKind::Oracle: return "oracle";
  }
  return "unknown";
}

const char* feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::OneHot: return "onehot";
    case FeatureMode::TraceEmbed: return "trace";
    case FeatureMode::CoTrainedEmbed: return "cotrained";
  }
  return "unknown";
}

FeatureEncoder::FeatureEncoder(FeatureMode mode, int n_airports, int n_airlines,
                               EmbeddingTable origin_table,
                               EmbeddingTable destination_table)
    : mode_(mode),
      n_airports_(n_airports),
      n_airlines_(n_airlines),
      origin_table_(std::move(origin_table)),
      destination_table_(std::move(destination_table)) {
  if (mode_ == FeatureMode::OneHot) {
    dim_ = 2 * n_airports_ + n_airlines_ + 18;
  } else {
    if (origin_table_.vectors.empty())
      fail(ErrorCode::MissingEmbeddingTable,
           std::string(feature_mode_name(mode_)) + " mode needs a table");
    if (destination_table_.vectors.empty())
      destination_table_ = origin_table_;
    if (destination_table_.dim != origin_table_.dim)
      fail(ErrorCode::InvalidConfig, "embedding dims differ");
    dim_ = 2 * origin_table_.dim + n_airlines_ + 18;
  }
}

void FeatureEncoder::encode(const Instance& instance, double* out) const {
  std::fill(out, out + dim_, 0.0);
  double* p = out;
  if (mode_ == FeatureMode::OneHot) {
    p[instance.features.origin] = 1.0;
    p += n_airports_;
    p[instance.features.destination] = 1.0;
    p += n_airports_;
  } else {
    const int e = origin_table_.dim;
    if (origin_table_.contains(instance.features.origin)) {
      const auto& v = origin_table_.vectors.at(instance.features.origin);
      std::copy(v.begin(), v.end(), p);
    }
    p += e;
    if (destination_table_.contains(instance.features.destination)) {
      const auto& v = destination_table_.vectors.at(instance.features.destination);
      std::copy(v.begin(), v.end(), p);
    }
    p += e;
  }
  p[instance.airline] = 1.0;
  p += n_airlines_;
  p[0] = instance.direction == LegDirection::Inbound ? 1.0 : 0.0;
  p[1 + instance.features.search_day_of_week] = 1.0;
  p[8 + instance.features.departure_day_of_week] = 1.0;
  p[15] = instance.features.horizon / 30.0;
  p[16] = instance.features.trip_length / 14.0;
  p[17] = instance.features.route_popularity;
}

std::vector<double> FeatureEncoder::encode_matrix(
    const std::vector<Instance>& instances) const {
  std::vector<double> matrix(instances.size() * static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < instances.size(); ++i)
    encode(instances[i], &matrix[i * static_cast<std::size_t>(dim_)]);
  return matrix;
}

std::vector<double> score_all(const Scorer& scorer,
                              const std::vector<Instance>& instances) {
  std::vector<double> scores(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    scores[i] = scorer.score(instances[i]);
  return scores;
}

// ---------------------------------------------------------------------------
// Popularity baseline

namespace {

class PopularityScorer final : public Scorer {
 public:
  PopularityScorer(std::unordered_map<std::uint64_t, long long> counts,
                   long long total)
      : counts_(std::move(counts)), total_(total) {}

  double score(const Instance& inst) const override {
    const auto it = counts_.find(triple_key(
        inst.features.origin, inst.features.destination, inst.airline));
    if (it == counts_.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_);
  }

  ScorerKind kind() const override { return ScorerKind::Popularity; }

  nlohmann::json to_json() const override {
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& [key, count] : counts_) {
      triples.push_back({{"key", key}, {"count", count}});
    }
    return {{"kind", "popularity"}, {"total", total_},
            {"parameters", {{"triples", triples}}}};
  }

 private:
  std::unordered_map<std::uint64_t, long long> counts_;
  long long total_;
};

}  // namespace

ScorerPtr train_popularity(const std::vector<Instance>& instances) {
  if (instances.empty()) fail(ErrorCode::EmptyTrainingSet, "popularity");
  std::unordered_map<std::uint64_t, long long> counts;
  for (const auto& inst : instances)
    ++counts[triple_key(inst.features.origin, inst.features.destination,
                        inst.airline)];
  return std::make_shared<PopularityScorer>(
      std::move(counts), static_cast<long long>(instances.size()));
}

// ---------------------------------------------------------------------------
// Logistic regression

double logreg_loss(const std::vector<double>& matrix, int dim,
                   const std::vector<char>& labels,
                   const std::vector<double>& weights, double l2) {
  const std::size_t n = labels.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &matrix[i * static_cast<std::size_t>(dim)];
    double z = weights[static_cast<std::size_t>(dim)];
    for (int j = 0; j < dim; ++j) z += weights[static_cast<std::size_t>(j)] * row[j];
    const double p = sigmoid(z);
    const double y = labels[i] ? 1.0 : 0.0;
    loss += -(y * std::log(std::max(p, 1e-12)) +
              (1.0 - y) * std::log(std::max(1.0 - p, 1e-12)));
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (int j = 0; j < dim; ++j)
    reg += weights[static_cast<std::size_t>(j)] * weights[static_cast<std::size_t>(j)];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logreg_gradient(const std::vector<double>& matrix, int dim,
                                    const std::vector<char>& labels,
                                    const std::vector<double>& weights,
                                    double l2) {
  const std::size_t n = labels.size();
  std::vector<double> grad(static_cast<std::size_t>(dim) + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &matrix[i * static_cast<std::size_t>(dim)];
    double z = weights[static_cast<std::size_t>(dim)];
    for (int j = 0; j < dim; ++j) z += weights[static_cast<std::size_t>(j)] * row[j];
    const double err = sigmoid(z) - (labels[i] ? 1.0 : 0.0);
    for (int j = 0; j < dim; ++j) grad[static_cast<std::size_t>(j)] += err * row[j];
    grad[static_cast<std::size_t>(dim)] += err;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& g : grad) g *= inv;
  for (int j = 0; j < dim; ++j)
    grad[static_cast<std::size_t>(j)] += l2 * weights[static_cast<std::size_t>(j)];
  return grad;
}

namespace {

class LogRegScorer final : public Scorer {
 public:
  LogRegScorer(FeatureEncoder encoder, std::vector<double> weights,
               LogRegConfig config)
      : encoder_(std::move(encoder)),
        weights_(std::move(weights)),
        config_(config) {}

  double score(const Instance& inst) const override {
    std::vector<double> row(static_cast<std::size_t>(encoder_.dim()));
    encoder_.encode(inst, row.data());
    double z = weights_.back();
    for (int j = 0; j < encoder_.dim(); ++j)
      z += weights_[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
    return sigmoid(z);
  }

  ScorerKind kind() const override { return ScorerKind::LogReg; }

  nlohmann::json to_json() const override {
    return {{"kind", "logreg"},
            {"config",
             {{"l2", config_.l2},
              {"learning_rate", config_.learning_rate},
              {"epochs", config_.epochs},
              {"batch_size", config_.batch_size},
              {"seed", config_.seed}}},
            {"parameters", {{"weights", weights_}}}};
  }

 private:
  FeatureEncoder encoder_;
  std::vector<double> weights_;  // dim coefficients then bias
  LogRegConfig config_;
};

}  // namespace

ScorerPtr train_logreg(const std::vector<Instance>& instances,
                       const FeatureEncoder& encoder,
                       const LogRegConfig& config) {
  if (instances.empty()) fail(ErrorCode::EmptyTrainingSet, "logreg");
  const int dim = encoder.dim();
  const std::vector<double> matrix = encoder.encode_matrix(instances);
  std::vector<char> labels(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    labels[i] = instances[i].label ? 1 : 0;

  std::vector<double> weights(static_cast<std::size_t>(dim) + 1, 0.0);
  Rng rng(mix64(config.seed, 0x10c4e6u));
  std::vector<int> order(instances.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> batch_matrix;
  std::vector<char> batch_labels;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch_matrix.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t r = static_cast<std::size_t>(order[i]);
        batch_matrix.insert(batch_matrix.end(),
                            matrix.begin() + static_cast<std::ptrdiff_t>(
                                                 r * static_cast<std::size_t>(dim)),
                            matrix.begin() + static_cast<std::ptrdiff_t>(
                                                 (r + 1) * static_cast<std::size_t>(dim)));
        batch_labels.push_back(labels[r]);
      }
      const auto grad = logreg_gradient(batch_matrix, dim, batch_labels, weights,
                                        config.l2);
      for (std::size_t j = 0; j < weights.size(); ++j)
        weights[j] -= config.learning_rate * grad[j];
    }
    const double loss = logreg_loss(matrix, dim, labels, weights, config.l2);
    if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "logreg diverged");
  }
  return std::make_shared<LogRegScorer>(encoder, std::move(weights), config);
}

// ---------------------------------------------------------------------------
// Multi-armed bandit

namespace {

class BanditScorer final : public Scorer {
 public:
  struct Arm {
    long long n = 0;
    long long positives = 0;
  };

  BanditScorer(std::unordered_map<std::uint64_t, Arm> arms, double global_mean,
               double alpha0, double beta0)
      : arms_(std::move(arms)),
        global_mean_(global_mean),
        alpha0_(alpha0),
        beta0_(beta0) {}

  double score(const Instance& inst) const override {
    const auto it = arms_.find(arm_key(inst));
    if (it == arms_.end()) return global_mean_;
    const Arm& arm = it->second;
    return (static_cast<double>(arm.positives) + alpha0_) /
           (static_cast<double>(arm.n) + alpha0_ + beta0_);
  }

  ScorerKind kind() const override { return ScorerKind::Bandit; }

  nlohmann::json to_json() const override {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& [key, arm] : arms_) {
      arms.push_back({{"key", key}, {"n", arm.n}, {"s", arm.positives}});
    }
    return {{"kind", "bandit"},
            {"config", {{"alpha0", alpha0_}, {"beta0", beta0_}}},
            {"parameters", {{"global_mean", global_mean_}, {"arms", arms}}}};
  }

 private:
  std::unordered_map<std::uint64_t, Arm> arms_;
  double global_mean_;
  double alpha0_;
  double beta0_;
};

}  // namespace

ScorerPtr train_bandit(const std::vector<Instance>& instances, double alpha0,
                       double beta0) {
  if (instances.empty()) fail(ErrorCode::EmptyTrainingSet, "bandit");
  std::unordered_map<std::uint64_t, BanditScorer::Arm> arms;
  long long positives = 0;
  for (const auto& inst : instances) {
    auto& arm = arms[arm_key(inst)];
    ++arm.n;
    if (inst.label) {
      ++arm.positives;
      ++positives;
    }
  }
  const double global_mean =
      (static_cast<double>(positives) + alpha0) /
      (static_cast<double>(instances.size()) + alpha0 + beta0);
  return std::make_shared<BanditScorer>(std::move(arms), global_mean, alpha0,
                                        beta0);
}

// ---------------------------------------------------------------------------
// Random forest

double DecisionTree::predict(const double* row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].leaf_value;
}

namespace {

// Per-feature quantization: cut values are midpoints between distinct
// training values (all of them when few, rank-quantile picks otherwise).
// Rows then train on bin ids; prediction compares raw values against the
// stored cut, so the two views agree exactly.
struct FeatureBins {
  std::vector<double> cuts;  // ascending; bin(x) = count of cuts < x... see map()
  int n_bins() const { return static_cast<int>(cuts.size()) + 1; }
  int map(double x) const {
    int lo = 0;
    int hi = static_cast<int>(cuts.size());
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (x <= cuts[static_cast<std::size_t>(mid)]) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;  // x <= cuts[b] for all b >= lo
  }
};

FeatureBins compute_bins(std::vector<double> values, int max_bins) {
  FeatureBins bins;
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  for (double v : values) {
    if (distinct.empty() || v > distinct.back()) distinct.push_back(v);
  }
  if (distinct.size() <= 1) return bins;
  if (static_cast<int>(distinct.size()) <= max_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
      bins.cuts.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    return bins;
  }
  // Frequency-weighted quantile picks over the sorted value array.
  std::vector<double> picked;
  for (int j = 1; j < max_bins; ++j) {
    const std::size_t idx = values.size() * static_cast<std::size_t>(j) /
                            static_cast<std::size_t>(max_bins);
    picked.push_back(values[idx]);
  }
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  for (double v : picked) {
    // Midpoint between v and the previous distinct value.
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
    if (it != distinct.begin())
      bins.cuts.push_back(0.5 * (*(it - 1) + *it));
  }
  bins.cuts.erase(std::unique(bins.cuts.begin(), bins.cuts.end()),
                  bins.cuts.end());
  return bins;
}

struct TreeBuilder {
  const std::vector<std::uint8_t>& binned;  // n x dim bin ids
  const std::vector<char>& labels;
  const std::vector<FeatureBins>& bins;
  int dim;
  const ForestConfig& config;
  Rng rng;
  DecisionTree tree;
  std::vector<int> feature_pool;

  TreeBuilder(const std::vector<std::uint8_t>& binned_,
              const std::vector<char>& labels_,
              const std::vector<FeatureBins>& bins_, int dim_,
              const ForestConfig& config_, std::uint64_t seed)
      : binned(binned_), labels(labels_), bins(bins_), dim(dim_),
        config(config_), rng(seed) {
    feature_pool.resize(static_cast<std::size_t>(dim));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  int build(std::vector<int>& rows, int depth) {
    long long pos = 0;
    for (int r : rows) pos += labels[static_cast<std::size_t>(r)] ? 1 : 0;
    const double frac =
        static_cast<double>(pos) / static_cast<double>(rows.size());

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    TreeNode& node = tree.nodes.back();
    node.leaf_value = frac;
    if (depth >= config.max_depth || pos == 0 ||
        pos == static_cast<long long>(rows.size()) ||
        static_cast<int>(rows.size()) < 2 * config.min_samples_leaf) {
      return node_index;
    }

    const SplitCandidate split = best_split(rows, frac);
    if (!split.valid) return node_index;

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    const FeatureBins& fb = bins[static_cast<std::size_t>(split.feature)];
    // Recover the bin id of the chosen cut to split on ids, not doubles.
    const int cut_bin = fb.map(split.threshold);
    for (int r : rows) {
      const int b = binned[static_cast<std::size_t>(r) *
                               static_cast<std::size_t>(dim) +
                           static_cast<std::size_t>(split.feature)];
      (b <= cut_bin ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(node_index)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = right;
    return node_index;
  }

  SplitCandidate best_split(const std::vector<int>& rows, double parent_frac) {
    const double parent_gini =
        1.0 - parent_frac * parent_frac - (1.0 - parent_frac) * (1.0 - parent_frac);
    const int k = std::max(1, static_cast<int>(std::lround(std::sqrt(
                                  static_cast<double>(dim)))));
    // Partial Fisher-Yates for k distinct features.
    for (int i = 0; i < k; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          rng.uniform_index(static_cast<std::uint64_t>(dim - i));
      std::swap(feature_pool[static_cast<std::size_t>(i)], feature_pool[j]);
    }

    SplitCandidate best;
    std::array<long long, 256> count{};
    std::array<long long, 256> pos{};
    const long long n = static_cast<long long>(rows.size());
    for (int fi = 0; fi < k; ++fi) {
      const int feature = feature_pool[static_cast<std::size_t>(fi)];
      const FeatureBins& fb = bins[static_cast<std::size_t>(feature)];
      const int n_bins = fb.n_bins();
      if (n_bins < 2) continue;
      std::fill(count.begin(), count.begin() + n_bins, 0);
      std::fill(pos.begin(), pos.begin() + n_bins, 0);
      for (int r : rows) {
        const int b = binned[static_cast<std::size_t>(r) *
                                 static_cast<std::size_t>(dim) +
                             static_cast<std::size_t>(feature)];
        ++count[static_cast<std::size_t>(b)];
        pos[static_cast<std::size_t>(b)] += labels[static_cast<std::size_t>(r)] ? 1 : 0;
      }
      long long total_pos = 0;
      for (int b = 0; b < n_bins; ++b) total_pos += pos[static_cast<std::size_t>(b)];
      long long left_n = 0;
      long long left_pos = 0;
      for (int b = 0; b + 1 < n_bins; ++b) {
        left_n += count[static_cast<std::size_t>(b)];
        left_pos += pos[static_cast<std::size_t>(b)];
        const long long right_n = n - left_n;
        if (left_n < config.min_samples_leaf || right_n < config.min_samples_leaf)
          continue;
        const double pl = static_cast<double>(left_pos) / static_cast<double>(left_n);
        const double gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
        const double pr = static_cast<double>(total_pos - left_pos) /
                          static_cast<double>(right_n);
        const double gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
        const double weighted =
            (static_cast<double>(left_n) * gini_l +
             static_cast<double>(right_n) * gini_r) /
            static_cast<double>(n);
        if (weighted < parent_gini - 1e-12 &&
            (!best.valid || weighted < best.weighted_impurity - 1e-12)) {
          best.valid = true;
          best.feature = feature;
          best.threshold = fb.cuts[static_cast<std::size_t>(b)];
          best.weighted_impurity = weighted;
        }
      }
    }
    return best;
  }
};

class ForestScorer final : public Scorer {
 public:
  ForestScorer(FeatureEncoder encoder, std::vector<DecisionTree> trees,
               ForestConfig config)
      : encoder_(std::move(encoder)), trees_(std::move(trees)), config_(config) {}

  double score(const Instance& inst) const override {
    std::vector<double> row(static_cast<std::size_t>(encoder_.dim()));
    encoder_.encode(inst, row.data());
    int votes = 0;
    for (const auto& tree : trees_)
      if (tree.predict(row.data()) >= 0.5) ++votes;
    return static_cast<double>(votes) / static_cast<double>(trees_.size());
  }

  ScorerKind kind() const override { return ScorerKind::RandomForest; }

  nlohmann::json to_json() const override {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& n : tree.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"leaf_value", n.leaf_value}});
      }
      trees.push_back(std::move(nodes));
    }
    return {{"kind", "forest"},
            {"feature_mode", feature_mode_name(encoder_.mode())},
            {"config",
             {{"n_trees", config_.n_trees},
              {"max_depth", config_.max_depth},
              {"min_samples_leaf", config_.min_samples_leaf},
              {"bootstrap", config_.bootstrap},
              {"max_bins", config_.max_bins},
              {"seed", config_.seed}}},
            {"parameters", {{"trees", trees}}}};
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  FeatureEncoder encoder_;
  std::vector<DecisionTree> trees_;
  ForestConfig config_;
};

}  // namespace

ScorerPtr train_forest(const std::vector<Instance>& instances,
                       const FeatureEncoder& encoder,
                       const ForestConfig& config) {
  if (instances.empty()) fail(ErrorCode::EmptyTrainingSet, "forest");
  if (config.n_trees < 1 || config.max_depth < 1 ||
      config.min_samples_leaf < 1 || config.max_bins < 2 ||
      config.max_bins > 255)
    fail(ErrorCode::InvalidConfig, "bad forest config");

  const int dim = encoder.dim();
  const std::size_t n = instances.size();
  const std::vector<double> matrix = encoder.encode_matrix(instances);
  std::vector<char> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = instances[i].label ? 1 : 0;

  // Global quantization, shared by every tree.
  std::vector<FeatureBins> bins(static_cast<std::size_t>(dim));
  std::vector<double> column(n);
  for (int f = 0; f < dim; ++f) {
    for (std::size_t i = 0; i < n; ++i)
      column[i] = matrix[i * static_cast<std::size_t>(dim) +
                         static_cast<std::size_t>(f)];
    bins[static_cast<std::size_t>(f)] = compute_bins(column, config.max_bins);
  }
  std::vector<std::uint8_t> binned(n * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < dim; ++f) {
      binned[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(f)] =
          static_cast<std::uint8_t>(bins[static_cast<std::size_t>(f)].map(
              matrix[i * static_cast<std::size_t>(dim) +
                     static_cast<std::size_t>(f)]));
    }
  }

  std::vector<DecisionTree> trees(static_cast<std::size_t>(config.n_trees));
  const auto build_tree = [&](int t) {
    TreeBuilder builder(binned, labels, bins, dim, config,
                        mix64(config.seed, 0xf03e57u,
                              static_cast<std::uint64_t>(t)));
    std::vector<int> rows(n);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        rows[i] = static_cast<int>(builder.rng.uniform_index(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    builder.build(rows, 0);
    trees[static_cast<std::size_t>(t)] = std::move(builder.tree);
  };

  int n_threads = config.n_threads > 0
                      ? config.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, config.n_trees));
  if (n_threads == 1) {
    for (int t = 0; t < config.n_trees; ++t) build_tree(t);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        for (int t = w; t < config.n_trees; t += n_threads) build_tree(t);
      });
    }
    for (auto& worker : workers) worker.join();
  }
  return std::make_shared<ForestScorer>(encoder, std::move(trees), config);
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

class OracleScorer final : public Scorer {
 public:
  explicit OracleScorer(std::unordered_map<std::uint64_t, char> positives)
      : positives_(std::move(positives)) {}

  double score(const Instance& inst) const override {
    const auto it = positives_.find(instance_key(inst));
    return it != positives_.end() && it->second ? 1.0 : 0.0;
  }

  ScorerKind kind() const override { return ScorerKind::Oracle; }

  nlohmann::json to_json() const override {
    return {{"kind", "oracle"},
            {"parameters", {{"positives", positives_.size()}}}};
  }

 private:
  std::unordered_map<std::uint64_t, char> positives_;
};

class EmbedNetScorer final : public Scorer {
 public:
  explicit EmbedNetScorer(std::shared_ptr<const EmbedNet> net)
      : net_(std::move(net)) {}

  double score(const Instance& inst) const override { return net_->score(inst); }

  ScorerKind kind() const override { return ScorerKind::EmbedNet; }

  nlohmann::json to_json() const override {
    const auto& c = net_->config();
    return {{"kind", "embednet"},
            {"config",
             {{"embedding_dim", c.embedding_dim},
              {"hidden_widths", c.hidden_widths},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"seed", c.seed}}}};
  }

 private:
  std::shared_ptr<const EmbedNet> net_;
};

}  // namespace

ScorerPtr make_oracle(const std::vector<Instance>& labeled_instances) {
  std::unordered_map<std::uint64_t, char> positives;
  for (const auto& inst : labeled_instances) {
    if (inst.label) positives.emplace(instance_key(inst), 1);
  }
  return std::make_shared<OracleScorer>(std::move(positives));
}

ScorerPtr make_embed_net_scorer(std::shared_ptr<const EmbedNet> net) {
  if (!net) fail(ErrorCode::InvalidConfig, "null embed net");
  return std::make_shared<EmbedNetScorer>(std::move(net));
}

}  // namespace combo
