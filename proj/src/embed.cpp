#include "combo/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "combo/rng.hpp"

namespace combo {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Clamped log(sigmoid(x)) keeps the loss finite for extreme logits.
double log_sigmoid(double x) {
  const double s = sigmoid(x);
  return std::log(std::max(s, 1e-12));
}

}  // namespace

const std::vector<double>& EmbeddingTable::vector_of(AirportId id) const {
  auto it = vectors.find(id);
  if (it == vectors.end())
    fail(ErrorCode::UnknownAirport, "airport " + std::to_string(id) +
                                        " not in embedding table");
  return it->second;
}

TraceCorpus build_traces(std::vector<SearchQuery> queries, int min_searches) {
  // Chronological per user: day, then query id as the within-day order.
  std::stable_sort(queries.begin(), queries.end(),
                   [](const SearchQuery& a, const SearchQuery& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     if (a.search_day != b.search_day)
                       return a.search_day < b.search_day;
                     return a.query_id < b.query_id;
                   });
  TraceCorpus corpus;
  std::size_t i = 0;
  while (i < queries.size()) {
    std::size_t j = i;
    while (j < queries.size() && queries[j].user_id == queries[i].user_id) ++j;
    const int n_searches = static_cast<int>(j - i);
    if (n_searches >= min_searches) {
      std::vector<AirportId> seq;
      seq.reserve(2 * static_cast<std::size_t>(n_searches));
      for (std::size_t k = i; k < j; ++k) {
        // consecutive searches of the same route count toward the filter
        // but contribute one stop pair
        if (k > i && queries[k].origin == queries[k - 1].origin &&
            queries[k].destination == queries[k - 1].destination)
          continue;
        for (AirportId stop : {queries[k].origin, queries[k].destination}) {
          if (seq.empty() || seq.back() != stop) seq.push_back(stop);
        }
      }
      corpus.sequences.push_back(std::move(seq));
    }
    i = j;
  }
  return corpus;
}

double skipgram_pair_loss(const std::vector<double>& center_vec,
                          const std::vector<double>& context_vec,
                          const std::vector<std::vector<double>>& negative_vecs) {
  double loss = -log_sigmoid(dot(center_vec, context_vec));
  for (const auto& neg : negative_vecs) loss -= log_sigmoid(-dot(center_vec, neg));
  return loss;
}

SkipGramGradient skipgram_pair_gradient(
    const std::vector<double>& center_vec,
    const std::vector<double>& context_vec,
    const std::vector<std::vector<double>>& negative_vecs) {
  SkipGramGradient grad;
  grad.center.assign(center_vec.size(), 0.0);
  const double g_pos = sigmoid(dot(center_vec, context_vec)) - 1.0;
  grad.context.resize(center_vec.size());
  for (std::size_t d = 0; d < center_vec.size(); ++d) {
    grad.center[d] += g_pos * context_vec[d];
    grad.context[d] = g_pos * center_vec[d];
  }
  for (const auto& neg : negative_vecs) {
    const double g_neg = sigmoid(dot(center_vec, neg));
    std::vector<double> gn(center_vec.size());
    for (std::size_t d = 0; d < center_vec.size(); ++d) {
      grad.center[d] += g_neg * neg[d];
      gn[d] = g_neg * center_vec[d];
    }
    grad.negatives.push_back(std::move(gn));
  }
  return grad;
}

EmbeddingTable train_skipgram(const TraceCorpus& corpus,
                              const SkipGramConfig& config,
                              std::vector<double>* epoch_losses) {
  if (corpus.sequences.empty())
    fail(ErrorCode::EmptyCorpus, "no user sequences after filtering");
  if (config.dim < 1 || config.window < 1 || config.negatives < 0 ||
      config.epochs < 1 || config.learning_rate <= 0.0)
    fail(ErrorCode::InvalidConfig, "bad skip-gram config");

  // Vocabulary and unigram^0.75 negative-sampling distribution.
  std::unordered_map<AirportId, int> counts;
  for (const auto& seq : corpus.sequences)
    for (AirportId a : seq) ++counts[a];
  std::vector<AirportId> vocab;
  vocab.reserve(counts.size());
  for (const auto& [id, _] : counts) vocab.push_back(id);
  std::sort(vocab.begin(), vocab.end());
  std::unordered_map<AirportId, int> vocab_index;
  for (int i = 0; i < static_cast<int>(vocab.size()); ++i)
    vocab_index[vocab[static_cast<std::size_t>(i)]] = i;
  std::vector<double> noise_cdf(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[vocab[i]]), 0.75);
    noise_cdf[i] = acc;
  }

  const std::size_t v = vocab.size();
  const std::size_t dim = static_cast<std::size_t>(config.dim);
  Rng rng(mix64(config.seed, 0x5169c4a3u));
  std::vector<double> in_vec(v * dim);
  std::vector<double> out_vec(v * dim, 0.0);
  for (auto& x : in_vec) x = (rng.uniform01() - 0.5) / static_cast<double>(dim);

  const auto sample_negative = [&](int exclude) {
    for (;;) {
      const double u = rng.uniform01() * acc;
      const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
      int idx = static_cast<int>(std::min<std::ptrdiff_t>(
          it - noise_cdf.begin(), static_cast<std::ptrdiff_t>(v) - 1));
      if (idx != exclude || v == 1) return idx;
    }
  };

  std::vector<int> sentence_order(corpus.sequences.size());
  std::iota(sentence_order.begin(), sentence_order.end(), 0);
  std::vector<double> grad_center(dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(sentence_order);
    double loss_sum = 0.0;
    long long examples = 0;
    for (int si : sentence_order) {
      const auto& seq = corpus.sequences[static_cast<std::size_t>(si)];
      const int len = static_cast<int>(seq.size());
      for (int i = 0; i < len; ++i) {
        const int center = vocab_index[seq[static_cast<std::size_t>(i)]];
        double* vc = &in_vec[static_cast<std::size_t>(center) * dim];
        for (int j = std::max(0, i - config.window);
             j <= std::min(len - 1, i + config.window); ++j) {
          if (j == i) continue;
          const int context = vocab_index[seq[static_cast<std::size_t>(j)]];
          std::fill(grad_center.begin(), grad_center.end(), 0.0);
          // Positive pair.
          {
            double* uo = &out_vec[static_cast<std::size_t>(context) * dim];
            double z = 0.0;
            for (std::size_t d = 0; d < dim; ++d) z += vc[d] * uo[d];
            loss_sum -= log_sigmoid(z);
            const double g = sigmoid(z) - 1.0;
            for (std::size_t d = 0; d < dim; ++d) {
              grad_center[d] += g * uo[d];
              uo[d] -= config.learning_rate * g * vc[d];
            }
          }
          for (int neg = 0; neg < config.negatives; ++neg) {
            const int nid = sample_negative(context);
            double* un = &out_vec[static_cast<std::size_t>(nid) * dim];
            double z = 0.0;
            for (std::size_t d = 0; d < dim; ++d) z += vc[d] * un[d];
            loss_sum -= log_sigmoid(-z);
            const double g = sigmoid(z);
            for (std::size_t d = 0; d < dim; ++d) {
              grad_center[d] += g * un[d];
              un[d] -= config.learning_rate * g * vc[d];
            }
          }
          for (std::size_t d = 0; d < dim; ++d)
            vc[d] -= config.learning_rate * grad_center[d];
          ++examples;
        }
      }
    }
    if (epoch_losses != nullptr) {
      epoch_losses->push_back(examples > 0
                                  ? loss_sum / static_cast<double>(examples)
                                  : 0.0);
      if (!std::isfinite(epoch_losses->back()))
        fail(ErrorCode::NonFiniteLoss, "skip-gram loss diverged");
    }
  }

  EmbeddingTable table;
  table.dim = config.dim;
  table.source = EmbeddingSource::TraceSkipGram;
  for (std::size_t i = 0; i < v; ++i) {
    std::vector<double> vec(in_vec.begin() + static_cast<std::ptrdiff_t>(i * dim),
                            in_vec.begin() +
                                static_cast<std::ptrdiff_t>((i + 1) * dim));
    for (double x : vec)
      if (!std::isfinite(x)) fail(ErrorCode::NonFiniteLoss, "embedding diverged");
    table.vectors.emplace(vocab[i], std::move(vec));
  }
  return table;
}

EmbedNet::EmbedNet(int n_airports, int n_airlines, EmbedNetConfig config)
    : n_airports_(n_airports), n_airlines_(n_airlines), config_(std::move(config)) {
  if (n_airports_ < 1 || n_airlines_ < 1 || config_.embedding_dim < 1 ||
      config_.hidden_widths.empty())
    fail(ErrorCode::InvalidConfig, "bad embed-net shape");
  const std::size_t e = static_cast<std::size_t>(config_.embedding_dim);
  Rng rng(mix64(config_.seed, 0xe3b0c442u));
  origin_embedding_.resize(static_cast<std::size_t>(n_airports_) * e);
  destination_embedding_.resize(static_cast<std::size_t>(n_airports_) * e);
  for (auto& x : origin_embedding_) x = 0.1 * (rng.uniform01() - 0.5);
  for (auto& x : destination_embedding_) x = 0.1 * (rng.uniform01() - 0.5);

  int in = 2 * config_.embedding_dim + dense_dim();
  std::vector<int> widths = config_.hidden_widths;
  widths.push_back(1);
  for (int out : widths) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.weights.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    const double scale = std::sqrt(6.0 / (in + out));
    for (auto& w : layer.weights) w = scale * (2.0 * rng.uniform01() - 1.0);
    layers_.push_back(std::move(layer));
    in = out;
  }
}

void EmbedNet::encode_dense(const Instance& instance, double* out) const {
  std::fill(out, out + dense_dim(), 0.0);
  out[instance.airline] = 1.0;
  double* p = out + n_airlines_;
  p[0] = instance.direction == LegDirection::Inbound ? 1.0 : 0.0;
  p[1 + instance.features.search_day_of_week] = 1.0;
  p[8 + instance.features.departure_day_of_week] = 1.0;
  p[15] = instance.features.horizon / 30.0;
  p[16] = instance.features.trip_length / 14.0;
  p[17] = instance.features.route_popularity;
}

double EmbedNet::forward(const Instance& instance,
                         std::vector<std::vector<double>>* activations) const {
  const std::size_t e = static_cast<std::size_t>(config_.embedding_dim);
  std::vector<double> input(2 * e + static_cast<std::size_t>(dense_dim()));
  const double* orig =
      &origin_embedding_[static_cast<std::size_t>(instance.features.origin) * e];
  const double* dest = &destination_embedding_[static_cast<std::size_t>(
                           instance.features.destination) * e];
  std::copy(orig, orig + e, input.begin());
  std::copy(dest, dest + e, input.begin() + static_cast<std::ptrdiff_t>(e));
  encode_dense(instance, input.data() + 2 * e);

  if (activations) activations->push_back(input);
  std::vector<double> current = std::move(input);
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& layer = layers_[li];
    std::vector<double> next(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.bias[static_cast<std::size_t>(o)];
      const double* row =
          &layer.weights[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i) z += row[i] * current[static_cast<std::size_t>(i)];
      // Rectifier on hidden layers; the final unit stays linear (sigmoid is
      // applied by the caller).
      next[static_cast<std::size_t>(o)] =
          (li + 1 < layers_.size()) ? std::max(0.0, z) : z;
    }
    if (activations) activations->push_back(next);
    current = std::move(next);
  }
  return current[0];
}

double EmbedNet::score(const Instance& instance) const {
  return sigmoid(forward(instance, nullptr));
}

EmbeddingTable EmbedNet::origin_table() const {
  EmbeddingTable table;
  table.dim = config_.embedding_dim;
  table.source = EmbeddingSource::CoTrained;
  const std::size_t e = static_cast<std::size_t>(config_.embedding_dim);
  for (int a = 0; a < n_airports_; ++a) {
    table.vectors.emplace(
        a, std::vector<double>(
               origin_embedding_.begin() + static_cast<std::ptrdiff_t>(a * e),
               origin_embedding_.begin() + static_cast<std::ptrdiff_t>((a + 1) * e)));
  }
  return table;
}

EmbeddingTable EmbedNet::destination_table() const {
  EmbeddingTable table = origin_table();
  const std::size_t e = static_cast<std::size_t>(config_.embedding_dim);
  for (int a = 0; a < n_airports_; ++a) {
    table.vectors[a].assign(
        destination_embedding_.begin() + static_cast<std::ptrdiff_t>(a * e),
        destination_embedding_.begin() + static_cast<std::ptrdiff_t>((a + 1) * e));
  }
  return table;
}

double EmbedNet::loss_and_gradient(const std::vector<Instance>& batch,
                                   std::vector<double>* gradient) const {
  if (batch.empty()) fail(ErrorCode::EmptyTrainingSet, "empty batch");
  const std::size_t e = static_cast<std::size_t>(config_.embedding_dim);
  std::vector<double> grad(flat_parameters().size(), 0.0);
  const std::size_t emb_block = static_cast<std::size_t>(n_airports_) * e;

  double total_loss = 0.0;
  for (const auto& instance : batch) {
    std::vector<std::vector<double>> acts;
    const double logit = forward(instance, &acts);
    const double p = sigmoid(logit);
    const double y = instance.label ? 1.0 : 0.0;
    total_loss += -(y * std::log(std::max(p, 1e-12)) +
                    (1.0 - y) * std::log(std::max(1.0 - p, 1e-12)));

    // Backward. delta over the linear output is (p - y).
    std::vector<double> delta{p - y};
    for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
      const Layer& layer = layers_[static_cast<std::size_t>(li)];
      const auto& input = acts[static_cast<std::size_t>(li)];
      const auto& output = acts[static_cast<std::size_t>(li) + 1];
      // Rectifier derivative for hidden layers.
      std::vector<double> dz(static_cast<std::size_t>(layer.out));
      for (int o = 0; o < layer.out; ++o) {
        const bool hidden = li + 1 < static_cast<int>(layers_.size());
        dz[static_cast<std::size_t>(o)] =
            hidden && output[static_cast<std::size_t>(o)] <= 0.0
                ? 0.0
                : delta[static_cast<std::size_t>(o)];
      }
      // Locate this layer's slice in the flat vector.
      std::size_t offset = 2 * emb_block;
      for (int k = 0; k < li; ++k) {
        offset += layers_[static_cast<std::size_t>(k)].weights.size() +
                  layers_[static_cast<std::size_t>(k)].bias.size();
      }
      for (int o = 0; o < layer.out; ++o) {
        const double d = dz[static_cast<std::size_t>(o)];
        double* grow = &grad[offset + static_cast<std::size_t>(o) *
                                          static_cast<std::size_t>(layer.in)];
        for (int i = 0; i < layer.in; ++i)
          grow[i] += d * input[static_cast<std::size_t>(i)];
        grad[offset + layer.weights.size() + static_cast<std::size_t>(o)] += d;
      }
      std::vector<double> prev_delta(static_cast<std::size_t>(layer.in), 0.0);
      for (int o = 0; o < layer.out; ++o) {
        const double d = dz[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        const double* row = &layer.weights[static_cast<std::size_t>(o) *
                                           static_cast<std::size_t>(layer.in)];
        for (int i = 0; i < layer.in; ++i)
          prev_delta[static_cast<std::size_t>(i)] += d * row[i];
      }
      delta = std::move(prev_delta);
    }
    // delta now sits on the input vector; its first 2e entries feed the
    // embedding rows of this instance's origin and destination.
    double* gorig = &grad[static_cast<std::size_t>(instance.features.origin) * e];
    double* gdest = &grad[emb_block + static_cast<std::size_t>(
                                          instance.features.destination) * e];
    for (std::size_t d = 0; d < e; ++d) {
      gorig[d] += delta[d];
      gdest[d] += delta[e + d];
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  if (gradient) *gradient = std::move(grad);
  return total_loss * inv;
}

std::vector<double> EmbedNet::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(origin_embedding_.size() + destination_embedding_.size());
  flat.insert(flat.end(), origin_embedding_.begin(), origin_embedding_.end());
  flat.insert(flat.end(), destination_embedding_.begin(),
              destination_embedding_.end());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void EmbedNet::set_flat_parameters(const std::vector<double>& flat) {
  std::size_t pos = 0;
  const auto take = [&](std::vector<double>& dst) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + dst.size()),
              dst.begin());
    pos += dst.size();
  };
  take(origin_embedding_);
  take(destination_embedding_);
  for (auto& layer : layers_) {
    take(layer.weights);
    take(layer.bias);
  }
  if (pos != flat.size())
    fail(ErrorCode::InvalidConfig, "flat parameter size mismatch");
}

EmbedNet train_embed_net(const std::vector<Instance>& instances,
                         int n_airports, int n_airlines,
                         const EmbedNetConfig& config) {
  if (instances.empty()) fail(ErrorCode::EmptyTrainingSet, "no instances");
  EmbedNet net(n_airports, n_airlines, config);

  Rng rng(mix64(config.seed, 0x90b3a1f7u));
  std::vector<int> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> params = net.flat_parameters();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<Instance> batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      batch.clear();
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(instances[static_cast<std::size_t>(order[i])]);
      std::vector<double> grad;
      const double loss = net.loss_and_gradient(batch, &grad);
      if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "diverged");
      epoch_loss += loss;
      ++batches;
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] - config.learning_rate * grad[i];
        params[i] += velocity[i];
      }
      net.set_flat_parameters(params);
    }
    (void)batches;
    (void)epoch_loss;
  }
  return net;
}

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        AirportId airport, int k) {
  const auto& query = table.vector_of(airport);
  if (k < 1 || k >= static_cast<int>(table.vectors.size()))
    fail(ErrorCode::InvalidConfig,
         "k must be in [1, table size); table has " +
             std::to_string(table.vectors.size()) + " entries");
  std::vector<Neighbor> all;
  all.reserve(table.vectors.size() - 1);
  for (const auto& [id, vec] : table.vectors) {
    if (id == airport) continue;
    all.push_back({id, cosine_similarity(query, vec)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.airport < b.airport;
  });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace combo
