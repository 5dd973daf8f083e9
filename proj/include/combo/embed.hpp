#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "combo/domain.hpp"

namespace combo {

// Per-user airport sequences: chronological [origin, destination, ...],
// consecutive duplicates removed, users with fewer than `min_searches`
// searches dropped.
struct TraceCorpus {
  std::vector<std::vector<AirportId>> sequences;
};

enum class EmbeddingSource { TraceSkipGram, CoTrained };

struct EmbeddingTable {
  int dim = 0;
  EmbeddingSource source = EmbeddingSource::TraceSkipGram;
  std::unordered_map<AirportId, std::vector<double>> vectors;

  bool contains(AirportId id) const { return vectors.count(id) > 0; }
  const std::vector<double>& vector_of(AirportId id) const;
};

struct SkipGramConfig {
  int dim = 16;
  int window = 2;
  int negatives = 5;
  int epochs = 10;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

struct EmbedNetConfig {
  int embedding_dim = 16;
  std::vector<int> hidden_widths = {64, 32, 16, 8};
  int epochs = 6;
  int batch_size = 128;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

TraceCorpus build_traces(std::vector<SearchQuery> queries,
                         int min_searches = 10);

// `epoch_losses`, when given, receives each epoch's running mean
// negative-sampling loss per (center, context) example.
EmbeddingTable train_skipgram(const TraceCorpus& corpus,
                              const SkipGramConfig& config,
                              std::vector<double>* epoch_losses = nullptr);

// Loss and gradient of one skip-gram (center, context, negatives) example
// given the current vectors; exposed for gradient checking.
double skipgram_pair_loss(const std::vector<double>& center_vec,
                          const std::vector<double>& context_vec,
                          const std::vector<std::vector<double>>& negative_vecs);

struct SkipGramGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

SkipGramGradient skipgram_pair_gradient(
    const std::vector<double>& center_vec,
    const std::vector<double>& context_vec,
    const std::vector<std::vector<double>>& negative_vecs);

// Feedforward scorer with origin/destination embedding layers followed by a
// rectifier stack and a sigmoid output. Trained with mini-batch gradient
// descent on log-loss; the embedding layers are the co-trained location
// representation.
class EmbedNet {
 public:
  EmbedNet(int n_airports, int n_airlines, EmbedNetConfig config);

  double score(const Instance& instance) const;

  EmbeddingTable origin_table() const;
  EmbeddingTable destination_table() const;

  // Mean log-loss and gradient over a batch, as one flat parameter vector
  // (origin embeddings, destination embeddings, then layer weights/biases).
  double loss_and_gradient(const std::vector<Instance>& batch,
                           std::vector<double>* gradient) const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& flat);

  int dense_dim() const { return n_airlines_ + 18; }
  const EmbedNetConfig& config() const { return config_; }

 private:
  friend EmbedNet train_embed_net(const std::vector<Instance>&, int, int,
                                  const EmbedNetConfig&);

  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;
  };

  void encode_dense(const Instance& instance, double* out) const;
  double forward(const Instance& instance,
                 std::vector<std::vector<double>>* activations) const;

  int n_airports_ = 0;
  int n_airlines_ = 0;
  EmbedNetConfig config_;
  std::vector<double> origin_embedding_;       // n_airports x dim
  std::vector<double> destination_embedding_;  // n_airports x dim
  std::vector<Layer> layers_;                  // hidden stack + 1-unit output
};

EmbedNet train_embed_net(const std::vector<Instance>& instances,
                         int n_airports, int n_airlines,
                         const EmbedNetConfig& config);

struct Neighbor {
  AirportId airport = 0;
  double cosine = 0.0;
};

// Exact cosine ranking, query airport excluded.
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        AirportId airport, int k);

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace combo
