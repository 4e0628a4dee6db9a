#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "realign/core/error.hpp"
#include "realign/core/rng.hpp"
#include "realign/chem/molecule.hpp"

namespace realign::srin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class EncoderVariant { MPNN, GCN, GIN, GAT };
enum class Activation { Linear, ReLU, Tanh, Sigmoid };

EncoderVariant encoder_variant_from_name(const std::string& name);
Activation activation_from_name(const std::string& name);
const char* encoder_variant_name(EncoderVariant v);

struct LayerWeights {
  Mat w_self;    // applied to the node's own embedding
  Mat w_neigh;   // applied to aggregated neighbor embeddings (MPNN)
  Vec attn_self;   // GAT attention split, empty otherwise
  Vec attn_neigh;
};

struct EncoderParams {
  EncoderVariant variant = EncoderVariant::MPNN;
  Activation activation = Activation::Tanh;
  int hidden_dim = 0;
  std::vector<LayerWeights> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  // Throws ConfigError when weight shapes are inconsistent with input_dim
  // and hidden_dim.
  void validate(int input_dim) const;
};

// Random initialization scaled to layer fan-in.
EncoderParams init_encoder(EncoderVariant variant, Activation act, int layer_count, int input_dim,
                           int hidden_dim, RngStream& rng);

// Per-atom embeddings after the message-passing stack; one finite column
// vector per atom of graph. The graph must carry a feature matrix whose
// dimension matches the first layer.
std::vector<Vec> gnn_forward(const chem::MolecularGraph& graph, const EncoderParams& params);

// Symmetric-normalized adjacency with self loops, D^-1/2 (A+I) D^-1/2.
Mat gcn_normalized_adjacency(const chem::MolecularGraph& graph);

Mat activation_apply(const Mat& x, Activation act);

class DegenerateNeighborhood : public NumericError {
 public:
  explicit DegenerateNeighborhood(const std::string& msg) : NumericError(msg) {}
};

// Neighborhood structural coefficient: the center's sum of
// logistic(z) * log logistic(z) components over the same sum across the
// neighbor embeddings. Throws DegenerateNeighborhood when the denominator
// magnitude falls below 1e-12; callers substitute 1/|neighbors|.
double struct_coeff(const Vec& center_embedding, const std::vector<Vec>& neighbor_embeddings);

// struct_coeff with the documented uniform fallback applied.
double struct_coeff_or_uniform(const Vec& center_embedding,
                               const std::vector<Vec>& neighbor_embeddings);

struct SubstructureEmbedding {
  int center = 0;
  int k = 0;
  std::vector<std::pair<int, int>> members;  // (hop, atom)
  Vec vector;
};

// One substructure per atom center: the K-hop neighborhood aggregate of
// (center_embedding ‖ coeff * neighbor_embedding) pairs, summed and then
// mapped through `projection` (out_dim x 2*emb_dim). Isolated atoms use a
// zero neighbor slot.
std::vector<SubstructureEmbedding> extract_substructures(const chem::MolecularGraph& graph,
                                                         const std::vector<Vec>& node_embeddings,
                                                         int k, const Mat& projection);

// The aggregation step alone, with an externally supplied coefficient:
// projection * sum over members of (center ‖ coeff * member).
Vec substructure_aggregate(const Vec& center_embedding, const std::vector<Vec>& member_embeddings,
                           double coeff, const Mat& projection);

// Pairwise similarity mapped to [0, 1]: (1 + cosine) / 2. Zero-magnitude
// inputs score 0.5 (cosine treated as 0).
double similarity01(const Vec& a, const Vec& b);

struct InteractionScore {
  int substructure_id = -1;
  double value = 0.0;
  int partner_count = 0;
};

// Substructure interaction probability for pre-adaptation: every partner
// contributes its own similarity plus the 1/(J-1)-weighted similarities of
// the other partners. J = 1 degenerates to twice the single similarity.
InteractionScore interaction_probability(const Vec& z_xi, const std::vector<Vec>& partners,
                                         int substructure_id = -1);

enum class NoiseFilterMode { Stochastic, Deterministic };

struct NoiseFilterConfig {
  NoiseFilterMode mode = NoiseFilterMode::Deterministic;
  double threshold = 0.5;  // deterministic mode
  Vec mean;                // population stats of the substructure embeddings
  Vec variance;
};

// Componentwise mean/variance over a population of embeddings.
void compute_noise_stats(const std::vector<Vec>& population, Vec& mean, Vec& variance);

// Keeps or replaces each substructure embedding: a kept one passes through
// unchanged, a rejected one is replaced by a noise vector drawn from the
// population statistics. Output size always equals input size.
std::vector<Vec> noise_filter(const std::vector<SubstructureEmbedding>& substructures,
                              const std::vector<InteractionScore>& scores,
                              const NoiseFilterConfig& config, RngStream& rng);

double logistic(double x);

}  // namespace realign::srin
