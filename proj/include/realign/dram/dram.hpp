#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "realign/core/rng.hpp"
#include "realign/srin/srin.hpp"

namespace realign::dram {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Candidate reconstruction edge between two substructures of one molecule.
struct EdgeProb {
  int i = 0;
  int k = 0;
  double theta = 0.0;    // Gaussian-kernel probability in [0, 1]
  double sampled = 0.0;  // hard {0,1} or relaxed value in (0,1)
};

enum class SampleMode { TrainRelaxed, TrainHard, Deterministic };

// Gaussian kernel of the embedding distance: exp(-|zi - zk|^2 / (2 h^2)).
double edge_probability(const Vec& z_i, const Vec& z_k, double bandwidth);

// Median pairwise euclidean distance, the default bandwidth heuristic.
// Returns a small floor when all embeddings coincide.
double median_pairwise_distance(const std::vector<Vec>& embeddings);

enum class BandwidthMode { Median, Fixed };

// Enumerates all unordered substructure pairs with their thetas.
std::vector<EdgeProb> enumerate_edges(const std::vector<Vec>& substructures, BandwidthMode mode,
                                      double fixed_bandwidth);

// Draws e_ik per edge: Bernoulli(theta) in TrainHard mode, a
// logistic-relaxed draw in TrainRelaxed mode, and the 0.5 threshold in
// Deterministic mode.
void sample_edges(std::vector<EdgeProb>& edges, RngStream& rng, SampleMode mode,
                  double temperature = 1.0);

struct ReconstructedSubstructure {
  int parent_i = 0;
  int parent_k = 0;
  Vec vector;
};

// Merge map: activation(W (z_i ‖ z_k) + b), back to hidden size.
ReconstructedSubstructure reconstruct(const srin::SubstructureEmbedding& sub_i,
                                      const srin::SubstructureEmbedding& sub_k,
                                      const Mat& merge_weight, const Vec& merge_bias,
                                      srin::Activation act);
Vec merge_embeddings(const Vec& z_i, const Vec& z_k, const Mat& merge_weight,
                     const Vec& merge_bias, srin::Activation act);

// Per-partner squared similarities of the reconstructed substructure and
// its two parents; gamma is the bias-correction ratio built from them.
struct AlignmentScore {
  double gamma = 0.0;
  std::vector<double> sq_sim_new;
  std::vector<double> sq_sim_i;
  std::vector<double> sq_sim_k;
};

AlignmentScore bcf(const Vec& z_new, const Vec& z_i, const Vec& z_k,
                   const std::vector<Vec>& partners);

// gamma from already-squared per-partner similarities; invariant under
// uniform rescaling of the underlying similarities.
double gamma_from_squared_sims(const std::vector<double>& sq_new, const std::vector<double>& sq_i,
                               const std::vector<double>& sq_k);

enum class CoreChoice { Reconstructed, PartI, PartK };

const char* core_choice_name(CoreChoice c);

struct CoreSelection {
  CoreChoice choice = CoreChoice::Reconstructed;
  Vec embedding;
  double gamma = 0.0;
  int parent_i = 0;
  int parent_k = 0;
  double edge_theta = 0.0;        // theta of the generating pair
  std::vector<int> complement;    // substructures not selected by this decision
};

// gamma >= 1 takes the reconstruction; otherwise the part with the larger
// mean squared similarity, ties to part i.
CoreSelection select_core(const AlignmentScore& score, const srin::SubstructureEmbedding& sub_i,
                          const srin::SubstructureEmbedding& sub_k,
                          const ReconstructedSubstructure& reconstructed, double edge_theta);

struct SgibPartition {
  std::vector<int> chosen;              // indices into the selection list, ranked by gamma
  std::vector<Vec> core;                // selected embeddings, size M >= 1
  std::vector<int> core_origin;         // original substructure id, -1 for merged cores
  std::vector<double> core_prior;       // edge-theta prior per core element
  std::vector<int> confounder_ids;
  std::vector<Vec> confounders;
  std::vector<double> confounder_prior;
  bool degenerate = false;
};

// Splits the substructure universe into the top-M cores by gamma and the
// confounder remainder. J = 1 degenerates to the single substructure as
// core with a noise-replaced copy as confounder.
SgibPartition sgib_partition(const std::vector<CoreSelection>& selections, int m_cap,
                             const std::vector<Vec>& substructures,
                             const std::vector<EdgeProb>& edges, RngStream& rng);

int m_cap_for(double rho, int substructure_count);

struct MoleculeEmbedding {
  Vec vector;
  std::vector<int> core_ids;
};

// Shared linear projection followed by the mean over cores.
MoleculeEmbedding readout(const std::vector<Vec>& core_embeddings, const Mat& projection);

}  // namespace realign::dram
