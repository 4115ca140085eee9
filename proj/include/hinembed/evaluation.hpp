#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hinembed/model.hpp"
#include "hinembed/trainer.hpp"

namespace hinembed {

struct LabeledNodes {
  std::vector<std::pair<NodeId, int>> items;  // (node, class), stored in order
  int num_classes = 0;

  static LabeledNodes from_map(const std::map<NodeId, int>& labels);
  // TSV: node_id <TAB> label (labels interned to dense ints in first-seen
  // order; '#' comments ignored).
  static LabeledNodes from_file(const std::string& path, const HeteroGraph& g);
};

// -- clustering ---------------------------------------------------------------
struct KMeansResult {
  std::vector<int> assignment;
  double inertia = 0.0;
};

// Standard k-means++ / Lloyd with `restarts` seeded restarts, keeping the
// lowest-inertia run. `data` is row-major n x dim.
KMeansResult kmeans(std::span<const double> data, std::size_t n,
                    std::size_t dim, int k, std::uint64_t seed,
                    int restarts = 10, double tol = 1e-4, int max_iter = 100);

// Normalized mutual information, arithmetic-mean normalization:
// 2 I(a;b) / (H(a) + H(b)); 0 when either partition is degenerate.
double normalized_mutual_information(std::span<const int> a,
                                     std::span<const int> b);

double cluster_nmi(const EmbeddingStore& store, const LabeledNodes& labels,
                   int k, std::uint64_t seed);

// -- binary classifier ---------------------------------------------------------
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
  double probability(std::span<const double> x) const;
};

// L2-regularized logistic regression (sum log-loss + lambda/2 ||w||^2, bias
// unregularized), full-batch gradient descent with Barzilai-Borwein steps to
// the given gradient-norm tolerance. Deterministic.
LogisticModel fit_logistic(std::span<const double> features, std::size_t n,
                           std::size_t dim, std::span<const int> labels01,
                           double lambda = 1.0, double tol = 1e-6,
                           int max_iter = 10000);

// Rank-based AUC (Mann-Whitney with tie-averaged ranks).
double auc_score(std::span<const double> scores, std::span<const int> labels01);

// F1 of the positive class at a fixed decision threshold.
double binary_f1(std::span<const int> predictions01,
                 std::span<const int> labels01);

struct F1Scores {
  double macro = 0.0;
  double micro = 0.0;
};
F1Scores multiclass_f1(std::span<const int> predictions,
                       std::span<const int> labels, int num_classes);

// -- link prediction ------------------------------------------------------------
struct LinkSplit {
  std::string relation;
  std::vector<std::pair<NodeId, NodeId>> train_pos;
  std::vector<std::pair<NodeId, NodeId>> test_pos;
  std::vector<std::pair<NodeId, NodeId>> test_neg;
  std::uint64_t seed = 0;
};

// Splits the atomic relation's distinct edges 80/20 and samples one
// type-correct non-edge per held-out positive.
LinkSplit make_link_split(const HeteroGraph& g, const RelationSpec& r,
                          double train_fraction, std::uint64_t seed);

// The training network: the graph minus the split's held-out edges.
HeteroGraph training_network(const HeteroGraph& g, const RelationSpec& r,
                             const LinkSplit& split);

void write_link_split(const std::string& path, const LinkSplit& split,
                      const HeteroGraph& g);
LinkSplit read_link_split(const std::string& path, const HeteroGraph& g);

enum class PairFeature : std::uint8_t { Hadamard, Score };

struct LinkMetrics {
  double auc = 0.0;
  double f1 = 0.0;
};

// Fits a logistic classifier on the training edges plus an equal number of
// sampled non-edges, then scores the held-out positives/negatives.
// PairFeature::Score ranks by the negated model score instead of learned
// Hadamard features; `rel_index` locates the relation's translation vector
// in the store, when it has one.
LinkMetrics link_predict(const EmbeddingStore& store, const HeteroGraph& g,
                         const RelationSpec& r, std::uint32_t rel_index,
                         const LinkSplit& split, PairFeature feature,
                         const LossConfig& loss_cfg, std::uint64_t seed);

// -- classification -------------------------------------------------------------
struct ClassifyMetrics {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

// Stratified 80/20 split, one-vs-rest logistic regression on the embeddings.
ClassifyMetrics classify(const EmbeddingStore& store, const LabeledNodes& labels,
                         double train_fraction, std::uint64_t seed);

// -- variant comparison ----------------------------------------------------------
struct EvalTasks {
  bool clustering = true;
  bool link_prediction = true;
  bool classification = true;
};

struct VariantOutcome {
  Variant variant;
  std::optional<double> nmi;
  std::optional<LinkMetrics> link;
  std::optional<ClassifyMetrics> cls;
};

// Trains every requested variant with identical data and seeds and evaluates
// the requested tasks. Link prediction re-trains on the training network.
std::vector<VariantOutcome> compare_variants(
    const HeteroGraph& g, const RelationSet& rels, const LabeledNodes& labels,
    const std::string& link_relation, const EvalTasks& tasks,
    const TrainConfig& base_cfg, const std::vector<Variant>& variants);

std::string format_variants_tsv(const std::vector<VariantOutcome>& outcomes);

}  // namespace hinembed
