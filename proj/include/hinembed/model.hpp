#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hinembed/rng.hpp"
#include "hinembed/triples.hpp"

namespace hinembed {

enum class Norm : std::uint8_t { L1, L2 };

struct LossConfig {
  double gamma = 1.0;  // hinge margin, > 0
  Norm ir_norm = Norm::L2;
};

enum class LossFamily : std::uint8_t { Euclidean, Translation };

// Node matrix X (num_nodes x dim) and relation matrix Y (one row per relation
// trained under the translation family). Rows are contiguous doubles.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  // Uniform init in [-6/sqrt(d), 6/sqrt(d)] for X and the allocated Y rows;
  // wants_y[r] decides whether relation r gets a translation vector.
  static EmbeddingStore random_init(std::size_t num_nodes,
                                    const std::vector<bool>& wants_y,
                                    std::size_t dim, Rng& rng);

  std::size_t dim() const { return dim_; }
  std::size_t num_nodes() const { return x_.size() / (dim_ ? dim_ : 1); }
  std::size_t num_relation_rows() const { return y_.size() / (dim_ ? dim_ : 1); }

  std::span<double> node(NodeId v) { return {x_.data() + v * dim_, dim_}; }
  std::span<const double> node(NodeId v) const {
    return {x_.data() + v * dim_, dim_};
  }
  bool has_relation_row(std::uint32_t rel) const {
    return rel < y_row_.size() && y_row_[rel] >= 0;
  }
  std::span<double> relation(std::uint32_t rel);
  std::span<const double> relation(std::uint32_t rel) const;

  std::span<const double> x_flat() const { return x_; }
  std::span<const double> y_flat() const { return y_; }
  std::span<double> x_flat_mut() { return x_; }
  std::span<double> y_flat_mut() { return y_; }
  const std::vector<std::int32_t>& relation_rows() const { return y_row_; }

  bool all_finite() const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<std::int32_t> y_row_;  // relation index -> Y row, or -1
};

// w * ||X_p - X_q||_2^2
double euclidean_score(const EmbeddingStore& store, double w, NodeId p, NodeId q);

// w * ||X_u + Y_r - X_v|| under the chosen norm; requires a Y row for rel.
double translation_score(const EmbeddingStore& store, double w, NodeId u,
                         std::uint32_t rel, NodeId v, Norm norm);

// max(0, gamma + pos - neg)
double hinge(double gamma, double pos_score, double neg_score);

double pair_loss(const EmbeddingStore& store, const Triple& pos,
                 const Triple& neg, LossFamily family, const LossConfig& cfg);

// Sum of hinges: Euclidean scores over the AR pairs plus translation scores
// over the IR pairs. `categories` (indexed by relation) guards against pairs
// filed under the wrong partition.
double batch_loss(const EmbeddingStore& store,
                  std::span<const std::pair<Triple, Triple>> ar_pairs,
                  std::span<const std::pair<Triple, Triple>> ir_pairs,
                  std::span<const Category> categories, const LossConfig& cfg);

// One subgradient step on a (positive, negative) pair. Touches only the rows
// appearing in the pair (contributions to shared rows accumulate before the
// update). Returns the pre-update hinge loss. Throws on non-finite values.
double grad_step(EmbeddingStore& store, const Triple& pos, const Triple& neg,
                 LossFamily family, const LossConfig& cfg, double lr,
                 double max_row_norm = 0.0);

// -- persistence --------------------------------------------------------------
// TSV export: node_id v1 ... vd (one row per node); relations file likewise
// keyed by relation name.
void write_embeddings_tsv(const std::string& path, const EmbeddingStore& store,
                          const std::vector<std::string>& node_names);
void write_relations_tsv(const std::string& path, const EmbeddingStore& store,
                         const std::vector<std::string>& relation_names);

// Reads a node-embedding TSV back (ids resolved by the caller).
struct LoadedEmbeddings {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> rows;  // ids.size() x dim
};
LoadedEmbeddings read_embeddings_tsv(const std::string& path);

// Binary checkpoint: embeddings + id/relation names + epoch + rng state, for
// exact resume.
struct Checkpoint {
  EmbeddingStore store;
  std::vector<std::string> node_names;
  std::vector<std::string> relation_names;
  std::uint64_t epoch = 0;
  std::string rng_state;
};
void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hinembed
