#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hinembed/model.hpp"
#include "hinembed/triples.hpp"

namespace hinembed {

// Which loss family handles each relation category. `joint` is the
// structure-aware default; the others are the ablation arms.
enum class Variant : std::uint8_t {
  Joint,            // AR -> Euclidean, IR -> translation
  EuclideanOnly,    // everything Euclidean, no relation vectors
  TranslationOnly,  // everything translation, relation vectors for all
  Reversed,         // AR -> translation, IR -> Euclidean
};

Variant variant_from_string(const std::string& s);
const char* to_string(Variant v);

struct VariantPlan {
  LossFamily ar_family;
  LossFamily ir_family;

  LossFamily family_of(Category c) const {
    return c == Category::AR ? ar_family : ir_family;
  }
  bool wants_y(Category c) const {
    return family_of(c) == LossFamily::Translation;
  }
};

VariantPlan select_variant(Variant v);

struct TrainConfig {
  std::size_t dim = 100;   // d
  int negatives = 3;       // k corruptions per positive
  double gamma = 1.0;      // margin
  double lr = 0.005;
  int epochs = 10;
  // Positives drawn per epoch; 0 means the store's total triple count.
  std::size_t samples_per_epoch = 0;
  std::uint64_t seed = 1;
  Variant variant = Variant::Joint;
  Norm ir_norm = Norm::L2;
  int threads = 1;  // 1 = deterministic mode
  bool filter_corrupted_positives = false;
  double max_row_norm = 0.0;      // 0 = unconstrained
  double divergence_factor = 10.0;  // abort when mean loss exceeds this x initial
  bool lr_decay = false;          // linear decay to 1% of lr over the run
  std::string checkpoint_path;    // empty = no checkpoints
  int checkpoint_every = 0;       // epochs; 0 = only at the end (if path set)

  void validate() const;
};

struct EpochStats {
  double loss_euclidean = 0.0;    // summed hinge under the Euclidean family
  double loss_translation = 0.0;  // summed hinge under the translation family
  std::size_t positives = 0;
  double mean_loss() const {
    return positives ? (loss_euclidean + loss_translation) /
                           static_cast<double>(positives)
                     : 0.0;
  }
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::vector<std::size_t> draws_per_relation;
  double wall_seconds = 0.0;
  bool deterministic = true;
  int threads = 1;
};

struct TrainHooks {
  // Called per (positive, negative) pair with the pre-update loss.
  std::function<void(const Triple& pos, const Triple& neg, Category cat,
                     double loss)>
      on_pair;
};

struct TrainResult {
  EmbeddingStore store;
  TrainReport report;
};

TrainResult train(const HeteroGraph& g, const RelationSet& rels,
                  const TripleStore& store, const TrainConfig& cfg,
                  const TrainHooks* hooks = nullptr);

// Continues a checkpointed run; in deterministic mode the result is
// bit-identical to the uninterrupted run with the same config.
TrainResult resume(const std::string& checkpoint_path, const HeteroGraph& g,
                   const RelationSet& rels, const TripleStore& store,
                   const TrainConfig& cfg, const TrainHooks* hooks = nullptr);

void write_metrics_tsv(const std::string& path, const TrainReport& report);
std::string format_metrics_tsv(const TrainReport& report);

}  // namespace hinembed
