#include "hinembed/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "hinembed/error.hpp"

namespace hinembed {

Variant variant_from_string(const std::string& s) {
  if (s == "joint") return Variant::Joint;
  if (s == "euclidean") return Variant::EuclideanOnly;
  if (s == "translation") return Variant::TranslationOnly;
  if (s == "reversed") return Variant::Reversed;
  throw Error("unknown variant: " + s +
              " (expected joint|euclidean|translation|reversed)");
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Joint: return "joint";
    case Variant::EuclideanOnly: return "euclidean";
    case Variant::TranslationOnly: return "translation";
    case Variant::Reversed: return "reversed";
  }
  throw Error("unknown variant tag");
}

VariantPlan select_variant(Variant v) {
  switch (v) {
    case Variant::Joint:
      return {LossFamily::Euclidean, LossFamily::Translation};
    case Variant::EuclideanOnly:
      return {LossFamily::Euclidean, LossFamily::Euclidean};
    case Variant::TranslationOnly:
      return {LossFamily::Translation, LossFamily::Translation};
    case Variant::Reversed:
      return {LossFamily::Translation, LossFamily::Euclidean};
  }
  throw Error("unknown variant tag");
}

void TrainConfig::validate() const {
  if (dim < 1) throw Error("dim must be >= 1");
  if (negatives < 1) throw Error("negatives must be >= 1");
  if (!(gamma > 0.0)) throw Error("gamma must be > 0");
  if (!(lr > 0.0)) throw Error("lr must be > 0");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (threads < 1) throw Error("threads must be >= 1");
  if (checkpoint_every < 0) throw Error("checkpoint-every must be >= 0");
}

namespace {

struct LoopState {
  EmbeddingStore store;
  Rng rng;
  std::uint64_t epoch = 0;
};

// Deterministic proportional interleave of the two partitions: step s draws
// from AR exactly when the running AR quota advances.
Category partition_for_step(std::size_t step, std::size_t total_steps,
                            double ar_mass, double total_mass) {
  double share = ar_mass / total_mass;
  auto before = static_cast<std::uint64_t>(share * static_cast<double>(step));
  auto after = static_cast<std::uint64_t>(share * static_cast<double>(step + 1));
  (void)total_steps;
  return after > before ? Category::AR : Category::IR;
}

Triple draw_negative(const Triple& pos, const HeteroGraph& g,
                     const RelationSet& rels, const TripleStore& store,
                     bool filter, Rng& rng) {
  if (!filter) return corrupt(pos, g, rels, rng);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Triple neg = corrupt(pos, g, rels, rng);
    if (!store.contains(neg.rel, neg.u, neg.v)) return neg;
  }
  throw Error("could not draw a non-positive corruption for relation " +
              rels.specs.at(pos.rel).name +
              " (nearly complete relation; disable filtering)");
}

double decayed_lr(const TrainConfig& cfg, std::uint64_t epoch) {
  if (!cfg.lr_decay || cfg.epochs <= 1) return cfg.lr;
  double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
  return cfg.lr * std::max(0.01, 1.0 - frac);
}

TrainResult run_epochs(LoopState state, const HeteroGraph& g,
                       const RelationSet& rels, const TripleStore& store,
                       const TrainConfig& cfg, const TrainHooks* hooks) {
  auto t0 = std::chrono::steady_clock::now();
  const VariantPlan plan = select_variant(cfg.variant);
  const LossConfig loss_cfg{cfg.gamma, cfg.ir_norm};
  const std::size_t steps =
      cfg.samples_per_epoch ? cfg.samples_per_epoch : store.size();
  if (store.size() == 0 || store.total_mass() <= 0.0) {
    throw Error("triple store is empty: nothing to train on");
  }

  TrainReport report;
  report.deterministic = cfg.threads == 1;
  report.threads = cfg.threads;
  report.draws_per_relation.assign(rels.size(), 0);

  const double ar_mass = store.mass(Category::AR);
  const double total_mass = store.total_mass();
  double initial_mean = -1.0;

  auto process_pair = [&](EpochStats& es, const Triple& pos, Category cat,
                          double lr, Rng& rng) {
    LossFamily family = plan.family_of(cat);
    for (int j = 0; j < cfg.negatives; ++j) {
      Triple neg = draw_negative(pos, g, rels, store,
                                 cfg.filter_corrupted_positives, rng);
      double loss = grad_step(state.store, pos, neg, family, loss_cfg, lr,
                              cfg.max_row_norm);
      if (family == LossFamily::Euclidean) {
        es.loss_euclidean += loss;
      } else {
        es.loss_translation += loss;
      }
      if (hooks && hooks->on_pair) hooks->on_pair(pos, neg, cat, loss);
    }
  };

  for (; state.epoch < static_cast<std::uint64_t>(cfg.epochs); ++state.epoch) {
    EpochStats es;
    double lr = decayed_lr(cfg, state.epoch);
    if (cfg.threads == 1) {
      for (std::size_t s = 0; s < steps; ++s) {
        Category cat = partition_for_step(s, steps, ar_mass, total_mass);
        if (store.partition(cat).empty()) {
          cat = cat == Category::AR ? Category::IR : Category::AR;
        }
        const Triple& pos = store.sample_positive(cat, state.rng);
        ++report.draws_per_relation[pos.rel];
        ++es.positives;
        process_pair(es, pos, cat, lr, state.rng);
      }
    } else {
      // Lock-free parallel mode: workers share the store and may overwrite
      // each other's sparse updates; documented as nondeterministic.
      std::vector<std::thread> workers;
      std::vector<EpochStats> worker_stats(cfg.threads);
      std::vector<std::vector<std::size_t>> worker_draws(
          cfg.threads, std::vector<std::size_t>(rels.size(), 0));
      std::size_t per_worker = steps / cfg.threads;
      std::size_t extra = steps % cfg.threads;
      for (int wid = 0; wid < cfg.threads; ++wid) {
        workers.emplace_back([&, wid]() {
          Rng wrng = state.rng.fork(state.epoch * cfg.threads + wid);
          std::size_t mine = per_worker + (static_cast<std::size_t>(wid) < extra);
          for (std::size_t s = 0; s < mine; ++s) {
            Category cat = partition_for_step(s, mine, ar_mass, total_mass);
            if (store.partition(cat).empty()) {
              cat = cat == Category::AR ? Category::IR : Category::AR;
            }
            const Triple& pos = store.sample_positive(cat, wrng);
            ++worker_draws[wid][pos.rel];
            ++worker_stats[wid].positives;
            process_pair(worker_stats[wid], pos, cat, lr, wrng);
          }
        });
      }
      for (auto& w : workers) w.join();
      for (int wid = 0; wid < cfg.threads; ++wid) {
        es.loss_euclidean += worker_stats[wid].loss_euclidean;
        es.loss_translation += worker_stats[wid].loss_translation;
        es.positives += worker_stats[wid].positives;
        for (std::size_t r = 0; r < rels.size(); ++r) {
          report.draws_per_relation[r] += worker_draws[wid][r];
        }
      }
      // Keep the base stream moving so epochs do not repeat worker streams.
      state.rng.next();
    }

    double mean = es.mean_loss();
    if (!std::isfinite(mean)) {
      throw Error("training diverged (non-finite loss) at epoch " +
                  std::to_string(state.epoch));
    }
    if (initial_mean < 0.0) initial_mean = mean;
    if (initial_mean > 0.0 && mean > cfg.divergence_factor * initial_mean) {
      throw Error("training diverged at epoch " + std::to_string(state.epoch) +
                  ": mean loss " + std::to_string(mean) + " exceeds " +
                  std::to_string(cfg.divergence_factor) + "x the initial " +
                  std::to_string(initial_mean));
    }
    report.epochs.push_back(es);

    bool last = state.epoch + 1 == static_cast<std::uint64_t>(cfg.epochs);
    if (!cfg.checkpoint_path.empty() &&
        ((cfg.checkpoint_every > 0 &&
          (state.epoch + 1) % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0) ||
         last)) {
      Checkpoint cp;
      cp.store = state.store;
      cp.epoch = state.epoch + 1;
      cp.rng_state = state.rng.save_state();
      cp.node_names = g.node_names();
      for (const auto& spec : rels.specs) cp.relation_names.push_back(spec.name);
      save_checkpoint(cfg.checkpoint_path, cp);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return TrainResult{std::move(state.store), std::move(report)};
}

std::vector<bool> wanted_y_rows(const RelationSet& rels, Variant v) {
  VariantPlan plan = select_variant(v);
  std::vector<bool> wants(rels.size());
  for (std::size_t r = 0; r < rels.size(); ++r) {
    wants[r] = plan.wants_y(rels.categories[r]);
  }
  return wants;
}

}  // namespace

TrainResult train(const HeteroGraph& g, const RelationSet& rels,
                  const TripleStore& store, const TrainConfig& cfg,
                  const TrainHooks* hooks) {
  cfg.validate();
  LoopState state;
  state.rng = Rng(cfg.seed);
  state.store = EmbeddingStore::random_init(
      g.num_nodes(), wanted_y_rows(rels, cfg.variant), cfg.dim, state.rng);
  state.epoch = 0;
  if (cfg.epochs == 0) {
    TrainReport report;
    report.deterministic = cfg.threads == 1;
    report.threads = cfg.threads;
    report.draws_per_relation.assign(rels.size(), 0);
    return TrainResult{std::move(state.store), std::move(report)};
  }
  return run_epochs(std::move(state), g, rels, store, cfg, hooks);
}

TrainResult resume(const std::string& checkpoint_path, const HeteroGraph& g,
                   const RelationSet& rels, const TripleStore& store,
                   const TrainConfig& cfg, const TrainHooks* hooks) {
  cfg.validate();
  Checkpoint cp = load_checkpoint(checkpoint_path);
  if (cp.store.dim() != cfg.dim) {
    throw Error("checkpoint dimension " + std::to_string(cp.store.dim()) +
                " does not match configured dim " + std::to_string(cfg.dim));
  }
  if (cp.store.num_nodes() != g.num_nodes()) {
    throw Error("checkpoint node count does not match the graph");
  }
  auto wants = wanted_y_rows(rels, cfg.variant);
  for (std::size_t r = 0; r < rels.size(); ++r) {
    if (wants[r] != cp.store.has_relation_row(static_cast<std::uint32_t>(r))) {
      throw Error("checkpoint relation rows do not match the variant");
    }
  }
  LoopState state;
  state.store = std::move(cp.store);
  state.rng.restore_state(cp.rng_state);
  state.epoch = cp.epoch;
  return run_epochs(std::move(state), g, rels, store, cfg, hooks);
}

std::string format_metrics_tsv(const TrainReport& report) {
  std::ostringstream out;
  out << "epoch\tL_euclidean\tL_translation\ttotal\n";
  char buf[64];
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& es = report.epochs[e];
    out << e;
    std::snprintf(buf, sizeof(buf), "%.17g", es.loss_euclidean);
    out << '\t' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", es.loss_translation);
    out << '\t' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g",
                  es.loss_euclidean + es.loss_translation);
    out << '\t' << buf << '\n';
  }
  return out.str();
}

void write_metrics_tsv(const std::string& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << format_metrics_tsv(report);
}

}  // namespace hinembed
