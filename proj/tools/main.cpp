#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hinembed/analysis.hpp"
#include "hinembed/error.hpp"
#include "hinembed/evaluation.hpp"
#include "hinembed/graph.hpp"
#include "hinembed/model.hpp"
#include "hinembed/pipeline.hpp"
#include "hinembed/synth.hpp"
#include "hinembed/trainer.hpp"
#include "hinembed/triples.hpp"

namespace {

using hinembed::Error;
using hinembed::RunConfig;

// Mounts every config key as a long option on `cmd`; values land in
// `overrides` only when the user passed them.
void add_config_options(CLI::App* cmd,
                        std::map<std::string, std::string>& overrides) {
  for (const auto& entry : hinembed::config_entries()) {
    std::string flag = "--" + std::string(entry.key);
    cmd->add_option_function<std::string>(
        flag,
        [&overrides, key = std::string(entry.key)](const std::string& v) {
          overrides[key] = v;
        },
        entry.help);
  }
}

RunConfig build_config(const std::string& config_file,
                       const std::map<std::string, std::string>& overrides,
                       const std::string& forced_stages) {
  RunConfig cfg = config_file.empty() ? RunConfig()
                                      : RunConfig::from_file(config_file);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  if (!forced_stages.empty()) cfg.set("stages", forced_stages);
  if (const char* env = std::getenv(hinembed::kThreadsEnvVar);
      env && overrides.find("threads") == overrides.end()) {
    cfg.set("threads", env);
  }
  return cfg;
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::cout << in.rdbuf();
}

int cmd_eval_standalone(const std::string& embeddings_file,
                        const std::string& relations_file,
                        const std::string& labels_file,
                        const std::string& split_file, const RunConfig& cfg,
                        const std::string& out_tsv, const std::string& out_json) {
  using namespace hinembed;
  HeteroGraph g = load_graph(cfg.get("nodes"), cfg.get("edges"),
                             cfg.get("schema"));
  LoadedEmbeddings loaded = read_embeddings_tsv(embeddings_file);

  // Rebuild a store over the graph's node table; the link relation (if any)
  // gets Y row 0 when the relations file carries a vector for it.
  std::string link_rel = cfg.get("link-relation");
  std::vector<double> y_row;
  if (!relations_file.empty() && !link_rel.empty()) {
    LoadedEmbeddings rel = read_embeddings_tsv(relations_file);
    for (std::size_t i = 0; i < rel.ids.size(); ++i) {
      if (rel.ids[i] == link_rel) {
        if (rel.dim != loaded.dim) {
          throw Error("relation vector dimension does not match embeddings");
        }
        y_row.assign(rel.rows.begin() + i * rel.dim,
                     rel.rows.begin() + (i + 1) * rel.dim);
      }
    }
  }
  Rng zero(0);
  std::vector<bool> wants_y = {!y_row.empty()};
  EmbeddingStore store = EmbeddingStore::random_init(
      g.num_nodes(), wants_y, loaded.dim, zero);
  std::fill(store.x_flat_mut().begin(), store.x_flat_mut().end(), 0.0);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < loaded.ids.size(); ++i) {
    auto node = g.find_node(loaded.ids[i]);
    if (!node) continue;
    auto row = store.node(*node);
    std::copy(loaded.rows.begin() + i * loaded.dim,
              loaded.rows.begin() + (i + 1) * loaded.dim, row.begin());
    ++matched;
  }
  if (matched == 0) throw Error("no embedding row matches a graph node id");
  if (!y_row.empty()) {
    std::copy(y_row.begin(), y_row.end(), store.relation(0).begin());
  }

  LabeledNodes labels = LabeledNodes::from_file(labels_file, g);
  auto seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  LossConfig loss_cfg{cfg.get_double("gamma"),
                      cfg.get("ir-norm") == "l1" ? Norm::L1 : Norm::L2};

  nlohmann::json jout;
  std::ostringstream tsv;
  tsv << "metric\tvalue\n";
  char buf[64];
  auto emit = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    tsv << name << '\t' << buf << '\n';
    jout[name] = std::stod(buf);
  };

  std::stringstream tasks(cfg.get("tasks"));
  std::string task;
  while (std::getline(tasks, task, ',')) {
    if (task == "clustering") {
      int k = static_cast<int>(cfg.get_int("clusters"));
      if (k == 0) k = labels.num_classes;
      emit("nmi", cluster_nmi(store, labels, k, seed + 1));
    } else if (task == "classify") {
      auto m = classify(store, labels, cfg.get_double("train-fraction"),
                        seed + 2);
      emit("macro_f1", m.macro_f1);
      emit("micro_f1", m.micro_f1);
    } else if (task == "linkpred") {
      if (link_rel.empty()) {
        throw Error("task linkpred: --link-relation is required");
      }
      RelationSpec spec = g.relation(link_rel);
      LinkSplit split =
          split_file.empty()
              ? make_link_split(g, spec, cfg.get_double("train-fraction"), seed)
              : read_link_split(split_file, g);
      if (split_file.empty()) {
        std::cerr << "note: no --split given; sampling a fresh holdout. For "
                     "the strict protocol, train the embeddings on the "
                     "training network of a saved split.\n";
      }
      PairFeature feature = cfg.get("feature") == "score" ? PairFeature::Score
                                                          : PairFeature::Hadamard;
      auto m = link_predict(store, g, spec, 0, split, feature, loss_cfg,
                            seed + 3);
      emit("auc", m.auc);
      emit("f1", m.f1);
    } else if (!task.empty()) {
      throw Error("unknown eval task: " + task);
    }
  }

  std::cout << tsv.str();
  if (!out_tsv.empty()) {
    std::ofstream t(out_tsv);
    if (!t) throw Error("cannot write " + out_tsv);
    t << tsv.str();
  }
  if (!out_json.empty()) {
    std::ofstream j(out_json);
    if (!j) throw Error("cannot write " + out_json);
    j << jout.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hinembed: relation-structure-aware heterogeneous network "
               "embedding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hinembed::kToolVersion);

  std::map<std::string, std::string> overrides;
  std::string config_file;

  auto add_stage_cmd = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_file, "key=value config file");
    add_config_options(cmd, overrides);
    return cmd;
  };

  CLI::App* run = add_stage_cmd(
      "run", "run the configured pipeline stages (analyze, extract, train, "
             "eval) with caching and a manifest");
  CLI::App* analyze =
      add_stage_cmd("analyze", "measure relations and categorize them AR/IR");
  CLI::App* extract =
      add_stage_cmd("extract", "materialize weighted node-relation triples");
  CLI::App* train = add_stage_cmd("train", "train embeddings");

  // eval works either on the pipeline's checkpoint (default) or on an
  // explicitly provided embedding TSV.
  CLI::App* eval = add_stage_cmd("eval", "evaluate embeddings on clustering, "
                                         "link prediction, classification");
  std::string eval_embeddings, eval_relations, eval_split;
  std::string eval_out_tsv, eval_out_json;
  eval->add_option("--embeddings", eval_embeddings,
                   "embedding TSV (node_id v1..vd); bypasses the pipeline "
                   "checkpoint");
  eval->add_option("--relation-vectors", eval_relations,
                   "relation-vector TSV matching --embeddings");
  eval->add_option("--split", eval_split, "link split file to reuse");
  eval->add_option("--metrics-tsv", eval_out_tsv, "also write metrics TSV here");
  eval->add_option("--metrics-json", eval_out_json,
                   "also write metrics JSON here");

  CLI::App* variants = app.add_subcommand(
      "variants", "train and evaluate the loss-assignment variants side by "
                  "side");
  std::string var_list = "joint,euclidean,translation,reversed";
  std::string var_out;
  variants->add_option("--config", config_file, "key=value config file");
  variants->add_option("--variants", var_list, "comma list of variants");
  variants->add_option("--out", var_out, "write the table TSV here");
  add_config_options(variants, overrides);

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a planted-community synthetic network");
  hinembed::SynthConfig sc;
  std::string synth_dir = "synth";
  synth->add_option("--out", synth_dir, "output directory");
  synth->add_option("--communities", sc.communities, "number of communities");
  synth->add_option("--members", sc.members_per_community,
                    "member nodes per community");
  synth->add_option("--hubs", sc.hubs_per_community, "hub nodes per community");
  synth->add_option("--affiliations", sc.affiliations_per_member,
                    "hub edges per member");
  synth->add_option("--peers", sc.peers_per_member, "peer edges per member");
  synth->add_option("--noise", sc.noise,
                    "cross-community probability for peer edges");
  synth->add_option("--affiliation-noise", sc.affiliation_noise,
                    "cross-community probability for hub edges");
  synth->add_option("--seed", sc.seed, "generator seed");

  CLI::App* exp = app.add_subcommand(
      "export", "write embedding/relation TSVs from a binary checkpoint");
  std::string exp_checkpoint, exp_embeddings = "embeddings.tsv",
                              exp_relations = "relations.tsv";
  exp->add_option("--checkpoint", exp_checkpoint, "checkpoint file")
      ->required();
  exp->add_option("--embeddings-out", exp_embeddings, "node embedding TSV");
  exp->add_option("--relations-out", exp_relations, "relation vector TSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || analyze->parsed() || extract->parsed() ||
        train->parsed() || eval->parsed()) {
      const char* forced = run->parsed()      ? ""
                           : analyze->parsed() ? "analyze"
                           : extract->parsed() ? "extract"
                           : train->parsed()   ? "train"
                                               : "eval";
      RunConfig cfg = build_config(config_file, overrides, forced);
      if (eval->parsed() && !eval_embeddings.empty()) {
        return cmd_eval_standalone(eval_embeddings, eval_relations,
                                   cfg.get("labels"), eval_split, cfg,
                                   eval_out_tsv, eval_out_json);
      }
      int rc = run_pipeline(cfg, std::cerr);
      // Surface the human-facing tables on stdout.
      std::filesystem::path outdir(cfg.get("outdir"));
      if (analyze->parsed()) print_file((outdir / "analysis.tsv").string());
      if (train->parsed()) print_file((outdir / "metrics.tsv").string());
      if (eval->parsed()) print_file((outdir / "eval.tsv").string());
      return rc;
    }

    if (variants->parsed()) {
      using namespace hinembed;
      RunConfig cfg = build_config(config_file, overrides, "");
      HeteroGraph g = load_graph(cfg.get("nodes"), cfg.get("edges"),
                                 cfg.get("schema"));
      std::vector<RelationSpec> specs;
      if (cfg.get("relations") == "all") {
        specs = g.all_relations();
      } else {
        std::stringstream ss(cfg.get("relations"));
        std::string name;
        while (std::getline(ss, name, ',')) specs.push_back(g.relation(name));
      }
      CategorizationPolicy policy;
      policy.d_threshold = cfg.get_double("d-threshold");
      RelationSet rels;
      rels.specs = specs;
      for (const auto& s : analyze_all(g, specs, policy)) {
        rels.categories.push_back(s.category);
      }
      LabeledNodes labels = LabeledNodes::from_file(cfg.get("labels"), g);
      EvalTasks tasks;
      tasks.clustering = cfg.get("tasks").find("clustering") != std::string::npos;
      tasks.classification = cfg.get("tasks").find("classify") != std::string::npos;
      tasks.link_prediction = cfg.get("tasks").find("linkpred") != std::string::npos;
      std::vector<Variant> vs;
      std::stringstream ss(var_list);
      std::string v;
      while (std::getline(ss, v, ',')) vs.push_back(variant_from_string(v));
      TrainConfig tc;
      tc.dim = static_cast<std::size_t>(cfg.get_int("dim"));
      tc.negatives = static_cast<int>(cfg.get_int("negatives"));
      tc.gamma = cfg.get_double("gamma");
      tc.lr = cfg.get_double("lr");
      tc.epochs = static_cast<int>(cfg.get_int("epochs"));
      tc.samples_per_epoch =
          static_cast<std::size_t>(cfg.get_int("samples-per-epoch"));
      tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
      auto outcomes = compare_variants(g, rels, labels,
                                       cfg.get("link-relation"), tasks, tc, vs);
      std::string table = format_variants_tsv(outcomes);
      std::cout << table;
      if (!var_out.empty()) {
        std::ofstream out(var_out);
        if (!out) throw Error("cannot write " + var_out);
        out << table;
      }
      return 0;
    }

    if (synth->parsed()) {
      hinembed::write_synth_files(synth_dir, sc);
      std::cerr << "wrote nodes.tsv, edges.tsv, schema.tsv, labels.tsv under "
                << synth_dir << "\n";
      return 0;
    }

    if (exp->parsed()) {
      using namespace hinembed;
      Checkpoint cp = load_checkpoint(exp_checkpoint);
      write_embeddings_tsv(exp_embeddings, cp.store, cp.node_names);
      write_relations_tsv(exp_relations, cp.store, cp.relation_names);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
