#include "hinembed/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hinembed/analysis.hpp"
#include "hinembed/error.hpp"
#include "hinembed/evaluation.hpp"
#include "hinembed/graph.hpp"
#include "hinembed/model.hpp"
#include "hinembed/trainer.hpp"
#include "hinembed/triples.hpp"

namespace hinembed {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<ConfigEntry>& config_entries() {
  static const std::vector<ConfigEntry> entries = {
      {"nodes", "", "nodes TSV (node_id<TAB>node_type)"},
      {"edges", "", "edges TSV (src<TAB>dst<TAB>edge_type[<TAB>weight])"},
      {"schema", "", "schema TSV (edge types and meta-paths)"},
      {"labels", "", "labels TSV (node_id<TAB>label), needed by eval"},
      {"relations", "all", "comma list of relation names, or 'all'"},
      {"outdir", "out", "output directory for artifacts and the manifest"},
      {"stages", "analyze,extract,train,eval",
       "comma list of pipeline stages to run"},
      {"seed", "1", "seed for every random choice in the run"},
      {"deterministic", "true",
       "single-threaded reproducible mode; fixes manifest timestamps"},
      {"threads", "1", "worker threads for training (>1 is nondeterministic)"},
      {"measure", "degree_ratio",
       "categorization measure: degree_ratio|sparsity|both"},
      {"d-threshold", "10", "degree-ratio cutoff separating AR from IR"},
      {"s-threshold", "0.1", "sparsity cutoff separating AR from IR"},
      {"category-overrides", "",
       "manual categories, e.g. 'AP=AR,PC=IR' (wins over measures)"},
      {"dim", "100", "embedding dimension"},
      {"negatives", "3", "corrupted samples per positive"},
      {"gamma", "1", "hinge margin"},
      {"lr", "0.005", "SGD learning rate"},
      {"lr-decay", "false", "linearly decay the learning rate"},
      {"epochs", "10", "training epochs"},
      {"samples-per-epoch", "0", "positive draws per epoch; 0 = triple count"},
      {"variant", "joint",
       "loss assignment: joint|euclidean|translation|reversed"},
      {"ir-norm", "l2", "translation-score norm: l1|l2"},
      {"filter-negatives", "false",
       "resample corruptions that collide with stored positives"},
      {"max-row-norm", "0", "cap on embedding row norms; 0 = off"},
      {"checkpoint-every", "0", "epochs between checkpoints; 0 = end only"},
      {"triples", "", "pre-extracted triples TSV (skips extraction)"},
      {"analysis", "", "pre-computed analysis TSV (skips categorization)"},
      {"tasks", "clustering,linkpred,classify",
       "eval tasks: any of clustering,linkpred,classify"},
      {"clusters", "0", "cluster count for clustering; 0 = label classes"},
      {"link-relation", "", "atomic relation to hold out for link prediction"},
      {"train-fraction", "0.8", "train share for link/classify splits"},
      {"feature", "hadamard", "link-pair features: hadamard|score"},
  };
  return entries;
}

RunConfig::RunConfig() {
  for (const auto& e : config_entries()) values_[e.key] = e.def;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("unknown config key: " + key);
  it->second = value;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path, lineno, "expected key=value");
    }
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return cfg;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("unknown config key: " + key);
  return it->second;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config key " + key + ": expected a boolean, got '" + v + "'");
}

long long RunConfig::get_int(const std::string& key) const {
  try {
    return std::stoll(get(key));
  } catch (const std::exception&) {
    throw Error("config key " + key + ": expected an integer, got '" +
                get(key) + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw Error("config key " + key + ": expected a number, got '" + get(key) +
                "'");
  }
}

bool RunConfig::is_set(const std::string& key) const {
  return !get(key).empty();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CategorizationPolicy policy_from(const RunConfig& cfg) {
  CategorizationPolicy policy;
  const std::string& m = cfg.get("measure");
  if (m == "degree_ratio") {
    policy.measure = Measure::DegreeRatio;
  } else if (m == "sparsity") {
    policy.measure = Measure::Sparsity;
  } else if (m == "both") {
    policy.measure = Measure::Both;
  } else {
    throw Error("config key measure: unknown value '" + m + "'");
  }
  policy.d_threshold = cfg.get_double("d-threshold");
  policy.s_threshold = cfg.get_double("s-threshold");
  for (const auto& item : split_list(cfg.get("category-overrides"))) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error("category-overrides: expected NAME=AR|IR, got '" + item + "'");
    }
    std::string name = item.substr(0, eq);
    std::string cat = item.substr(eq + 1);
    if (cat == "AR") {
      policy.manual_overrides[name] = Category::AR;
    } else if (cat == "IR") {
      policy.manual_overrides[name] = Category::IR;
    } else {
      throw Error("category-overrides: unknown category '" + cat + "'");
    }
  }
  return policy;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.dim = static_cast<std::size_t>(cfg.get_int("dim"));
  tc.negatives = static_cast<int>(cfg.get_int("negatives"));
  tc.gamma = cfg.get_double("gamma");
  tc.lr = cfg.get_double("lr");
  tc.lr_decay = cfg.get_bool("lr-decay");
  tc.epochs = static_cast<int>(cfg.get_int("epochs"));
  tc.samples_per_epoch = static_cast<std::size_t>(cfg.get_int("samples-per-epoch"));
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  tc.variant = variant_from_string(cfg.get("variant"));
  const std::string& norm = cfg.get("ir-norm");
  if (norm == "l1" || norm == "L1") {
    tc.ir_norm = Norm::L1;
  } else if (norm == "l2" || norm == "L2") {
    tc.ir_norm = Norm::L2;
  } else {
    throw Error("config key ir-norm: expected l1 or l2, got '" + norm + "'");
  }
  tc.threads = cfg.get_bool("deterministic")
                   ? 1
                   : static_cast<int>(cfg.get_int("threads"));
  tc.filter_corrupted_positives = cfg.get_bool("filter-negatives");
  tc.max_row_norm = cfg.get_double("max-row-norm");
  tc.checkpoint_every = static_cast<int>(cfg.get_int("checkpoint-every"));
  return tc;
}

std::string now_iso8601(bool deterministic) {
  if (deterministic) return "1970-01-01T00:00:00Z";
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct StagePlan {
  std::string name;
  std::vector<std::string> inputs;   // existing files
  std::vector<std::string> outputs;  // produced files
};

json digest_map(const std::vector<std::string>& paths) {
  json out = json::object();
  for (const auto& p : paths) out[p] = file_digest(p);
  return out;
}

}  // namespace

int run_pipeline(const RunConfig& cfg, std::ostream& log) {
  for (const char* req : {"nodes", "edges", "schema"}) {
    if (!cfg.is_set(req)) throw Error(std::string("config key ") + req +
                                      " is required");
  }
  const bool deterministic = cfg.get_bool("deterministic");
  const fs::path outdir(cfg.get("outdir"));
  fs::create_directories(outdir);
  const std::string manifest_path = (outdir / "manifest.json").string();

  json previous;
  if (fs::exists(manifest_path)) {
    try {
      std::ifstream in(manifest_path);
      in >> previous;
    } catch (const std::exception&) {
      previous = json();  // unreadable manifest: recompute everything
    }
  }

  json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["timestamp"] = now_iso8601(deterministic);
  manifest["deterministic"] = deterministic;
  manifest["seed"] = cfg.get_int("seed");
  json snapshot = json::object();
  for (const auto& [k, v] : cfg.values()) snapshot[k] = v;
  manifest["config"] = snapshot;
  manifest["stages"] = json::object();

  auto write_manifest = [&]() {
    std::ofstream out(manifest_path);
    if (!out) throw Error("cannot write " + manifest_path);
    out << manifest.dump(2) << '\n';
  };
  // The manifest exists (with config + input digests) before any stage
  // output is finalized.
  write_manifest();

  auto stage_unchanged = [&](const StagePlan& plan, const json& inputs) {
    if (!previous.contains("stages") || !previous["stages"].contains(plan.name)) {
      return false;
    }
    const json& prev = previous["stages"][plan.name];
    if (!prev.contains("inputs") || prev["inputs"] != inputs) return false;
    if (previous.value("config", json()) != manifest["config"]) return false;
    for (const auto& o : plan.outputs) {
      if (!fs::exists(o)) return false;
    }
    if (!prev.contains("outputs")) return false;
    for (const auto& o : plan.outputs) {
      if (!prev["outputs"].contains(o) || prev["outputs"][o] != file_digest(o)) {
        return false;
      }
    }
    return true;
  };

  auto run_stage = [&](const StagePlan& plan, const auto& body) {
    json inputs = digest_map(plan.inputs);
    json& entry = manifest["stages"][plan.name];
    entry["inputs"] = inputs;
    if (stage_unchanged(plan, inputs)) {
      log << "[" << plan.name << "] unchanged, skipping\n";
      entry["skipped"] = true;
      entry["outputs"] = digest_map(plan.outputs);
      write_manifest();
      return;
    }
    entry["skipped"] = false;
    write_manifest();
    try {
      body();
    } catch (const Error& e) {
      throw Error("stage " + plan.name + ": " + e.what());
    }
    entry["outputs"] = digest_map(plan.outputs);
    write_manifest();
    log << "[" << plan.name << "] done\n";
  };

  const std::string nodes = cfg.get("nodes");
  const std::string edges = cfg.get("edges");
  const std::string schema = cfg.get("schema");
  HeteroGraph g = load_graph(nodes, edges, schema);

  std::vector<RelationSpec> specs;
  if (cfg.get("relations") == "all") {
    specs = g.all_relations();
  } else {
    for (const auto& name : split_list(cfg.get("relations"))) {
      specs.push_back(g.relation(name));
    }
  }
  if (specs.empty()) throw Error("no relations configured");

  const CategorizationPolicy policy = policy_from(cfg);
  const std::string analysis_path = (outdir / "analysis.tsv").string();
  const std::string triples_path = (outdir / "triples.tsv").string();
  const std::string embeddings_path = (outdir / "embeddings.tsv").string();
  const std::string relations_path = (outdir / "relations.tsv").string();
  const std::string checkpoint_path = (outdir / "checkpoint.bin").string();
  const std::string metrics_path = (outdir / "metrics.tsv").string();
  const std::string eval_tsv_path = (outdir / "eval.tsv").string();
  const std::string eval_json_path = (outdir / "eval.json").string();

  auto stages = split_list(cfg.get("stages"));
  auto wants = [&](const char* s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  };
  for (const auto& s : stages) {
    if (s != "analyze" && s != "extract" && s != "train" && s != "eval") {
      throw Error("unknown stage: " + s);
    }
  }

  if (wants("analyze")) {
    StagePlan plan{"analyze", {nodes, edges, schema}, {analysis_path}};
    run_stage(plan, [&]() {
      auto stats = analyze_all(g, specs, policy);
      write_analysis_tsv(analysis_path, stats);
    });
  }

  if (wants("extract")) {
    StagePlan plan{"extract", {nodes, edges, schema}, {triples_path}};
    run_stage(plan, [&]() {
      RelationSet rels;
      rels.specs = specs;
      rels.categories.assign(specs.size(), Category::IR);
      std::vector<std::vector<Triple>> per_rel(specs.size());
      for (std::uint32_t i = 0; i < specs.size(); ++i) {
        per_rel[i] = extract(g, specs[i], i);
      }
      write_triples_tsv(triples_path, per_rel, g, rels);
    });
  }

  // Relation categories for train/eval: an explicit analysis file wins, then
  // the analyze stage's output, then a fresh in-memory analysis.
  auto resolve_rels = [&]() {
    RelationSet rels;
    rels.specs = specs;
    std::map<std::string, Category> cats;
    std::string src = cfg.is_set("analysis") ? cfg.get("analysis")
                      : fs::exists(analysis_path) ? analysis_path
                                                  : std::string();
    if (!src.empty()) {
      cats = read_categories_tsv(src);
    } else {
      for (const auto& s : analyze_all(g, specs, policy)) {
        cats[s.name] = s.category;
      }
    }
    for (const auto& spec : specs) {
      auto it = cats.find(spec.name);
      if (it == cats.end()) {
        throw Error("no category recorded for relation " + spec.name);
      }
      rels.categories.push_back(it->second);
    }
    return rels;
  };

  if (wants("train")) {
    std::string triples_src =
        cfg.is_set("triples") ? cfg.get("triples") : triples_path;
    StagePlan plan{"train",
                   {nodes, edges, schema, triples_src},
                   {embeddings_path, relations_path, checkpoint_path,
                    metrics_path}};
    run_stage(plan, [&]() {
      RelationSet rels = resolve_rels();
      std::vector<std::vector<Triple>> per_rel;
      if (fs::exists(triples_src)) {
        per_rel = read_triples_tsv(triples_src, g, rels);
      } else {
        per_rel.resize(specs.size());
        for (std::uint32_t i = 0; i < specs.size(); ++i) {
          per_rel[i] = extract(g, specs[i], i);
        }
      }
      TripleStore store = TripleStore::build(per_rel, rels);
      TrainConfig tc = train_config_from(cfg);
      tc.checkpoint_path = checkpoint_path;
      TrainResult result = train(g, rels, store, tc);
      write_embeddings_tsv(embeddings_path, result.store, g.node_names());
      std::vector<std::string> rel_names;
      for (const auto& s : rels.specs) rel_names.push_back(s.name);
      write_relations_tsv(relations_path, result.store, rel_names);
      write_metrics_tsv(metrics_path, result.report);
    });
  }

  if (wants("eval")) {
    if (!cfg.is_set("labels")) {
      throw Error("stage eval: config key labels is required");
    }
    StagePlan plan{"eval",
                   {nodes, edges, schema, cfg.get("labels"), checkpoint_path},
                   {eval_tsv_path, eval_json_path}};
    run_stage(plan, [&]() {
      RelationSet rels = resolve_rels();
      Checkpoint cp = load_checkpoint(checkpoint_path);
      LabeledNodes labels = LabeledNodes::from_file(cfg.get("labels"), g);
      auto tc = train_config_from(cfg);
      auto seed = tc.seed;
      auto tasks = split_list(cfg.get("tasks"));
      json jout;
      std::ostringstream tsv;
      tsv << "metric\tvalue\n";
      char buf[64];
      auto emit = [&](const std::string& name, double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        tsv << name << '\t' << buf << '\n';
        jout[name] = std::stod(buf);
      };
      for (const auto& task : tasks) {
        if (task == "clustering") {
          int k = static_cast<int>(cfg.get_int("clusters"));
          if (k == 0) k = labels.num_classes;
          emit("nmi", cluster_nmi(cp.store, labels, k, seed + 1));
        } else if (task == "classify") {
          auto m = classify(cp.store, labels, cfg.get_double("train-fraction"),
                            seed + 2);
          emit("macro_f1", m.macro_f1);
          emit("micro_f1", m.micro_f1);
        } else if (task == "linkpred") {
          if (!cfg.is_set("link-relation")) {
            throw Error("task linkpred: config key link-relation is required");
          }
          // The protocol holds out 20% of the link relation's edges and
          // trains fresh embeddings on the remaining network.
          RelationSpec link_spec = g.relation(cfg.get("link-relation"));
          auto rel_index = static_cast<std::uint32_t>(
              rels.index_of(cfg.get("link-relation")));
          LinkSplit split = make_link_split(
              g, link_spec, cfg.get_double("train-fraction"), seed);
          write_link_split((outdir / "link_split.tsv").string(), split, g);
          HeteroGraph train_net = training_network(g, link_spec, split);
          std::vector<std::vector<Triple>> per_rel(rels.size());
          for (std::uint32_t i = 0; i < rels.size(); ++i) {
            per_rel[i] = extract(train_net, rels.specs[i], i);
          }
          TripleStore ho_store = TripleStore::build(per_rel, rels);
          TrainConfig ho_cfg = tc;
          ho_cfg.checkpoint_path.clear();
          TrainResult ho = train(train_net, rels, ho_store, ho_cfg);
          PairFeature feature = cfg.get("feature") == "score"
                                    ? PairFeature::Score
                                    : PairFeature::Hadamard;
          auto m = link_predict(ho.store, g, link_spec, rel_index, split,
                                feature, LossConfig{tc.gamma, tc.ir_norm},
                                seed + 3);
          emit("auc", m.auc);
          emit("f1", m.f1);
        } else {
          throw Error("unknown eval task: " + task);
        }
      }
      std::ofstream t(eval_tsv_path);
      if (!t) throw Error("cannot write " + eval_tsv_path);
      t << tsv.str();
      std::ofstream j(eval_json_path);
      if (!j) throw Error("cannot write " + eval_json_path);
      j << jout.dump(2) << '\n';
    });
  }

  write_manifest();
  return 0;
}

}  // namespace hinembed
