#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hinembed/analysis.hpp"
#include "hinembed/evaluation.hpp"
#include "hinembed/synth.hpp"
#include "support/fixtures.hpp"

using namespace hinembed;
using namespace testsupport;

namespace {

// Direct-count NMI, written independently of the library implementation.
double naive_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  double mi = 0;
  for (const auto& [key, nij] : cab) {
    double pij = nij / n;
    mi += pij * std::log(pij / ((ca[key.first] / n) * (cb[key.second] / n)));
  }
  auto entropy = [&](const std::map<int, double>& c) {
    double h = 0;
    for (const auto& [k, v] : c) h -= (v / n) * std::log(v / n);
    return h;
  };
  double ha = entropy(ca), hb = entropy(cb);
  return ha + hb > 0 ? 2 * mi / (ha + hb) : 0.0;
}

// O(n^2) pairwise-comparison AUC.
double naive_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) {
        wins += 1;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

// Gaussian blobs: `per` points around each of k well-separated centers.
struct Blobs {
  EmbeddingStore store;
  LabeledNodes labels;
};

Blobs make_blobs(int k, int per, std::size_t dim, double spread,
                 std::uint64_t seed) {
  Rng rng(seed);
  std::size_t n = static_cast<std::size_t>(k) * per;
  std::vector<bool> no_y;
  EmbeddingStore store = EmbeddingStore::random_init(n, no_y, dim, rng);
  std::map<NodeId, int> labels;
  for (int c = 0; c < k; ++c) {
    std::vector<double> center(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      center[d] = (d % static_cast<std::size_t>(k) == static_cast<std::size_t>(c))
                      ? 10.0
                      : 0.0;
    }
    for (int i = 0; i < per; ++i) {
      auto node = static_cast<NodeId>(c * per + i);
      auto row = store.node(node);
      for (std::size_t d = 0; d < dim; ++d) {
        row[d] = center[d] + rng.uniform(-spread, spread);
      }
      labels[node] = c;
    }
  }
  return Blobs{std::move(store), LabeledNodes::from_map(labels)};
}

}  // namespace

TEST_CASE("NMI trivial partitions") {
  std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  CHECK(normalized_mutual_information(truth, truth) == doctest::Approx(1.0));
  std::vector<int> relabeled = {2, 2, 0, 0, 1, 1};
  CHECK(normalized_mutual_information(relabeled, truth) ==
        doctest::Approx(1.0));
  std::vector<int> one_cluster = {0, 0, 0, 0, 0, 0};
  CHECK(normalized_mutual_information(one_cluster, truth) == 0.0);
}

TEST_CASE("NMI is symmetric, permutation-invariant, and matches the naive count") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 50;
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.uniform_index(4));
      b[i] = static_cast<int>(rng.uniform_index(3));
    }
    double ab = normalized_mutual_information(a, b);
    double ba = normalized_mutual_information(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab == doctest::Approx(naive_nmi(a, b)).epsilon(1e-9));

    std::vector<int> permuted(n);
    std::vector<int> mapping = {2, 0, 3, 1};
    for (std::size_t i = 0; i < n; ++i) permuted[i] = mapping[a[i]];
    CHECK(normalized_mutual_information(permuted, b) ==
          doctest::Approx(ab).epsilon(1e-9));
  }
}

TEST_CASE("k-means recovers well-separated blobs") {
  Blobs blobs = make_blobs(4, 50, 16, 1.0, 21);
  double nmi = cluster_nmi(blobs.store, blobs.labels, 4, 17);
  CHECK(nmi >= 0.99);
}

TEST_CASE("cluster_nmi validates its preconditions") {
  Blobs blobs = make_blobs(2, 2, 4, 0.1, 3);
  CHECK_THROWS_WITH_AS(cluster_nmi(blobs.store, blobs.labels, 5, 1),
                       doctest::Contains("fewer labeled nodes"), Error);
}

TEST_CASE("AUC matches the pairwise oracle and resists monotone transforms") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 50;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool saw[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so ties actually occur.
      scores[i] = std::round(rng.uniform(-2, 2) * 4) / 4.0;
      labels[i] = rng.coin();
      saw[labels[i]] = true;
    }
    if (!saw[0] || !saw[1]) continue;
    double auc = auc_score(scores, labels);
    CHECK(auc == doctest::Approx(naive_auc(scores, labels)).epsilon(1e-9));

    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) {
      transformed[i] = std::exp(3.0 * scores[i]) + 7.0;  // strictly monotone
    }
    CHECK(auc_score(transformed, labels) == doctest::Approx(auc).epsilon(1e-12));
  }
}

TEST_CASE("F1 on hand-computed six-point confusion fixtures") {
  // Balanced binary truth; the all-ones predictor.
  std::vector<int> truth = {1, 1, 1, 0, 0, 0};
  std::vector<int> all_one = {1, 1, 1, 1, 1, 1};
  // tp=3 fp=3 fn=0: precision .5, recall 1 -> F1 = 2/3.
  CHECK(binary_f1(all_one, truth) == doctest::Approx(2.0 / 3.0));

  // Multiclass micro equals accuracy for single-label data; macro averages
  // the per-class F1 (class 0: F1 = 2/3, class 1: 0) -> 1/3.
  F1Scores f1 = multiclass_f1(std::vector<int>{0, 0, 0, 0, 0, 0}, truth, 2);
  CHECK(f1.micro == doctest::Approx(0.5));
  CHECK(f1.macro == doctest::Approx(1.0 / 3.0));

  // A mixed prediction checked against a hand confusion matrix:
  // preds {1,0,1,0,1,0} vs truth: tp1=2 fp1=1 fn1=1 -> F1_1 = 2/3;
  // tp0=2 fp0=1 fn0=1 -> F1_0 = 2/3; micro = accuracy = 4/6.
  F1Scores mixed = multiclass_f1(std::vector<int>{1, 0, 1, 0, 1, 0}, truth, 2);
  CHECK(mixed.micro == doctest::Approx(4.0 / 6.0));
  CHECK(mixed.macro == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("logistic regression separates blobs and rejects degenerate labels") {
  Blobs blobs = make_blobs(2, 40, 8, 1.0, 11);
  std::vector<double> feats;
  std::vector<int> ys;
  for (const auto& [node, label] : blobs.labels.items) {
    auto row = blobs.store.node(node);
    feats.insert(feats.end(), row.begin(), row.end());
    ys.push_back(label);
  }
  LogisticModel model = fit_logistic(feats, ys.size(), 8, ys);
  int correct = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    std::span<const double> x{feats.data() + i * 8, 8};
    correct += (model.probability(x) >= 0.5 ? 1 : 0) == ys[i];
  }
  CHECK(correct == static_cast<int>(ys.size()));

  std::vector<int> ones(ys.size(), 1);
  CHECK_THROWS_WITH_AS(fit_logistic(feats, ys.size(), 8, ones),
                       doctest::Contains("one class"), Error);
}

TEST_CASE("classification on the blob fixture") {
  Blobs blobs = make_blobs(4, 50, 16, 1.0, 29);
  ClassifyMetrics m = classify(blobs.store, blobs.labels, 0.8, 7);
  CHECK(m.micro_f1 >= 0.95);
  CHECK(m.macro_f1 >= 0.95);

  SUBCASE("perfect predictor bound") {
    // With spread 0 every class collapses to its center: exact separation.
    Blobs tight = make_blobs(3, 10, 8, 0.0, 31);
    ClassifyMetrics exact = classify(tight.store, tight.labels, 0.8, 7);
    CHECK(exact.micro_f1 == doctest::Approx(1.0));
    CHECK(exact.macro_f1 == doctest::Approx(1.0));
  }
  SUBCASE("a class with fewer than 2 labeled nodes is rejected") {
    std::map<NodeId, int> labels = {{0, 0}, {1, 0}, {2, 1}};
    CHECK_THROWS_WITH_AS(
        classify(blobs.store, LabeledNodes::from_map(labels), 0.8, 7),
        doctest::Contains("fewer than 2"), Error);
  }
}

TEST_CASE("chance-level micro F1 for uniform predictions over 4 classes") {
  // Uniform-random predictions on balanced classes sit near accuracy 1/4.
  Rng rng(41);
  std::vector<int> truth, preds;
  for (int i = 0; i < 8000; ++i) {
    truth.push_back(i % 4);
    preds.push_back(static_cast<int>(rng.uniform_index(4)));
  }
  F1Scores f1 = multiclass_f1(preds, truth, 4);
  CHECK(f1.micro == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("link split respects its invariants") {
  Rng rng(3);
  HeteroGraph g = random_graph(rng, 60, 200);
  RelationSpec xy = g.relation("XY");
  LinkSplit split = make_link_split(g, xy, 0.8, 99);

  std::set<std::pair<NodeId, NodeId>> train(split.train_pos.begin(),
                                            split.train_pos.end());
  std::set<std::pair<NodeId, NodeId>> test(split.test_pos.begin(),
                                           split.test_pos.end());
  for (const auto& p : test) CHECK_FALSE(train.contains(p));

  std::set<std::pair<NodeId, NodeId>> all_edges;
  for (const auto& e : g.edges()) {
    if (e.type == xy.edge_type) {
      all_edges.insert({e.src, e.dst});
      all_edges.insert({e.dst, e.src});
    }
  }
  REQUIRE(!split.test_neg.empty());
  CHECK(split.test_neg.size() == split.test_pos.size());
  for (const auto& [u, v] : split.test_neg) {
    CHECK_FALSE(all_edges.contains({u, v}));
    CHECK(g.node_type(u) == xy.src_type);
    CHECK(g.node_type(v) == xy.dst_type);
  }

  HeteroGraph train_net = training_network(g, xy, split);
  std::size_t kept = 0;
  for (const auto& e : train_net.edges()) kept += e.type == xy.edge_type;
  std::set<std::pair<NodeId, NodeId>> kept_pairs;
  for (const auto& e : train_net.edges()) {
    if (e.type == xy.edge_type) kept_pairs.insert({e.src, e.dst});
  }
  CHECK(kept_pairs.size() == train.size());
  CHECK(train_net.num_nodes() == g.num_nodes());

  SUBCASE("split file round-trip") {
    std::string dir = (std::filesystem::temp_directory_path() /
                       "hinembed_eval_tests").string();
    std::filesystem::create_directories(dir);
    write_link_split(dir + "/split.tsv", split, g);
    LinkSplit back = read_link_split(dir + "/split.tsv", g);
    CHECK(back.relation == split.relation);
    CHECK(back.seed == split.seed);
    CHECK(back.train_pos == split.train_pos);
    CHECK(back.test_pos == split.test_pos);
    CHECK(back.test_neg == split.test_neg);
  }
}

TEST_CASE("link prediction baselines") {
  // Embeddings with planted pair structure: linked pairs share a sign
  // pattern, so Hadamard features are separable; random embeddings are not.
  Rng rng(57);
  HeteroGraph g;
  TypeId tu = g.intern_node_type("U");
  TypeId tv = g.intern_node_type("V");
  TypeId uv = g.intern_edge_type("UV", tu, tv, true);
  const int n = 120;
  std::vector<NodeId> us, vs;
  for (int i = 0; i < n; ++i) us.push_back(g.add_node("u" + std::to_string(i), tu));
  for (int i = 0; i < n; ++i) vs.push_back(g.add_node("v" + std::to_string(i), tv));
  for (int i = 0; i < n; ++i) g.add_edge(us[i], vs[i], uv);
  g.finalize();
  RelationSpec rel = g.relation("UV");
  LinkSplit split = make_link_split(g, rel, 0.8, 5);

  SUBCASE("no-signal embeddings sit near AUC 0.5") {
    std::vector<bool> no_y;
    Rng r2(91);
    EmbeddingStore store =
        EmbeddingStore::random_init(g.num_nodes(), no_y, 16, r2);
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) {
      LinkSplit sp = make_link_split(g, rel, 0.8, 100 + s);
      LinkMetrics m = link_predict(store, g, rel, 0, sp, PairFeature::Hadamard,
                                   LossConfig{}, s);
      mean += m.auc;
    }
    mean /= 8;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.2));
  }
  SUBCASE("separable features reach AUC 1") {
    // Planted: matched pairs get identical +/- sign patterns.
    std::vector<bool> no_y;
    Rng r3(13);
    EmbeddingStore store =
        EmbeddingStore::random_init(g.num_nodes(), no_y, 16, r3);
    for (int i = 0; i < n; ++i) {
      auto ru = store.node(us[i]);
      auto rv = store.node(vs[i]);
      for (std::size_t d = 0; d < 16; ++d) {
        double sign = r3.coin() ? 1.0 : -1.0;
        ru[d] = sign * (1.0 + r3.uniform01());
        rv[d] = sign * (1.0 + r3.uniform01());
      }
    }
    LinkMetrics m = link_predict(store, g, rel, 0, split,
                                 PairFeature::Hadamard, LossConfig{}, 77);
    CHECK(m.auc == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m.f1 >= 0.9);
  }
  SUBCASE("score feature ranks by model distance") {
    std::vector<bool> no_y;
    Rng r4(19);
    EmbeddingStore store =
        EmbeddingStore::random_init(g.num_nodes(), no_y, 8, r4);
    for (int i = 0; i < n; ++i) {
      auto ru = store.node(us[i]);
      auto rv = store.node(vs[i]);
      std::copy(ru.begin(), ru.end(), rv.begin());  // linked pairs coincide
    }
    LinkMetrics m = link_predict(store, g, rel, 0, split, PairFeature::Score,
                                 LossConfig{}, 78);
    CHECK(m.auc == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("empty test set is rejected") {
    LinkSplit empty = split;
    empty.test_pos.clear();
    std::vector<bool> no_y;
    Rng r5(2);
    EmbeddingStore store = EmbeddingStore::random_init(g.num_nodes(), no_y, 8, r5);
    CHECK_THROWS_WITH_AS(link_predict(store, g, rel, 0, empty,
                                      PairFeature::Hadamard, LossConfig{}, 1),
                         doctest::Contains("empty"), Error);
  }
}

TEST_CASE("variant comparison table is deterministic and complete") {
  SynthConfig sc;
  sc.communities = 3;
  sc.members_per_community = 30;
  sc.hubs_per_community = 2;
  sc.peers_per_member = 4;
  sc.noise = 0.1;
  sc.seed = 44;
  SynthData data = synthesize(sc);
  RelationSet rels;
  rels.specs = data.graph.all_relations();
  for (const auto& s : analyze_all(data.graph, rels.specs,
                                   CategorizationPolicy{})) {
    rels.categories.push_back(s.category);
  }
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 3;
  cfg.lr = 0.02;
  cfg.seed = 6;
  EvalTasks tasks;  // all three

  auto a = compare_variants(data.graph, rels, data.labels, "MM", tasks, cfg,
                            {Variant::Joint, Variant::EuclideanOnly});
  auto b = compare_variants(data.graph, rels, data.labels, "MM", tasks, cfg,
                            {Variant::Joint, Variant::EuclideanOnly});
  CHECK(format_variants_tsv(a) == format_variants_tsv(b));
  REQUIRE(a.size() == 2);
  CHECK(a[0].nmi.has_value());
  CHECK(a[0].link.has_value());
  CHECK(a[0].cls.has_value());

  auto single = compare_variants(data.graph, rels, data.labels, "MM", tasks,
                                 cfg, {Variant::Reversed});
  CHECK(single.size() == 1);
  int rows = 0;
  for (char c : format_variants_tsv(single)) rows += c == '\n';
  CHECK(rows == 2);  // header + one row
}
