#include "hinembed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hinembed/error.hpp"

namespace hinembed {

LabeledNodes LabeledNodes::from_map(const std::map<NodeId, int>& labels) {
  LabeledNodes out;
  int max_label = -1;
  for (const auto& [node, label] : labels) {
    if (label < 0) throw Error("labels must be nonnegative");
    out.items.emplace_back(node, label);
    max_label = std::max(max_label, label);
  }
  out.num_classes = max_label + 1;
  return out;
}

LabeledNodes LabeledNodes::from_file(const std::string& path,
                                     const HeteroGraph& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  LabeledNodes out;
  std::map<std::string, int> interned;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path, lineno, "expected: node_id<TAB>label");
    }
    std::string id = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    auto node = g.find_node(id);
    if (!node) throw ParseError(path, lineno, "unknown node id: " + id);
    auto [it, inserted] =
        interned.emplace(label, static_cast<int>(interned.size()));
    out.items.emplace_back(*node, it->second);
  }
  out.num_classes = static_cast<int>(interned.size());
  return out;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

KMeansResult kmeans_once(std::span<const double> data, std::size_t n,
                         std::size_t dim, int k, Rng& rng, double tol,
                         int max_iter) {
  // k-means++ seeding.
  std::vector<double> centers(static_cast<std::size_t>(k) * dim);
  std::vector<double> min_d2(n, 0.0);
  std::size_t first = rng.uniform_index(n);
  std::copy_n(data.data() + first * dim, dim, centers.data());
  for (std::size_t i = 0; i < n; ++i) {
    min_d2[i] = sq_dist(data.data() + i * dim, centers.data(), dim);
  }
  for (int c = 1; c < k; ++c) {
    double total = std::accumulate(min_d2.begin(), min_d2.end(), 0.0);
    std::size_t chosen;
    if (total <= 0.0) {
      chosen = rng.uniform_index(n);
    } else {
      double x = rng.uniform01() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= x) {
          chosen = i;
          break;
        }
      }
    }
    double* center = centers.data() + static_cast<std::size_t>(c) * dim;
    std::copy_n(data.data() + chosen * dim, dim, center);
    for (std::size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], sq_dist(data.data() + i * dim, center, dim));
    }
  }

  std::vector<int> assignment(n, 0);
  std::vector<double> sums(static_cast<std::size_t>(k) * dim);
  std::vector<std::size_t> counts(k);
  double prev_inertia = -1.0;
  double inertia = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = data.data() + i * dim;
      int best = 0;
      double best_d = sq_dist(row, centers.data(), dim);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(row, centers.data() + static_cast<std::size_t>(c) * dim,
                           dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
      inertia += best_d;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = data.data() + i * dim;
      double* sum = sums.data() + static_cast<std::size_t>(assignment[i]) * dim;
      for (std::size_t d = 0; d < dim; ++d) sum[d] += row[d];
      ++counts[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      double* center = centers.data() + static_cast<std::size_t>(c) * dim;
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double* row = data.data() + i * dim;
          double d = sq_dist(
              row,
              centers.data() + static_cast<std::size_t>(assignment[i]) * dim,
              dim);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        std::copy_n(data.data() + far * dim, dim, center);
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        center[d] = sums[static_cast<std::size_t>(c) * dim + d] /
                    static_cast<double>(counts[c]);
      }
    }
    if (prev_inertia >= 0.0 &&
        std::abs(prev_inertia - inertia) <= tol * std::max(prev_inertia, 1e-12)) {
      break;
    }
    prev_inertia = inertia;
  }
  return KMeansResult{std::move(assignment), inertia};
}

}  // namespace

KMeansResult kmeans(std::span<const double> data, std::size_t n,
                    std::size_t dim, int k, std::uint64_t seed, int restarts,
                    double tol, int max_iter) {
  if (k < 1) throw Error("k must be >= 1");
  if (n < static_cast<std::size_t>(k)) {
    throw Error("fewer points than clusters");
  }
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = kmeans_once(data, n, dim, k, rng, tol, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

double normalized_mutual_information(std::span<const int> a,
                                     std::span<const int> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error("NMI requires two equal-length nonempty labelings");
  }
  int ka = *std::max_element(a.begin(), a.end()) + 1;
  int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> joint(static_cast<std::size_t>(ka) * kb, 0.0);
  std::vector<double> pa(ka, 0.0), pb(kb, 0.0);
  double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      double pij = joint[static_cast<std::size_t>(i) * kb + j] / n;
      if (pij > 0.0) {
        mi += pij * std::log(pij * n * n / (pa[i] * pb[j]));
      }
    }
  }
  for (int i = 0; i < ka; ++i) {
    if (pa[i] > 0.0) ha -= (pa[i] / n) * std::log(pa[i] / n);
  }
  for (int j = 0; j < kb; ++j) {
    if (pb[j] > 0.0) hb -= (pb[j] / n) * std::log(pb[j] / n);
  }
  if (ha + hb <= 0.0) return 0.0;
  return 2.0 * mi / (ha + hb);
}

double cluster_nmi(const EmbeddingStore& store, const LabeledNodes& labels,
                   int k, std::uint64_t seed) {
  if (labels.items.size() < static_cast<std::size_t>(k)) {
    throw Error("fewer labeled nodes than clusters");
  }
  std::size_t dim = store.dim();
  std::vector<double> data(labels.items.size() * dim);
  std::vector<int> truth(labels.items.size());
  for (std::size_t i = 0; i < labels.items.size(); ++i) {
    auto [node, label] = labels.items[i];
    if (node >= store.num_nodes()) {
      throw Error("labeled node is not in the embedding store");
    }
    auto row = store.node(node);
    std::copy(row.begin(), row.end(), data.begin() + i * dim);
    truth[i] = label;
  }
  KMeansResult km = kmeans(data, labels.items.size(), dim, k, seed);
  return normalized_mutual_information(km.assignment, truth);
}

// ---------------------------------------------------------------------------
// logistic regression
// ---------------------------------------------------------------------------

double LogisticModel::decision(std::span<const double> x) const {
  double z = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
  return z;
}

double LogisticModel::probability(std::span<const double> x) const {
  double z = decision(x);
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticModel fit_logistic(std::span<const double> features, std::size_t n,
                           std::size_t dim, std::span<const int> labels01,
                           double lambda, double tol, int max_iter) {
  if (labels01.size() != n || features.size() != n * dim) {
    throw Error("feature/label shape mismatch");
  }
  bool has0 = false, has1 = false;
  for (int y : labels01) (y ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw Error("degenerate training labels: only one class present");
  }

  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  std::vector<double> grad(dim + 1), prev_grad(dim + 1), prev_wb(dim + 1);

  auto compute_grad = [&]() {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = features.data() + i * dim;
      double z = b;
      for (std::size_t d = 0; d < dim; ++d) z += w[d] * x[d];
      double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                          : std::exp(z) / (1.0 + std::exp(z));
      double err = p - static_cast<double>(labels01[i]);
      for (std::size_t d = 0; d < dim; ++d) grad[d] += err * x[d];
      grad[dim] += err;
    }
    for (std::size_t d = 0; d < dim; ++d) grad[d] += lambda * w[d];
  };

  double step = 1.0 / (static_cast<double>(n) + lambda);
  for (int iter = 0; iter < max_iter; ++iter) {
    compute_grad();
    double gnorm = 0.0;
    for (double gd : grad) gnorm += gd * gd;
    gnorm = std::sqrt(gnorm);
    if (gnorm <= tol) break;
    if (iter > 0) {
      // Barzilai-Borwein step length from the last (s, y) pair.
      double sy = 0.0, yy = 0.0;
      for (std::size_t d = 0; d <= dim; ++d) {
        double s = (d < dim ? w[d] : b) - prev_wb[d];
        double y = grad[d] - prev_grad[d];
        sy += s * y;
        yy += y * y;
      }
      if (sy > 0.0 && yy > 0.0) step = sy / yy;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      prev_wb[d] = w[d];
      prev_grad[d] = grad[d];
      w[d] -= step * grad[d];
    }
    prev_wb[dim] = b;
    prev_grad[dim] = grad[dim];
    b -= step * grad[dim];
  }
  return LogisticModel{std::move(w), b};
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

double auc_score(std::span<const double> scores, std::span<const int> labels01) {
  if (scores.size() != labels01.size() || scores.empty()) {
    throw Error("AUC requires equal-length nonempty inputs");
  }
  std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based mean rank
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (labels01[t]) {
      pos_rank_sum += rank[t];
      ++n_pos;
    }
  }
  std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error("AUC undefined: only one class present");
  }
  double u = pos_rank_sum - static_cast<double>(n_pos) *
                                (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double binary_f1(std::span<const int> predictions01,
                 std::span<const int> labels01) {
  if (predictions01.size() != labels01.size()) {
    throw Error("prediction/label length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels01.size(); ++i) {
    if (predictions01[i] && labels01[i]) ++tp;
    if (predictions01[i] && !labels01[i]) ++fp;
    if (!predictions01[i] && labels01[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

F1Scores multiclass_f1(std::span<const int> predictions,
                       std::span<const int> labels, int num_classes) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw Error("prediction/label length mismatch");
  }
  std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) {
      ++tp[labels[i]];
    } else {
      ++fp[predictions[i]];
      ++fn[labels[i]];
    }
  }
  double macro = 0.0;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < num_classes; ++c) {
    double f1 = 0.0;
    if (tp[c] > 0) {
      double p = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
      double r = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
      f1 = 2.0 * p * r / (p + r);
    }
    macro += f1;
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
  }
  macro /= static_cast<double>(num_classes);
  double micro = 0.0;
  if (tp_all > 0) {
    double p = static_cast<double>(tp_all) / static_cast<double>(tp_all + fp_all);
    double r = static_cast<double>(tp_all) / static_cast<double>(tp_all + fn_all);
    micro = 2.0 * p * r / (p + r);
  }
  return F1Scores{macro, micro};
}

// ---------------------------------------------------------------------------
// link prediction
// ---------------------------------------------------------------------------

namespace {

std::uint64_t edge_key(NodeId a, NodeId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

LinkSplit make_link_split(const HeteroGraph& g, const RelationSpec& r,
                          double train_fraction, std::uint64_t seed) {
  if (r.composite) {
    throw Error("link prediction expects an atomic relation (edge holdout); "
                "got meta-path " + r.name);
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie in (0, 1)");
  }
  // Distinct pairs; parallel edges travel together to avoid leakage.
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : g.edges()) {
    if (e.type == r.edge_type) pairs.emplace(e.src, e.dst);
  }
  if (pairs.size() < 2) throw Error("too few edges to split: " + r.name);
  std::vector<std::pair<NodeId, NodeId>> all(pairs.begin(), pairs.end());
  Rng rng(seed);
  for (std::size_t i = all.size(); i > 1; --i) {
    std::size_t j = rng.uniform_index(i);
    std::swap(all[i - 1], all[j]);
  }
  auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(all.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, all.size() - 1);

  LinkSplit split;
  split.relation = r.name;
  split.seed = seed;
  split.train_pos.assign(all.begin(), all.begin() + n_train);
  split.test_pos.assign(all.begin() + n_train, all.end());

  // Negatives: type-correct non-edges absent from the full edge set (in
  // either orientation, so undirected relations cannot leak mirrored pairs).
  std::unordered_set<std::uint64_t> known;
  for (const auto& [u, v] : all) {
    known.insert(edge_key(u, v));
    known.insert(edge_key(v, u));
  }
  const auto& pool_u = g.nodes_of_type(r.src_type);
  const auto& pool_v = g.nodes_of_type(r.dst_type);
  double possible = static_cast<double>(pool_u.size()) *
                    static_cast<double>(pool_v.size());
  if (possible <= static_cast<double>(known.size()) + split.test_pos.size()) {
    throw Error("relation too dense to sample disjoint negatives: " + r.name);
  }
  while (split.test_neg.size() < split.test_pos.size()) {
    NodeId u = pool_u[rng.uniform_index(pool_u.size())];
    NodeId v = pool_v[rng.uniform_index(pool_v.size())];
    if (u == v) continue;
    if (known.contains(edge_key(u, v))) continue;
    known.insert(edge_key(u, v));  // negatives are distinct
    split.test_neg.emplace_back(u, v);
  }
  return split;
}

HeteroGraph training_network(const HeteroGraph& g, const RelationSpec& r,
                             const LinkSplit& split) {
  std::unordered_set<std::uint64_t> held_out;
  for (const auto& [u, v] : split.test_pos) held_out.insert(edge_key(u, v));
  HeteroGraph out;
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    out.intern_node_type(g.node_type_name(t));
  }
  for (TypeId t = 0; t < g.num_edge_types(); ++t) {
    const auto& info = g.edge_type_info(t);
    out.intern_edge_type(info.name, info.src_type, info.dst_type, info.directed);
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out.add_node(g.node_name(v), g.node_type(v));
  }
  for (const auto& e : g.edges()) {
    if (e.type == r.edge_type && held_out.contains(edge_key(e.src, e.dst))) {
      continue;
    }
    out.add_edge(e.src, e.dst, e.type, e.weight);
  }
  for (const auto& mp : g.metapaths()) out.add_metapath(mp);
  out.finalize();
  return out;
}

void write_link_split(const std::string& path, const LinkSplit& split,
                      const HeteroGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# relation\t" << split.relation << "\tseed\t" << split.seed << '\n';
  auto dump = [&](const char* tag,
                  const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    for (const auto& [u, v] : pairs) {
      out << tag << '\t' << g.node_name(u) << '\t' << g.node_name(v) << '\n';
    }
  };
  dump("train", split.train_pos);
  dump("test_pos", split.test_pos);
  dump("test_neg", split.test_neg);
}

LinkSplit read_link_split(const std::string& path, const HeteroGraph& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  LinkSplit split;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, '\t')) f.push_back(item);
      if (f.size() >= 4 && f[0] == "# relation") {
        split.relation = f[1];
        split.seed = std::stoull(f[3]);
      }
      continue;
    }
    std::stringstream ss(line);
    std::string tag, u, v;
    if (!std::getline(ss, tag, '\t') || !std::getline(ss, u, '\t') ||
        !std::getline(ss, v, '\t')) {
      throw ParseError(path, lineno, "expected: tag u v");
    }
    auto un = g.find_node(u);
    auto vn = g.find_node(v);
    if (!un || !vn) throw ParseError(path, lineno, "unknown node id");
    if (tag == "train") {
      split.train_pos.emplace_back(*un, *vn);
    } else if (tag == "test_pos") {
      split.test_pos.emplace_back(*un, *vn);
    } else if (tag == "test_neg") {
      split.test_neg.emplace_back(*un, *vn);
    } else {
      throw ParseError(path, lineno, "unknown tag: " + tag);
    }
  }
  return split;
}

namespace {

void hadamard(const EmbeddingStore& store, NodeId u, NodeId v, double* out) {
  auto xu = store.node(u);
  auto xv = store.node(v);
  for (std::size_t i = 0; i < xu.size(); ++i) out[i] = xu[i] * xv[i];
}

// Trained model's own score: translation distance when the relation owns a
// Y row in this store, plain squared Euclidean otherwise.
double model_pair_score(const EmbeddingStore& store, std::uint32_t rel_index,
                        NodeId u, NodeId v, const LossConfig& cfg) {
  if (store.has_relation_row(rel_index)) {
    return translation_score(store, 1.0, u, rel_index, v, cfg.ir_norm);
  }
  return euclidean_score(store, 1.0, u, v);
}

}  // namespace

LinkMetrics link_predict(const EmbeddingStore& store, const HeteroGraph& g,
                         const RelationSpec& r, std::uint32_t rel_index,
                         const LinkSplit& split, PairFeature feature,
                         const LossConfig& loss_cfg, std::uint64_t seed) {
  if (split.test_pos.empty()) throw Error("empty link-prediction test set");

  if (feature == PairFeature::Score) {
    // Rank raw pairs by the negated model score; no classifier involved.
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& [u, v] : split.test_pos) {
      scores.push_back(-model_pair_score(store, rel_index, u, v, loss_cfg));
      labels.push_back(1);
    }
    for (const auto& [u, v] : split.test_neg) {
      scores.push_back(-model_pair_score(store, rel_index, u, v, loss_cfg));
      labels.push_back(0);
    }
    double auc = auc_score(scores, labels);
    // Threshold at the median score for a parameter-free F1.
    std::vector<double> sorted(scores.begin(), scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    double thr = sorted[sorted.size() / 2];
    std::vector<int> preds;
    preds.reserve(scores.size());
    for (double s : scores) preds.push_back(s > thr ? 1 : 0);
    return LinkMetrics{auc, binary_f1(preds, labels)};
  }

  // Hadamard features -> logistic classifier.
  std::size_t dim = store.dim();
  Rng rng(seed);
  std::unordered_set<std::uint64_t> known;
  for (const auto& e : g.edges()) {
    if (e.type != r.edge_type) continue;
    known.insert(edge_key(e.src, e.dst));
    known.insert(edge_key(e.dst, e.src));
  }
  for (const auto& [u, v] : split.test_pos) {
    known.insert(edge_key(u, v));
    known.insert(edge_key(v, u));
  }
  const auto& pool_u = g.nodes_of_type(r.src_type);
  const auto& pool_v = g.nodes_of_type(r.dst_type);

  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(2 * split.train_pos.size() * dim);
  std::vector<double> row(dim);
  for (const auto& [u, v] : split.train_pos) {
    hadamard(store, u, v, row.data());
    features.insert(features.end(), row.begin(), row.end());
    labels.push_back(1);
  }
  std::size_t want_neg = split.train_pos.size();
  std::size_t guard = 0;
  while (want_neg > 0) {
    if (++guard > 1000 * split.train_pos.size()) {
      throw Error("could not sample training non-edges for " + r.name);
    }
    NodeId u = pool_u[rng.uniform_index(pool_u.size())];
    NodeId v = pool_v[rng.uniform_index(pool_v.size())];
    if (u == v || known.contains(edge_key(u, v))) continue;
    hadamard(store, u, v, row.data());
    features.insert(features.end(), row.begin(), row.end());
    labels.push_back(0);
    --want_neg;
  }
  LogisticModel model =
      fit_logistic(features, labels.size(), dim, labels, 1.0, 1e-6, 2000);

  std::vector<double> scores;
  std::vector<int> truth;
  std::vector<int> preds;
  for (const auto& [u, v] : split.test_pos) {
    hadamard(store, u, v, row.data());
    double p = model.probability(row);
    scores.push_back(p);
    preds.push_back(p >= 0.5 ? 1 : 0);
    truth.push_back(1);
  }
  for (const auto& [u, v] : split.test_neg) {
    hadamard(store, u, v, row.data());
    double p = model.probability(row);
    scores.push_back(p);
    preds.push_back(p >= 0.5 ? 1 : 0);
    truth.push_back(0);
  }
  return LinkMetrics{auc_score(scores, truth), binary_f1(preds, truth)};
}

// ---------------------------------------------------------------------------
// classification
// ---------------------------------------------------------------------------

ClassifyMetrics classify(const EmbeddingStore& store, const LabeledNodes& labels,
                         double train_fraction, std::uint64_t seed) {
  if (labels.num_classes < 2) throw Error("classification needs >= 2 classes");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie in (0, 1)");
  }
  // Stratified split: shuffle within each class, keep >= 1 node per side.
  std::vector<std::vector<std::size_t>> by_class(labels.num_classes);
  for (std::size_t i = 0; i < labels.items.size(); ++i) {
    by_class[labels.items[i].second].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (int c = 0; c < labels.num_classes; ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw Error("class " + std::to_string(c) +
                  " has fewer than 2 labeled nodes");
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::size_t j = rng.uniform_index(i);
      std::swap(members[i - 1], members[j]);
    }
    auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + n_train);
    test_idx.insert(test_idx.end(), members.begin() + n_train, members.end());
  }

  std::size_t dim = store.dim();
  auto gather = [&](const std::vector<std::size_t>& idx,
                    std::vector<double>& feat, std::vector<int>& y) {
    feat.resize(idx.size() * dim);
    y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto [node, label] = labels.items[idx[i]];
      auto row = store.node(node);
      std::copy(row.begin(), row.end(), feat.begin() + i * dim);
      y[i] = label;
    }
  };
  std::vector<double> train_x, test_x;
  std::vector<int> train_y, test_y;
  gather(train_idx, train_x, train_y);
  gather(test_idx, test_x, test_y);

  // One-vs-rest logistic models.
  std::vector<LogisticModel> models;
  std::vector<int> y01(train_y.size());
  for (int c = 0; c < labels.num_classes; ++c) {
    for (std::size_t i = 0; i < train_y.size(); ++i) y01[i] = train_y[i] == c;
    models.push_back(fit_logistic(train_x, train_y.size(), dim, y01));
  }
  std::vector<int> preds(test_y.size());
  for (std::size_t i = 0; i < test_y.size(); ++i) {
    std::span<const double> x{test_x.data() + i * dim, dim};
    int best = 0;
    double best_z = models[0].decision(x);
    for (int c = 1; c < labels.num_classes; ++c) {
      double z = models[c].decision(x);
      if (z > best_z) {
        best_z = z;
        best = c;
      }
    }
    preds[i] = best;
  }
  F1Scores f1 = multiclass_f1(preds, test_y, labels.num_classes);
  return ClassifyMetrics{f1.macro, f1.micro};
}

// ---------------------------------------------------------------------------
// variant comparison
// ---------------------------------------------------------------------------

std::vector<VariantOutcome> compare_variants(
    const HeteroGraph& g, const RelationSet& rels, const LabeledNodes& labels,
    const std::string& link_relation, const EvalTasks& tasks,
    const TrainConfig& base_cfg, const std::vector<Variant>& variants) {
  // Shared data across variants: full-graph triples, one link split, and the
  // held-out training network's triples.
  std::vector<std::vector<Triple>> full_triples(rels.size());
  for (std::uint32_t i = 0; i < rels.size(); ++i) {
    full_triples[i] = extract(g, rels.specs[i], i);
  }
  TripleStore full_store = TripleStore::build(full_triples, rels);

  std::optional<LinkSplit> split;
  std::optional<HeteroGraph> train_net;
  std::optional<TripleStore> train_store;
  RelationSpec link_spec;
  if (tasks.link_prediction) {
    link_spec = g.relation(link_relation);
    split = make_link_split(g, link_spec, 0.8, base_cfg.seed);
    train_net = training_network(g, link_spec, *split);
    std::vector<std::vector<Triple>> tt(rels.size());
    for (std::uint32_t i = 0; i < rels.size(); ++i) {
      tt[i] = extract(*train_net, rels.specs[i], i);
    }
    train_store = TripleStore::build(tt, rels);
  }

  std::vector<VariantOutcome> out;
  for (Variant v : variants) {
    TrainConfig cfg = base_cfg;
    cfg.variant = v;
    VariantOutcome row;
    row.variant = v;
    if (tasks.clustering || tasks.classification) {
      TrainResult res = train(g, rels, full_store, cfg);
      if (tasks.clustering) {
        row.nmi = cluster_nmi(res.store, labels, labels.num_classes,
                              cfg.seed + 1);
      }
      if (tasks.classification) {
        row.cls = classify(res.store, labels, 0.8, cfg.seed + 2);
      }
    }
    if (tasks.link_prediction) {
      TrainResult res = train(*train_net, rels, *train_store, cfg);
      auto rel_index = static_cast<std::uint32_t>(rels.index_of(link_relation));
      row.link = link_predict(res.store, g, link_spec, rel_index, *split,
                              PairFeature::Hadamard,
                              LossConfig{cfg.gamma, cfg.ir_norm}, cfg.seed + 3);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_variants_tsv(const std::vector<VariantOutcome>& outcomes) {
  std::ostringstream out;
  out << "variant\tnmi\tauc\tf1\tmacro_f1\tmicro_f1\n";
  char buf[64];
  auto cell = [&](std::optional<double> v) {
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  for (const auto& o : outcomes) {
    out << to_string(o.variant) << '\t' << cell(o.nmi) << '\t'
        << cell(o.link ? std::optional<double>(o.link->auc) : std::nullopt)
        << '\t'
        << cell(o.link ? std::optional<double>(o.link->f1) : std::nullopt)
        << '\t'
        << cell(o.cls ? std::optional<double>(o.cls->macro_f1) : std::nullopt)
        << '\t'
        << cell(o.cls ? std::optional<double>(o.cls->micro_f1) : std::nullopt)
        << '\n';
  }
  return out.str();
}

}  // namespace hinembed
