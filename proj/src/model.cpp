#include "hinembed/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hinembed/error.hpp"

namespace hinembed {

EmbeddingStore EmbeddingStore::random_init(std::size_t num_nodes,
                                           const std::vector<bool>& wants_y,
                                           std::size_t dim, Rng& rng) {
  if (dim < 1) throw Error("embedding dimension must be >= 1");
  EmbeddingStore s;
  s.dim_ = dim;
  double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  s.x_.resize(num_nodes * dim);
  for (auto& v : s.x_) v = rng.uniform(-bound, bound);
  s.y_row_.assign(wants_y.size(), -1);
  std::int32_t row = 0;
  for (std::size_t r = 0; r < wants_y.size(); ++r) {
    if (wants_y[r]) s.y_row_[r] = row++;
  }
  s.y_.resize(static_cast<std::size_t>(row) * dim);
  for (auto& v : s.y_) v = rng.uniform(-bound, bound);
  return s;
}

std::span<double> EmbeddingStore::relation(std::uint32_t rel) {
  if (!has_relation_row(rel)) {
    throw Error("relation " + std::to_string(rel) +
                " has no translation vector in this store");
  }
  return {y_.data() + static_cast<std::size_t>(y_row_[rel]) * dim_, dim_};
}

std::span<const double> EmbeddingStore::relation(std::uint32_t rel) const {
  if (!has_relation_row(rel)) {
    throw Error("relation " + std::to_string(rel) +
                " has no translation vector in this store");
  }
  return {y_.data() + static_cast<std::size_t>(y_row_[rel]) * dim_, dim_};
}

bool EmbeddingStore::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return ok(x_) && ok(y_);
}

double euclidean_score(const EmbeddingStore& store, double w, NodeId p,
                       NodeId q) {
  auto xp = store.node(p);
  auto xq = store.node(q);
  double acc = 0.0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    double d = xp[i] - xq[i];
    acc += d * d;
  }
  return w * acc;
}

double translation_score(const EmbeddingStore& store, double w, NodeId u,
                         std::uint32_t rel, NodeId v, Norm norm) {
  auto xu = store.node(u);
  auto xv = store.node(v);
  auto yr = store.relation(rel);
  double acc = 0.0;
  if (norm == Norm::L2) {
    for (std::size_t i = 0; i < xu.size(); ++i) {
      double z = xu[i] + yr[i] - xv[i];
      acc += z * z;
    }
    acc = std::sqrt(acc);
  } else {
    for (std::size_t i = 0; i < xu.size(); ++i) {
      acc += std::abs(xu[i] + yr[i] - xv[i]);
    }
  }
  return w * acc;
}

double hinge(double gamma, double pos_score, double neg_score) {
  if (!(gamma > 0.0)) throw Error("margin gamma must be > 0");
  return std::max(0.0, gamma + pos_score - neg_score);
}

double pair_loss(const EmbeddingStore& store, const Triple& pos,
                 const Triple& neg, LossFamily family, const LossConfig& cfg) {
  if (pos.rel != neg.rel) {
    throw Error("positive and negative triples must share a relation");
  }
  double sp, sn;
  if (family == LossFamily::Euclidean) {
    sp = euclidean_score(store, pos.w, pos.u, pos.v);
    sn = euclidean_score(store, neg.w, neg.u, neg.v);
  } else {
    sp = translation_score(store, pos.w, pos.u, pos.rel, pos.v, cfg.ir_norm);
    sn = translation_score(store, neg.w, neg.u, neg.rel, neg.v, cfg.ir_norm);
  }
  return hinge(cfg.gamma, sp, sn);
}

double batch_loss(const EmbeddingStore& store,
                  std::span<const std::pair<Triple, Triple>> ar_pairs,
                  std::span<const std::pair<Triple, Triple>> ir_pairs,
                  std::span<const Category> categories, const LossConfig& cfg) {
  auto check = [&](const Triple& t, Category want, const char* list) {
    if (t.rel >= categories.size() || categories[t.rel] != want) {
      throw Error(std::string("triple of the wrong category in the ") + list +
                  " pair list");
    }
  };
  double total = 0.0;
  for (const auto& [pos, neg] : ar_pairs) {
    check(pos, Category::AR, "AR");
    check(neg, Category::AR, "AR");
    total += pair_loss(store, pos, neg, LossFamily::Euclidean, cfg);
  }
  for (const auto& [pos, neg] : ir_pairs) {
    check(pos, Category::IR, "IR");
    check(neg, Category::IR, "IR");
    total += pair_loss(store, pos, neg, LossFamily::Translation, cfg);
  }
  return total;
}

namespace {

// Gradient accumulator over the <= 5 distinct rows a pair can touch.
// Capacity is reserved up front so slot() spans stay valid across calls.
struct RowGrads {
  static constexpr std::size_t kMax = 5;
  std::size_t n = 0;
  double* rows[kMax];
  std::vector<double> grads;  // n * dim
  std::size_t dim;

  explicit RowGrads(std::size_t d) : dim(d) { grads.reserve(kMax * d); }

  std::span<double> slot(std::span<double> row) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i] == row.data()) return {grads.data() + i * dim, dim};
    }
    rows[n] = row.data();
    grads.resize((n + 1) * dim, 0.0);
    return {grads.data() + n++ * dim, dim};
  }
};

void add_euclidean_grad(EmbeddingStore& store, RowGrads& acc, const Triple& t,
                        double sign) {
  auto xp = store.node(t.u);
  auto xq = store.node(t.v);
  auto gp = acc.slot(store.node(t.u));
  auto gq = acc.slot(store.node(t.v));
  for (std::size_t i = 0; i < acc.dim; ++i) {
    double g = sign * 2.0 * t.w * (xp[i] - xq[i]);
    gp[i] += g;
    gq[i] -= g;
  }
}

void add_translation_grad(EmbeddingStore& store, RowGrads& acc, const Triple& t,
                          double sign, Norm norm) {
  auto xu = store.node(t.u);
  auto xv = store.node(t.v);
  auto yr = store.relation(t.rel);
  auto gu = acc.slot(store.node(t.u));
  auto gv = acc.slot(store.node(t.v));
  auto gy = acc.slot(store.relation(t.rel));
  if (norm == Norm::L2) {
    double nsq = 0.0;
    for (std::size_t i = 0; i < acc.dim; ++i) {
      double z = xu[i] + yr[i] - xv[i];
      nsq += z * z;
    }
    double nrm = std::sqrt(nsq);
    if (nrm == 0.0) return;  // subgradient 0 at the cusp
    double scale = sign * t.w / nrm;
    for (std::size_t i = 0; i < acc.dim; ++i) {
      double g = scale * (xu[i] + yr[i] - xv[i]);
      gu[i] += g;
      gy[i] += g;
      gv[i] -= g;
    }
  } else {
    for (std::size_t i = 0; i < acc.dim; ++i) {
      double z = xu[i] + yr[i] - xv[i];
      double g = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
      g *= sign * t.w;
      gu[i] += g;
      gy[i] += g;
      gv[i] -= g;
    }
  }
}

void clip_row(std::span<double> row, double max_norm) {
  double nsq = 0.0;
  for (double v : row) nsq += v * v;
  if (nsq > max_norm * max_norm) {
    double s = max_norm / std::sqrt(nsq);
    for (auto& v : row) v *= s;
  }
}

}  // namespace

double grad_step(EmbeddingStore& store, const Triple& pos, const Triple& neg,
                 LossFamily family, const LossConfig& cfg, double lr,
                 double max_row_norm) {
  if (!(lr > 0.0)) throw Error("learning rate must be > 0");
  double loss = pair_loss(store, pos, neg, family, cfg);
  if (!std::isfinite(loss)) {
    throw Error("non-finite loss: training diverged");
  }
  if (loss <= 0.0) return 0.0;  // inactive hinge: zero subgradient

  RowGrads acc(store.dim());
  if (family == LossFamily::Euclidean) {
    add_euclidean_grad(store, acc, pos, +1.0);
    add_euclidean_grad(store, acc, neg, -1.0);
  } else {
    add_translation_grad(store, acc, pos, +1.0, cfg.ir_norm);
    add_translation_grad(store, acc, neg, -1.0, cfg.ir_norm);
  }
  for (std::size_t s = 0; s < acc.n; ++s) {
    double* row = acc.rows[s];
    const double* g = acc.grads.data() + s * store.dim();
    for (std::size_t i = 0; i < store.dim(); ++i) {
      row[i] -= lr * g[i];
      if (!std::isfinite(row[i])) {
        throw Error("non-finite embedding update: training diverged");
      }
    }
    if (max_row_norm > 0.0) clip_row({row, store.dim()}, max_row_norm);
  }
  return loss;
}

void write_embeddings_tsv(const std::string& path, const EmbeddingStore& store,
                          const std::vector<std::string>& node_names) {
  if (node_names.size() != store.num_nodes()) {
    throw Error("node name count does not match embedding rows");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[64];
  for (NodeId v = 0; v < store.num_nodes(); ++v) {
    out << node_names[v];
    for (double x : store.node(v)) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

void write_relations_tsv(const std::string& path, const EmbeddingStore& store,
                         const std::vector<std::string>& relation_names) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[64];
  for (std::uint32_t r = 0; r < relation_names.size(); ++r) {
    if (!store.has_relation_row(r)) continue;
    out << relation_names[r];
    for (double x : store.relation(r)) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

LoadedEmbeddings read_embeddings_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  LoadedEmbeddings out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string id;
    if (!std::getline(ss, id, '\t')) {
      throw ParseError(path, lineno, "missing node id");
    }
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, '\t')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "malformed value: " + cell);
      }
    }
    if (row.empty()) throw ParseError(path, lineno, "row has no values");
    if (out.dim == 0) out.dim = row.size();
    if (row.size() != out.dim) {
      throw ParseError(path, lineno, "inconsistent embedding dimension");
    }
    out.ids.push_back(std::move(id));
    out.rows.insert(out.rows.end(), row.begin(), row.end());
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'H', 'I', 'N', 'E', 'M', 'B', 'D', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("truncated checkpoint");
  return v;
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
  auto n = get<std::uint64_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error("truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  if (path.empty()) throw Error("checkpoint path is empty");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, cp.store.dim());
  put<std::uint64_t>(out, cp.store.num_nodes());
  put<std::uint64_t>(out, cp.store.num_relation_rows());
  put<std::uint64_t>(out, cp.store.relation_rows().size());
  for (std::int32_t r : cp.store.relation_rows()) put<std::int32_t>(out, r);
  put<std::uint64_t>(out, cp.epoch);
  put_string(out, cp.rng_state);
  put<std::uint64_t>(out, cp.node_names.size());
  for (const auto& n : cp.node_names) put_string(out, n);
  put<std::uint64_t>(out, cp.relation_names.size());
  for (const auto& n : cp.relation_names) put_string(out, n);
  auto x = cp.store.x_flat();
  out.write(reinterpret_cast<const char*>(x.data()),
            static_cast<std::streamsize>(x.size_bytes()));
  auto y = cp.store.y_flat();
  out.write(reinterpret_cast<const char*>(y.data()),
            static_cast<std::streamsize>(y.size_bytes()));
  if (!out) throw Error("short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  if (path.empty()) throw Error("checkpoint path is empty");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a checkpoint file (bad magic/version): " + path);
  }
  auto dim = get<std::uint64_t>(in);
  auto n_nodes = get<std::uint64_t>(in);
  auto n_rows = get<std::uint64_t>(in);
  auto n_rels = get<std::uint64_t>(in);
  std::vector<std::int32_t> y_row(n_rels);
  for (auto& r : y_row) r = get<std::int32_t>(in);

  Checkpoint cp;
  cp.epoch = get<std::uint64_t>(in);
  cp.rng_state = get_string(in);
  auto n_names = get<std::uint64_t>(in);
  cp.node_names.reserve(n_names);
  for (std::uint64_t i = 0; i < n_names; ++i) {
    cp.node_names.push_back(get_string(in));
  }
  auto n_rnames = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_rnames; ++i) {
    cp.relation_names.push_back(get_string(in));
  }

  // Rebuild the store through a zero-filled init, then overwrite the payload.
  std::vector<bool> wants_y(n_rels, false);
  for (std::size_t r = 0; r < n_rels; ++r) wants_y[r] = y_row[r] >= 0;
  Rng dummy(0);
  cp.store = EmbeddingStore::random_init(n_nodes, wants_y, dim, dummy);
  if (cp.store.num_relation_rows() != n_rows ||
      cp.store.relation_rows() != y_row) {
    throw Error("corrupt checkpoint: relation row table mismatch");
  }
  auto x = cp.store.x_flat_mut();
  in.read(reinterpret_cast<char*>(x.data()),
          static_cast<std::streamsize>(x.size_bytes()));
  auto y = cp.store.y_flat_mut();
  in.read(reinterpret_cast<char*>(y.data()),
          static_cast<std::streamsize>(y.size_bytes()));
  if (!in) throw Error("truncated checkpoint");
  return cp;
}

}  // namespace hinembed
