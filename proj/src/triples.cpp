#include "hinembed/triples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hinembed/error.hpp"

namespace hinembed {

const char* to_string(Category c) { return c == Category::AR ? "AR" : "IR"; }

std::size_t RelationSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name == name) return i;
  }
  throw Error("unknown relation: " + name);
}

std::vector<Triple> extract_atomic(const HeteroGraph& g, const RelationSpec& r,
                                   std::uint32_t rel_index) {
  if (r.composite) throw Error("extract_atomic called on composite relation");
  if (r.edge_type >= g.num_edge_types()) throw Error("unknown edge type");
  std::map<std::pair<NodeId, NodeId>, double> acc;
  for (const auto& e : g.edges()) {
    if (e.type != r.edge_type) continue;
    acc[{e.src, e.dst}] += e.weight;
  }
  std::vector<Triple> out;
  out.reserve(acc.size());
  for (const auto& [pair, w] : acc) {
    out.push_back(Triple{pair.first, pair.second, rel_index, w});
  }
  return out;
}

std::vector<Triple> extract_metapath(const HeteroGraph& g, const MetaPath& m,
                                     std::uint32_t rel_index) {
  for (TypeId et : m.edge_types) {
    if (et >= g.num_edge_types()) throw Error("unknown edge type in meta-path");
  }
  // Sparse per-source walk-count propagation; equivalent to the chain product
  // of the per-step weighted adjacency matrices. Two accumulator arrays keep
  // a step's reads and writes apart (a node can sit in both frontiers when a
  // step connects a type to itself).
  std::vector<Triple> out;
  std::vector<double> cur_w(g.num_nodes(), 0.0), next_w(g.num_nodes(), 0.0);
  std::vector<NodeId> frontier, next;
  for (NodeId start : g.nodes_of_type(m.node_types.front())) {
    frontier.assign(1, start);
    cur_w[start] = 1.0;
    for (std::size_t step = 0; step < m.edge_types.size(); ++step) {
      TypeId et = m.edge_types[step];
      TypeId want = m.node_types[step + 1];
      next.clear();
      for (NodeId x : frontier) {
        double wx = cur_w[x];
        for (const auto& arc : g.arcs(et, x)) {
          if (g.node_type(arc.to) != want) continue;
          if (next_w[arc.to] == 0.0) next.push_back(arc.to);
          next_w[arc.to] += wx * arc.weight;
        }
      }
      for (NodeId x : frontier) cur_w[x] = 0.0;
      std::swap(frontier, next);
      std::swap(cur_w, next_w);
    }
    std::sort(frontier.begin(), frontier.end());
    for (NodeId end : frontier) {
      double w = cur_w[end];
      cur_w[end] = 0.0;
      if (end == start) continue;  // a relation joins two distinct nodes
      out.push_back(Triple{start, end, rel_index, w});
    }
  }
  return out;
}

std::vector<Triple> extract(const HeteroGraph& g, const RelationSpec& r,
                            std::uint32_t rel_index) {
  return r.composite ? extract_metapath(g, r.path, rel_index)
                     : extract_atomic(g, r, rel_index);
}

double total_weight(std::span<const Triple> triples) {
  double sum = 0.0;
  for (const auto& t : triples) sum += t.w;
  return sum;
}

double avg_degree(const HeteroGraph& g, const RelationSpec& r,
                  Endpoint endpoint) {
  auto triples = extract(g, r, 0);
  return avg_degree_from_instances(g, r, endpoint, total_weight(triples));
}

namespace {

std::uint64_t pair_key(std::uint32_t rel, NodeId u, NodeId v,
                       std::uint32_t node_bits) {
  return (static_cast<std::uint64_t>(rel) << (2 * node_bits)) |
         (static_cast<std::uint64_t>(u) << node_bits) | v;
}

std::uint32_t bits_for(std::size_t n) {
  std::uint32_t b = 1;
  while ((1ULL << b) < n) ++b;
  return b;
}

}  // namespace

TripleStore TripleStore::build(
    const std::vector<std::vector<Triple>>& per_relation,
    const RelationSet& rels, std::vector<std::string>* warnings) {
  if (per_relation.size() != rels.size()) {
    throw Error("triple lists and relation set sizes differ");
  }
  TripleStore store;
  store.rel_spans_.resize(rels.size());
  NodeId max_node = 0;
  for (std::size_t r = 0; r < per_relation.size(); ++r) {
    Category cat = rels.categories[r];
    auto& part = cat == Category::AR ? store.ar_ : store.ir_;
    store.rel_spans_[r] = RelSpan{cat, part.size(), 0};
    for (const auto& t : per_relation[r]) {
      if (t.rel != r) throw Error("triple relation index mismatch");
      if (!(t.w > 0.0)) throw Error("triple weight must be positive");
      part.push_back(t);
      max_node = std::max({max_node, t.u, t.v});
    }
    store.rel_spans_[r].end = part.size();
  }
  auto build_cum = [](const std::vector<Triple>& part, std::vector<double>& cum) {
    cum.resize(part.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) {
      acc += part[i].w;
      cum[i] = acc;
    }
    return acc;
  };
  store.ar_mass_ = build_cum(store.ar_, store.ar_cum_);
  store.ir_mass_ = build_cum(store.ir_, store.ir_cum_);
  if (warnings) {
    if (store.ar_.empty()) warnings->push_back("AR partition is empty");
    if (store.ir_.empty()) warnings->push_back("IR partition is empty");
  }
  store.key_bits_ = bits_for(static_cast<std::size_t>(max_node) + 1);
  if (2 * store.key_bits_ + bits_for(rels.size()) <= 64) {
    for (const auto& t : store.ar_) {
      store.positive_keys_.insert(pair_key(t.rel, t.u, t.v, store.key_bits_));
    }
    for (const auto& t : store.ir_) {
      store.positive_keys_.insert(pair_key(t.rel, t.u, t.v, store.key_bits_));
    }
  }
  return store;
}

std::span<const Triple> TripleStore::partition(Category c) const {
  return c == Category::AR ? std::span<const Triple>(ar_)
                           : std::span<const Triple>(ir_);
}

std::span<const Triple> TripleStore::relation_triples(std::uint32_t rel) const {
  const auto& s = rel_spans_.at(rel);
  const auto& part = s.cat == Category::AR ? ar_ : ir_;
  return {part.data() + s.begin, s.end - s.begin};
}

const Triple& TripleStore::sample_positive(Category c, Rng& rng) const {
  const auto& part = c == Category::AR ? ar_ : ir_;
  const auto& cum = c == Category::AR ? ar_cum_ : ir_cum_;
  if (part.empty()) {
    throw Error(std::string("cannot sample from empty ") + to_string(c) +
                " partition");
  }
  double x = rng.uniform01() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), x);
  if (it == cum.end()) --it;
  return part[static_cast<std::size_t>(it - cum.begin())];
}

bool TripleStore::contains(std::uint32_t rel, NodeId u, NodeId v) const {
  return positive_keys_.contains(pair_key(rel, u, v, key_bits_));
}

Triple corrupt(const Triple& t, const HeteroGraph& g, const RelationSet& rels,
               Rng& rng) {
  const auto& spec = rels.specs.at(t.rel);
  bool corrupt_head = rng.coin();
  TypeId pool_type = corrupt_head ? spec.src_type : spec.dst_type;
  const auto& pool = g.nodes_of_type(pool_type);
  if (pool.size() < 2) {
    throw Error("relation " + spec.name + ": replacement pool for type " +
                g.node_type_name(pool_type) + " has fewer than 2 nodes");
  }
  NodeId original = corrupt_head ? t.u : t.v;
  // Draw from the pool minus the original node: pick an index among the
  // others and skip over the original's slot.
  auto orig_pos = static_cast<std::size_t>(
      std::lower_bound(pool.begin(), pool.end(), original) - pool.begin());
  std::size_t idx = rng.uniform_index(pool.size() - 1);
  if (orig_pos < pool.size() && pool[orig_pos] == original && idx >= orig_pos) {
    ++idx;
  }
  NodeId replacement = pool[idx];
  Triple out = t;
  (corrupt_head ? out.u : out.v) = replacement;
  return out;
}

void write_triples_tsv(const std::string& path,
                       const std::vector<std::vector<Triple>>& per_relation,
                       const HeteroGraph& g, const RelationSet& rels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[64];
  for (std::size_t r = 0; r < per_relation.size(); ++r) {
    for (const auto& t : per_relation[r]) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.w);
      out << g.node_name(t.u) << '\t' << rels.specs[r].name << '\t'
          << g.node_name(t.v) << '\t' << buf << '\n';
    }
  }
}

std::vector<std::vector<Triple>> read_triples_tsv(const std::string& path,
                                                  const HeteroGraph& g,
                                                  const RelationSet& rels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::vector<Triple>> out(rels.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string u, rel, v, w;
    if (!std::getline(ss, u, '\t') || !std::getline(ss, rel, '\t') ||
        !std::getline(ss, v, '\t') || !std::getline(ss, w, '\t')) {
      throw ParseError(path, lineno, "expected: u relation v w");
    }
    auto un = g.find_node(u);
    auto vn = g.find_node(v);
    if (!un || !vn) {
      throw ParseError(path, lineno, "triple references unknown node");
    }
    std::size_t r = rels.index_of(rel);
    double weight;
    try {
      weight = std::stod(w);
    } catch (const std::exception&) {
      throw ParseError(path, lineno, "malformed weight: " + w);
    }
    if (!(weight > 0.0)) throw ParseError(path, lineno, "weight must be > 0");
    out[r].push_back(Triple{*un, *vn, static_cast<std::uint32_t>(r), weight});
  }
  return out;
}

}  // namespace hinembed
