#include "hinembed/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hinembed {

TypeId HeteroGraph::intern_node_type(const std::string& name) {
  auto it = node_type_index_.find(name);
  if (it != node_type_index_.end()) return it->second;
  auto id = static_cast<TypeId>(node_type_names_.size());
  node_type_names_.push_back(name);
  node_type_index_.emplace(name, id);
  by_type_.emplace_back();
  return id;
}

TypeId HeteroGraph::intern_edge_type(const std::string& name, TypeId src,
                                     TypeId dst, bool directed) {
  auto it = edge_type_index_.find(name);
  if (it != edge_type_index_.end()) {
    throw Error("duplicate edge type declaration: " + name);
  }
  auto id = static_cast<TypeId>(edge_type_infos_.size());
  edge_type_infos_.push_back(EdgeTypeInfo{name, src, dst, directed});
  edge_type_index_.emplace(name, id);
  return id;
}

NodeId HeteroGraph::add_node(const std::string& external_id, TypeId type) {
  if (node_index_.contains(external_id)) {
    throw Error("duplicate node id: " + external_id);
  }
  auto id = static_cast<NodeId>(node_names_.size());
  node_names_.push_back(external_id);
  node_types_.push_back(type);
  node_index_.emplace(external_id, id);
  by_type_.at(type).push_back(id);
  return id;
}

void HeteroGraph::add_edge(NodeId src, NodeId dst, TypeId type, double weight) {
  if (src >= num_nodes() || dst >= num_nodes()) {
    throw Error("edge endpoint does not exist");
  }
  if (type >= num_edge_types()) throw Error("unknown edge type id");
  if (!(weight > 0.0)) throw Error("edge weight must be positive");
  const auto& info = edge_type_infos_[type];
  TypeId ts = node_types_[src];
  TypeId td = node_types_[dst];
  if (ts == info.src_type && td == info.dst_type) {
    edges_.push_back(Edge{src, dst, type, weight});
  } else if (!info.directed && ts == info.dst_type && td == info.src_type) {
    // Undirected edges may arrive in either orientation; store canonically.
    edges_.push_back(Edge{dst, src, type, weight});
  } else {
    throw Error("edge endpoints (" + node_type_names_[ts] + "," +
                node_type_names_[td] + ") violate schema of edge type " +
                info.name);
  }
  finalized_ = false;
}

void HeteroGraph::add_metapath(MetaPath mp) {
  if (mp.edge_types.empty()) throw Error("meta-path must have length >= 1");
  if (mp.node_types.size() != mp.edge_types.size() + 1) {
    throw Error("meta-path node sequence length mismatch: " + mp.name);
  }
  for (std::size_t i = 0; i < mp.edge_types.size(); ++i) {
    const auto& info = edge_type_infos_.at(mp.edge_types[i]);
    TypeId a = mp.node_types[i];
    TypeId b = mp.node_types[i + 1];
    bool fwd = (a == info.src_type && b == info.dst_type);
    bool rev = (!info.directed && a == info.dst_type && b == info.src_type);
    if (!fwd && !rev) {
      throw Error("meta-path " + mp.name + " step " + std::to_string(i + 1) +
                  " is incompatible with edge type " + info.name);
    }
  }
  metapaths_.push_back(std::move(mp));
}

void HeteroGraph::finalize() {
  if (num_node_types() + num_edge_types() <= 2) {
    throw Error("not a heterogeneous network: |node types| + |edge types| "
                "must exceed 2");
  }
  adjacency_.assign(num_edge_types(), Csr{});
  std::size_t n = num_nodes();
  for (TypeId t = 0; t < num_edge_types(); ++t) {
    const auto& info = edge_type_infos_[t];
    // Aggregate parallel edges per (from, to); undirected types are mirrored.
    std::vector<std::size_t> counts(n + 1, 0);
    std::vector<const Edge*> mine;
    for (const auto& e : edges_) {
      if (e.type != t) continue;
      mine.push_back(&e);
      ++counts[e.src + 1];
      if (!info.directed) ++counts[e.dst + 1];
    }
    for (std::size_t i = 0; i < n; ++i) counts[i + 1] += counts[i];
    std::vector<Arc> raw(counts[n]);
    std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
    for (const Edge* e : mine) {
      raw[cursor[e->src]++] = Arc{e->dst, e->weight};
      if (!info.directed) raw[cursor[e->dst]++] = Arc{e->src, e->weight};
    }
    // Merge duplicates within each row.
    Csr csr;
    csr.offsets.assign(n + 1, 0);
    csr.arcs.reserve(raw.size());
    std::size_t begin = 0;
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t end = counts[v + 1];
      std::sort(raw.begin() + begin, raw.begin() + end,
                [](const Arc& a, const Arc& b) { return a.to < b.to; });
      std::size_t row_start = csr.arcs.size();
      for (std::size_t i = begin; i < end; ++i) {
        if (csr.arcs.size() > row_start && csr.arcs.back().to == raw[i].to) {
          csr.arcs.back().weight += raw[i].weight;
        } else {
          csr.arcs.push_back(raw[i]);
        }
      }
      csr.offsets[v + 1] = csr.arcs.size();
      begin = end;
    }
    adjacency_[t] = std::move(csr);
  }
  finalized_ = true;
}

TypeId HeteroGraph::node_type(NodeId v) const {
  if (v >= node_types_.size()) throw Error("unknown node id");
  return node_types_[v];
}

std::optional<TypeId> HeteroGraph::find_node_type(const std::string& name) const {
  auto it = node_type_index_.find(name);
  if (it == node_type_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TypeId> HeteroGraph::find_edge_type(const std::string& name) const {
  auto it = edge_type_index_.find(name);
  if (it == edge_type_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> HeteroGraph::find_node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<NodeId>& HeteroGraph::nodes_of_type(TypeId t) const {
  return by_type_.at(t);
}

std::span<const HeteroGraph::Arc> HeteroGraph::arcs(TypeId t, NodeId from) const {
  if (!finalized_) throw Error("graph not finalized");
  const Csr& csr = adjacency_.at(t);
  return {csr.arcs.data() + csr.offsets[from],
          csr.offsets[from + 1] - csr.offsets[from]};
}

RelationSpec HeteroGraph::relation(const std::string& name) const {
  if (auto et = find_edge_type(name)) {
    const auto& info = edge_type_infos_[*et];
    RelationSpec spec;
    spec.name = name;
    spec.composite = false;
    spec.edge_type = *et;
    spec.src_type = info.src_type;
    spec.dst_type = info.dst_type;
    return spec;
  }
  for (const auto& mp : metapaths_) {
    if (mp.name == name) {
      RelationSpec spec;
      spec.name = name;
      spec.composite = true;
      spec.path = mp;
      spec.src_type = mp.node_types.front();
      spec.dst_type = mp.node_types.back();
      return spec;
    }
  }
  throw Error("unknown relation: " + name);
}

std::vector<RelationSpec> HeteroGraph::all_relations() const {
  std::vector<RelationSpec> out;
  for (const auto& info : edge_type_infos_) out.push_back(relation(info.name));
  for (const auto& mp : metapaths_) out.push_back(relation(mp.name));
  return out;
}

namespace {

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_comma(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#' ||
         line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Reads every non-comment line with its 1-based line number.
void for_each_line(const std::string& path,
                   const std::function<void(std::size_t, const std::string&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (skippable(line)) continue;
    fn(lineno, line);
  }
}

// Finds the unique node-type sequence consistent with the edge-type chain.
// Undirected steps may traverse in either orientation, so this is a small
// DFS over per-step orientation choices.
std::vector<TypeId> infer_node_sequence(const HeteroGraph& g,
                                        const std::vector<TypeId>& chain,
                                        const std::string& name) {
  std::vector<std::vector<TypeId>> found;
  std::vector<TypeId> seq(chain.size() + 1);
  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    if (found.size() > 1) return;
    if (i == chain.size()) {
      found.push_back(seq);
      return;
    }
    const auto& info = g.edge_type_info(chain[i]);
    auto try_step = [&](TypeId from, TypeId to) {
      if (i == 0) {
        seq[0] = from;
        seq[1] = to;
        dfs(1);
      } else if (seq[i] == from) {
        seq[i + 1] = to;
        dfs(i + 1);
      }
    };
    try_step(info.src_type, info.dst_type);
    if (!info.directed && info.src_type != info.dst_type) {
      try_step(info.dst_type, info.src_type);
    }
  };
  dfs(0);
  if (found.empty()) {
    throw Error("meta-path " + name + ": edge types do not chain");
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  if (found.size() > 1) {
    throw Error("meta-path " + name +
                ": orientation is ambiguous; append an explicit node-type "
                "sequence column");
  }
  return found.front();
}

}  // namespace

HeteroGraph load_graph(const std::string& nodes_file,
                       const std::string& edges_file,
                       const std::string& schema_file) {
  HeteroGraph g;

  // Pass 1 over the schema: edge types (so node types exist before nodes are
  // checked against nothing -- node types are interned on first sight).
  struct PendingPath {
    std::size_t lineno;
    std::string name;
    std::vector<std::string> edge_names;
    std::vector<std::string> node_names;
  };
  std::vector<PendingPath> pending_paths;
  for_each_line(schema_file, [&](std::size_t lineno, const std::string& line) {
    auto f = split_tab(line);
    if (f[0] == "metapath") {
      if (f.size() != 3 && f.size() != 4) {
        throw ParseError(schema_file, lineno,
                         "expected: metapath NAME e1,e2,...[ t1,t2,...]");
      }
      PendingPath p;
      p.lineno = lineno;
      p.name = f[1];
      p.edge_names = split_comma(f[2]);
      if (f.size() == 4) p.node_names = split_comma(f[3]);
      pending_paths.push_back(std::move(p));
      return;
    }
    if (f.size() != 4) {
      throw ParseError(schema_file, lineno,
                       "expected: edge_type src_type dst_type "
                       "directed|undirected");
    }
    bool directed;
    if (f[3] == "directed") {
      directed = true;
    } else if (f[3] == "undirected") {
      directed = false;
    } else {
      throw ParseError(schema_file, lineno,
                       "expected 'directed' or 'undirected', got '" + f[3] + "'");
    }
    TypeId src = g.intern_node_type(f[1]);
    TypeId dst = g.intern_node_type(f[2]);
    try {
      g.intern_edge_type(f[0], src, dst, directed);
    } catch (const Error& e) {
      throw ParseError(schema_file, lineno, e.what());
    }
  });

  for_each_line(nodes_file, [&](std::size_t lineno, const std::string& line) {
    auto f = split_tab(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(nodes_file, lineno, "expected: node_id<TAB>node_type");
    }
    TypeId t = g.intern_node_type(f[1]);
    try {
      g.add_node(f[0], t);
    } catch (const Error& e) {
      throw ParseError(nodes_file, lineno, e.what());
    }
  });

  for_each_line(edges_file, [&](std::size_t lineno, const std::string& line) {
    auto f = split_tab(line);
    if (f.size() != 3 && f.size() != 4) {
      throw ParseError(edges_file, lineno,
                       "expected: src_id dst_id edge_type [weight]");
    }
    auto et = g.find_edge_type(f[2]);
    if (!et) throw ParseError(edges_file, lineno, "unknown edge type: " + f[2]);
    auto src = g.find_node(f[0]);
    if (!src) {
      throw ParseError(edges_file, lineno, "dangling endpoint id: " + f[0]);
    }
    auto dst = g.find_node(f[1]);
    if (!dst) {
      throw ParseError(edges_file, lineno, "dangling endpoint id: " + f[1]);
    }
    double w = 1.0;
    if (f.size() == 4) {
      try {
        std::size_t used = 0;
        w = std::stod(f[3], &used);
        if (used != f[3].size()) throw std::invalid_argument(f[3]);
      } catch (const std::exception&) {
        throw ParseError(edges_file, lineno, "malformed weight: " + f[3]);
      }
    }
    try {
      g.add_edge(*src, *dst, *et, w);
    } catch (const Error& e) {
      throw ParseError(edges_file, lineno, e.what());
    }
  });

  for (const auto& p : pending_paths) {
    MetaPath mp;
    mp.name = p.name;
    for (const auto& en : p.edge_names) {
      auto et = g.find_edge_type(en);
      if (!et) {
        throw ParseError(schema_file, p.lineno,
                         "meta-path " + p.name + " references unknown edge "
                         "type: " + en);
      }
      mp.edge_types.push_back(*et);
    }
    if (!p.node_names.empty()) {
      for (const auto& tn : p.node_names) {
        auto t = g.find_node_type(tn);
        if (!t) {
          throw ParseError(schema_file, p.lineno,
                           "meta-path " + p.name + " references unknown node "
                           "type: " + tn);
        }
        mp.node_types.push_back(*t);
      }
    } else {
      try {
        mp.node_types = infer_node_sequence(g, mp.edge_types, mp.name);
      } catch (const Error& e) {
        throw ParseError(schema_file, p.lineno, e.what());
      }
    }
    try {
      g.add_metapath(std::move(mp));
    } catch (const Error& e) {
      throw ParseError(schema_file, p.lineno, e.what());
    }
  }

  g.finalize();
  return g;
}

void save_graph(const HeteroGraph& g, const std::string& nodes_file,
                const std::string& edges_file, const std::string& schema_file) {
  std::ofstream sn(nodes_file);
  if (!sn) throw Error("cannot write " + nodes_file);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    sn << g.node_name(v) << '\t' << g.node_type_name(g.node_type(v)) << '\n';
  }

  std::ofstream se(edges_file);
  if (!se) throw Error("cannot write " + edges_file);
  char buf[64];
  for (const auto& e : g.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    se << g.node_name(e.src) << '\t' << g.node_name(e.dst) << '\t'
       << g.edge_type_info(e.type).name << '\t' << buf << '\n';
  }

  std::ofstream ss(schema_file);
  if (!ss) throw Error("cannot write " + schema_file);
  for (TypeId t = 0; t < g.num_edge_types(); ++t) {
    const auto& info = g.edge_type_info(t);
    ss << info.name << '\t' << g.node_type_name(info.src_type) << '\t'
       << g.node_type_name(info.dst_type) << '\t'
       << (info.directed ? "directed" : "undirected") << '\n';
  }
  for (const auto& mp : g.metapaths()) {
    ss << "metapath\t" << mp.name << '\t';
    for (std::size_t i = 0; i < mp.edge_types.size(); ++i) {
      if (i) ss << ',';
      ss << g.edge_type_info(mp.edge_types[i]).name;
    }
    ss << '\t';
    for (std::size_t i = 0; i < mp.node_types.size(); ++i) {
      if (i) ss << ',';
      ss << g.node_type_name(mp.node_types[i]);
    }
    ss << '\n';
  }
}

double avg_degree_from_instances(const HeteroGraph& g, const RelationSpec& r,
                                 Endpoint endpoint, double total_instances) {
  TypeId t = endpoint == Endpoint::Source ? r.src_type : r.dst_type;
  std::size_t population = g.count_of_type(t);
  if (population == 0) {
    throw Error("relation " + r.name + ": endpoint type " +
                g.node_type_name(t) + " has zero nodes");
  }
  return total_instances / static_cast<double>(population);
}

}  // namespace hinembed
