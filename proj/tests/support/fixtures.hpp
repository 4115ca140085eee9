#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hinembed/graph.hpp"
#include "hinembed/rng.hpp"
#include "hinembed/triples.hpp"

namespace testsupport {

using namespace hinembed;

// 2 authors each writing 2 distinct papers (4 papers total).
inline HeteroGraph two_authors_four_papers() {
  HeteroGraph g;
  TypeId ta = g.intern_node_type("Author");
  TypeId tp = g.intern_node_type("Paper");
  TypeId ap = g.intern_edge_type("AP", ta, tp, false);
  NodeId a1 = g.add_node("a1", ta);
  NodeId a2 = g.add_node("a2", ta);
  NodeId p1 = g.add_node("p1", tp);
  NodeId p2 = g.add_node("p2", tp);
  NodeId p3 = g.add_node("p3", tp);
  NodeId p4 = g.add_node("p4", tp);
  g.add_edge(a1, p1, ap);
  g.add_edge(a1, p2, ap);
  g.add_edge(a2, p3, ap);
  g.add_edge(a2, p4, ap);
  g.finalize();
  return g;
}

// Small academic-style graph with authors, papers, conferences and the APC
// meta-path declared in the schema.
inline HeteroGraph mini_dblp() {
  HeteroGraph g;
  TypeId ta = g.intern_node_type("A");
  TypeId tp = g.intern_node_type("P");
  TypeId tc = g.intern_node_type("C");
  TypeId ap = g.intern_edge_type("AP", ta, tp, false);
  TypeId pc = g.intern_edge_type("PC", tp, tc, true);
  NodeId a1 = g.add_node("a1", ta);
  NodeId a2 = g.add_node("a2", ta);
  NodeId p1 = g.add_node("p1", tp);
  NodeId p2 = g.add_node("p2", tp);
  NodeId p3 = g.add_node("p3", tp);
  NodeId c1 = g.add_node("c1", tc);
  NodeId c2 = g.add_node("c2", tc);
  g.add_edge(a1, p1, ap);
  g.add_edge(a1, p2, ap);
  g.add_edge(a2, p3, ap);
  g.add_edge(p1, c1, pc);
  g.add_edge(p2, c1, pc);
  g.add_edge(p3, c2, pc);
  MetaPath apc;
  apc.name = "APC";
  apc.edge_types = {ap, pc};
  apc.node_types = {ta, tp, tc};
  g.add_metapath(apc);
  g.finalize();
  return g;
}

// Random typed graph over a fixed 3-type / 3-edge-type schema, suitable for
// round-trip and meta-path-counting property tests.
inline HeteroGraph random_graph(Rng& rng, std::size_t max_nodes = 100,
                                std::size_t max_edges = 300,
                                bool parallel_edges = true) {
  HeteroGraph g;
  TypeId tx = g.intern_node_type("X");
  TypeId ty = g.intern_node_type("Y");
  TypeId tz = g.intern_node_type("Z");
  TypeId xy = g.intern_edge_type("XY", tx, ty, false);
  TypeId yz = g.intern_edge_type("YZ", ty, tz, true);
  TypeId yy = g.intern_edge_type("YY", ty, ty, false);
  std::size_t nx = 2 + rng.uniform_index(max_nodes / 3);
  std::size_t ny = 2 + rng.uniform_index(max_nodes / 3);
  std::size_t nz = 2 + rng.uniform_index(max_nodes / 3);
  std::vector<NodeId> xs, ys, zs;
  for (std::size_t i = 0; i < nx; ++i)
    xs.push_back(g.add_node("x" + std::to_string(i), tx));
  for (std::size_t i = 0; i < ny; ++i)
    ys.push_back(g.add_node("y" + std::to_string(i), ty));
  for (std::size_t i = 0; i < nz; ++i)
    zs.push_back(g.add_node("z" + std::to_string(i), tz));
  std::size_t m = 1 + rng.uniform_index(max_edges);
  for (std::size_t e = 0; e < m; ++e) {
    double w = parallel_edges ? 1.0 : 1.0 + rng.uniform_index(3);
    switch (rng.uniform_index(3)) {
      case 0:
        g.add_edge(xs[rng.uniform_index(nx)], ys[rng.uniform_index(ny)], xy, w);
        break;
      case 1:
        g.add_edge(ys[rng.uniform_index(ny)], zs[rng.uniform_index(nz)], yz, w);
        break;
      default: {
        NodeId u = ys[rng.uniform_index(ny)];
        NodeId v = ys[rng.uniform_index(ny)];
        if (u == v) continue;
        g.add_edge(u, v, yy, w);
      }
    }
  }
  g.finalize();
  return g;
}

// Exhaustive walk enumeration; the independent oracle for meta-path triple
// weights. Follows the same conventions as the implementation contract:
// undirected edge types traverse both ways, walks may revisit nodes, and
// end == start pairs are dropped.
inline std::map<std::pair<NodeId, NodeId>, double> brute_force_metapath(
    const HeteroGraph& g, const MetaPath& m) {
  std::map<std::pair<NodeId, NodeId>, double> counts;
  struct Walk {
    NodeId at;
    std::size_t step;
    double weight;
  };
  for (NodeId start : g.nodes_of_type(m.node_types.front())) {
    std::vector<Walk> stack{{start, 0, 1.0}};
    while (!stack.empty()) {
      Walk w = stack.back();
      stack.pop_back();
      if (w.step == m.edge_types.size()) {
        if (w.at != start) counts[{start, w.at}] += w.weight;
        continue;
      }
      for (const auto& arc : g.arcs(m.edge_types[w.step], w.at)) {
        if (g.node_type(arc.to) != m.node_types[w.step + 1]) continue;
        stack.push_back({arc.to, w.step + 1, w.weight * arc.weight});
      }
    }
  }
  return counts;
}

// Writes a temp file and returns its path.
inline std::string write_temp(const std::string& dir, const std::string& name,
                              const std::string& content) {
  std::filesystem::create_directories(dir);
  std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace testsupport
