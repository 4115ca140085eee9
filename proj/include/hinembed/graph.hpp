#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hinembed/error.hpp"

namespace hinembed {

using NodeId = std::uint32_t;
using TypeId = std::uint16_t;

constexpr NodeId kInvalidNode = static_cast<NodeId>(-1);

struct EdgeTypeInfo {
  std::string name;
  TypeId src_type = 0;
  TypeId dst_type = 0;
  bool directed = true;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  TypeId type = 0;
  double weight = 1.0;
};

// A typed walk template: edge_types[i] connects node_types[i] to
// node_types[i+1], traversing undirected edge types in either orientation.
struct MetaPath {
  std::string name;
  std::vector<TypeId> edge_types;
  std::vector<TypeId> node_types;  // length edge_types.size() + 1

  std::size_t length() const { return edge_types.size(); }
};

// A relation is either an atomic edge type or a meta-path; either way it has
// well-defined endpoint node types (t_u, t_v).
struct RelationSpec {
  std::string name;
  bool composite = false;
  TypeId edge_type = 0;  // valid when !composite
  MetaPath path;         // valid when composite
  TypeId src_type = 0;
  TypeId dst_type = 0;
};

// Immutable after finalize(); all queries are const and safe to share across
// threads.
class HeteroGraph {
 public:
  struct Arc {
    NodeId to;
    double weight;  // summed multiplicity * edge weight over parallel edges
  };

  // -- construction ---------------------------------------------------------
  TypeId intern_node_type(const std::string& name);
  TypeId intern_edge_type(const std::string& name, TypeId src, TypeId dst,
                          bool directed);
  NodeId add_node(const std::string& external_id, TypeId type);
  void add_edge(NodeId src, NodeId dst, TypeId type, double weight = 1.0);
  void add_metapath(MetaPath mp);
  void finalize();  // builds adjacency, checks the HIN validity condition

  // -- node/edge/type queries ----------------------------------------------
  std::size_t num_nodes() const { return node_types_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_node_types() const { return node_type_names_.size(); }
  std::size_t num_edge_types() const { return edge_type_infos_.size(); }

  TypeId node_type(NodeId v) const;  // total on stored nodes
  const std::string& node_name(NodeId v) const { return node_names_.at(v); }
  const std::string& node_type_name(TypeId t) const {
    return node_type_names_.at(t);
  }
  const EdgeTypeInfo& edge_type_info(TypeId t) const {
    return edge_type_infos_.at(t);
  }
  std::optional<TypeId> find_node_type(const std::string& name) const;
  std::optional<TypeId> find_edge_type(const std::string& name) const;
  std::optional<NodeId> find_node(const std::string& external_id) const;

  const std::vector<NodeId>& nodes_of_type(TypeId t) const;
  std::size_t count_of_type(TypeId t) const { return nodes_of_type(t).size(); }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<MetaPath>& metapaths() const { return metapaths_; }
  const std::vector<std::string>& node_names() const { return node_names_; }

  // Arcs leaving `from` via edge type `t`. For undirected types this includes
  // mirrored arcs, so traversal works from either endpoint.
  std::span<const Arc> arcs(TypeId t, NodeId from) const;

  // Resolves a relation name (edge type or declared meta-path) to a spec.
  RelationSpec relation(const std::string& name) const;
  std::vector<RelationSpec> all_relations() const;

  bool finalized() const { return finalized_; }

 private:
  std::vector<std::string> node_names_;
  std::vector<TypeId> node_types_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<std::string> node_type_names_;
  std::unordered_map<std::string, TypeId> node_type_index_;
  std::vector<EdgeTypeInfo> edge_type_infos_;
  std::unordered_map<std::string, TypeId> edge_type_index_;
  std::vector<Edge> edges_;
  std::vector<MetaPath> metapaths_;
  std::vector<std::vector<NodeId>> by_type_;

  // Per edge type, CSR adjacency over all nodes.
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<Arc> arcs;
  };
  std::vector<Csr> adjacency_;
  bool finalized_ = false;
};

// -- file ingestion ----------------------------------------------------------
// nodes:  node_id <TAB> node_type
// edges:  src_id <TAB> dst_id <TAB> edge_type [<TAB> weight]
// schema: edge_type <TAB> src_type <TAB> dst_type <TAB> directed|undirected
//         metapath <TAB> NAME <TAB> e1,e2,... [<TAB> t1,t2,...]
// '#'-prefixed lines and blank lines are ignored everywhere.
HeteroGraph load_graph(const std::string& nodes_file,
                       const std::string& edges_file,
                       const std::string& schema_file);

// Writes the graph back out in the same formats; load_graph on the result
// reproduces the node set and typed edge multiset.
void save_graph(const HeteroGraph& g, const std::string& nodes_file,
                const std::string& edges_file, const std::string& schema_file);

enum class Endpoint { Source, Target };

// Average r-degree of the endpoint's node type: total r-instance weight
// divided by the full population of that type.
double avg_degree(const HeteroGraph& g, const RelationSpec& r,
                  Endpoint endpoint);
double avg_degree_from_instances(const HeteroGraph& g, const RelationSpec& r,
                                 Endpoint endpoint, double total_instances);

}  // namespace hinembed
