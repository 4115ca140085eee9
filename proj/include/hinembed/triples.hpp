#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hinembed/graph.hpp"
#include "hinembed/rng.hpp"

namespace hinembed {

enum class Category : std::uint8_t { AR, IR };

const char* to_string(Category c);

// Ordered registry of the relations a run works with; triples refer to
// relations by index into this set.
struct RelationSet {
  std::vector<RelationSpec> specs;
  std::vector<Category> categories;  // parallel to specs

  std::size_t size() const { return specs.size(); }
  std::size_t index_of(const std::string& name) const;
};

struct Triple {
  NodeId u = 0;
  NodeId v = 0;
  std::uint32_t rel = 0;
  double w = 1.0;
};

// One triple per distinct (u, v) pair joined by an r-edge; weight is the
// summed multiplicity * edge weight.
std::vector<Triple> extract_atomic(const HeteroGraph& g, const RelationSpec& r,
                                   std::uint32_t rel_index);

// One triple per distinct endpoint pair; weight is the number of walk
// instances between the pair (self-pairs u == v are dropped).
std::vector<Triple> extract_metapath(const HeteroGraph& g, const MetaPath& m,
                                     std::uint32_t rel_index);

std::vector<Triple> extract(const HeteroGraph& g, const RelationSpec& r,
                            std::uint32_t rel_index);

double total_weight(std::span<const Triple> triples);

// Weighted positive-sampling tables over the AR / IR partitions. Immutable
// after build; samplers take the caller's rng so parallel workers own their
// streams.
class TripleStore {
 public:
  static TripleStore build(const std::vector<std::vector<Triple>>& per_relation,
                           const RelationSet& rels,
                           std::vector<std::string>* warnings = nullptr);

  std::span<const Triple> partition(Category c) const;
  std::span<const Triple> relation_triples(std::uint32_t rel) const;
  double mass(Category c) const { return c == Category::AR ? ar_mass_ : ir_mass_; }
  double total_mass() const { return ar_mass_ + ir_mass_; }
  std::size_t size() const { return ar_.size() + ir_.size(); }

  // Draws a triple with probability w / mass(partition).
  const Triple& sample_positive(Category c, Rng& rng) const;

  // True when (u, rel, v) is a stored positive; used by the optional
  // filtered-corruption mode.
  bool contains(std::uint32_t rel, NodeId u, NodeId v) const;

 private:
  std::vector<Triple> ar_, ir_;
  std::vector<double> ar_cum_, ir_cum_;
  double ar_mass_ = 0.0, ir_mass_ = 0.0;
  struct RelSpan {
    Category cat;
    std::size_t begin, end;
  };
  std::vector<RelSpan> rel_spans_;
  std::unordered_set<std::uint64_t> positive_keys_;
  std::uint32_t key_bits_ = 0;
};

// Replaces exactly one endpoint (fair coin) with a different node drawn
// uniformly from the same node type.
Triple corrupt(const Triple& t, const HeteroGraph& g, const RelationSet& rels,
               Rng& rng);

// -- triple files ------------------------------------------------------------
// TSV: u <TAB> relation_name <TAB> v <TAB> w
void write_triples_tsv(const std::string& path,
                       const std::vector<std::vector<Triple>>& per_relation,
                       const HeteroGraph& g, const RelationSet& rels);
std::vector<std::vector<Triple>> read_triples_tsv(const std::string& path,
                                                  const HeteroGraph& g,
                                                  const RelationSet& rels);

}  // namespace hinembed
