#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hinembed/graph.hpp"
#include "hinembed/triples.hpp"

namespace hinembed {

// Measured structural profile of one relation.
struct RelationStats {
  std::string name;
  std::string endpoint_u, endpoint_v;
  double n_instances = 0.0;           // N_r (instance-weight total)
  std::size_t n_u = 0, n_v = 0;       // endpoint type populations
  double avg_degree_u = 0.0, avg_degree_v = 0.0;
  double degree_ratio = 0.0;          // D >= 1
  double sparsity = 0.0;              // S; in (0, 1] for distinct-pair counts
  Category category = Category::IR;
};

// Builds the derived measures from raw counts. The average degrees default to
// n_instances over the population, but can be supplied explicitly (published
// tables sometimes report degrees counted on a different instance basis than
// their pair counts).
RelationStats stats_from_counts(const std::string& name, std::size_t n_u,
                                std::size_t n_v, double n_instances,
                                std::optional<double> avg_u = std::nullopt,
                                std::optional<double> avg_v = std::nullopt);

enum class Measure { DegreeRatio, Sparsity, Both };

struct CategorizationPolicy {
  Measure measure = Measure::DegreeRatio;
  // Any cutoff strictly between the largest interaction-style ratio (~2) and
  // the smallest affiliation-style ratio (~290) observed in real networks
  // reproduces the same split; 10 is the documented default.
  double d_threshold = 10.0;
  double s_threshold = 0.1;
  std::map<std::string, Category> manual_overrides;

  void validate() const;
};

double degree_ratio(const HeteroGraph& g, const RelationSpec& r);
double sparsity(const HeteroGraph& g, const RelationSpec& r);

// AR iff the selected measure strictly exceeds its threshold (Both: both
// must); a manual override wins outright. Ties at the threshold fall to IR.
Category categorize(const RelationStats& stats,
                    const CategorizationPolicy& policy);

RelationStats compute_stats(const HeteroGraph& g, const RelationSpec& r,
                            std::span<const Triple> triples,
                            const CategorizationPolicy& policy);

std::vector<RelationStats> analyze_all(const HeteroGraph& g,
                                       const std::vector<RelationSpec>& relations,
                                       const CategorizationPolicy& policy);

// TSV report: relation, N_r, avg_deg_u, avg_deg_v, D, S, category.
// Degrees and D use 1 decimal, S five significant digits.
void write_analysis_tsv(const std::string& path,
                        const std::vector<RelationStats>& stats);
std::string format_analysis_tsv(const std::vector<RelationStats>& stats);

// Reads a report back into a relation-name -> category map (the `train`
// stage accepts a previously produced report instead of re-analyzing).
std::map<std::string, Category> read_categories_tsv(const std::string& path);

}  // namespace hinembed
