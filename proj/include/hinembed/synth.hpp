#pragma once

#include <string>

#include "hinembed/evaluation.hpp"
#include "hinembed/graph.hpp"

namespace hinembed {

// Planted-community generator: member nodes (M) carry community labels, hub
// nodes (H) anchor an affiliation-shaped relation MH (few hubs, many members),
// and MM peer edges form an interaction-shaped relation. Cross-community
// noise is injected into the peer edges.
struct SynthConfig {
  int communities = 4;
  int members_per_community = 250;
  int hubs_per_community = 4;
  int affiliations_per_member = 2;  // MH edges into the member's own hubs
  int peers_per_member = 6;         // MM edges
  double noise = 0.15;              // probability a peer edge goes cross-community
  double affiliation_noise = 0.0;   // same, for the hub edges
  // Where cross-community peer edges land: spread uniformly over the other
  // communities, or concentrated on the ring-adjacent one.
  enum class NoiseStyle { Uniform, Ring };
  NoiseStyle noise_style = NoiseStyle::Uniform;
  std::uint64_t seed = 1;
};

struct SynthData {
  HeteroGraph graph;
  LabeledNodes labels;  // community of every member node
};

SynthData synthesize(const SynthConfig& cfg);

// Writes nodes.tsv / edges.tsv / schema.tsv / labels.tsv under `dir`.
void write_synth_files(const std::string& dir, const SynthConfig& cfg);

}  // namespace hinembed
