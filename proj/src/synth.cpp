#include "hinembed/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "hinembed/error.hpp"
#include "hinembed/rng.hpp"

namespace hinembed {

SynthData synthesize(const SynthConfig& cfg) {
  if (cfg.communities < 2) throw Error("need >= 2 communities");
  if (cfg.members_per_community < 2 || cfg.hubs_per_community < 1) {
    throw Error("each community needs >= 2 members and >= 1 hub");
  }
  if (cfg.affiliations_per_member > cfg.hubs_per_community) {
    throw Error("affiliations_per_member cannot exceed hubs_per_community");
  }
  if (!(cfg.noise >= 0.0 && cfg.noise < 1.0) ||
      !(cfg.affiliation_noise >= 0.0 && cfg.affiliation_noise < 1.0)) {
    throw Error("noise must lie in [0, 1)");
  }
  Rng rng(cfg.seed);
  HeteroGraph g;
  TypeId tm = g.intern_node_type("M");
  TypeId th = g.intern_node_type("H");
  TypeId mh = g.intern_edge_type("MH", tm, th, true);
  TypeId mm = g.intern_edge_type("MM", tm, tm, false);

  std::vector<std::vector<NodeId>> members(cfg.communities);
  std::vector<std::vector<NodeId>> hubs(cfg.communities);
  std::map<NodeId, int> labels;
  for (int c = 0; c < cfg.communities; ++c) {
    for (int i = 0; i < cfg.members_per_community; ++i) {
      NodeId v = g.add_node("m" + std::to_string(c) + "_" + std::to_string(i), tm);
      members[c].push_back(v);
      labels[v] = c;
    }
  }
  for (int c = 0; c < cfg.communities; ++c) {
    for (int i = 0; i < cfg.hubs_per_community; ++i) {
      hubs[c].push_back(
          g.add_node("h" + std::to_string(c) + "_" + std::to_string(i), th));
    }
  }

  // Affiliation edges: each member attaches to distinct hubs, mostly within
  // its own community.
  for (int c = 0; c < cfg.communities; ++c) {
    for (NodeId m : members[c]) {
      std::set<NodeId> chosen;
      int guard = 0;
      while (static_cast<int>(chosen.size()) < cfg.affiliations_per_member &&
             ++guard < 10000) {
        if (rng.bernoulli(cfg.affiliation_noise)) {
          int oc = static_cast<int>(rng.uniform_index(cfg.communities - 1));
          if (oc >= c) ++oc;
          chosen.insert(hubs[oc][rng.uniform_index(hubs[oc].size())]);
        } else {
          chosen.insert(hubs[c][rng.uniform_index(hubs[c].size())]);
        }
      }
      for (NodeId h : chosen) g.add_edge(m, h, mh, 1.0);
    }
  }

  // Peer edges: mostly within the community, a noise fraction anywhere else.
  std::set<std::pair<NodeId, NodeId>> seen;
  for (int c = 0; c < cfg.communities; ++c) {
    for (NodeId m : members[c]) {
      int placed = 0;
      int guard = 0;
      while (placed < cfg.peers_per_member && ++guard < 10000) {
        NodeId other;
        if (rng.bernoulli(cfg.noise)) {
          int oc;
          if (cfg.noise_style == SynthConfig::NoiseStyle::Ring) {
            oc = (c + 1) % cfg.communities;
          } else {
            oc = static_cast<int>(rng.uniform_index(cfg.communities - 1));
            if (oc >= c) ++oc;
          }
          other = members[oc][rng.uniform_index(members[oc].size())];
        } else {
          other = members[c][rng.uniform_index(members[c].size())];
        }
        if (other == m) continue;
        auto key = std::minmax(m, other);
        if (!seen.insert({key.first, key.second}).second) continue;
        g.add_edge(m, other, mm, 1.0);
        ++placed;
      }
    }
  }

  g.finalize();
  return SynthData{std::move(g), LabeledNodes::from_map(labels)};
}

void write_synth_files(const std::string& dir, const SynthConfig& cfg) {
  std::filesystem::create_directories(dir);
  SynthData data = synthesize(cfg);
  auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  save_graph(data.graph, path("nodes.tsv"), path("edges.tsv"),
             path("schema.tsv"));
  std::ofstream labels(path("labels.tsv"));
  if (!labels) throw Error("cannot write labels.tsv under " + dir);
  for (const auto& [node, label] : data.labels.items) {
    labels << data.graph.node_name(node) << '\t' << label << '\n';
  }
}

}  // namespace hinembed
