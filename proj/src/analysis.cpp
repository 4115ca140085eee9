#include "hinembed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hinembed/error.hpp"

namespace hinembed {

void CategorizationPolicy::validate() const {
  if (!(d_threshold > 1.0)) throw Error("d_threshold must exceed 1");
  if (!(s_threshold > 0.0 && s_threshold < 1.0)) {
    throw Error("s_threshold must lie in (0, 1)");
  }
}

RelationStats stats_from_counts(const std::string& name, std::size_t n_u,
                                std::size_t n_v, double n_instances,
                                std::optional<double> avg_u,
                                std::optional<double> avg_v) {
  if (n_u == 0 || n_v == 0) {
    throw Error("relation " + name + ": endpoint type with zero nodes");
  }
  if (!(n_instances > 0.0)) {
    throw Error("relation " + name + ": zero instances, measures undefined");
  }
  RelationStats s;
  s.name = name;
  s.n_u = n_u;
  s.n_v = n_v;
  s.n_instances = n_instances;
  s.avg_degree_u = avg_u.value_or(n_instances / static_cast<double>(n_u));
  s.avg_degree_v = avg_v.value_or(n_instances / static_cast<double>(n_v));
  s.degree_ratio = std::max(s.avg_degree_u, s.avg_degree_v) /
                   std::min(s.avg_degree_u, s.avg_degree_v);
  s.sparsity = n_instances / (static_cast<double>(n_u) * static_cast<double>(n_v));
  return s;
}

RelationStats compute_stats(const HeteroGraph& g, const RelationSpec& r,
                            std::span<const Triple> triples,
                            const CategorizationPolicy& policy) {
  double n_inst = total_weight(triples);
  RelationStats s = stats_from_counts(r.name, g.count_of_type(r.src_type),
                                      g.count_of_type(r.dst_type), n_inst);
  s.endpoint_u = g.node_type_name(r.src_type);
  s.endpoint_v = g.node_type_name(r.dst_type);
  s.category = categorize(s, policy);
  return s;
}

double degree_ratio(const HeteroGraph& g, const RelationSpec& r) {
  auto triples = extract(g, r, 0);
  return compute_stats(g, r, triples, CategorizationPolicy{}).degree_ratio;
}

double sparsity(const HeteroGraph& g, const RelationSpec& r) {
  auto triples = extract(g, r, 0);
  return compute_stats(g, r, triples, CategorizationPolicy{}).sparsity;
}

Category categorize(const RelationStats& stats,
                    const CategorizationPolicy& policy) {
  auto it = policy.manual_overrides.find(stats.name);
  if (it != policy.manual_overrides.end()) return it->second;
  bool by_d = stats.degree_ratio > policy.d_threshold;
  // Sparse relations are interaction-like: low S means AR under this measure
  // is ruled out, so the AR side is S above threshold.
  bool by_s = stats.sparsity > policy.s_threshold;
  bool ar = false;
  switch (policy.measure) {
    case Measure::DegreeRatio: ar = by_d; break;
    case Measure::Sparsity: ar = by_s; break;
    case Measure::Both: ar = by_d && by_s; break;
  }
  return ar ? Category::AR : Category::IR;
}

std::vector<RelationStats> analyze_all(const HeteroGraph& g,
                                       const std::vector<RelationSpec>& relations,
                                       const CategorizationPolicy& policy) {
  if (relations.empty()) throw Error("analyze_all: empty relation list");
  policy.validate();
  for (const auto& [name, cat] : policy.manual_overrides) {
    (void)cat;
    bool known = std::any_of(relations.begin(), relations.end(),
                             [&](const RelationSpec& r) { return r.name == name; });
    if (!known) throw Error("category override references unknown relation: " + name);
  }
  std::vector<RelationStats> out;
  out.reserve(relations.size());
  for (std::uint32_t i = 0; i < relations.size(); ++i) {
    try {
      auto triples = extract(g, relations[i], i);
      out.push_back(compute_stats(g, relations[i], triples, policy));
    } catch (const Error& e) {
      throw Error("relation " + relations[i].name + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string fixed1(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", x);
  return buf;
}

std::string sig5(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", x);
  return buf;
}

}  // namespace

std::string format_analysis_tsv(const std::vector<RelationStats>& stats) {
  std::ostringstream out;
  out << "relation\tN_r\tavg_deg_u\tavg_deg_v\tD\tS\tcategory\n";
  for (const auto& s : stats) {
    char nbuf[64];
    std::snprintf(nbuf, sizeof(nbuf), "%.17g", s.n_instances);
    out << s.name << '\t' << nbuf << '\t' << fixed1(s.avg_degree_u) << '\t'
        << fixed1(s.avg_degree_v) << '\t' << fixed1(s.degree_ratio) << '\t'
        << sig5(s.sparsity) << '\t' << to_string(s.category) << '\n';
  }
  return out.str();
}

void write_analysis_tsv(const std::string& path,
                        const std::vector<RelationStats>& stats) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << format_analysis_tsv(stats);
}

std::map<std::string, Category> read_categories_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::map<std::string, Category> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("relation\t", 0) == 0) {
      continue;
    }
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string item;
    while (std::getline(ss, item, '\t')) f.push_back(item);
    if (f.size() != 7) {
      throw ParseError(path, lineno, "expected 7-column analysis row");
    }
    if (f[6] == "AR") {
      out[f[0]] = Category::AR;
    } else if (f[6] == "IR") {
      out[f[0]] = Category::IR;
    } else {
      throw ParseError(path, lineno, "unknown category: " + f[6]);
    }
  }
  return out;
}

}  // namespace hinembed
