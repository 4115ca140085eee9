#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "hinembed/analysis.hpp"
#include "support/fixtures.hpp"
#include "support/published_table.hpp"

using namespace hinembed;
using namespace testsupport;

TEST_CASE("degree ratio on hand-counted fixtures") {
  HeteroGraph g = two_authors_four_papers();
  CHECK(degree_ratio(g, g.relation("AP")) == doctest::Approx(2.0));

  // symmetric relation: both endpoint types see the same averages
  HeteroGraph m = mini_dblp();
  RelationSpec ap = m.relation("AP");
  auto triples = extract(m, ap, 0);
  RelationStats s = compute_stats(m, ap, triples, CategorizationPolicy{});
  CHECK(s.degree_ratio >= 1.0);
}

TEST_CASE("sparsity on hand-counted fixtures") {
  SUBCASE("three instances over 2x3 populations") {
    HeteroGraph g;
    TypeId ta = g.intern_node_type("A");
    TypeId tb = g.intern_node_type("B");
    TypeId e = g.intern_edge_type("E", ta, tb, true);
    NodeId a1 = g.add_node("a1", ta), a2 = g.add_node("a2", ta);
    NodeId b1 = g.add_node("b1", tb);
    g.add_node("b2", tb);
    NodeId b3 = g.add_node("b3", tb);
    g.add_edge(a1, b1, e);
    g.add_edge(a1, b3, e);
    g.add_edge(a2, b1, e);
    g.finalize();
    CHECK(sparsity(g, g.relation("E")) == doctest::Approx(0.5));
  }
  SUBCASE("complete bipartite relation has sparsity 1") {
    HeteroGraph g;
    TypeId ta = g.intern_node_type("A");
    TypeId tb = g.intern_node_type("B");
    TypeId e = g.intern_edge_type("E", ta, tb, true);
    std::vector<NodeId> as, bs;
    for (int i = 0; i < 3; ++i) as.push_back(g.add_node("a" + std::to_string(i), ta));
    for (int i = 0; i < 4; ++i) bs.push_back(g.add_node("b" + std::to_string(i), tb));
    for (NodeId a : as)
      for (NodeId b : bs) g.add_edge(a, b, e);
    g.finalize();
    CHECK(sparsity(g, g.relation("E")) == doctest::Approx(1.0));
  }
}

TEST_CASE("published table rows reproduce within presentation rounding") {
  CategorizationPolicy policy;  // defaults: degree_ratio, threshold 10
  std::map<std::string, std::set<std::string>> ar_by_dataset;
  for (const auto& row : published_rows()) {
    RelationStats s = stats_from_counts(row.relation, row.n_u, row.n_v,
                                        row.n_instances, row.avg_u, row.avg_v);
    CAPTURE(row.dataset);
    CAPTURE(row.relation);
    CHECK(d_matches(s.degree_ratio, row.d_printed));
    CHECK(s_matches(s.sparsity, row.s_printed));
    CHECK(categorize(s, policy) == row.category);
    if (row.category == Category::AR) {
      ar_by_dataset[row.dataset].insert(row.relation);
    }
  }
  CHECK(ar_by_dataset["dblp"] == std::set<std::string>{"PC", "APC"});
  CHECK(ar_by_dataset["yelp"] == std::set<std::string>{"BR", "BS", "BL"});
  CHECK(ar_by_dataset["aminer"] == std::set<std::string>{"PC", "APC"});
}

TEST_CASE("within each dataset every AR outranks every IR on D") {
  std::map<std::string, std::pair<double, double>> min_ar_max_ir;
  for (const auto& row : published_rows()) {
    RelationStats s = stats_from_counts(row.relation, row.n_u, row.n_v,
                                        row.n_instances, row.avg_u, row.avg_v);
    auto& [min_ar, max_ir] = min_ar_max_ir
        .try_emplace(row.dataset, 1e18, 0.0).first->second;
    if (row.category == Category::AR) {
      min_ar = std::min(min_ar, s.degree_ratio);
    } else {
      max_ir = std::max(max_ir, s.degree_ratio);
    }
  }
  for (const auto& [dataset, bounds] : min_ar_max_ir) {
    CAPTURE(dataset);
    CHECK(bounds.first > bounds.second);
  }
}

TEST_CASE("categorize respects overrides and tie-breaks toward IR") {
  RelationStats s = stats_from_counts("AP", 100, 100, 500);
  s.degree_ratio = 10.0;  // exactly at the default threshold
  CategorizationPolicy policy;
  CHECK(categorize(s, policy) == Category::IR);
  s.degree_ratio = 10.0001;
  CHECK(categorize(s, policy) == Category::AR);
  policy.manual_overrides["AP"] = Category::AR;
  s.degree_ratio = 1.0;
  CHECK(categorize(s, policy) == Category::AR);
}

TEST_CASE("categorize by sparsity and by both measures") {
  RelationStats s = stats_from_counts("R", 10, 10, 60);  // S = 0.6, D = 1
  CategorizationPolicy policy;
  policy.measure = Measure::Sparsity;
  CHECK(categorize(s, policy) == Category::AR);
  policy.measure = Measure::Both;
  CHECK(categorize(s, policy) == Category::IR);  // D fails the cut
}

TEST_CASE("degree ratio is invariant under endpoint swap and graph duplication") {
  Rng rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    HeteroGraph g = random_graph(rng, 30, 80);
    for (const auto& spec : g.all_relations()) {
      auto triples = extract(g, spec, 0);
      if (triples.empty()) continue;
      RelationStats s = compute_stats(g, spec, triples, CategorizationPolicy{});
      CHECK(s.degree_ratio >= 1.0);
      CHECK(s.sparsity > 0.0);

      // Swapped endpoints: same ratio by max/min symmetry.
      RelationStats swapped = stats_from_counts(
          spec.name, g.count_of_type(spec.dst_type),
          g.count_of_type(spec.src_type), s.n_instances, s.avg_degree_v,
          s.avg_degree_u);
      CHECK(swapped.degree_ratio == doctest::Approx(s.degree_ratio));

      // Duplicating the whole graph k times scales instances and populations
      // together: D fixed; node duplication alone scales S by 1/k.
      for (int k : {2, 5}) {
        RelationStats dup = stats_from_counts(
            spec.name, g.count_of_type(spec.src_type) * k,
            g.count_of_type(spec.dst_type) * k, s.n_instances * k);
        RelationStats base = stats_from_counts(
            spec.name, g.count_of_type(spec.src_type),
            g.count_of_type(spec.dst_type), s.n_instances);
        CHECK(dup.degree_ratio == doctest::Approx(base.degree_ratio));
        RelationStats padded = stats_from_counts(
            spec.name, g.count_of_type(spec.src_type) * k,
            g.count_of_type(spec.dst_type), s.n_instances);
        CHECK(padded.sparsity == doctest::Approx(base.sparsity / k));
      }
    }
  }
}

TEST_CASE("analyze_all reports in input order and validates input") {
  HeteroGraph g = mini_dblp();
  std::vector<RelationSpec> rels = {g.relation("AP"), g.relation("PC"),
                                    g.relation("APC")};
  auto stats = analyze_all(g, rels, CategorizationPolicy{});
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].name == "AP");
  CHECK(stats[1].name == "PC");
  CHECK(stats[2].name == "APC");

  CHECK_THROWS_WITH_AS(analyze_all(g, {}, CategorizationPolicy{}),
                       doctest::Contains("empty relation list"), Error);

  CategorizationPolicy bad;
  bad.manual_overrides["nope"] = Category::AR;
  CHECK_THROWS_WITH_AS(analyze_all(g, rels, bad),
                       doctest::Contains("unknown relation"), Error);

  CategorizationPolicy bad_threshold;
  bad_threshold.d_threshold = 0.5;
  CHECK_THROWS_AS(analyze_all(g, rels, bad_threshold), Error);
}

TEST_CASE("report TSV schema and rounding") {
  HeteroGraph g = two_authors_four_papers();
  auto stats = analyze_all(g, {g.relation("AP")}, CategorizationPolicy{});
  std::string tsv = format_analysis_tsv(stats);
  CHECK(tsv.find("relation\tN_r\tavg_deg_u\tavg_deg_v\tD\tS\tcategory") == 0);
  CHECK(tsv.find("AP\t4\t2.0\t1.0\t2.0\t0.5\tIR") != std::string::npos);
}
