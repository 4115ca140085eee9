#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "hinembed/graph.hpp"
#include "hinembed/triples.hpp"
#include "support/fixtures.hpp"

using namespace hinembed;
using namespace testsupport;

namespace {

std::string tmpdir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "hinembed_graph_tests" /
             leaf;
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("loads a minimal two-node graph") {
  std::string dir = tmpdir("toy");
  auto nodes = write_temp(dir, "nodes.tsv", "a1\tAuthor\np1\tPaper\n");
  auto edges = write_temp(dir, "edges.tsv", "a1\tp1\tAP\n");
  auto schema = write_temp(dir, "schema.tsv", "AP\tAuthor\tPaper\tdirected\n");
  HeteroGraph g = load_graph(nodes, edges, schema);
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_edges() == 1);
  CHECK(g.edges()[0].weight == 1.0);
  CHECK(g.node_type_name(g.node_type(*g.find_node("a1"))) == "Author");
}

TEST_CASE("node counts scale to published dataset sizes") {
  std::string dir = tmpdir("dblp_sizes");
  std::ostringstream nodes;
  auto bulk = [&](const char* prefix, const char* type, int n) {
    for (int i = 0; i < n; ++i) nodes << prefix << i << '\t' << type << '\n';
  };
  bulk("a", "A", 14475);
  bulk("p", "P", 14376);
  bulk("c", "C", 20);
  bulk("t", "T", 8811);
  auto nodes_path = write_temp(dir, "nodes.tsv", nodes.str());
  auto edges_path = write_temp(dir, "edges.tsv", "# none\n");
  auto schema_path = write_temp(
      dir, "schema.tsv",
      "AP\tA\tP\tundirected\nPC\tP\tC\tdirected\nPT\tP\tT\tundirected\n");
  HeteroGraph g = load_graph(nodes_path, edges_path, schema_path);
  CHECK(g.num_nodes() == 14475 + 14376 + 20 + 8811);
  CHECK(g.count_of_type(*g.find_node_type("A")) == 14475);
  CHECK(g.count_of_type(*g.find_node_type("P")) == 14376);
  CHECK(g.count_of_type(*g.find_node_type("C")) == 20);
  CHECK(g.count_of_type(*g.find_node_type("T")) == 8811);
}

TEST_CASE("rejects bad inputs with line numbers") {
  std::string dir = tmpdir("errors");
  auto schema = write_temp(dir, "schema.tsv", "AP\tAuthor\tPaper\tdirected\n");
  auto nodes = write_temp(dir, "nodes.tsv", "a1\tAuthor\np1\tPaper\n");

  SUBCASE("dangling endpoint") {
    auto edges = write_temp(dir, "edges.tsv", "a1\tmissing\tAP\n");
    CHECK_THROWS_WITH_AS(load_graph(nodes, edges, schema),
                         doctest::Contains("dangling endpoint"), ParseError);
  }
  SUBCASE("unknown edge type") {
    auto edges = write_temp(dir, "edges.tsv", "a1\tp1\tZZ\n");
    CHECK_THROWS_WITH_AS(load_graph(nodes, edges, schema),
                         doctest::Contains("unknown edge type"), ParseError);
  }
  SUBCASE("malformed line carries its number") {
    auto edges = write_temp(dir, "edges.tsv", "# fine\na1\tp1\tAP\nbroken\n");
    try {
      load_graph(nodes, edges, schema);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("schema violation") {
    auto edges = write_temp(dir, "edges.tsv", "p1\ta1\tAP\n");
    CHECK_THROWS_WITH_AS(load_graph(nodes, edges, schema),
                         doctest::Contains("violate schema"), ParseError);
  }
  SUBCASE("duplicate node id") {
    auto dup_nodes = write_temp(dir, "nodes2.tsv", "a1\tAuthor\na1\tAuthor\n");
    auto edges = write_temp(dir, "edges.tsv", "");
    CHECK_THROWS_WITH_AS(load_graph(dup_nodes, edges, schema),
                         doctest::Contains("duplicate node id"), ParseError);
  }
  SUBCASE("negative weight") {
    auto edges = write_temp(dir, "edges.tsv", "a1\tp1\tAP\t-2\n");
    CHECK_THROWS_AS(load_graph(nodes, edges, schema), ParseError);
  }
}

TEST_CASE("rejects a graph that is not heterogeneous") {
  HeteroGraph g;
  TypeId t = g.intern_node_type("N");
  TypeId e = g.intern_edge_type("E", t, t, false);
  NodeId a = g.add_node("a", t);
  NodeId b = g.add_node("b", t);
  g.add_edge(a, b, e);
  CHECK_THROWS_WITH_AS(g.finalize(), doctest::Contains("not a heterogeneous"),
                       Error);
}

TEST_CASE("undirected edges are normalized and mirrored") {
  std::string dir = tmpdir("undirected");
  auto nodes = write_temp(dir, "nodes.tsv", "a1\tAuthor\np1\tPaper\n");
  auto schema = write_temp(dir, "schema.tsv", "AP\tAuthor\tPaper\tundirected\n");
  // Reversed orientation in the file; storage is canonical Author->Paper.
  auto edges = write_temp(dir, "edges.tsv", "p1\ta1\tAP\n");
  HeteroGraph g = load_graph(nodes, edges, schema);
  const Edge& e = g.edges()[0];
  CHECK(g.node_type_name(g.node_type(e.src)) == "Author");
  TypeId ap = *g.find_edge_type("AP");
  CHECK(g.arcs(ap, *g.find_node("a1")).size() == 1);
  CHECK(g.arcs(ap, *g.find_node("p1")).size() == 1);
}

TEST_CASE("average degrees") {
  SUBCASE("hub-shaped relation reproduces population averages") {
    // 14,376 papers with one conference edge each over 20 conferences.
    HeteroGraph g;
    TypeId tp = g.intern_node_type("P");
    TypeId tc = g.intern_node_type("C");
    TypeId pc = g.intern_edge_type("PC", tp, tc, true);
    std::vector<NodeId> confs;
    for (int i = 0; i < 20; ++i) {
      confs.push_back(g.add_node("c" + std::to_string(i), tc));
    }
    for (int i = 0; i < 14376; ++i) {
      NodeId p = g.add_node("p" + std::to_string(i), tp);
      g.add_edge(p, confs[i % 20], pc);
    }
    g.finalize();
    RelationSpec r = g.relation("PC");
    CHECK(avg_degree(g, r, Endpoint::Target) == doctest::Approx(718.8));
    CHECK(avg_degree(g, r, Endpoint::Source) == doctest::Approx(1.0));
  }
  SUBCASE("single edge between singleton types") {
    HeteroGraph g;
    TypeId ta = g.intern_node_type("A");
    TypeId tb = g.intern_node_type("B");
    TypeId e = g.intern_edge_type("E", ta, tb, true);
    g.add_edge(g.add_node("a", ta), g.add_node("b", tb), e);
    g.finalize();
    RelationSpec r = g.relation("E");
    CHECK(avg_degree(g, r, Endpoint::Source) == doctest::Approx(1.0));
    CHECK(avg_degree(g, r, Endpoint::Target) == doctest::Approx(1.0));
  }
  SUBCASE("two authors, four papers") {
    HeteroGraph g = two_authors_four_papers();
    RelationSpec r = g.relation("AP");
    CHECK(avg_degree(g, r, Endpoint::Source) == doctest::Approx(2.0));
    CHECK(avg_degree(g, r, Endpoint::Target) == doctest::Approx(1.0));
  }
  SUBCASE("zero-node endpoint type errors") {
    std::string dir = tmpdir("zero_type");
    auto nodes = write_temp(dir, "nodes.tsv", "a1\tAuthor\n");
    auto edges = write_temp(dir, "edges.tsv", "");
    auto schema =
        write_temp(dir, "schema.tsv", "AP\tAuthor\tPaper\tdirected\n");
    HeteroGraph g = load_graph(nodes, edges, schema);
    CHECK_THROWS_WITH_AS(avg_degree(g, g.relation("AP"), Endpoint::Target),
                         doctest::Contains("zero nodes"), Error);
  }
}

TEST_CASE("type maps are total over stored nodes and edges") {
  Rng rng(11);
  HeteroGraph g = random_graph(rng);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    CHECK_NOTHROW(g.node_type_name(g.node_type(v)));
  }
  for (const auto& e : g.edges()) {
    CHECK_NOTHROW(g.edge_type_info(e.type));
  }
  CHECK_THROWS_AS(g.node_type(static_cast<NodeId>(g.num_nodes())), Error);
}

TEST_CASE("save/load round-trips the node set and typed edge multiset") {
  Rng rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    HeteroGraph g = random_graph(rng, 60, 150);
    std::string dir = tmpdir("roundtrip" + std::to_string(trial));
    auto nodes = dir + "/nodes.tsv";
    auto edges = dir + "/edges.tsv";
    auto schema = dir + "/schema.tsv";
    save_graph(g, nodes, edges, schema);
    HeteroGraph h = load_graph(nodes, edges, schema);
    REQUIRE(h.num_nodes() == g.num_nodes());
    REQUIRE(h.num_edges() == g.num_edges());
    auto edge_multiset = [](const HeteroGraph& gr) {
      std::multiset<std::tuple<std::string, std::string, std::string, double>>
          out;
      for (const auto& e : gr.edges()) {
        out.insert({gr.node_name(e.src), gr.node_name(e.dst),
                    gr.edge_type_info(e.type).name, e.weight});
      }
      return out;
    };
    CHECK(edge_multiset(g) == edge_multiset(h));
    std::set<std::pair<std::string, std::string>> names_g, names_h;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      names_g.insert({g.node_name(v), g.node_type_name(g.node_type(v))});
      names_h.insert({h.node_name(v), h.node_type_name(h.node_type(v))});
    }
    CHECK(names_g == names_h);
  }
}

TEST_CASE("per-type degree totals equal relation instance counts") {
  Rng rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    HeteroGraph g = random_graph(rng, 40, 120);
    for (const auto& spec : g.all_relations()) {
      auto triples = extract(g, spec, 0);
      if (triples.empty()) continue;
      double n_r = total_weight(triples);
      double src_total = avg_degree_from_instances(g, spec, Endpoint::Source,
                                                   n_r) *
                         static_cast<double>(g.count_of_type(spec.src_type));
      CHECK(src_total == doctest::Approx(n_r));
    }
  }
}

TEST_CASE("meta-path orientation") {
  std::string dir = tmpdir("metapath_schema");
  auto nodes = write_temp(dir, "nodes.tsv",
                          "u1\tU\nu2\tU\nb1\tB\nb2\tB\nl1\tL\n");
  auto schema = write_temp(
      dir, "schema.tsv",
      "UB\tU\tB\tundirected\nBL\tB\tL\tdirected\n"
      "metapath\tBUB\tUB,UB\tB,U,B\n"
      "metapath\tUBL\tUB,BL\n");
  auto edges = write_temp(dir, "edges.tsv", "u1\tb1\tUB\nu1\tb2\tUB\nb1\tl1\tBL\n");
  HeteroGraph g = load_graph(nodes, edges, schema);

  SUBCASE("explicit node sequence is honored") {
    RelationSpec bub = g.relation("BUB");
    CHECK(g.node_type_name(bub.src_type) == "B");
    CHECK(g.node_type_name(bub.dst_type) == "B");
  }
  SUBCASE("unambiguous chains are inferred") {
    RelationSpec ubl = g.relation("UBL");
    CHECK(g.node_type_name(ubl.src_type) == "U");
    CHECK(g.node_type_name(ubl.dst_type) == "L");
  }
  SUBCASE("ambiguous chains without a node sequence are rejected") {
    auto bad_schema = write_temp(
        dir, "schema_bad.tsv",
        "UB\tU\tB\tundirected\nBL\tB\tL\tdirected\nmetapath\tBUB\tUB,UB\n");
    CHECK_THROWS_WITH_AS(load_graph(nodes, edges, bad_schema),
                         doctest::Contains("ambiguous"), ParseError);
  }
}
