#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "hinembed/analysis.hpp"
#include "hinembed/evaluation.hpp"
#include "hinembed/graph.hpp"
#include "hinembed/model.hpp"
#include "hinembed/pipeline.hpp"
#include "hinembed/synth.hpp"
#include "hinembed/trainer.hpp"
#include "hinembed/triples.hpp"

namespace py = pybind11;
using namespace hinembed;

namespace {

RelationSet make_relation_set(const HeteroGraph& g,
                              const std::vector<std::string>& relations,
                              const CategorizationPolicy& policy) {
  RelationSet rels;
  if (relations.empty()) {
    rels.specs = g.all_relations();
  } else {
    for (const auto& name : relations) rels.specs.push_back(g.relation(name));
  }
  for (const auto& s : analyze_all(g, rels.specs, policy)) {
    rels.categories.push_back(s.category);
  }
  return rels;
}

TrainConfig config_from_kwargs(std::size_t dim, int negatives, double gamma,
                               double lr, int epochs, std::uint64_t seed,
                               const std::string& variant,
                               const std::string& ir_norm, int threads) {
  TrainConfig cfg;
  cfg.dim = dim;
  cfg.negatives = negatives;
  cfg.gamma = gamma;
  cfg.lr = lr;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.variant = variant_from_string(variant);
  cfg.ir_norm = ir_norm == "l1" ? Norm::L1 : Norm::L2;
  cfg.threads = threads;
  return cfg;
}

py::array_t<double> store_to_array(const EmbeddingStore& store) {
  auto flat = store.x_flat();
  py::array_t<double> out({store.num_nodes(), store.dim()});
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heterogeneous network embedding with relation-structure-aware "
            "losses";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "HinembedError", PyExc_RuntimeError);

  py::class_<HeteroGraph>(m, "Graph")
      .def_property_readonly("num_nodes", &HeteroGraph::num_nodes)
      .def_property_readonly("num_edges", &HeteroGraph::num_edges)
      .def("node_name",
           [](const HeteroGraph& g, NodeId v) { return g.node_name(v); })
      .def("node_type",
           [](const HeteroGraph& g, NodeId v) {
             return g.node_type_name(g.node_type(v));
           })
      .def("find_node",
           [](const HeteroGraph& g, const std::string& id) {
             return g.find_node(id);
           })
      .def("count_of_type",
           [](const HeteroGraph& g, const std::string& type) {
             auto t = g.find_node_type(type);
             if (!t) throw Error("unknown node type: " + type);
             return g.count_of_type(*t);
           })
      .def("relation_names", [](const HeteroGraph& g) {
        std::vector<std::string> names;
        for (const auto& spec : g.all_relations()) names.push_back(spec.name);
        return names;
      });

  py::class_<RelationStats>(m, "RelationStats")
      .def_readonly("name", &RelationStats::name)
      .def_readonly("n_instances", &RelationStats::n_instances)
      .def_readonly("avg_degree_u", &RelationStats::avg_degree_u)
      .def_readonly("avg_degree_v", &RelationStats::avg_degree_v)
      .def_readonly("degree_ratio", &RelationStats::degree_ratio)
      .def_readonly("sparsity", &RelationStats::sparsity)
      .def_property_readonly("category",
                             [](const RelationStats& s) {
                               return std::string(to_string(s.category));
                             })
      .def("__repr__", [](const RelationStats& s) {
        return "<RelationStats " + s.name + " D=" +
               std::to_string(s.degree_ratio) + " S=" +
               std::to_string(s.sparsity) + " " + to_string(s.category) + ">";
      });

  py::class_<EmbeddingStore>(m, "Embeddings")
      .def_property_readonly("dim", &EmbeddingStore::dim)
      .def_property_readonly("num_nodes", &EmbeddingStore::num_nodes)
      .def("to_numpy", &store_to_array)
      .def("node_vector", [](const EmbeddingStore& s, NodeId v) {
        auto row = s.node(v);
        return std::vector<double>(row.begin(), row.end());
      });

  py::class_<TrainReport>(m, "TrainReport")
      .def_property_readonly("epoch_losses",
                             [](const TrainReport& r) {
                               std::vector<double> out;
                               for (const auto& e : r.epochs) {
                                 out.push_back(e.loss_euclidean +
                                               e.loss_translation);
                               }
                               return out;
                             })
      .def_readonly("wall_seconds", &TrainReport::wall_seconds)
      .def_readonly("deterministic", &TrainReport::deterministic);

  m.def("load_graph", &load_graph, py::arg("nodes"), py::arg("edges"),
        py::arg("schema"));

  m.def(
      "synthesize",
      [](int communities, int members, int hubs, int affiliations, int peers,
         double noise, std::uint64_t seed) {
        SynthConfig sc;
        sc.communities = communities;
        sc.members_per_community = members;
        sc.hubs_per_community = hubs;
        sc.affiliations_per_member = affiliations;
        sc.peers_per_member = peers;
        sc.noise = noise;
        sc.seed = seed;
        SynthData data = synthesize(sc);
        std::map<std::string, int> labels;
        for (const auto& [node, label] : data.labels.items) {
          labels[data.graph.node_name(node)] = label;
        }
        return py::make_tuple(std::move(data.graph), labels);
      },
      py::arg("communities") = 4, py::arg("members") = 250,
      py::arg("hubs") = 4, py::arg("affiliations") = 2, py::arg("peers") = 6,
      py::arg("noise") = 0.15, py::arg("seed") = 1);

  m.def(
      "analyze",
      [](const HeteroGraph& g, const std::vector<std::string>& relations,
         double d_threshold) {
        CategorizationPolicy policy;
        policy.d_threshold = d_threshold;
        std::vector<RelationSpec> specs;
        if (relations.empty()) {
          specs = g.all_relations();
        } else {
          for (const auto& name : relations) specs.push_back(g.relation(name));
        }
        return analyze_all(g, specs, policy);
      },
      py::arg("graph"), py::arg("relations") = std::vector<std::string>{},
      py::arg("d_threshold") = 10.0);

  m.def(
      "train",
      [](const HeteroGraph& g, const std::vector<std::string>& relations,
         std::size_t dim, int negatives, double gamma, double lr, int epochs,
         std::uint64_t seed, const std::string& variant,
         const std::string& ir_norm, int threads, double d_threshold) {
        CategorizationPolicy policy;
        policy.d_threshold = d_threshold;
        RelationSet rels = make_relation_set(g, relations, policy);
        std::vector<std::vector<Triple>> per_rel(rels.size());
        for (std::uint32_t i = 0; i < rels.size(); ++i) {
          per_rel[i] = extract(g, rels.specs[i], i);
        }
        TripleStore store = TripleStore::build(per_rel, rels);
        TrainConfig cfg = config_from_kwargs(dim, negatives, gamma, lr, epochs,
                                             seed, variant, ir_norm, threads);
        TrainResult res;
        {
          py::gil_scoped_release release;
          res = train(g, rels, store, cfg);
        }
        return py::make_tuple(std::move(res.store), std::move(res.report));
      },
      py::arg("graph"), py::arg("relations") = std::vector<std::string>{},
      py::arg("dim") = 100, py::arg("negatives") = 3, py::arg("gamma") = 1.0,
      py::arg("lr") = 0.005, py::arg("epochs") = 10, py::arg("seed") = 1,
      py::arg("variant") = "joint", py::arg("ir_norm") = "l2",
      py::arg("threads") = 1, py::arg("d_threshold") = 10.0);

  m.def(
      "cluster_nmi",
      [](const EmbeddingStore& store, const HeteroGraph& g,
         const std::map<std::string, int>& labels, int k, std::uint64_t seed) {
        std::map<NodeId, int> by_node;
        for (const auto& [name, label] : labels) {
          auto node = g.find_node(name);
          if (!node) throw Error("unknown node id: " + name);
          by_node[*node] = label;
        }
        LabeledNodes ln = LabeledNodes::from_map(by_node);
        if (k == 0) k = ln.num_classes;
        return cluster_nmi(store, ln, k, seed);
      },
      py::arg("embeddings"), py::arg("graph"), py::arg("labels"),
      py::arg("k") = 0, py::arg("seed") = 1);

  m.def(
      "classify",
      [](const EmbeddingStore& store, const HeteroGraph& g,
         const std::map<std::string, int>& labels, double train_fraction,
         std::uint64_t seed) {
        std::map<NodeId, int> by_node;
        for (const auto& [name, label] : labels) {
          auto node = g.find_node(name);
          if (!node) throw Error("unknown node id: " + name);
          by_node[*node] = label;
        }
        auto m2 = classify(store, LabeledNodes::from_map(by_node),
                           train_fraction, seed);
        return py::make_tuple(m2.macro_f1, m2.micro_f1);
      },
      py::arg("embeddings"), py::arg("graph"), py::arg("labels"),
      py::arg("train_fraction") = 0.8, py::arg("seed") = 1);

  m.def(
      "link_predict",
      [](const HeteroGraph& g, const std::string& relation,
         const std::vector<std::string>& relations, std::size_t dim,
         int negatives, double gamma, double lr, int epochs,
         std::uint64_t seed, const std::string& variant) {
        CategorizationPolicy policy;
        RelationSet rels = make_relation_set(g, relations, policy);
        RelationSpec spec = g.relation(relation);
        LinkSplit split = make_link_split(g, spec, 0.8, seed);
        HeteroGraph train_net = training_network(g, spec, split);
        std::vector<std::vector<Triple>> per_rel(rels.size());
        for (std::uint32_t i = 0; i < rels.size(); ++i) {
          per_rel[i] = extract(train_net, rels.specs[i], i);
        }
        TripleStore store = TripleStore::build(per_rel, rels);
        TrainConfig cfg = config_from_kwargs(dim, negatives, gamma, lr, epochs,
                                             seed, variant, "l2", 1);
        TrainResult res;
        {
          py::gil_scoped_release release;
          res = train(train_net, rels, store, cfg);
        }
        auto rel_index = static_cast<std::uint32_t>(rels.index_of(relation));
        LinkMetrics lm =
            link_predict(res.store, g, spec, rel_index, split,
                         PairFeature::Hadamard, LossConfig{gamma, Norm::L2},
                         seed + 3);
        return py::make_tuple(lm.auc, lm.f1);
      },
      py::arg("graph"), py::arg("relation"),
      py::arg("relations") = std::vector<std::string>{}, py::arg("dim") = 100,
      py::arg("negatives") = 3, py::arg("gamma") = 1.0, py::arg("lr") = 0.005,
      py::arg("epochs") = 10, py::arg("seed") = 1, py::arg("variant") = "joint");
}
