// Python bindings: a thin layer over the core library for scripting and
// smoke tests. Records come back as plain dicts.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sentssl/corpus.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/experiment.hpp"
#include "sentssl/features.hpp"
#include "sentssl/learners.hpp"
#include "sentssl/ssl_engine.hpp"
#include "sentssl/synthetic.hpp"
#include "sentssl/weak_labels.hpp"

namespace py = pybind11;
using namespace sentssl;

namespace {

Polarity to_polarity(int y) {
  if (y == 1) return Polarity::positive;
  if (y == -1) return Polarity::negative;
  throw py::value_error("label must be +1 or -1");
}

SparseVector to_sparse(const std::vector<std::uint32_t>& indices, const std::vector<double>& values) {
  if (indices.size() != values.size()) throw py::value_error("indices and values differ in length");
  std::vector<std::pair<std::uint32_t, double>> pairs;
  for (std::size_t i = 0; i < indices.size(); ++i) pairs.emplace_back(indices[i], values[i]);
  return SparseVector::from_pairs(std::move(pairs));
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["train_size"] = r.train_size;
  d["pool_remaining"] = r.pool_remaining;
  d["test_error"] = r.test_error;
  d["pseudo_label_accuracy"] = r.pseudo_label_accuracy ? py::cast(*r.pseudo_label_accuracy) : py::none();
  d["selected_per_domain"] = r.selected_per_domain;
  return d;
}

SelectionPolicy policy_from(const std::string& name, std::uint64_t seed) {
  if (name == "random") return SelectionPolicy::random(seed);
  if (name == "highest_margin") return SelectionPolicy::highest_margin();
  throw py::value_error("policy must be 'random' or 'highest_margin'");
}

}  // namespace

PYBIND11_MODULE(_sentssl, m) {
  m.doc() = "Self-training sentiment classification core";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<Review>(m, "Review")
      .def(py::init([](ReviewId id, std::string domain, int stars, std::string title, std::string body) {
             return Review{id, std::move(domain), stars, std::move(title), std::move(body)};
           }),
           py::arg("id"), py::arg("domain"), py::arg("stars"), py::arg("title"), py::arg("body") = "")
      .def_readwrite("id", &Review::id)
      .def_readwrite("domain", &Review::domain)
      .def_readwrite("stars", &Review::stars)
      .def_readwrite("title", &Review::title)
      .def_readwrite("body", &Review::body)
      .def("__repr__", [](const Review& r) {
        return "<Review id=" + std::to_string(r.id) + " domain=" + r.domain +
               " stars=" + std::to_string(r.stars) + ">";
      });

  py::class_<FeatureConfig>(m, "FeatureConfig")
      .def(py::init<>())
      .def_readwrite("dims_log2", &FeatureConfig::dims_log2)
      .def_readwrite("use_bigrams", &FeatureConfig::use_bigrams)
      .def_readwrite("normalize", &FeatureConfig::normalize)
      .def_readwrite("use_title", &FeatureConfig::use_title)
      .def_readwrite("use_body", &FeatureConfig::use_body);

  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); });
  m.def("hash_term", &hash_term, py::arg("term"), py::arg("dims_log2"));
  m.def("tokenize", [](const std::string& s) { return tokenize(s); });
  m.def(
      "featurize",
      [](const Review& r, const FeatureConfig& f) {
        const auto x = featurize(r, f);
        py::dict out;
        for (std::size_t i = 0; i < x.nnz(); ++i) out[py::int_(x.indices()[i])] = x.values()[i];
        return out;
      },
      py::arg("review"), py::arg("config") = FeatureConfig{});
  m.def("derive_label", [](int stars) -> std::optional<int> {
    const auto l = derive_label(stars);
    if (!l) return std::nullopt;
    return static_cast<int>(sign_value(*l));
  });

  py::class_<Learner>(m, "Learner")
      .def_static("perceptron", [](int dims_log2) { return Learner(LearnerSpec::perceptron(dims_log2)); },
                  py::arg("dims_log2") = 20)
      .def_static("arow", [](double r, int dims_log2) { return Learner(LearnerSpec::arow(r, dims_log2)); },
                  py::arg("r") = 1.0, py::arg("dims_log2") = 20)
      .def_property_readonly("kind", [](const Learner& l) { return std::string(to_string(l.kind())); })
      .def_property_readonly("dimension", &Learner::dimension)
      .def("score", [](const Learner& l, const std::vector<std::uint32_t>& ix,
                       const std::vector<double>& v) { return l.score(to_sparse(ix, v)); })
      .def("predict", [](const Learner& l, const std::vector<std::uint32_t>& ix,
                         const std::vector<double>& v) { return static_cast<int>(sign_value(l.predict(to_sparse(ix, v)))); })
      .def("update", [](Learner& l, const std::vector<std::uint32_t>& ix, const std::vector<double>& v,
                        int y) { return l.update(to_sparse(ix, v), to_polarity(y)); })
      .def("save", [](const Learner& l, const std::filesystem::path& p) { save_learner(l, p); })
      .def_static("load", [](const std::filesystem::path& p) { return load_learner(p); })
      .def("__eq__", [](const Learner& a, const Learner& b) { return a == b; });

  m.def(
      "select_highest_margin",
      [](const std::vector<std::pair<ReviewId, double>>& scored, std::size_t k) {
        std::vector<ScoredId> s;
        for (const auto& [id, margin] : scored) s.push_back({id, margin});
        return select(s, SelectionPolicy::highest_margin(), k, 0);
      },
      py::arg("scores"), py::arg("k"));

  m.def(
      "run_fixture_ssl",
      [](const std::string& fixture, std::size_t seed_size, std::size_t pool_size, std::size_t test_size,
         std::size_t batch_size, std::size_t max_iterations, const std::string& learner,
         const std::string& policy, std::uint64_t seed) {
        FixtureSpec spec;
        if (fixture == "separable") spec.kind = FixtureSpec::Kind::separable;
        else if (fixture != "two_gaussians") throw py::value_error("fixture must be 'two_gaussians' or 'separable'");
        spec.seed_size = seed_size;
        spec.pool_size = pool_size;
        spec.test_size = test_size;
        SslConfig cfg;
        cfg.batch_size = batch_size;
        cfg.max_iterations = max_iterations;
        cfg.learner = learner == "arow" ? LearnerSpec::arow(1.0, 1) : LearnerSpec::perceptron(1);
        cfg.master_seed = seed;
        py::list out;
        for (const auto& r : run_ssl(fixture_split(spec, seed), cfg, policy_from(policy, seed)))
          out.append(record_dict(r));
        return out;
      },
      py::arg("fixture") = "two_gaussians", py::arg("seed_size") = 100, py::arg("pool_size") = 10000,
      py::arg("test_size") = 2000, py::arg("batch_size") = 100, py::arg("max_iterations") = 20,
      py::arg("learner") = "perceptron", py::arg("policy") = "highest_margin", py::arg("seed") = 0);

  m.def(
      "weak_label",
      [](const Review& r, bool include_body) -> std::optional<int> {
        const auto out = weak_label(r, default_lexicon(), WeakLabelOptions{include_body});
        if (!out.label) return std::nullopt;
        return static_cast<int>(sign_value(*out.label));
      },
      py::arg("review"), py::arg("include_body") = false);

  m.def(
      "synth_corpus",
      [](const std::string& spec_json) { return synth_corpus(parse_synth_spec(spec_json)); },
      py::arg("spec_json"));
  m.def(
      "corpus_jsonl",
      [](const std::vector<Review>& reviews) {
        std::ostringstream out;
        write_corpus_jsonl(reviews, out);
        return out.str();
      },
      py::arg("reviews"));

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
        const auto result = run_experiment(parse_config(config), out_dir);
        py::dict d;
        std::vector<std::string> names;
        for (const auto& f : result.outputs) names.push_back(f.name);
        d["output_dir"] = result.output_dir;
        d["outputs"] = names;
        d["manifest"] = result.manifest.dump();
        return d;
      },
      py::arg("config"), py::arg("out_dir"));
}
