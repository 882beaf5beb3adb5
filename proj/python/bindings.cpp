// Python surface of the library. Graphs cross the boundary as their
// single-line serialized form; everything else is plain scalars, lists and
// dicts so the module needs no wrapper classes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "definf/corrdata.hpp"
#include "definf/embed.hpp"
#include "definf/encoders.hpp"
#include "definf/feedback.hpp"
#include "definf/graph.hpp"
#include "definf/nn.hpp"
#include "definf/stats.hpp"
#include "definf/synth.hpp"

namespace py = pybind11;
using namespace definf;

namespace {

OverlapConfig overlap_config(double threshold) {
  OverlapConfig cfg = OverlapConfig::defaults();
  cfg.jaccard_threshold = threshold;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Defeasible inference graphs: repetition feedback, correction data, "
            "hashing embeddings and encoder gradient checks.";
  m.attr("__version__") = "0.1.0";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DataError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "validate_graph",
      [](const std::string& graph) {
        std::vector<std::string> out;
        for (const Violation& v : validate_graph(parse_graph(graph))) out.push_back(v.render());
        return out;
      },
      py::arg("graph"),
      "Parse one serialized graph line and return rendered violations (empty = valid).");

  m.def(
      "feedback",
      [](const std::string& graph, double threshold) {
        return detect_overlaps(parse_graph(graph), overlap_config(threshold)).message;
      },
      py::arg("graph"), py::arg("threshold") = 0.8,
      "Repetition-feedback message for one graph; 'No issues, looks good' when clean.");

  m.def(
      "overlap_groups",
      [](const std::string& graph, double threshold) {
        std::vector<std::vector<std::string>> out;
        const OverlapReport r = detect_overlaps(parse_graph(graph), overlap_config(threshold));
        for (const auto& group : r.groups) {
          std::vector<std::string> tags;
          for (NodeRole role : group) tags.push_back(role_tag(role));
          out.push_back(std::move(tags));
        }
        return out;
      },
      py::arg("graph"), py::arg("threshold") = 0.8,
      "Overlap groups as lists of role tags, in feedback order.");

  m.def(
      "correct",
      [](const std::string& graph, int max_iters, double threshold, std::uint64_t salt) {
        const OverlapConfig cfg = overlap_config(threshold);
        const Corrector reference = [&cfg, salt](const InferenceGraph& g,
                                                 const OverlapReport& r) {
          return reference_correct(g, r, cfg, salt);
        };
        const CorrectionResult r = iterative_correct(parse_graph(graph), reference, cfg,
                                                     max_iters);
        py::dict out;
        out["graph"] = serialize_graph(r.final_graph);
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        return out;
      },
      py::arg("graph"), py::arg("max_iters") = 4, py::arg("threshold") = 0.8,
      py::arg("salt") = 0,
      "Apply the deterministic reference corrector until the graph is clean.");

  m.def(
      "repetition_metrics",
      [](const std::vector<std::string>& graphs, double threshold) {
        const OverlapConfig cfg = overlap_config(threshold);
        std::vector<OverlapReport> reports;
        reports.reserve(graphs.size());
        for (const std::string& g : graphs) {
          reports.push_back(detect_overlaps(parse_graph(g), cfg));
        }
        const RepetitionMetrics r = repetition_metrics(reports);
        py::dict out;
        out["per_graph"] = r.per_graph;
        out["pct_with_repetition"] = r.pct_with_repetition;
        out["n_graphs"] = r.n_graphs;
        return out;
      },
      py::arg("graphs"), py::arg("threshold") = 0.8,
      "Corpus repetition metrics over serialized graph lines.");

  m.def("mcnemar_exact", &mcnemar_exact, py::arg("n01"), py::arg("n10"),
        "Exact two-sided McNemar p-value from the discordant counts.");
  m.def("micro_sign_test", &micro_sign_test, py::arg("wins_a"), py::arg("wins_b"),
        "Exact two-sided sign-test p-value over per-example wins.");
  m.def(
      "entropy", [](const std::vector<double>& p) { return entropy(p); }, py::arg("p"),
      "Shannon entropy in nats of a distribution.");

  m.def(
      "embed_text",
      [](const std::string& text, int d, int n_hash, std::uint64_t seed, double scale) {
        EmbedderConfig cfg;
        cfg.d = d;
        cfg.n_hash = n_hash;
        cfg.seed = seed;
        cfg.scale = scale;
        return embed_text(text, cfg);
      },
      py::arg("text"), py::arg("d") = 64, py::arg("n_hash") = 2, py::arg("seed") = 0,
      py::arg("scale") = 0.0,
      "Deterministic signed-hash embedding of whitespace-tokenized text.");

  m.def(
      "generate",
      [](int n, const std::string& signal_role, double signal_strength, double duplicate_rate,
         int vocab, std::uint64_t seed) {
        const auto role = parse_role(signal_role);
        if (!role) throw DataError("unknown role tag: " + signal_role);
        SynthConfig sc;
        sc.n_examples = n;
        sc.signal_role = *role;
        sc.signal_strength = signal_strength;
        sc.duplicate_rate = duplicate_rate;
        sc.vocab_size = vocab;
        sc.seed = seed;
        sc.validate();
        py::list out;
        for (const Example& ex : generate(sc)) {
          py::dict d;
          d["premise"] = ex.query.premise;
          d["hypothesis"] = ex.query.hypothesis;
          d["update"] = ex.query.update;
          d["label"] = label_name(*ex.query.label);
          d["graph"] = serialize_graph(ex.graph);
          out.append(d);
        }
        return out;
      },
      py::arg("n"), py::arg("signal_role") = "S-", py::arg("signal_strength") = 1.0,
      py::arg("duplicate_rate") = 0.0, py::arg("vocab") = 64, py::arg("seed") = 0,
      "Synthetic labeled corpus with a planted node-level cue.");

  m.def(
      "grad_check",
      [](const std::string& encoder, int d, std::uint64_t seed, double tol) {
        EncoderConfig cfg;
        cfg.kind = parse_encoder_kind(encoder);
        cfg.d = d;
        cfg.attn_dim = d;
        cfg.validate();
        EmbedderConfig emb;
        emb.d = d;
        EncoderModel model = make_model(cfg, emb, seed);
        SynthConfig sc;
        sc.n_examples = 1;
        sc.seed = seed;
        const Corpus corpus = generate(sc);
        const Example& ex = corpus[0];
        const LossBuilder build = [&](Tape& t) {
          const ForwardResult r = model_forward(t, model, ex.query, ex.graph);
          return t.softmax_xent(r.logits, 0);
        };
        const GradCheckReport rep = grad_check(build, model.params, 1e-5, tol);
        py::dict out;
        out["ok"] = rep.ok();
        out["max_rel_err"] = rep.max_rel_err;
        out["checked"] = rep.checked;
        out["worst_param"] = rep.worst_param;
        return out;
      },
      py::arg("encoder") = "moe", py::arg("d") = 4, py::arg("seed") = 7,
      py::arg("tol") = 1e-5,
      "Central-difference certification of tape gradients for one encoder instance.");
}
