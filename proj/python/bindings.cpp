#include "pragma/adapter/remote_model.hpp"
#include "pragma/cli/commands.hpp"
#include "pragma/evaluation.hpp"
#include "pragma/fixtures.hpp"
#include "pragma/rsa.hpp"
#include "pragma/tabular.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <sstream>

namespace py = pybind11;
using namespace pragma;

namespace {

// pybind11 cannot hold pointers to const; models are never mutated through it.
using ModelPtr = std::shared_ptr<ConditionalSequenceModel>;

ModelPtr hold(std::shared_ptr<const ConditionalSequenceModel> m) {
  return std::const_pointer_cast<ConditionalSequenceModel>(std::move(m));
}

// Sentences cross the boundary as whitespace-separated text.
Sentence source_of(const ModelPtr& m, const std::string& text) { return parse_sentence(m->source_vocab(), text); }
Sentence target_of(const ModelPtr& m, const std::string& text) { return parse_sentence(m->target_vocab(), text); }
std::string text_of(const ModelPtr& m, const Sentence& s) { return render_sentence(m->target_vocab(), s); }

PragmaticsConfig make_config(double alpha, std::size_t candidates, std::size_t beam, std::size_t max_len,
                             const std::string& rollout) {
  PragmaticsConfig c;
  c.alpha = alpha;
  c.candidate_width_k = candidates;
  c.beam_width = beam;
  c.max_len = max_len;
  c.rollout = parse_rollout_policy(rollout);
  c.validate();
  return c;
}

std::vector<std::string> listed(const Vocabulary& v) {
  auto s = v.listed();
  return {s.begin(), s.end()};
}

py::dict distribution_dict(const ModelPtr& m, const LogDistribution& d) {
  py::dict out;
  for (std::size_t i = 0; i < d.size(); ++i)
    out[py::str(std::string(m->target_vocab().surface(d.support()[i])))] = d.logweights()[i];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pragmatic translation decoding";

  py::register_exception<Error>(m, "PragmaError", PyExc_RuntimeError);

  py::class_<ConditionalSequenceModel, ModelPtr>(m, "Model")
      .def_property_readonly("identity_tag", &ConditionalSequenceModel::identity_tag)
      .def_property_readonly("source_vocab", [](const ModelPtr& self) { return listed(self->source_vocab()); })
      .def_property_readonly("target_vocab", [](const ModelPtr& self) { return listed(self->target_vocab()); })
      .def(
          "next_token_logprobs",
          [](const ModelPtr& self, const std::string& source, const std::string& prefix) {
            auto p = target_of(self, prefix);
            p.terminated = false;
            return distribution_dict(self, self->next_token_dist(source_of(self, source), p));
          },
          py::arg("source"), py::arg("prefix") = "",
          "Log probability of each next token; EOS is \"</s>\".")
      .def(
          "sequence_logprob",
          [](const ModelPtr& self, const std::string& source, const std::string& sentence) {
            return self->sequence_logprob(source_of(self, source), target_of(self, sentence));
          },
          py::arg("source"), py::arg("sentence"));

  m.def(
      "load_model", [](const std::string& path) { return hold(load_tabular(path)); }, py::arg("path"));
  m.def(
      "fixture_model", [](const std::string& name) { return hold(fixtures::model(name)); }, py::arg("name"));
  m.def(
      "open_model",
      [](const std::string& spec, int timeout_ms) { return hold(cli::open_model(spec, std::chrono::milliseconds(timeout_ms))); },
      py::arg("spec"), py::arg("timeout_ms") = 30000,
      "Tabular path, fixture:NAME, stdio:COMMAND or tcp:HOST:PORT.");

  m.def(
      "greedy_decode",
      [](const ModelPtr& fwd, const std::string& source, std::size_t max_len) {
        py::gil_scoped_release release;
        return text_of(fwd, greedy_decode(*fwd, source_of(fwd, source), max_len));
      },
      py::arg("fwd"), py::arg("source"), py::arg("max_len") = 50);
  m.def(
      "beam_decode",
      [](const ModelPtr& fwd, const std::string& source, std::size_t beam, std::size_t max_len) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& s : beam_decode(*fwd, source_of(fwd, source), beam, max_len))
          out.emplace_back(text_of(fwd, s.sentence), s.logprob);
        return out;
      },
      py::arg("fwd"), py::arg("source"), py::arg("beam") = 4, py::arg("max_len") = 50);

  m.def(
      "decode_s1_cip",
      [](const ModelPtr& fwd, const ModelPtr& bwd, const std::string& source, double alpha, std::size_t candidates,
         std::size_t max_len, const std::string& rollout) {
        auto cfg = make_config(alpha, candidates, 1, max_len, rollout);
        py::gil_scoped_release release;
        return text_of(fwd, decode_s1_cip(*fwd, *bwd, source_of(fwd, source), cfg).sentence);
      },
      py::arg("fwd"), py::arg("bwd"), py::arg("source"), py::arg("alpha") = 0.1, py::arg("candidates") = 2,
      py::arg("max_len") = 50, py::arg("rollout") = "greedy");
  m.def(
      "decode_s1_ip",
      [](const ModelPtr& fwd, const std::vector<std::string>& distractors, const std::string& source, double alpha,
         std::size_t beam, std::size_t max_len) {
        std::vector<Sentence> group;
        for (const auto& d : distractors) group.push_back(source_of(fwd, d));
        auto cfg = make_config(alpha, 2, beam, max_len, "greedy");
        return text_of(fwd, decode_s1_ip(*fwd, DistractorSet(group), source_of(fwd, source), cfg).sentence);
      },
      py::arg("fwd"), py::arg("distractors"), py::arg("source"), py::arg("alpha") = 0.1, py::arg("beam") = 1,
      py::arg("max_len") = 50, "`distractors` must include `source`.");
  m.def(
      "s1_cgp_rerank",
      [](const ModelPtr& fwd, const ModelPtr& bwd, const std::string& source, const std::vector<std::string>& candidates,
         double alpha) {
        std::vector<Sentence> pool;
        for (const auto& c : candidates) pool.push_back(target_of(fwd, c));
        std::vector<std::pair<std::string, double>> out;
        for (const auto& s : s1_cgp_rerank(*fwd, *bwd, source_of(fwd, source), CandidateSet(pool), alpha))
          out.emplace_back(text_of(fwd, s.sentence), s.logprob);
        return out;
      },
      py::arg("fwd"), py::arg("bwd"), py::arg("source"), py::arg("candidates"), py::arg("alpha") = 0.1);

  m.def(
      "bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, int max_order, bool lowercase) {
        BleuConfig cfg;
        cfg.max_order = max_order;
        cfg.case_sensitive = !lowercase;
        std::vector<TokenList> h, r;
        for (const auto& x : hyps) h.push_back(tokenize(x, cfg));
        for (const auto& x : refs) r.push_back(tokenize(x, cfg));
        return bleu_corpus(h, r, cfg);
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("max_order") = 4, py::arg("lowercase") = false);

  m.def(
      "survey",
      [](const ModelPtr& fwd, const ModelPtr& bwd, const std::vector<std::string>& corpus, std::size_t n_back) {
        std::vector<Sentence> src;
        for (const auto& c : corpus) src.push_back(source_of(fwd, c));
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& p : survey_many_to_one(*fwd, *bwd, src, n_back))
          out.emplace_back(render_sentence(fwd->source_vocab(), p.source_a), render_sentence(fwd->source_vocab(), p.source_b),
                           text_of(fwd, p.pivot));
        return out;
      },
      py::arg("fwd"), py::arg("bwd"), py::arg("corpus"), py::arg("n_back") = 2,
      "Collisions as (source_a, source_b, pivot).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the pragma command line; returns (exit_code, stdout, stderr).");
}
