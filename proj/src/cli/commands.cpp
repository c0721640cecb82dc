#include "pragma/cli/commands.hpp"

#include "pragma/adapter/remote_model.hpp"
#include "pragma/decode.hpp"
#include "pragma/evaluation.hpp"
#include "pragma/fixtures.hpp"
#include "pragma/parallel.hpp"
#include "pragma/report.hpp"
#include "pragma/rsa.hpp"
#include "pragma/tabular.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace pragma::cli {

std::shared_ptr<const ConditionalSequenceModel> open_model(std::string_view spec, std::chrono::milliseconds timeout) {
  if (spec.starts_with("stdio:") || spec.starts_with("tcp:")) {
    auto endpoint = ScorerEndpoint::parse(spec);
    endpoint.timeout = timeout;
    return connect(endpoint);
  }
  if (spec.starts_with("fixture:")) {
    std::string name(spec.substr(8));
    auto all = fixtures::names();
    if (std::find(all.begin(), all.end(), name) == all.end() &&
        std::find(all.begin(), all.end(), name + ".tab") != all.end())
      name += ".tab";
    return fixtures::model(name);
  }
  return load_tabular(std::string(spec));
}

namespace {

using Clock = std::chrono::steady_clock;
using ModelPtr = std::shared_ptr<const ConditionalSequenceModel>;

// ---------------------------------------------------------------------------
// Files

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error("cannot write " + path);
  o << body;
  if (!o) throw Error("error while writing " + path);
}

Sentence parse_line(const Vocabulary& vocab, const std::string& text, const std::string& path, std::size_t line) {
  try {
    return parse_sentence(vocab, text);
  } catch (const Error& e) {
    throw Error(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::vector<Sentence> read_corpus(const Vocabulary& vocab, const std::string& path) {
  auto lines = read_lines(path);
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(parse_line(vocab, lines[i], path, i + 1));
  return out;
}

// One line per group: the source sentence, then its distractors, tab-separated.
std::vector<DistractorSet> read_distractors(const Vocabulary& vocab, const std::string& path) {
  auto lines = read_lines(path);
  std::vector<DistractorSet> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<Sentence> group;
    std::size_t pos = 0;
    for (;;) {
      auto tab = lines[i].find('\t', pos);
      group.push_back(parse_line(vocab, lines[i].substr(pos, tab == std::string::npos ? tab : tab - pos), path, i + 1));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    try {
      out.emplace_back(std::move(group));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::string joined_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Shared flags

struct Common {
  PragmaticsConfig config;
  std::string rollout = "greedy";
  std::size_t jobs = 1;
  long timeout_ms = 30000;
  std::string manifest;

  std::chrono::milliseconds timeout() const { return std::chrono::milliseconds(timeout_ms); }

  void finalize() {
    try {
      config.rollout = parse_rollout_policy(rollout);
      config.validate();
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
    if (jobs < 1) throw UsageError("--jobs must be at least 1");
    if (timeout_ms <= 0) throw UsageError("--timeout-ms must be positive");
  }
};

void add_decoding_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--alpha", c.config.alpha, "Rationality weight")->capture_default_str();
  cmd->add_option("--candidates", c.config.candidate_width_k, "Candidates per incremental step")->capture_default_str();
  cmd->add_option("--beam", c.config.beam_width, "Beam width")->capture_default_str();
  cmd->add_option("--max-len", c.config.max_len, "Maximum output length, EOS included")->capture_default_str();
  cmd->add_option("--rollout", c.rollout, "Continuation estimate: greedy or exact")
      ->check(CLI::IsMember({"greedy", "exact"}))
      ->capture_default_str();
}

void add_run_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--jobs", c.jobs, "Sentences decoded in parallel")->capture_default_str();
  cmd->add_option("--timeout-ms", c.timeout_ms, "Deadline per remote scorer message")->capture_default_str();
  cmd->add_option("--manifest", c.manifest, "Run manifest path");
}

ordered_json config_json(const PragmaticsConfig& c) {
  ordered_json j;
  j["alpha"] = c.alpha;
  j["candidates"] = c.candidate_width_k;
  j["beam"] = c.beam_width;
  j["max_len"] = c.max_len;
  j["rollout"] = std::string(to_string(c.rollout));
  return j;
}

struct Manifest {
  ordered_json body;
  Clock::time_point started = Clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& args) {
    body["command"] = command;
    body["arguments"] = args;
  }

  void write(const std::string& path) {
    if (path.empty()) return;
    double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    ordered_json j = body;
    j["timing"] = {{"wall_seconds", seconds}};
    write_file(path, j.dump(2) + "\n");
  }
};

std::string default_manifest(const std::string& explicit_path, const std::string& output) {
  if (!explicit_path.empty()) return explicit_path;
  return output.empty() ? std::string() : output + ".manifest.json";
}

void emit(std::ostream& out, const std::string& path, const std::string& body) {
  if (path.empty())
    out << body;
  else
    write_file(path, body);
}

// ---------------------------------------------------------------------------
// translate

struct TranslateArgs {
  std::string mode = "s0";
  std::string fwd;
  std::string bwd;
  std::string distractors;
  std::string input;
  std::string output;
  std::string trace;
  Common common;
};

struct Outcome {
  std::optional<std::string> error;
  Sentence output;
  DecodeTrace trace;
  std::vector<ScoredSentence> ranked;  // global modes
};

DecodeResult s0_traced(const ConditionalSequenceModel& fwd, const Sentence& w, const PragmaticsConfig& config) {
  DecodeResult r;
  TokenId eos = fwd.target_vocab().eos();
  Sentence c = Sentence::prefix();
  while (!c.terminated && c.length() < config.max_len) {
    auto dist = fwd.next_token_dist(w, c);
    StepRecord step;
    step.prefix = c;
    for (TokenId t : top_k(dist, config.candidate_width_k)) {
      CandidateRecord rec;
      rec.token = t;
      rec.base_logprob = rec.combined_score = rec.step_logprob = dist.logprob(t);
      step.candidates.push_back(std::move(rec));
    }
    step.chosen = argmax(dist);
    c = c.extended(step.chosen, eos);
    r.trace.steps.push_back(std::move(step));
  }
  r.sentence = std::move(c);
  return r;
}

std::vector<Sentence> nbest(const ConditionalSequenceModel& fwd, const Sentence& w, std::size_t width,
                            std::size_t max_len) {
  std::vector<Sentence> out;
  for (auto& s : beam_decode(fwd, w, width, max_len)) out.push_back(std::move(s.sentence));
  return out;
}

int cmd_translate(TranslateArgs& a, const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  a.common.finalize();
  const auto& config = a.common.config;
  bool needs_distractors = a.mode == "s1-ip" || a.mode == "s1-gp";
  bool needs_bwd = a.mode == "s1-cgp" || a.mode == "s1-cip";
  if (needs_distractors && a.distractors.empty())
    throw MissingDistractors("mode " + a.mode + " needs a distractor file (--distractors)");
  if (needs_bwd && a.bwd.empty()) throw MissingBackwardModel("mode " + a.mode + " needs a backward model (--bwd)");
  if (a.input.empty() && !needs_distractors) throw UsageError("--input is required for mode " + a.mode);

  Manifest manifest("translate", raw);
  ModelPtr fwd = open_model(a.fwd, a.common.timeout());
  ModelPtr bwd = needs_bwd ? open_model(a.bwd, a.common.timeout()) : nullptr;
  if (bwd) check_direction(*fwd, *bwd);

  std::vector<DistractorSet> groups;
  std::vector<Sentence> corpus;
  if (needs_distractors) groups = read_distractors(fwd->source_vocab(), a.distractors);
  if (!a.input.empty()) {
    corpus = read_corpus(fwd->source_vocab(), a.input);
  } else {
    for (const auto& g : groups) corpus.push_back(g.sentences().front());
  }
  if (needs_distractors) {
    if (groups.size() != corpus.size())
      throw Error("distractor file has " + std::to_string(groups.size()) + " lines, input has " +
                  std::to_string(corpus.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!groups[i].index_of(corpus[i]))
        throw Error(a.distractors + ":" + std::to_string(i + 1) + ": input sentence is not in its distractor group");
    }
  }

  auto outcomes = parallel_map(corpus.size(), a.common.jobs, [&](std::size_t i) {
    Outcome o;
    const Sentence& w = corpus[i];
    try {
      if (a.mode == "s0") {
        if (config.beam_width == 1) {
          auto r = s0_traced(*fwd, w, config);
          o.output = std::move(r.sentence);
          o.trace = std::move(r.trace);
        } else {
          o.ranked = beam_decode(*fwd, w, config.beam_width, config.max_len);
          o.output = o.ranked.front().sentence;
        }
      } else if (a.mode == "s1-ip") {
        auto r = decode_s1_ip(*fwd, groups[i], w, config);
        o.output = std::move(r.sentence);
        o.trace = std::move(r.trace);
      } else if (a.mode == "s1-cip") {
        auto r = decode_s1_cip(*fwd, *bwd, w, config);
        o.output = std::move(r.sentence);
        o.trace = std::move(r.trace);
      } else if (a.mode == "s1-cgp") {
        o.ranked = s1_cgp_rerank(*fwd, *bwd, w, CandidateSet(nbest(*fwd, w, config.beam_width, config.max_len)),
                                 config.alpha);
        o.output = o.ranked.front().sentence;
      } else {  // s1-gp
        std::vector<Sentence> pool;
        for (const auto& d : groups[i].sentences()) {
          auto best = nbest(*fwd, d, config.beam_width, config.max_len);
          pool.insert(pool.end(), best.begin(), best.end());
        }
        CandidateSet candidates(std::move(pool));
        auto dist = s1_global(*fwd, groups[i], w, candidates, config.alpha);
        for (Key k : top_k(dist, dist.size())) o.ranked.push_back({candidates.utterances()[k], dist.logprob(k)});
        o.output = candidates.utterances()[argmax(dist)];
      }
    } catch (const Error& e) {
      o.error = e.what();
    }
    return o;
  });

  const auto& tv = fwd->target_vocab();
  std::vector<std::string> lines;
  std::string trace_text;
  ordered_json records = ordered_json::array();
  std::optional<std::size_t> first_failure;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    ordered_json rec;
    rec["index"] = i;
    if (o.error) {
      if (!first_failure) first_failure = i;
      rec["status"] = "error";
      rec["error"] = *o.error;
    } else {
      rec["status"] = "ok";
      rec["output"] = render_sentence(tv, o.output);
      lines.push_back(render_sentence(tv, o.output));
      ordered_json t;
      t["index"] = i;
      t["source"] = render_sentence(fwd->source_vocab(), corpus[i]);
      t["output"] = render_sentence_with_eos(tv, o.output);
      t["steps"] = trace_to_json(o.trace, tv);
      if (!o.ranked.empty()) {
        ordered_json ranked = ordered_json::array();
        for (const auto& s : o.ranked)
          ranked.push_back({{"sentence", render_sentence_with_eos(tv, s.sentence)}, {"score", logprob_json(s.logprob)}});
        t["ranked"] = std::move(ranked);
      }
      t["rollout_truncated"] = o.trace.any_rollout_truncated();
      trace_text += t.dump() + "\n";
    }
    records.push_back(std::move(rec));
  }

  ordered_json cfg = config_json(config);
  cfg["mode"] = a.mode;
  manifest.body["config"] = std::move(cfg);
  manifest.body["models"] = {{"fwd", fwd->identity_tag()}, {"bwd", bwd ? ordered_json(bwd->identity_tag()) : ordered_json()}};
  manifest.body["inputs"] = {{"input", a.input}, {"distractors", a.distractors}};
  manifest.body["outputs"] = {{"output", a.output}, {"trace", a.trace}};
  manifest.body["outcomes"] = std::move(records);
  std::string manifest_path = default_manifest(a.common.manifest, a.output);

  if (first_failure) {
    manifest.write(manifest_path);
    err << "pragma: input line " << *first_failure + 1 << ": " << *outcomes[*first_failure].error << '\n';
    return kExitFailure;
  }
  emit(out, a.output, joined_lines(lines));
  if (!a.trace.empty()) write_file(a.trace, trace_text);
  manifest.write(manifest_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct BleuArgs {
  std::string hyp;
  std::string ref;
  int max_order = 4;
  bool lowercase = false;
  std::string report;
  std::string manifest;
};

int cmd_eval_bleu(BleuArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  Manifest manifest("eval bleu", raw);
  BleuConfig config;
  config.max_order = a.max_order;
  config.case_sensitive = !a.lowercase;
  try {
    config.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  auto hyp_lines = read_lines(a.hyp);
  auto ref_lines = read_lines(a.ref);
  if (hyp_lines.size() != ref_lines.size())
    throw LengthMismatch("hypothesis file has " + std::to_string(hyp_lines.size()) + " lines, reference file has " +
                         std::to_string(ref_lines.size()));
  std::vector<TokenList> hyps;
  std::vector<TokenList> refs;
  for (const auto& l : hyp_lines) hyps.push_back(tokenize(l, config));
  for (const auto& l : ref_lines) refs.push_back(tokenize(l, config));
  auto result = bleu_corpus_detailed(hyps, refs, config);

  std::ostringstream text;
  text << "bleu: " << format_score(result.score) << '\n';
  text << "precisions:";
  for (double p : result.precisions) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.4f", p);
    text << buf;
  }
  char bp[32];
  std::snprintf(bp, sizeof(bp), "%.4f", result.brevity_penalty);
  text << "\nbrevity_penalty: " << bp << '\n';
  text << "hyp_length: " << result.hyp_length << "\nref_length: " << result.ref_length << '\n';
  out << text.str();

  if (!a.report.empty()) {
    std::string body;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      ordered_json j;
      j["index"] = i;
      j["sentence_bleu_diagnostic"] = sentence_bleu_diagnostic(hyps[i], refs[i], config);
      body += j.dump() + "\n";
    }
    write_file(a.report, body);
  }
  manifest.body["config"] = {{"max_order", config.max_order}, {"case_sensitive", config.case_sensitive}};
  manifest.body["inputs"] = {{"hyp", a.hyp}, {"ref", a.ref}};
  manifest.body["outputs"] = {{"report", a.report}};
  manifest.body["result"] = {{"bleu", result.score}, {"brevity_penalty", result.brevity_penalty}};
  manifest.write(a.manifest);
  return kExitOk;
}

struct CycleArgs {
  std::string mode = "s0";
  std::string fwd;
  std::string bwd;
  std::string back;
  std::string input;
  std::string report;
  Common common;
};

int cmd_eval_cycle(CycleArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  a.common.finalize();
  const auto& config = a.common.config;
  bool needs_bwd = a.mode == "s1-cgp" || a.mode == "s1-cip";
  if (needs_bwd && a.bwd.empty()) throw MissingBackwardModel("mode " + a.mode + " needs a backward model (--bwd)");
  Manifest manifest("eval cycle", raw);

  ModelPtr fwd = open_model(a.fwd, a.common.timeout());
  ModelPtr bwd = needs_bwd ? open_model(a.bwd, a.common.timeout()) : nullptr;
  ModelPtr back = open_model(a.back, a.common.timeout());
  Translator system = a.mode == "s0"       ? base_translator(fwd, config.max_len)
                      : a.mode == "s1-cip" ? cip_translator(fwd, bwd, config)
                                           : cgp_translator(fwd, bwd, config);
  const auto& tags = system.model_tags;
  if (std::find(tags.begin(), tags.end(), back->identity_tag()) != tags.end())
    throw SameBackTranslator("back-translator '" + back->identity_tag() + "' is also used by the system under evaluation");
  check_direction(*fwd, *back);
  auto corpus = read_corpus(fwd->source_vocab(), a.input);
  auto report = cycle_consistency(system, greedy_back_translator(back, config.max_len), corpus, {}, a.common.jobs);

  out << cycle_report_text(report);
  if (!a.report.empty()) write_file(a.report, cycle_report_jsonl(report));

  ordered_json cfg = config_json(config);
  cfg["mode"] = a.mode;
  manifest.body["config"] = std::move(cfg);
  manifest.body["models"] = {{"fwd", fwd->identity_tag()},
                             {"bwd", bwd ? ordered_json(bwd->identity_tag()) : ordered_json()},
                             {"back", back->identity_tag()}};
  manifest.body["inputs"] = {{"input", a.input}};
  manifest.body["outputs"] = {{"report", a.report}};
  ordered_json outcomes = ordered_json::array();
  for (const auto& r : report.records) outcomes.push_back(cycle_record_to_json(r));
  manifest.body["outcomes"] = std::move(outcomes);
  manifest.body["result"] = {{"cycle_bleu", report.score}};
  manifest.write(default_manifest(a.common.manifest, a.report));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// survey

struct SurveyArgs {
  std::string fwd;
  std::string bwd;
  std::string input;
  std::size_t n_back = 2;
  std::string report;
  Common common;
};

int cmd_survey(SurveyArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  a.common.finalize();
  if (a.n_back < 1) throw UsageError("--n-back must be at least 1");
  Manifest manifest("survey", raw);
  ModelPtr fwd = open_model(a.fwd, a.common.timeout());
  ModelPtr bwd = open_model(a.bwd, a.common.timeout());
  auto corpus = read_corpus(fwd->source_vocab(), a.input);
  auto pairs = survey_many_to_one(*fwd, *bwd, corpus, a.n_back, a.common.config.max_len, a.common.jobs);

  out << survey_report_text(pairs, fwd->source_vocab(), fwd->target_vocab());
  if (!a.report.empty()) write_file(a.report, survey_report_jsonl(pairs, fwd->source_vocab(), fwd->target_vocab()));

  manifest.body["config"] = {{"n_back", a.n_back}, {"max_len", a.common.config.max_len}};
  manifest.body["models"] = {{"fwd", fwd->identity_tag()}, {"bwd", bwd->identity_tag()}};
  manifest.body["inputs"] = {{"input", a.input}};
  manifest.body["outputs"] = {{"report", a.report}};
  ordered_json outcomes = ordered_json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i)
    outcomes.push_back(collision_to_json(pairs[i], i, fwd->source_vocab(), fwd->target_vocab()));
  manifest.body["outcomes"] = std::move(outcomes);
  manifest.write(default_manifest(a.common.manifest, a.report));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleArgs {
  std::string fixture;
  std::string fwd;
  std::string bwd;
  std::string input;
  std::string report;
  Common common;
};

int cmd_oracle(OracleArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  a.common.finalize();
  const auto& config = a.common.config;
  Manifest manifest("oracle", raw);
  ModelPtr fwd;
  ModelPtr bwd;
  std::vector<Sentence> corpus;
  if (!a.fixture.empty()) {
    if (!a.fwd.empty() || !a.bwd.empty()) throw UsageError("--fixture cannot be combined with --fwd/--bwd");
    auto b = fixtures::bundle(a.fixture);
    fwd = b.fwd;
    bwd = b.bwd;
    corpus = a.input.empty() ? b.corpus : read_corpus(fwd->source_vocab(), a.input);
  } else {
    if (a.fwd.empty() || a.input.empty()) throw UsageError("oracle needs --fixture or --fwd, --bwd and --input");
    if (a.bwd.empty()) throw MissingBackwardModel("oracle needs a backward model (--bwd)");
    fwd = open_model(a.fwd, a.common.timeout());
    bwd = open_model(a.bwd, a.common.timeout());
    corpus = read_corpus(fwd->source_vocab(), a.input);
  }
  check_direction(*fwd, *bwd);
  const auto& sv = fwd->source_vocab();
  const auto& tv = fwd->target_vocab();
  PragmaticsConfig exact_config = config;
  exact_config.rollout = RolloutPolicy::exact;
  PragmaticsConfig approx_config = config;
  approx_config.rollout = RolloutPolicy::greedy;

  std::ostringstream text;
  std::string jsonl;
  std::size_t steps_total = 0, steps_agree = 0, sent_agree = 0, greedy_agree = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Sentence& w = corpus[i];
    auto approx = decode_s1_cip(*fwd, *bwd, w, approx_config);
    auto exact = decode_s1_cip(*fwd, *bwd, w, exact_config);
    Sentence greedy = greedy_decode(*fwd, w, config.max_len);
    std::vector<Sentence> all;
    for (auto& s : enumerate_sentences(*fwd, w, config.max_len)) all.push_back(std::move(s.sentence));
    Sentence enumerated = s1_cgp_rerank(*fwd, *bwd, w, CandidateSet(std::move(all)), config.alpha).front().sentence;

    text << "source: " << render_sentence(sv, w) << '\n';
    ordered_json steps = ordered_json::array();
    for (const auto& step : approx.trace.steps) {
      Key exact_choice = argmax(s1_word_c_exact(*fwd, *bwd, w, step.prefix, config.alpha, config.max_len));
      bool agree = exact_choice == step.chosen;
      ++steps_total;
      steps_agree += agree ? 1 : 0;
      text << "  step prefix \"" << render_sentence(tv, step.prefix) << "\": approx "
           << tv.surface(step.chosen) << ", exact " << tv.surface(exact_choice) << (agree ? "" : "  DISAGREE") << '\n';
      steps.push_back({{"prefix", render_sentence(tv, step.prefix)},
                       {"approx", std::string(tv.surface(step.chosen))},
                       {"exact", std::string(tv.surface(exact_choice))},
                       {"agree", agree}});
    }
    bool agree = approx.sentence == enumerated;
    sent_agree += agree ? 1 : 0;
    greedy_agree += approx.sentence == greedy ? 1 : 0;
    text << "  cip: " << render_sentence_with_eos(tv, approx.sentence) << '\n';
    text << "  cip-exact: " << render_sentence_with_eos(tv, exact.sentence) << '\n';
    text << "  enumerated: " << render_sentence_with_eos(tv, enumerated) << '\n';
    text << "  greedy: " << render_sentence_with_eos(tv, greedy) << '\n';
    text << "  sentence: " << (agree ? "agree" : "DISAGREE") << '\n';

    ordered_json j;
    j["index"] = i;
    j["source"] = render_sentence(sv, w);
    j["steps"] = std::move(steps);
    j["cip"] = render_sentence_with_eos(tv, approx.sentence);
    j["cip_exact"] = render_sentence_with_eos(tv, exact.sentence);
    j["enumerated"] = render_sentence_with_eos(tv, enumerated);
    j["greedy"] = render_sentence_with_eos(tv, greedy);
    j["agree"] = agree;
    jsonl += j.dump() + "\n";
  }
  text << "steps agreeing: " << steps_agree << "/" << steps_total << '\n';
  text << "sentences agreeing: " << sent_agree << "/" << corpus.size() << '\n';
  text << "sentences matching base greedy: " << greedy_agree << "/" << corpus.size() << '\n';
  out << text.str();
  if (!a.report.empty()) write_file(a.report, jsonl);

  ordered_json cfg = config_json(config);
  manifest.body["config"] = std::move(cfg);
  manifest.body["models"] = {{"fwd", fwd->identity_tag()}, {"bwd", bwd->identity_tag()}};
  manifest.body["inputs"] = {{"fixture", a.fixture}, {"input", a.input}};
  manifest.body["outputs"] = {{"report", a.report}};
  manifest.body["result"] = {{"steps_total", steps_total},
                             {"steps_agree", steps_agree},
                             {"sentences_total", corpus.size()},
                             {"sentences_agree", sent_agree}};
  manifest.write(default_manifest(a.common.manifest, a.report));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pragmatic translation decoding", "pragma"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pragma 0.1.0");

  TranslateArgs tr;
  auto* translate = app.add_subcommand("translate", "Translate a corpus with a base or pragmatic speaker");
  translate->add_option("--mode", tr.mode, "s0, s1-ip, s1-gp, s1-cgp or s1-cip")
      ->check(CLI::IsMember({"s0", "s1-ip", "s1-gp", "s1-cgp", "s1-cip"}))
      ->capture_default_str();
  translate->add_option("--fwd", tr.fwd, "Forward model")->required();
  translate->add_option("--bwd", tr.bwd, "Backward model (s1-cgp, s1-cip)");
  translate->add_option("--distractors", tr.distractors, "Distractor groups, tab-separated (s1-ip, s1-gp)");
  translate->add_option("--input", tr.input, "Source sentences, one per line");
  translate->add_option("--output", tr.output, "Output file (default: stdout)");
  translate->add_option("--trace", tr.trace, "Per-sentence decode traces as JSON lines");
  add_decoding_flags(translate, tr.common);
  add_run_flags(translate, tr.common);

  auto* eval = app.add_subcommand("eval", "Score translations");
  eval->require_subcommand(1);
  BleuArgs bl;
  auto* bleu = eval->add_subcommand("bleu", "Corpus BLEU of a hypothesis file against a reference file");
  bleu->add_option("--hyp", bl.hyp, "Hypotheses, one per line")->required();
  bleu->add_option("--ref", bl.ref, "References, one per line")->required();
  bleu->add_option("--max-order", bl.max_order, "Largest n-gram order")->capture_default_str();
  bleu->add_flag("--lowercase", bl.lowercase, "Compare case-insensitively");
  bleu->add_option("--report", bl.report, "Per-sentence diagnostic scores as JSON lines");
  bleu->add_option("--manifest", bl.manifest, "Run manifest path");

  CycleArgs cy;
  auto* cycle = eval->add_subcommand("cycle", "Cycle-consistency BLEU against an independent back-translator");
  cycle->add_option("--mode", cy.mode, "s0, s1-cgp or s1-cip")
      ->check(CLI::IsMember({"s0", "s1-cgp", "s1-cip"}))
      ->capture_default_str();
  cycle->add_option("--fwd", cy.fwd, "Forward model")->required();
  cycle->add_option("--bwd", cy.bwd, "Backward model used by the pragmatic speaker");
  cycle->add_option("--back", cy.back, "Independent back-translation model")->required();
  cycle->add_option("--input", cy.input, "Source sentences, one per line")->required();
  cycle->add_option("--report", cy.report, "Per-sentence records as JSON lines");
  add_decoding_flags(cycle, cy.common);
  add_run_flags(cycle, cy.common);

  SurveyArgs su;
  auto* survey = app.add_subcommand("survey", "Find distinct sources that translate to the same sentence");
  survey->add_option("--fwd", su.fwd, "Forward model")->required();
  survey->add_option("--bwd", su.bwd, "Backward model")->required();
  survey->add_option("--input", su.input, "Source sentences, one per line")->required();
  survey->add_option("--n-back", su.n_back, "Back-translations per pivot")->capture_default_str();
  survey->add_option("--report", su.report, "Collision records as JSON lines");
  survey->add_option("--max-len", su.common.config.max_len, "Maximum length, EOS included")->capture_default_str();
  add_run_flags(survey, su.common);

  OracleArgs orc;
  orc.common.config.max_len = 4;
  auto* oracle = app.add_subcommand("oracle", "Compare approximate pragmatic decoding with brute-force enumeration");
  oracle->add_option("--fixture", orc.fixture, "Built-in fixture: AMBIG-1, CHAIN-1 or INJECTIVE");
  oracle->add_option("--fwd", orc.fwd, "Forward model");
  oracle->add_option("--bwd", orc.bwd, "Backward model");
  oracle->add_option("--input", orc.input, "Source sentences, one per line");
  oracle->add_option("--report", orc.report, "Per-sentence comparison as JSON lines");
  add_decoding_flags(oracle, orc.common);
  add_run_flags(oracle, orc.common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*translate) return cmd_translate(tr, args, out, err);
    if (*bleu) return cmd_eval_bleu(bl, args, out);
    if (*cycle) return cmd_eval_cycle(cy, args, out);
    if (*survey) return cmd_survey(su, args, out);
    if (*oracle) return cmd_oracle(orc, args, out);
  } catch (const UsageError& e) {
    err << "pragma: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MissingDistractors& e) {
    err << "pragma: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MissingBackwardModel& e) {
    err << "pragma: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SameBackTranslator& e) {
    err << "pragma: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "pragma: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pragma::cli
