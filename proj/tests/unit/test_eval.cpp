#include <doctest.h>

#include "pragma/evaluation.hpp"
#include "pragma/fixtures.hpp"
#include "pragma/report.hpp"

#include "support.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace pragma;
using namespace pragma::testing;

namespace {

std::vector<TokenList> lines(std::initializer_list<const char*> texts) {
  std::vector<TokenList> out;
  for (const char* t : texts) out.push_back(tokenize(t));
  return out;
}

// Plain counting implementation of unsmoothed corpus BLEU.
double naive_bleu(const std::vector<TokenList>& hyp, const std::vector<TokenList>& ref, int max_order) {
  double c = 0, r = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    c += static_cast<double>(hyp[i].size());
    r += static_cast<double>(ref[i].size());
  }
  double log_sum = 0;
  int order = 0;
  for (int n = 1; n <= max_order; ++n) {
    double match = 0, total = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      std::map<TokenList, int> h, g;
      for (std::size_t j = 0; j + n <= hyp[i].size(); ++j) h[TokenList(hyp[i].begin() + j, hyp[i].begin() + j + n)]++;
      for (std::size_t j = 0; j + n <= ref[i].size(); ++j) g[TokenList(ref[i].begin() + j, ref[i].begin() + j + n)]++;
      for (auto& [gram, count] : h) {
        total += count;
        auto it = g.find(gram);
        if (it != g.end()) match += std::min(count, it->second);
      }
    }
    if (total == 0) break;
    if (match == 0) return 0.0;
    order = n;
    log_sum += std::log(match / total);
  }
  if (order == 0) return 0.0;
  double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / order);
}

}  // namespace

TEST_CASE("BLEU unit values") {
  auto same = lines({"a b c d e", "the cat sat on the mat"});
  CHECK(bleu_corpus(same, same) == 100.0);
  CHECK(bleu_corpus(lines({"a b c d"}), lines({"a b c e"})) == 0.0);
  auto short_hyp = bleu_corpus_detailed(lines({"a b c"}), lines({"a b c d"}));
  CHECK(short_hyp.effective_order == 3);
  CHECK(short_hyp.brevity_penalty == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)));
  CHECK(std::abs(short_hyp.score - 71.65) <= 0.01);
  CHECK(format_score(short_hyp.score) == "71.65");
}

TEST_CASE("BLEU input errors") {
  CHECK_THROWS_AS(bleu_corpus(lines({"a"}), lines({"a", "b"})), LengthMismatch);
  CHECK_THROWS_AS(bleu_corpus(std::vector<TokenList>{}, std::vector<TokenList>{}), EmptyCorpus);
  BleuConfig bad;
  bad.max_order = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("BLEU case folding") {
  BleuConfig folded;
  folded.case_sensitive = false;
  auto h = std::vector<TokenList>{tokenize("The Cat", folded)};
  auto r = std::vector<TokenList>{tokenize("the cat", folded)};
  CHECK(bleu_corpus(h, r, folded) == 100.0);
  CHECK(bleu_corpus(lines({"The Cat"}), lines({"the cat"})) == 0.0);
}

TEST_CASE("property: corpus BLEU agrees with a naive count") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(0, 7), tok(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenList> hyp, ref;
    for (int i = 0; i < 3; ++i) {
      TokenList h, r;
      for (int j = len(rng); j > 0; --j) h.push_back(std::string(1, static_cast<char>('a' + tok(rng))));
      for (int j = len(rng) + 1; j > 0; --j) r.push_back(std::string(1, static_cast<char>('a' + tok(rng))));
      hyp.push_back(h);
      ref.push_back(r);
    }
    double got = bleu_corpus(hyp, ref);
    CHECK(got == doctest::Approx(naive_bleu(hyp, ref, 4)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 100.0);
  }
}

TEST_CASE("cycle consistency on AMBIG-1") {
  auto b = fixtures::bundle("AMBIG-1");
  auto back = greedy_back_translator(b.eval_bwd, 50);
  auto base = cycle_consistency(base_translator(b.fwd, 50), back, b.corpus);
  REQUIRE(base.records.size() == 2);
  CHECK(base.records[0].back_translation == "A");
  CHECK(base.records[1].back_translation == "A");
  CHECK(base.records[0].recovered);
  CHECK_FALSE(base.records[1].recovered);
  CHECK(base.score < 100.0);

  PragmaticsConfig cfg;
  cfg.alpha = 1.0;
  auto prag = cycle_consistency(cip_translator(b.fwd, b.bwd, cfg), back, b.corpus, {}, 2);
  CHECK(prag.records[1].back_translation == "B");
  CHECK(prag.score == 100.0);
  CHECK(prag.score >= base.score);

  cfg.beam_width = 3;
  auto cgp = cycle_consistency(cgp_translator(b.fwd, b.bwd, cfg), back, b.corpus);
  CHECK(cgp.score == 100.0);
}

TEST_CASE("the back-translator must be independent") {
  auto b = fixtures::bundle("AMBIG-1");
  PragmaticsConfig cfg;
  auto system = cip_translator(b.fwd, b.bwd, cfg);
  CHECK_THROWS_AS(cycle_consistency(system, greedy_back_translator(b.bwd, 50), b.corpus), SameBackTranslator);
  CHECK_THROWS_AS(cycle_consistency(system, greedy_back_translator(b.eval_bwd, 50), {}), EmptyCorpus);
}

TEST_CASE("cycle report renderings") {
  auto b = fixtures::bundle("AMBIG-1");
  auto report = cycle_consistency(base_translator(b.fwd, 50), greedy_back_translator(b.eval_bwd, 50), b.corpus);
  std::istringstream in(cycle_report_jsonl(report));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    CHECK(j.is_object());
    ++n;
  }
  CHECK(n >= 2);
  auto text = cycle_report_text(report);
  CHECK(text.find("LOST") != std::string::npos);
  CHECK(text.find(format_score(report.score)) != std::string::npos);
}

TEST_CASE("survey finds the AMBIG-1 collision and nothing on an injective model") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& sv = b.fwd->source_vocab();
  const auto& tv = b.fwd->target_vocab();
  auto pairs = survey_many_to_one(*b.fwd, *b.bwd, b.corpus, 2);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].source_a == parse_sentence(sv, "A"));
  CHECK(pairs[0].source_b == parse_sentence(sv, "B"));
  CHECK(pairs[0].pivot == parse_sentence(tv, "u"));
  CHECK(pairs[0].evidence.reforward_a == pairs[0].pivot);
  CHECK(pairs[0].evidence.reforward_b == pairs[0].pivot);
  CHECK(verify_collision(*b.fwd, pairs[0]));
  CHECK(survey_many_to_one(*b.fwd, *b.bwd, b.corpus, 2, 50, 4) == pairs);
  CHECK(survey_many_to_one(*b.fwd, *b.bwd, b.corpus, 1).empty());

  auto j = collision_to_json(pairs[0], 0, sv, tv);
  CHECK(j["pivot"] == "u");
  CHECK(j["evidence"]["back_translations"].size() == 2);
  CHECK(survey_report_text(pairs, sv, tv).find("A | B") != std::string::npos);

  auto inj = fixtures::bundle("INJECTIVE");
  CHECK(survey_many_to_one(*inj.fwd, *inj.bwd, inj.corpus, 2).empty());
}

TEST_CASE("cycle family members behave as constructed") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (bool collision : {true, false}) {
      auto m = cycle_family_member(seed, collision);
      auto back = greedy_back_translator(m.eval_bwd, 10);
      auto base = cycle_consistency(base_translator(m.fwd, 10), back, m.corpus);
      PragmaticsConfig cfg;
      cfg.alpha = 0.1;
      auto prag = cycle_consistency(cip_translator(m.fwd, m.bwd, cfg), back, m.corpus);
      CHECK(prag.score == 100.0);
      if (collision) {
        CHECK(base.score < prag.score);
      } else {
        CHECK(base.score == 100.0);
      }
    }
  }
}
