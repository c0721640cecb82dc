#include <doctest.h>

#include "pragma/fixtures.hpp"
#include "pragma/rsa.hpp"

#include "support.hpp"

#include <cmath>

using namespace pragma;
using namespace pragma::testing;

namespace {

Sentence s(const Vocabulary& v, const char* text) { return parse_sentence(v, text); }

PragmaticsConfig config_with(double alpha, RolloutPolicy rollout = RolloutPolicy::greedy) {
  PragmaticsConfig c;
  c.alpha = alpha;
  c.rollout = rollout;
  return c;
}

void check_against_reference(const RandomModels& r, const Sentence& w, const Sentence& c, double alpha) {
  auto got = s1_word_c_exact(*r.fwd, *r.bwd, w, c, alpha, r.shape.max_len);
  auto want = reference::incremental_speaker(r.fwd->spec(), r.bwd->spec(), w.tokens, c.tokens, alpha,
                                             r.shape.max_len);
  REQUIRE(want.size() == r.fwd->target_vocab().size());
  for (TokenId t = 0; t < want.size(); ++t) {
    double g = got.logprob(t);
    if (std::isinf(want[t])) {
      CHECK(std::isinf(g));
    } else {
      CHECK(std::abs(g - want[t]) <= 1e-9);
    }
  }
}

}  // namespace

TEST_CASE("L1 over AMBIG-1 distractors") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& tv = b.fwd->target_vocab();
  DistractorSet d(b.corpus);
  auto l_u = l1_sentence(*b.fwd, d, s(tv, "u"));
  CHECK(l_u.prob(0) == doctest::Approx(0.5));
  CHECK(l_u.prob(1) == doctest::Approx(0.5));
  auto l_x = l1_sentence(*b.fwd, d, s(tv, "x"));
  CHECK(l_x.prob(0) == doctest::Approx(0.975));
  CHECK(l_x.prob(1) == doctest::Approx(0.025));

  auto w_x = l1_word(*b.fwd, d, tv.id("x"), Sentence::prefix());
  CHECK(w_x.prob(0) == doctest::Approx(0.975));
  auto w_u = l1_word(*b.fwd, d, tv.id("u"), Sentence::prefix());
  CHECK(w_u.prob(1) == doctest::Approx(0.5));
}

TEST_CASE("global speaker with explicit distractors") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& tv = b.fwd->target_vocab();
  DistractorSet d(b.corpus);
  CandidateSet cands({s(tv, "u"), s(tv, "x"), s(tv, "y")});
  auto dist = s1_global(*b.fwd, d, b.corpus[0], cands, 1.0);
  double z = 0.300 + 0.38025 + 0.00025;
  CHECK(dist.prob(0) == doctest::Approx(0.300 / z));
  CHECK(dist.prob(1) == doctest::Approx(0.38025 / z));
  CHECK(dist.prob(2) == doctest::Approx(0.00025 / z));
  CHECK(argmax(dist) == 1);
  CHECK(argmax(s1_global(*b.fwd, d, b.corpus[1], cands, 1.0)) == 2);
}

TEST_CASE("incremental speaker with explicit distractors") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& tv = b.fwd->target_vocab();
  DistractorSet d(b.corpus);
  auto step = s1_word(*b.fwd, d, b.corpus[0], Sentence::prefix(), 1.0);
  double z = 0.30 + 0.38025 + 0.00025;
  CHECK(step.prob(tv.id("u")) == doctest::Approx(0.30 / z));
  CHECK(step.prob(tv.id("x")) == doctest::Approx(0.38025 / z));
  CHECK(argmax(step) == tv.id("x"));

  auto after_u = s1_word(*b.fwd, d, b.corpus[0], Sentence::prefix({tv.id("u")}), 1.0);
  CHECK(after_u.prob(tv.eos()) == 1.0);

  auto cfg = config_with(1.0);
  CHECK(decode_s1_ip(*b.fwd, d, b.corpus[0], cfg).sentence == s(tv, "x"));
  CHECK(decode_s1_ip(*b.fwd, d, b.corpus[1], cfg).sentence == s(tv, "y"));
  cfg.beam_width = 3;
  CHECK(decode_s1_ip(*b.fwd, d, b.corpus[0], cfg).sentence == s(tv, "x"));
}

TEST_CASE("cycle-consistent global reranking") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& tv = b.fwd->target_vocab();
  CandidateSet cands({s(tv, "u"), s(tv, "x"), s(tv, "y")});
  auto ranked = s1_cgp_rerank(*b.fwd, *b.bwd, b.corpus[0], cands, 1.0);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].sentence == s(tv, "x"));
  CHECK(std::exp(ranked[0].logprob) == doctest::Approx(0.3705));
  CHECK(std::exp(ranked[1].logprob) == doctest::Approx(0.300));
  CHECK(std::exp(ranked[2].logprob) == doctest::Approx(0.0005));
  CHECK(s1_cgp_rerank(*b.fwd, *b.bwd, b.corpus[1], cands, 1.0)[0].sentence == s(tv, "y"));
}

TEST_CASE("cycle-consistent incremental step with greedy rollouts") {
  auto b = fixtures::bundle("AMBIG-1");
  const auto& tv = b.fwd->target_vocab();
  auto cfg = config_with(1.0);
  auto step = s1_word_c(*b.fwd, *b.bwd, b.corpus[0], Sentence::prefix(), cfg);
  REQUIRE(step.dist.size() == 2);
  CHECK(step.dist.contains(tv.id("u")));
  CHECK(step.dist.contains(tv.id("x")));
  double z = 0.6 * 0.5 + 0.39 * 0.95;
  CHECK(step.dist.prob(tv.id("x")) == doctest::Approx(0.39 * 0.95 / z));
  CHECK(step.record.chosen == tv.id("x"));
  REQUIRE(step.record.candidates.size() == 2);
  for (const auto& cand : step.record.candidates) {
    REQUIRE(cand.rollout.has_value());
    CHECK(cand.rollout->terminated);
    CHECK_FALSE(cand.rollout_truncated);
  }
  CHECK(decode_s1_cip(*b.fwd, *b.bwd, b.corpus[0], cfg).sentence == s(tv, "x"));
  CHECK(decode_s1_cip(*b.fwd, *b.bwd, b.corpus[1], cfg).sentence == s(tv, "y"));
}

TEST_CASE("exact step on AMBIG-1 matches the greedy step over the full vocabulary") {
  auto b = fixtures::bundle("AMBIG-1");
  auto cfg = config_with(1.0);
  cfg.candidate_width_k = b.fwd->target_vocab().size();
  for (const auto& w : b.corpus) {
    auto approx = s1_word_c(*b.fwd, *b.bwd, w, Sentence::prefix(), cfg);
    auto exact = s1_word_c_exact(*b.fwd, *b.bwd, w, Sentence::prefix(), 1.0, 3);
    for (Key k = 0; k < b.fwd->target_vocab().size(); ++k) {
      double e = exact.logprob(k);
      if (e == kNegInf) {
        CHECK(approx.dist.logprob(k) == kNegInf);
      } else {
        CHECK(approx.dist.logprob(k) == doctest::Approx(e).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("CHAIN-1 separates the greedy rollout from the exact marginal") {
  auto b = fixtures::bundle("CHAIN-1");
  const auto& tv = b.fwd->target_vocab();
  const auto& w = b.corpus[0];
  auto approx = s1_word_c(*b.fwd, *b.bwd, w, Sentence::prefix(), config_with(1.0));
  auto exact = s1_word_c_exact(*b.fwd, *b.bwd, w, Sentence::prefix(), 1.0, 3);
  CHECK(approx.record.chosen == tv.id("q"));
  CHECK(argmax(exact) == tv.id("p"));
  // p: 0.55 * (0.6 * 0.1 + 0.4 * 0.9), q: 0.45 * (0.55 * 0.5 + 0.45 * 0.5)
  double z = 0.231 + 0.225;
  CHECK(exact.prob(tv.id("p")) == doctest::Approx(0.231 / z));
  CHECK(exact.prob(tv.id("q")) == doctest::Approx(0.225 / z));

  auto all = enumerate_sentences(*b.fwd, w, 3);
  std::vector<Sentence> pool;
  for (const auto& x : all) pool.push_back(x.sentence);
  auto best = s1_cgp_rerank(*b.fwd, *b.bwd, w, CandidateSet(pool), 1.0)[0].sentence;
  CHECK(best == s(tv, "p s"));
  auto cfg = config_with(1.0, RolloutPolicy::exact);
  cfg.max_len = 3;
  CHECK(decode_s1_cip(*b.fwd, *b.bwd, w, cfg).sentence == best);
}

TEST_CASE("property: exact step equals the reference on random models") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto r = random_models(seed);
    for (double alpha : {0.0, 0.1, 1.0, 2.5}) {
      for (const auto& w : r.sources) {
        check_against_reference(r, w, Sentence::prefix(), alpha);
        for (TokenId t = 0; t + 1 < r.fwd->target_vocab().size(); ++t) {
          if (r.shape.max_len >= 2) check_against_reference(r, w, Sentence::prefix({t}), alpha);
        }
      }
    }
  }
}

TEST_CASE("property: alpha 0 collapses every speaker to greedy") {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    auto r = random_models(seed);
    DistractorSet d(r.sources);
    auto cfg = config_with(0.0);
    cfg.max_len = r.shape.max_len;
    for (const auto& w : r.sources) {
      auto base = greedy_decode(*r.fwd, w, cfg.max_len);
      CHECK(decode_s1_cip(*r.fwd, *r.bwd, w, cfg).sentence == base);
      CHECK(decode_s1_ip(*r.fwd, d, w, cfg).sentence == base);
    }
  }
}

TEST_CASE("property: global oracle on random models") {
  for (std::uint64_t seed = 70; seed < 80; ++seed) {
    auto r = random_models(seed);
    for (const auto& w : r.sources) {
      auto utts = reference::global_speaker(r.fwd->spec(), r.bwd->spec(), w.tokens, 1.0, r.shape.max_len);
      auto all = enumerate_sentences(*r.fwd, w, r.shape.max_len);
      REQUIRE(all.size() == utts.size());
      std::vector<Sentence> pool;
      for (const auto& x : all) pool.push_back(x.sentence);
      auto ranked = s1_cgp_rerank(*r.fwd, *r.bwd, w, CandidateSet(pool), 1.0);
      double best = 0.0;
      for (const auto& u : utts) best = std::max(best, u.score);
      CHECK(std::exp(ranked[0].logprob) == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("rollout cache memoizes continuations") {
  auto b = fixtures::bundle("CHAIN-1");
  const auto& tv = b.fwd->target_vocab();
  RolloutCache cache;
  auto first = cache.rollout(*b.fwd, b.corpus[0], Sentence::prefix({tv.id("p")}), 50);
  CHECK(first == s(tv, "p r"));
  auto again = cache.rollout(*b.fwd, b.corpus[0], Sentence::prefix({tv.id("p")}), 50);
  CHECK(again == first);
  CHECK(cache.hits() == 1);
  CHECK(cache.size() == 2);
}

TEST_CASE("truncated rollouts are flagged") {
  auto b = fixtures::bundle("CHAIN-1");
  auto cfg = config_with(1.0);
  cfg.max_len = 2;
  auto step = s1_word_c(*b.fwd, *b.bwd, b.corpus[0], Sentence::prefix(), cfg);
  bool any = false;
  for (const auto& c : step.record.candidates) any = any || c.rollout_truncated;
  CHECK(any);
  auto result = decode_s1_cip(*b.fwd, *b.bwd, b.corpus[0], cfg);
  CHECK(result.trace.any_rollout_truncated());
  CHECK_FALSE(result.sentence.terminated);
}

TEST_CASE("trace follows the decoded sentence") {
  auto b = fixtures::bundle("AMBIG-1");
  auto result = decode_s1_cip(*b.fwd, *b.bwd, b.corpus[0], config_with(1.0));
  REQUIRE(result.trace.steps.size() == result.sentence.length());
  TokenId eos = b.fwd->target_vocab().eos();
  Sentence built = Sentence::prefix();
  for (const auto& st : result.trace.steps) {
    CHECK(st.prefix == built);
    built = built.extended(st.chosen, eos);
  }
  CHECK(built == result.sentence);
  CHECK(std::isfinite(result.trace.total_logprob()));
}

TEST_CASE("invalid speaker inputs are rejected") {
  auto b = fixtures::bundle("AMBIG-1");
  CHECK_THROWS_AS(check_direction(*b.fwd, *b.fwd), InvalidInput);
  CHECK_NOTHROW(check_direction(*b.fwd, *b.bwd));
  CHECK_THROWS_AS(DistractorSet(std::vector<Sentence>{}), InvalidInput);
  CHECK_THROWS_AS(DistractorSet({b.corpus[0], b.corpus[0]}), InvalidInput);
  auto cfg = config_with(-1.0);
  CHECK_THROWS_AS(decode_s1_cip(*b.fwd, *b.bwd, b.corpus[0], cfg), InvalidInput);
  DistractorSet only_b({b.corpus[1]});
  CHECK_THROWS_AS(s1_word(*b.fwd, only_b, b.corpus[0], Sentence::prefix(), 1.0), InvalidInput);
}
