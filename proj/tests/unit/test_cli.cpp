#include <doctest.h>

#include "pragma/cli/commands.hpp"

#include "test_paths.hpp"

#include <json.hpp>

#include <sstream>

using namespace pragma;
using namespace pragma::testing;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome pragma_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string fx(const char* name) { return fixture_path(name).string(); }

}  // namespace

TEST_CASE("translate with the base speaker collides") {
  auto o = pragma_run({"translate", "--mode", "s0", "--fwd", fx("ambig1.fwd.tab"), "--input", fx("ambig1.corpus")});
  CHECK(o.code == 0);
  CHECK(o.out == "u\nu\n");
}

TEST_CASE("pragmatic translate modes separate the sources") {
  auto cip = pragma_run({"translate", "--mode", "s1-cip", "--alpha", "1", "--fwd", fx("ambig1.fwd.tab"), "--bwd",
                         fx("ambig1.bwd.tab"), "--input", fx("ambig1.corpus")});
  CHECK(cip.code == 0);
  CHECK(cip.out == "x\ny\n");

  auto cgp = pragma_run({"translate", "--mode", "s1-cgp", "--alpha", "1", "--beam", "3", "--fwd", "fixture:ambig1.fwd",
                         "--bwd", "fixture:ambig1.bwd", "--input", fx("ambig1.corpus")});
  CHECK(cgp.code == 0);
  CHECK(cgp.out == "x\ny\n");

  auto ip = pragma_run({"translate", "--mode", "s1-ip", "--alpha", "1", "--fwd", fx("ambig1.fwd.tab"), "--distractors",
                        fx("ambig1.distractors.tsv")});
  CHECK(ip.code == 0);
  CHECK(ip.out == "x\ny\n");

  auto gp = pragma_run({"translate", "--mode", "s1-gp", "--alpha", "1", "--beam", "3", "--fwd", fx("ambig1.fwd.tab"),
                        "--distractors", fx("ambig1.distractors.tsv")});
  CHECK(gp.code == 0);
  CHECK(gp.out == "x\ny\n");
}

TEST_CASE("translate writes outputs, traces and a manifest") {
  TempDir dir;
  auto output = dir.file("out.txt");
  auto trace = dir.file("trace.jsonl");
  std::vector<std::string> args = {"translate", "--mode", "s1-cip", "--alpha", "1", "--fwd", fx("ambig1.fwd.tab"),
                                   "--bwd", fx("ambig1.bwd.tab"), "--input", fx("ambig1.corpus"), "--output", output,
                                   "--trace", trace, "--jobs", "2"};
  auto o = pragma_run(args);
  REQUIRE(o.code == 0);
  CHECK(read_file(output) == "x\ny\n");

  std::istringstream lines(read_file(trace));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["index"] == n);
    CHECK(j.contains("steps"));
    ++n;
  }
  CHECK(n == 2);

  auto first = nlohmann::ordered_json::parse(read_file(output + ".manifest.json"));
  CHECK(first["command"] == "translate");
  REQUIRE(pragma_run(args).code == 0);
  auto second = nlohmann::ordered_json::parse(read_file(output + ".manifest.json"));
  first.erase("timing");
  second.erase("timing");
  CHECK(first.dump() == second.dump());
}

TEST_CASE("usage errors exit with 2") {
  CHECK(pragma_run({}).code == 2);
  CHECK(pragma_run({"translate", "--mode", "s1-ip", "--fwd", fx("ambig1.fwd.tab"), "--input", fx("ambig1.corpus")})
            .code == 2);
  CHECK(pragma_run({"translate", "--mode", "s1-cip", "--fwd", fx("ambig1.fwd.tab"), "--input", fx("ambig1.corpus")})
            .code == 2);
  CHECK(pragma_run({"translate", "--mode", "bogus", "--fwd", fx("ambig1.fwd.tab")}).code == 2);
  CHECK(pragma_run({"translate", "--mode", "s0", "--fwd", fx("ambig1.fwd.tab"), "--alpha", "-2", "--input",
                    fx("ambig1.corpus")})
            .code == 2);
  CHECK(pragma_run({"eval", "cycle", "--mode", "s1-cip", "--fwd", fx("ambig1.fwd.tab"), "--bwd", fx("ambig1.bwd.tab"),
                    "--back", fx("ambig1.bwd.tab"), "--input", fx("ambig1.corpus")})
            .code == 2);
}

TEST_CASE("runtime errors name the input line and exit with 1") {
  TempDir dir;
  auto input = dir.write("in.txt", "A\nQ\n");
  auto o = pragma_run({"translate", "--mode", "s0", "--fwd", fx("ambig1.fwd.tab"), "--input", input});
  CHECK(o.code == 1);
  CHECK(o.err.find(":2: unknown token") != std::string::npos);

  auto missing = pragma_run({"translate", "--mode", "s0", "--fwd", dir.file("nope.tab"), "--input", input});
  CHECK(missing.code == 1);
}

TEST_CASE("eval bleu") {
  TempDir dir;
  auto hyp = dir.write("hyp.txt", "a b c\n");
  auto ref = dir.write("ref.txt", "a b c d\n");
  auto o = pragma_run({"eval", "bleu", "--hyp", hyp, "--ref", ref});
  CHECK(o.code == 0);
  CHECK(o.out.find("bleu: 71.65") != std::string::npos);
  auto same = pragma_run({"eval", "bleu", "--hyp", ref, "--ref", ref});
  CHECK(same.out.find("bleu: 100.00") != std::string::npos);
  auto longer = dir.write("two.txt", "a\nb\n");
  CHECK(pragma_run({"eval", "bleu", "--hyp", longer, "--ref", ref}).code == 1);
}

TEST_CASE("eval cycle favours the pragmatic speaker") {
  auto score = [](const std::string& mode) {
    auto o = pragma_run({"eval", "cycle", "--mode", mode, "--alpha", "1", "--fwd", fx("ambig1.fwd.tab"), "--bwd",
                         fx("ambig1.bwd.tab"), "--back", fx("ambig1.eval-bwd.tab"), "--input", fx("ambig1.corpus")});
    REQUIRE(o.code == 0);
    auto at = o.out.find("bleu: ");
    REQUIRE(at != std::string::npos);
    return std::stod(o.out.substr(at + 6));
  };
  double base = score("s0");
  double prag = score("s1-cip");
  CHECK(prag == 100.0);
  CHECK(prag >= base);
  CHECK(base < 100.0);
}

TEST_CASE("survey and oracle commands") {
  auto s = pragma_run({"survey", "--fwd", fx("ambig1.fwd.tab"), "--bwd", fx("ambig1.bwd.tab"), "--input",
                       fx("ambig1.corpus")});
  CHECK(s.code == 0);
  CHECK(s.out.find("1 collision") != std::string::npos);

  auto ambig = pragma_run({"oracle", "--fixture", "AMBIG-1", "--alpha", "1"});
  CHECK(ambig.code == 0);
  CHECK(ambig.out.find("steps agreeing: 4/4") != std::string::npos);
  CHECK(ambig.out.find("sentences agreeing: 2/2") != std::string::npos);

  auto chain = pragma_run({"oracle", "--fixture", "CHAIN-1", "--alpha", "1", "--max-len", "3"});
  CHECK(chain.code == 0);
  CHECK(chain.out.find("steps agreeing: 2/3") != std::string::npos);
}

TEST_CASE("a stdio scorer works as a model spec") {
  auto spec = "stdio:" + fake_scorer_command(fx("ambig1.fwd.tab"));
  auto o = pragma_run({"translate", "--mode", "s0", "--fwd", spec, "--input", fx("ambig1.corpus")});
  CHECK(o.code == 0);
  CHECK(o.out == "u\nu\n");
  auto cip = pragma_run({"translate", "--mode", "s1-cip", "--alpha", "1", "--fwd", spec, "--bwd",
                         "stdio:" + fake_scorer_command(fx("ambig1.bwd.tab")), "--input", fx("ambig1.corpus")});
  CHECK(cip.code == 0);
  CHECK(cip.out == "x\ny\n");
}
