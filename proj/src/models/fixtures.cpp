#include "pragma/fixtures.hpp"

#include <algorithm>
#include <utility>

namespace pragma::fixtures {

// Defined in the generated embedded_fixtures.cpp.
extern const std::vector<std::pair<std::string_view, std::string_view>> kEmbedded;

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, body] : kEmbedded) out.emplace_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view text(std::string_view name) {
  for (const auto& [n, body] : kEmbedded) {
    if (n == name) return body;
  }
  throw InvalidInput("no embedded fixture named '" + std::string(name) + "'");
}

std::shared_ptr<const TabularModel> model(std::string_view name) {
  return std::make_shared<TabularModel>(parse_tabular(text(name)), "fixture:" + std::string(name));
}

namespace {

std::vector<Sentence> corpus_from(const Vocabulary& vocab, std::string_view body) {
  std::vector<Sentence> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    auto line = body.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? body.size() : nl + 1;
    if (!split_whitespace(line).empty()) out.push_back(parse_sentence(vocab, line));
  }
  return out;
}

}  // namespace

std::vector<std::string> bundle_names() { return {"AMBIG-1", "CHAIN-1", "INJECTIVE"}; }

Bundle bundle(std::string_view name) {
  Bundle b;
  b.name = std::string(name);
  if (name == "AMBIG-1") {
    b.fwd = model("ambig1.fwd.tab");
    b.bwd = model("ambig1.bwd.tab");
    b.eval_bwd = model("ambig1.eval-bwd.tab");
    b.corpus = corpus_from(b.fwd->source_vocab(), text("ambig1.corpus"));
  } else if (name == "CHAIN-1") {
    b.fwd = model("chain1.fwd.tab");
    b.bwd = model("chain1.bwd.tab");
    b.corpus = corpus_from(b.fwd->source_vocab(), text("chain1.corpus"));
  } else if (name == "INJECTIVE") {
    b.fwd = model("injective.fwd.tab");
    b.bwd = model("injective.bwd.tab");
    b.corpus = corpus_from(b.fwd->source_vocab(), "A\nB\n");
  } else {
    throw InvalidInput("unknown fixture '" + std::string(name) + "'");
  }
  return b;
}

}  // namespace pragma::fixtures
