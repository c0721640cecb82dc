#include "pragma/tabular.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pragma {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

std::string describe(const TabularModelSpec& spec, const TabularModelSpec::Context& ctx) {
  std::string out = "given";
  for (TokenId t : ctx.first) {
    out += ' ';
    out += spec.source_vocab.surface(t);
  }
  out += " |";
  for (TokenId t : ctx.second) {
    out += ' ';
    out += spec.target_vocab.surface(t);
  }
  return out + " :";
}

std::vector<TokenId> lookup_all(const Vocabulary& vocab, std::string_view text, std::size_t line,
                                const char* side) {
  std::vector<TokenId> out;
  for (const auto& word : split_whitespace(text)) {
    auto id = vocab.find(word);
    if (!id || *id == vocab.eos())
      throw ParseError(std::string("unknown ") + side + " token '" + word + "'", line);
    out.push_back(*id);
  }
  return out;
}

double parse_probability(std::string_view text, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw ParseError("malformed probability '" + std::string(text) + "'", line);
  if (value < 0.0 || value > 1.0) throw ParseError("probability out of [0, 1]: " + std::string(text), line);
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void TabularModelSpec::validate() const {
  for (const auto& [ctx, probs] : entries) {
    if (probs.size() != target_vocab.size())
      throw NormalizationError("table " + describe(*this, ctx) + " has the wrong width");
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > kNormalizationTolerance)
      throw NormalizationError("table " + describe(*this, ctx) + " sums to " + format_double(total));
  }
}

TabularModelSpec parse_tabular(std::string_view text) {
  enum class Section { header, source, target, entries };
  Section section = Section::header;
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;
  TabularModelSpec spec;
  std::vector<double>* current = nullptr;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::set<std::string, std::less<>> source_seen, target_seen;

  auto finish_vocab = [&]() {
    spec.source_vocab = Vocabulary(source_words);
    spec.target_vocab = Vocabulary(target_words);
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!seen_header) {
      if (line != kTabularHeader) throw ParseError("expected header '" + std::string(kTabularHeader) + "'", line_no);
      seen_header = true;
      continue;
    }
    if (line == "source:") {
      if (section != Section::header) throw ParseError("'source:' must come first", line_no);
      section = Section::source;
      continue;
    }
    if (line == "target:") {
      if (section != Section::source) throw ParseError("'target:' must follow 'source:'", line_no);
      section = Section::target;
      continue;
    }
    if (line.starts_with("given ") || line == "given") {
      if (section == Section::target) {
        try {
          finish_vocab();
        } catch (const InvalidInput& e) {
          throw ParseError(e.what(), line_no);
        }
        section = Section::entries;
      } else if (section != Section::entries) {
        throw ParseError("entry block before vocabulary sections", line_no);
      }
      if (line.back() != ':') throw ParseError("entry header must end with ':'", line_no);
      std::string_view body = line.substr(5, line.size() - 6);
      auto bar = body.find('|');
      if (bar == std::string_view::npos) throw ParseError("entry header needs '|'", line_no);
      TabularModelSpec::Context ctx{lookup_all(spec.source_vocab, body.substr(0, bar), line_no, "source"),
                                    lookup_all(spec.target_vocab, body.substr(bar + 1), line_no, "target")};
      auto [it, inserted] = spec.entries.emplace(std::move(ctx), std::vector<double>(spec.target_vocab.size(), 0.0));
      if (!inserted) throw ParseError("duplicate entry block", line_no);
      current = &it->second;
      continue;
    }

    switch (section) {
      case Section::header:
        throw ParseError("unexpected line before 'source:'", line_no);
      case Section::source:
      case Section::target: {
        auto& words = section == Section::source ? source_words : target_words;
        auto& seen = section == Section::source ? source_seen : target_seen;
        try {
          Vocabulary single({std::string(line)});
        } catch (const InvalidInput& e) {
          throw ParseError(e.what(), line_no);
        }
        if (!seen.emplace(line).second) throw ParseError("duplicate surface form '" + std::string(line) + "'", line_no);
        words.emplace_back(line);
        break;
      }
      case Section::entries: {
        if (!current) throw ParseError("probability line outside an entry block", line_no);
        auto words = split_whitespace(line);
        if (words.size() != 2) throw ParseError("expected '<token> <probability>'", line_no);
        auto id = spec.target_vocab.find(words[0]);
        if (!id) throw ParseError("unknown target token '" + words[0] + "'", line_no);
        double& slot = (*current)[*id];
        if (slot != 0.0) throw ParseError("token '" + words[0] + "' listed twice in one block", line_no);
        slot = parse_probability(words[1], line_no);
        break;
      }
    }
  }

  if (!seen_header) throw ParseError("empty model file", line_no);
  if (section == Section::header || section == Section::source) throw ParseError("missing 'target:' section", line_no);
  if (section == Section::target) {
    try {
      finish_vocab();
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  spec.validate();
  return spec;
}

std::string format_tabular(const TabularModelSpec& spec) {
  std::ostringstream out;
  out << kTabularHeader << "\nsource:\n";
  for (const auto& s : spec.source_vocab.listed()) out << s << '\n';
  out << "target:\n";
  for (const auto& s : spec.target_vocab.listed()) out << s << '\n';
  for (const auto& [ctx, probs] : spec.entries) {
    out << describe(spec, ctx) << '\n';
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] == 0.0) continue;
      out << "  " << spec.target_vocab.surface(static_cast<TokenId>(i)) << ' ' << format_double(probs[i]) << '\n';
    }
  }
  return out.str();
}

TabularModel::TabularModel(TabularModelSpec spec, std::string identity_tag)
    : spec_(std::move(spec)), tag_(std::move(identity_tag)) {
  if (tag_.empty()) throw InvalidInput("identity tag must be nonempty");
  spec_.validate();
  for (const auto& [ctx, probs] : spec_.entries) {
    std::vector<Key> keys(probs.size());
    std::vector<double> logs(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      keys[i] = static_cast<Key>(i);
      logs[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
    }
    tables_.emplace(ctx, LogDistribution::from_normalized(std::move(keys), std::move(logs)));
  }
}

LogDistribution TabularModel::compute_next_token_dist(const Sentence& source, const Sentence& prefix) const {
  auto it = tables_.find({source.tokens, prefix.tokens});
  if (it == tables_.end()) {
    throw MissingEntry("no table for " + describe(spec_, {source.tokens, prefix.tokens}) + " in model " + tag_);
  }
  return it->second;
}

std::shared_ptr<const TabularModel> load_tabular(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  TabularModelSpec spec;
  try {
    spec = parse_tabular(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  } catch (const NormalizationError& e) {
    throw NormalizationError(path.string() + ": " + e.what());
  }
  std::error_code ec;
  auto canonical = std::filesystem::weakly_canonical(path, ec);
  return std::make_shared<TabularModel>(std::move(spec), "tabular:" + (ec ? path : canonical).string());
}

void save_tabular(const TabularModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << format_tabular(spec);
}

}  // namespace pragma
