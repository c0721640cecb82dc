#pragma once

/**
 * Closed-world tabular translation models, stored in the `pragma-tabular v1`
 * text format (see docs/tabular-format.md):
 *
 *   pragma-tabular v1
 *   source:
 *   A
 *   target:
 *   u
 *   given A | :
 *     u 0.6
 *     x 0.4
 *   given A | u:
 *     </s> 1
 *
 * Ids follow listing order; EOS is implicit and takes the last id. Tokens
 * missing from a block have probability zero. Querying a (source, prefix)
 * pair without a block raises MissingEntry.
 */

#include "pragma/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pragma {

inline constexpr std::string_view kTabularHeader = "pragma-tabular v1";

/// In-memory form of a tabular model file.
struct TabularModelSpec {
  using Context = std::pair<std::vector<TokenId>, std::vector<TokenId>>;  // (source, prefix), EOS excluded

  Vocabulary source_vocab;
  Vocabulary target_vocab;
  /// Probabilities indexed by target id (EOS included), keyed by context.
  std::map<Context, std::vector<double>> entries;

  /// Throws NormalizationError naming the first block not summing to one.
  void validate() const;
};

class TabularModel final : public ConditionalSequenceModel {
 public:
  TabularModel(TabularModelSpec spec, std::string identity_tag);

  const Vocabulary& source_vocab() const override { return spec_.source_vocab; }
  const Vocabulary& target_vocab() const override { return spec_.target_vocab; }
  const std::string& identity_tag() const override { return tag_; }

  const TabularModelSpec& spec() const noexcept { return spec_; }

 protected:
  LogDistribution compute_next_token_dist(const Sentence& source, const Sentence& prefix) const override;

 private:
  TabularModelSpec spec_;
  std::string tag_;
  std::map<TabularModelSpec::Context, LogDistribution> tables_;
};

/// Parses the text format. `origin` is used in error messages only.
TabularModelSpec parse_tabular(std::string_view text);
std::string format_tabular(const TabularModelSpec& spec);

/// Loads a model file; its identity tag is "tabular:" plus the canonical path.
std::shared_ptr<const TabularModel> load_tabular(const std::filesystem::path& path);
void save_tabular(const TabularModelSpec& spec, const std::filesystem::path& path);

/// Shortest decimal that round-trips to exactly `value`.
std::string format_double(double value);

}  // namespace pragma
