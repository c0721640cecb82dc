#pragma once

// Tabular fixtures shipped under data/fixtures and compiled into the library.

#include "pragma/tabular.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pragma::fixtures {

/// Names of every embedded file, e.g. "ambig1.fwd.tab".
std::vector<std::string> names();
/// Text of an embedded file; throws InvalidInput for unknown names.
std::string_view text(std::string_view name);

/// Parses an embedded model file. The identity tag is "fixture:" + name.
std::shared_ptr<const TabularModel> model(std::string_view name);

/// Forward model, internal backward model and (when shipped) an independent
/// evaluation back-translator for one named fixture.
struct Bundle {
  std::string name;
  std::shared_ptr<const TabularModel> fwd;
  std::shared_ptr<const TabularModel> bwd;
  std::shared_ptr<const TabularModel> eval_bwd;  // may be null
  std::vector<Sentence> corpus;
};

/// "AMBIG-1", "CHAIN-1" or "INJECTIVE".
Bundle bundle(std::string_view name);
std::vector<std::string> bundle_names();

}  // namespace pragma::fixtures
