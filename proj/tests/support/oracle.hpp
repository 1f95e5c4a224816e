#pragma once

#include <guadasim/page_analyzer.hpp>

#include <set>
#include <string>

namespace guadasim::testing {

/// Brute-force reference classifier: lowercases every source, deletes vendor
/// prefixes and looks for the keyword spellings as plain substrings. Knows
/// nothing about comments, strings or document structure.
[[nodiscard]] std::set<Keyword> oracle_keywords(const PageSource& src);
[[nodiscard]] RenderKind oracle_kind(const PageSource& src);

} // namespace guadasim::testing
