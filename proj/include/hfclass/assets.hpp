#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hfc::assets {

// Raw contents of the data files compiled into the library.
std::string_view varicode_table();
std::string_view morse_table();
std::string_view ita2_letters_table();
std::string_view ita2_figures_table();
std::string_view ccir476_table();
std::string_view text_corpus();

/// One `character<TAB>pattern` entry. `key` is either a single character or a
/// `<NAME>` service token.
struct TableEntry {
  std::string key;
  std::string pattern;
};

/// Parses the table format: lines starting with "# " are comments; a key is a
/// literal printable character, a `\xHH` escape, or a `<NAME>` token.
std::vector<TableEntry> parse_table(std::string_view text);

}  // namespace hfc::assets
