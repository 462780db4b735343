#include "hfclass/assets.hpp"

#include <charconv>
#include <stdexcept>

#define HFC_INCBIN(name, file)                                            \
  __asm__(".section .rodata\n"                                           \
          ".global hfc_asset_" #name "_begin\n"                          \
          ".balign 16\n"                                                 \
          "hfc_asset_" #name "_begin:\n"                                 \
          ".incbin \"" HFCLASS_DATA_DIR "/" file "\"\n"                  \
          ".global hfc_asset_" #name "_end\n"                            \
          "hfc_asset_" #name "_end:\n"                                   \
          ".byte 0\n"                                                    \
          ".previous\n");                                                \
  extern "C" const char hfc_asset_##name##_begin[];                      \
  extern "C" const char hfc_asset_##name##_end[];

HFC_INCBIN(varicode, "varicode.tsv")
HFC_INCBIN(morse, "morse.tsv")
HFC_INCBIN(ita2_letters, "ita2_letters.tsv")
HFC_INCBIN(ita2_figures, "ita2_figures.tsv")
HFC_INCBIN(ccir476, "ccir476.tsv")
HFC_INCBIN(corpus, "corpus.txt")

namespace hfc::assets {

#define HFC_ASSET_VIEW(name) \
  std::string_view(hfc_asset_##name##_begin, hfc_asset_##name##_end - hfc_asset_##name##_begin)

std::string_view varicode_table() { return HFC_ASSET_VIEW(varicode); }
std::string_view morse_table() { return HFC_ASSET_VIEW(morse); }
std::string_view ita2_letters_table() { return HFC_ASSET_VIEW(ita2_letters); }
std::string_view ita2_figures_table() { return HFC_ASSET_VIEW(ita2_figures); }
std::string_view ccir476_table() { return HFC_ASSET_VIEW(ccir476); }
std::string_view text_corpus() { return HFC_ASSET_VIEW(corpus); }

#undef HFC_ASSET_VIEW

namespace {

std::string parse_key(std::string_view field, int line_no) {
  if (field.size() == 1) return std::string(field);
  if (field.size() == 4 && field[0] == '\\' && field[1] == 'x') {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(field.data() + 2, field.data() + 4, value, 16);
    if (ec == std::errc() && ptr == field.data() + 4) return std::string(1, static_cast<char>(value));
  }
  if (field.size() > 2 && field.front() == '<' && field.back() == '>') return std::string(field);
  throw std::runtime_error("malformed table key '" + std::string(field) + "' on line " +
                           std::to_string(line_no));
}

}  // namespace

std::vector<TableEntry> parse_table(std::string_view text) {
  std::vector<TableEntry> entries;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line == "#" || line.starts_with("# ")) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw std::runtime_error("table line " + std::to_string(line_no) + " has no tab separator");
    }
    entries.push_back({parse_key(line.substr(0, tab), line_no), std::string(line.substr(tab + 1))});
  }
  return entries;
}

}  // namespace hfc::assets
