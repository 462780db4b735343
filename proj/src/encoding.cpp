#include "hfclass/encoding.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "hfclass/assets.hpp"

namespace hfc::encoding {

namespace {

std::string describe(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x21 && u < 0x7F) return std::string("'") + c + "'";
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", u);
  return buf;
}

char fold(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

std::uint8_t parse_bits(const std::string& pattern) {
  std::uint8_t v = 0;
  for (char b : pattern) v = static_cast<std::uint8_t>((v << 1) | (b == '1' ? 1 : 0));
  return v;
}

struct MorseTable {
  std::array<std::string, 128> patterns;
  std::map<std::string, char> reverse;
};

const MorseTable& morse() {
  static const MorseTable table = [] {
    MorseTable t;
    for (const auto& e : assets::parse_table(assets::morse_table())) {
      const auto c = static_cast<unsigned char>(e.key[0]);
      t.patterns[c] = e.pattern;
      t.reverse[e.pattern] = e.key[0];
    }
    return t;
  }();
  return table;
}

struct VaricodeTable {
  std::vector<std::string> words;
  std::map<std::string, char> reverse;
};

const VaricodeTable& varicode() {
  static const VaricodeTable table = [] {
    VaricodeTable t;
    t.words.resize(128);
    for (const auto& e : assets::parse_table(assets::varicode_table())) {
      const auto c = static_cast<unsigned char>(e.key[0]);
      if (e.key.size() != 1 || c >= 128) throw std::runtime_error("bad varicode table key");
      t.words[c] = e.pattern;
      t.reverse[e.pattern] = static_cast<char>(c);
    }
    return t;
  }();
  return table;
}

struct Ita2Table {
  // Code for each character in each set, -1 when absent.
  std::array<int, 128> letters;
  std::array<int, 128> figures;
  std::array<char, 32> letter_char{};
  std::array<char, 32> figure_char{};
  std::array<std::string, 32> letter_key;

  Ita2Table() {
    letters.fill(-1);
    figures.fill(-1);
  }
};

const Ita2Table& ita2_table() {
  static const Ita2Table table = [] {
    Ita2Table t;
    for (const auto& e : assets::parse_table(assets::ita2_letters_table())) {
      const auto code = parse_bits(e.pattern);
      t.letter_key[code] = e.key;
      if (e.key.size() == 1) {
        t.letters[static_cast<unsigned char>(e.key[0])] = code;
        t.letter_char[code] = e.key[0];
      }
    }
    for (const auto& e : assets::parse_table(assets::ita2_figures_table())) {
      const auto code = parse_bits(e.pattern);
      if (e.key.size() == 1) {
        t.figures[static_cast<unsigned char>(e.key[0])] = code;
        t.figure_char[code] = e.key[0];
      }
    }
    return t;
  }();
  return table;
}

struct CcirTable {
  std::array<std::uint8_t, 32> from_ita2{};
  std::array<int, 128> to_ita2;
};

const CcirTable& ccir_table() {
  static const CcirTable table = [] {
    CcirTable t;
    t.to_ita2.fill(-1);
    std::map<std::string, std::uint8_t> by_key;
    for (const auto& e : assets::parse_table(assets::ccir476_table())) by_key[e.key] = parse_bits(e.pattern);
    const auto& ita = ita2_table();
    for (int code = 0; code < 32; ++code) {
      const auto it = by_key.find(ita.letter_key[code]);
      if (it == by_key.end()) throw std::runtime_error("CCIR-476 table lacks ITA2 position " + std::to_string(code));
      t.from_ita2[code] = it->second;
      t.to_ita2[it->second] = code;
    }
    return t;
  }();
  return table;
}

}  // namespace

UnsupportedCharacter::UnsupportedCharacter(std::string_view code, char c, std::size_t position)
    : std::invalid_argument(std::string(code) + " cannot encode character " + describe(c) + " at position " +
                            std::to_string(position)),
      character_(c),
      position_(position) {}

double KeyingEnvelope::total_seconds() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.seconds;
  return total;
}

// --- Morse -----------------------------------------------------------------

bool morse_supports(char c) {
  const auto u = static_cast<unsigned char>(fold(c));
  return u < 128 && !morse().patterns[u].empty();
}

KeyingEnvelope encode_morse(std::string_view text, double wpm) {
  if (!(wpm >= kMinWpm && wpm <= kMaxWpm)) {
    throw std::invalid_argument("Morse speed must lie in [5, 60] wpm, got " + std::to_string(wpm));
  }
  const double dit = 1.2 / wpm;
  KeyingEnvelope env;
  int pending_gap = 0;  // in dits, applied before the next element
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = fold(text[i]);
    if (c == ' ') {
      if (!env.segments.empty()) pending_gap = 7;
      continue;
    }
    const auto u = static_cast<unsigned char>(c);
    if (u >= 128 || morse().patterns[u].empty()) throw UnsupportedCharacter("Morse", text[i], i);
    for (char element : morse().patterns[u]) {
      if (!env.segments.empty()) env.segments.push_back({false, pending_gap * dit});
      env.segments.push_back({true, (element == '-' ? 3 : 1) * dit});
      pending_gap = 1;
    }
    if (pending_gap < 3) pending_gap = 3;
  }
  return env;
}

std::string decode_morse(const KeyingEnvelope& envelope, double wpm) {
  const double dit = 1.2 / wpm;
  std::string out;
  std::string symbol;
  auto flush = [&] {
    if (symbol.empty()) return;
    const auto it = morse().reverse.find(symbol);
    out.push_back(it == morse().reverse.end() ? '?' : it->second);
    symbol.clear();
  };
  for (const auto& s : envelope.segments) {
    const double units = s.seconds / dit;
    if (s.on) {
      symbol.push_back(units < 2.0 ? '.' : '-');
    } else if (units >= 5.0) {
      flush();
      out.push_back(' ');
    } else if (units >= 2.0) {
      flush();
    }
  }
  flush();
  return out;
}

// --- Varicode ----------------------------------------------------------------

const std::vector<std::string>& varicode_words() { return varicode().words; }

Bits encode_varicode(std::string_view text) {
  Bits bits;
  const auto& words = varicode().words;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto u = static_cast<unsigned char>(text[i]);
    if (u >= 128) throw UnsupportedCharacter("varicode", text[i], i);
    for (char b : words[u]) bits.push_back(b == '1' ? 1 : 0);
    bits.push_back(0);
    bits.push_back(0);
  }
  return bits;
}

std::string decode_varicode(std::span<const std::uint8_t> bits) {
  std::string out;
  std::string word;
  int zeros = 0;
  for (auto b : bits) {
    if (b) {
      word.append(static_cast<std::size_t>(zeros), '0');
      word.push_back('1');
      zeros = 0;
      continue;
    }
    if (++zeros == 2 && !word.empty()) {
      const auto it = varicode().reverse.find(word);
      if (it == varicode().reverse.end()) throw std::invalid_argument("invalid varicode word " + word);
      out.push_back(it->second);
      word.clear();
    }
    if (word.empty()) zeros = 0;
  }
  return out;
}

// --- ITA2 ---------------------------------------------------------------------

bool ita2_supports(char c) {
  const auto u = static_cast<unsigned char>(fold(c));
  return u < 128 && (ita2_table().letters[u] >= 0 || ita2_table().figures[u] >= 0);
}

std::vector<std::uint8_t> encode_ita2(std::string_view text, bool usos) {
  const auto& t = ita2_table();
  std::vector<std::uint8_t> codes;
  bool figures = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto u = static_cast<unsigned char>(fold(text[i]));
    if (u >= 128) throw UnsupportedCharacter("ITA2", text[i], i);
    const int in_letters = t.letters[u];
    const int in_figures = t.figures[u];
    if (in_letters >= 0 && in_figures >= 0) {
      // Space, CR and LF exist in both sets.
      codes.push_back(static_cast<std::uint8_t>(in_letters));
      if (usos && in_letters == ita2::kSpace) figures = false;
    } else if (in_letters >= 0) {
      if (figures) codes.push_back(ita2::kLtrs);
      figures = false;
      codes.push_back(static_cast<std::uint8_t>(in_letters));
    } else if (in_figures >= 0) {
      if (!figures) codes.push_back(ita2::kFigs);
      figures = true;
      codes.push_back(static_cast<std::uint8_t>(in_figures));
    } else {
      throw UnsupportedCharacter("ITA2", text[i], i);
    }
  }
  return codes;
}

std::string decode_ita2(std::span<const std::uint8_t> codes, bool usos) {
  const auto& t = ita2_table();
  std::string out;
  bool figures = false;
  for (auto code : codes) {
    code &= 0x1F;
    if (code == ita2::kLtrs) {
      figures = false;
    } else if (code == ita2::kFigs) {
      figures = true;
    } else if (code != ita2::kNull) {
      const char c = figures ? t.figure_char[code] : t.letter_char[code];
      out.push_back(c ? c : '?');
      if (usos && code == ita2::kSpace) figures = false;
    }
  }
  return out;
}

// --- CCIR-476 / SITOR-B ---------------------------------------------------------

std::uint8_t ccir476_from_ita2(std::uint8_t ita2_code) { return ccir_table().from_ita2[ita2_code & 0x1F]; }

int ita2_from_ccir476(std::uint8_t word) { return word < 128 ? ccir_table().to_ita2[word] : -1; }

std::vector<std::uint8_t> encode_ccir476_sitorb(std::string_view text) {
  const auto codes = encode_ita2(text, false);
  const std::size_t n = codes.size();
  if (n == 0) return {};
  std::vector<std::uint8_t> words(2 * n + 4);
  for (std::size_t k = 0; k < n + 2; ++k) {
    words[2 * k] = k < n ? ccir476_from_ita2(codes[k]) : ccir476::kAlpha;
    words[2 * k + 1] = k >= 2 ? ccir476_from_ita2(codes[k - 2]) : ccir476::kRep;
  }
  return words;
}

std::string decode_ccir476_sitorb(std::span<const std::uint8_t> words) {
  std::vector<std::uint8_t> codes;
  for (std::size_t slot = 0; slot < words.size(); slot += 2) {
    int code = ita2_from_ccir476(words[slot]);
    if (words[slot] == ccir476::kAlpha) break;
    if (code < 0 && slot + 5 < words.size()) code = ita2_from_ccir476(words[slot + 5]);
    if (code < 0) throw std::invalid_argument("unrecoverable SITOR-B character at slot " + std::to_string(slot));
    codes.push_back(static_cast<std::uint8_t>(code));
  }
  return decode_ita2(codes, false);
}

}  // namespace hfc::encoding
