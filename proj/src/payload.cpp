#include <algorithm>
#include <cctype>
#include <cmath>

#include "hfclass/assets.hpp"
#include "hfclass/encoding.hpp"
#include "hfclass/rng.hpp"

namespace hfc::encoding {

namespace {

// Fraction of the corpus reserved for training payloads; the rest feeds
// validation vectors.
constexpr double kTrainFraction = 0.8;

std::string sanitize_morse(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else if (morse_supports(c)) {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::string sanitize_ita2(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (c == '\n') {
      out += "\r\n";
    } else if (c == '\t') {
      out.push_back(' ');
    } else if (c != '\r' && ita2_supports(c)) {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::string sanitize_ascii(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (static_cast<unsigned char>(c) < 128) out.push_back(c);
  }
  return out;
}

std::uint16_t gray(std::uint16_t v) { return static_cast<std::uint16_t>(v ^ (v >> 1)); }

// Packs 7-bit ASCII (least significant bit first) into symbols of
// `bits_per_symbol` bits, Gray coded so adjacent tones differ in one bit.
std::vector<std::uint16_t> ascii_to_symbols(std::string_view text, int bits_per_symbol) {
  std::vector<std::uint16_t> symbols;
  std::uint32_t acc = 0;
  int filled = 0;
  for (char c : text) {
    for (int b = 0; b < 7; ++b) {
      acc |= static_cast<std::uint32_t>((static_cast<unsigned char>(c) >> b) & 1u) << filled;
      if (++filled == bits_per_symbol) {
        symbols.push_back(gray(static_cast<std::uint16_t>(acc)));
        acc = 0;
        filled = 0;
      }
    }
  }
  return symbols;
}

Bits ascii_to_bits(std::string_view text) {
  Bits bits;
  for (char c : text) {
    for (int b = 0; b < 7; ++b) bits.push_back(static_cast<std::uint8_t>((static_cast<unsigned char>(c) >> b) & 1u));
  }
  return bits;
}

}  // namespace

std::string corpus_window(std::size_t length, std::uint64_t seed, TextRegion region) {
  const std::string_view corpus = assets::text_corpus();
  const std::size_t split = static_cast<std::size_t>(kTrainFraction * static_cast<double>(corpus.size()));
  std::size_t lo = 0;
  std::size_t hi = corpus.size();
  if (region == TextRegion::train) hi = split;
  if (region == TextRegion::validation) lo = split;
  const std::size_t span = hi - lo;
  Rng rng(seed);
  const std::size_t start = lo + static_cast<std::size_t>(rng.below(span));
  std::string out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) out.push_back(corpus[lo + (start - lo + i) % span]);
  return out;
}

std::size_t required_symbols(const ModeSpec& mode, double seconds) {
  const double symbols = mode.baud * seconds;
  switch (mode.family) {
    case Family::fsk:
      // Asynchronous RTTY frames are 7.5 bits; SITOR-B words are 7 bits.
      return static_cast<std::size_t>(std::ceil(symbols / (mode.id == ModeId::navtex ? 7.0 : 7.5))) + 1;
    case Family::multicarrier:
      return static_cast<std::size_t>(std::ceil(symbols)) * static_cast<std::size_t>(mode.carriers) +
             static_cast<std::size_t>(mode.carriers);
    default:
      return static_cast<std::size_t>(std::ceil(symbols)) + 1;
  }
}

Payload random_payload(const ModeSpec& mode, double seconds, std::uint64_t seed, const PayloadOptions& options) {
  if (!(seconds > 0.0)) throw std::invalid_argument("payload duration must be positive");
  if (is_analog(mode.family)) {
    throw std::invalid_argument("mode " + std::string(mode.name) + " is analog and has no text payload");
  }
  const std::uint64_t text_seed = split_seed(seed, 1);
  const std::size_t needed = required_symbols(mode, seconds);

  if (mode.family == Family::ook) {
    Rng rng(split_seed(seed, 2));
    const double wpm = rng.uniform(options.morse_wpm_min, options.morse_wpm_max);
    for (std::size_t chars = 32;; chars *= 2) {
      auto env = encode_morse(sanitize_morse(corpus_window(chars, text_seed, options.region)), wpm);
      if (env.total_seconds() >= seconds) return env;
    }
  }

  for (std::size_t chars = 16;; chars *= 2) {
    const std::string raw = corpus_window(chars, text_seed, options.region);
    switch (mode.family) {
      case Family::psk:
      case Family::qpsk: {
        Bits bits = encode_varicode(sanitize_ascii(raw));
        if (bits.size() >= needed) return bits;
        break;
      }
      case Family::fsk: {
        const std::string text = sanitize_ita2(raw);
        SymbolStream stream;
        if (mode.id == ModeId::navtex) {
          const auto words = encode_ccir476_sitorb(text);
          stream.symbols.assign(words.begin(), words.end());
          stream.alphabet_size = 128;
        } else {
          const auto codes = encode_ita2(text, false);
          stream.symbols.assign(codes.begin(), codes.end());
          stream.alphabet_size = 32;
        }
        if (stream.symbols.size() >= needed) return stream;
        break;
      }
      case Family::mfsk: {
        SymbolStream stream;
        stream.symbols = ascii_to_symbols(sanitize_ascii(raw), mode.bits_per_symbol);
        stream.alphabet_size = 1 << mode.bits_per_symbol;
        if (stream.symbols.size() >= needed) return stream;
        break;
      }
      case Family::multicarrier: {
        Bits bits = ascii_to_bits(sanitize_ascii(raw));
        if (bits.size() >= needed) return bits;
        break;
      }
      default:
        throw std::logic_error("unhandled digital family");
    }
  }
}

}  // namespace hfc::encoding
