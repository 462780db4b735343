#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hfclass/modes.hpp"

namespace hfc::encoding {

using Bits = std::vector<std::uint8_t>;

/// Symbols drawn from an alphabet of `alphabet_size` values.
struct SymbolStream {
  std::vector<std::uint16_t> symbols;
  int alphabet_size = 2;
};

struct KeyingSegment {
  bool on;
  double seconds;
};

/// On/off keying timeline. Consecutive segments always alternate level.
struct KeyingEnvelope {
  std::vector<KeyingSegment> segments;

  double total_seconds() const;
  bool empty() const { return segments.empty(); }
};

/// Raised when text contains a character the code cannot represent.
class UnsupportedCharacter : public std::invalid_argument {
 public:
  UnsupportedCharacter(std::string_view code, char c, std::size_t position);

  char character() const { return character_; }
  std::size_t position() const { return position_; }

 private:
  char character_;
  std::size_t position_;
};

// --- Morse -----------------------------------------------------------------

inline constexpr double kMinWpm = 5.0;
inline constexpr double kMaxWpm = 60.0;

/// PARIS timing: dit = 1.2 / wpm seconds. Letters are case-insensitive; runs
/// of spaces collapse to one word gap. No trailing gap is emitted.
KeyingEnvelope encode_morse(std::string_view text, double wpm);

/// Inverse of encode_morse for an envelope with known speed. Durations are
/// classified to the nearest dit multiple.
std::string decode_morse(const KeyingEnvelope& envelope, double wpm);

bool morse_supports(char c);

// --- PSK31 varicode --------------------------------------------------------

/// Each character's code word followed by the "00" separator.
Bits encode_varicode(std::string_view text);
std::string decode_varicode(std::span<const std::uint8_t> bits);

/// The 128 code words, indexed by ASCII value.
const std::vector<std::string>& varicode_words();

// --- ITA2 -------------------------------------------------------------------

namespace ita2 {
inline constexpr std::uint8_t kNull = 0x00;
inline constexpr std::uint8_t kLf = 0x02;
inline constexpr std::uint8_t kSpace = 0x04;
inline constexpr std::uint8_t kCr = 0x08;
inline constexpr std::uint8_t kFigs = 0x1B;
inline constexpr std::uint8_t kLtrs = 0x1F;
}  // namespace ita2

/// 5-bit ITA2 codes with LTRS/FIGS shifts inserted on set changes. The
/// encoder starts in letters state. With `usos` the receiver is assumed to
/// fall back to letters after every space. Lower case is folded to upper.
std::vector<std::uint8_t> encode_ita2(std::string_view text, bool usos = false);
std::string decode_ita2(std::span<const std::uint8_t> codes, bool usos = false);
bool ita2_supports(char c);

// --- CCIR-476 / SITOR-B -----------------------------------------------------

namespace ccir476 {
inline constexpr std::uint8_t kAlpha = 0x0F;  // phasing signal 2, DX idle
inline constexpr std::uint8_t kBeta = 0x33;
inline constexpr std::uint8_t kRep = 0x66;    // phasing signal 1, RX fill
}  // namespace ccir476

/// Maps one ITA2 code to its CCIR-476 word (and back; returns -1 for a word
/// outside the code).
std::uint8_t ccir476_from_ita2(std::uint8_t ita2_code);
int ita2_from_ccir476(std::uint8_t word);

/// CCIR-476 words with SITOR-B time diversity. Character k goes out in DX
/// slot 2k and again in RX slot 2k+5; unused DX slots carry alpha and unused
/// RX slots carry rep. n characters occupy 2n+4 slots.
std::vector<std::uint8_t> encode_ccir476_sitorb(std::string_view text);
std::string decode_ccir476_sitorb(std::span<const std::uint8_t> words);

// --- Payloads ---------------------------------------------------------------

using Payload = std::variant<Bits, SymbolStream, KeyingEnvelope>;

/// Which part of the bundled corpus a payload may be drawn from. Training and
/// validation use disjoint regions.
enum class TextRegion { any, train, validation };

struct PayloadOptions {
  TextRegion region = TextRegion::any;
  double morse_wpm_min = 15.0;
  double morse_wpm_max = 30.0;
};

/// Plain-text payload for a digital mode, encoded with that mode's character
/// code and long enough to fill `seconds` at the mode's signalling rate.
///  - morse: KeyingEnvelope
///  - psk31/psk63/qpsk31: varicode Bits
///  - rtty*: SymbolStream of 5-bit ITA2 codes
///  - navtex: SymbolStream of SITOR-B interleaved CCIR-476 words
///  - olivia*/dominoex11: SymbolStream of MFSK symbols
///  - mt63_1000: Bits
/// Analog modes have no text payload and are rejected.
Payload random_payload(const ModeSpec& mode, double seconds, std::uint64_t seed,
                       const PayloadOptions& options = {});

/// A contiguous piece of the corpus starting at a seeded random offset.
std::string corpus_window(std::size_t length, std::uint64_t seed, TextRegion region);

/// Symbols needed to fill `seconds` of a mode.
std::size_t required_symbols(const ModeSpec& mode, double seconds);

}  // namespace hfc::encoding
