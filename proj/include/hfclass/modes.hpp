#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace hfc {

/// The 18 transmission modes. The enumerator value is the dataset label.
enum class ModeId : std::uint8_t {
  morse,
  psk31,
  psk63,
  qpsk31,
  rtty45,
  rtty50,
  rtty100,
  olivia8_250,
  olivia16_500,
  olivia16_1000,
  olivia32_1000,
  dominoex11,
  mt63_1000,
  navtex,
  usb,
  lsb,
  am,
  fax,
};

inline constexpr int kModeCount = 18;

enum class Family : std::uint8_t { ook, psk, qpsk, fsk, mfsk, multicarrier, ssb_usb, ssb_lsb, am, fax };

/// Synthesis constants for one mode. Fields that do not apply to a family are
/// zero.
struct ModeSpec {
  ModeId id;
  std::string_view name;
  Family family;
  double baud;             // symbols per second; 0 for analog modes
  double shift_hz;         // FSK mark/space separation
  int tones;               // MFSK tone count
  double tone_spacing_hz;  // MFSK tone spacing
  int carriers;            // multicarrier subcarrier count
  double bandwidth_hz;     // multicarrier span
  bool ifk;                // incremental frequency keying (DominoEx)
  int bits_per_symbol;     // payload bits carried by one MFSK symbol
};

const ModeSpec& mode_spec(ModeId id);
std::span<const ModeSpec> all_modes();
std::optional<ModeId> mode_from_name(std::string_view name);
std::string_view family_name(Family family);

constexpr int label_of(ModeId id) { return static_cast<int>(id); }
constexpr bool is_analog(Family f) {
  return f == Family::ssb_usb || f == Family::ssb_lsb || f == Family::am || f == Family::fax;
}

}  // namespace hfc
