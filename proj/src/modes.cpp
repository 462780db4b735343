#include "hfclass/modes.hpp"

namespace hfc {

namespace {

// DominoEx 11: 11025 Hz / 1024 symbols per second, tones spaced one baud apart.
constexpr double kDominoBaud = 11025.0 / 1024.0;

constexpr std::array<ModeSpec, kModeCount> kModes{{
    {ModeId::morse, "morse", Family::ook, 0.0, 0.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::psk31, "psk31", Family::psk, 31.25, 0.0, 0, 0.0, 0, 0.0, false, 1},
    {ModeId::psk63, "psk63", Family::psk, 62.5, 0.0, 0, 0.0, 0, 0.0, false, 1},
    {ModeId::qpsk31, "qpsk31", Family::qpsk, 31.25, 0.0, 0, 0.0, 0, 0.0, false, 1},
    {ModeId::rtty45, "rtty45_170", Family::fsk, 45.45, 170.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::rtty50, "rtty50_170", Family::fsk, 50.0, 170.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::rtty100, "rtty100_850", Family::fsk, 100.0, 850.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::olivia8_250, "olivia8_250", Family::mfsk, 31.25, 0.0, 8, 31.25, 0, 250.0, false, 3},
    {ModeId::olivia16_500, "olivia16_500", Family::mfsk, 31.25, 0.0, 16, 31.25, 0, 500.0, false, 4},
    {ModeId::olivia16_1000, "olivia16_1000", Family::mfsk, 62.5, 0.0, 16, 62.5, 0, 1000.0, false, 4},
    {ModeId::olivia32_1000, "olivia32_1000", Family::mfsk, 31.25, 0.0, 32, 31.25, 0, 1000.0, false, 5},
    {ModeId::dominoex11, "dominoex11", Family::mfsk, kDominoBaud, 0.0, 18, kDominoBaud, 0, 0.0, true, 4},
    {ModeId::mt63_1000, "mt63_1000", Family::multicarrier, 10.0, 0.0, 0, 0.0, 64, 1000.0, false, 1},
    {ModeId::navtex, "navtex", Family::fsk, 100.0, 170.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::usb, "usb", Family::ssb_usb, 0.0, 0.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::lsb, "lsb", Family::ssb_lsb, 0.0, 0.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::am, "am", Family::am, 0.0, 0.0, 0, 0.0, 0, 0.0, false, 0},
    {ModeId::fax, "fax", Family::fax, 0.0, 0.0, 0, 0.0, 0, 0.0, false, 0},
}};

}  // namespace

const ModeSpec& mode_spec(ModeId id) { return kModes[static_cast<std::size_t>(id)]; }

std::span<const ModeSpec> all_modes() { return kModes; }

std::optional<ModeId> mode_from_name(std::string_view name) {
  for (const auto& m : kModes) {
    if (m.name == name) return m.id;
  }
  return std::nullopt;
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::ook: return "OOK";
    case Family::psk: return "PSK";
    case Family::qpsk: return "QPSK";
    case Family::fsk: return "FSK";
    case Family::mfsk: return "MFSK";
    case Family::multicarrier: return "multicarrier";
    case Family::ssb_usb: return "SSB-USB";
    case Family::ssb_lsb: return "SSB-LSB";
    case Family::am: return "AM";
    case Family::fax: return "FAX";
  }
  return "?";
}

}  // namespace hfc
