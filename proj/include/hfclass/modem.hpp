#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hfclass/common.hpp"
#include "hfclass/encoding.hpp"
#include "hfclass/modes.hpp"

namespace hfc {

using BinaryImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Constellation { bpsk, qpsk };
enum class Sideband { upper, lower };
enum class AudioKind { speech, music };

/// One bit of an FSK frame: mark or space held for `length` bit periods
/// (1.5 for the RTTY stop bit).
struct FskBit {
  bool mark;
  double length = 1.0;
};

/// Optional user material for the analog modes. Empty collections fall back
/// to synthetic sources.
struct SourceLibrary {
  std::vector<RVector> audio;       // mono, 6 kHz
  std::vector<BinaryImage> images;  // 1 = white
};

struct ModulateOptions {
  encoding::PayloadOptions payload;
  double am_depth_min = 0.3;
  double am_depth_max = 0.9;
  const SourceLibrary* sources = nullptr;
};

inline constexpr double kMinModulateSeconds = 0.5;

/// Complex baseband waveform of `seconds` length for one mode, centred at
/// 0 Hz and scaled to unit mean power (all-silent Morse stays zero).
IqWaveform modulate(const ModeSpec& mode, double seconds, std::uint64_t seed, const ModulateOptions& options = {});

// --- Family synthesizers. These return unnormalized waveforms. ---

/// Differential PSK with PSK31 cosine shaping. Each symbol is a phase change:
/// k * 180 degrees (BPSK) or k * 90 degrees (QPSK). A change ramps between the
/// two constellation points over one symbol with a raised-cosine weight, so a
/// 180 degree reversal passes through zero; repeated phases keep a constant
/// envelope. Output starts at phase 0 and is `symbols.size() * 6000 / baud`
/// samples long.
IqWaveform psk_mod(std::span<const std::uint8_t> symbols, double baud, Constellation constellation);

/// Phase-change symbols for PSK31/PSK63: varicode 0 reverses, 1 keeps phase.
std::vector<std::uint8_t> psk31_symbols(std::span<const std::uint8_t> varicode_bits);

/// QPSK31: rate-1/2, K=5 convolutional code (generators 0x19, 0x17) over the
/// varicode bits, one dibit phase change per input bit.
std::vector<std::uint8_t> qpsk31_symbols(std::span<const std::uint8_t> varicode_bits);

/// Start bit, five data bits (LSB first) and `stop_bits` stop bits per code.
std::vector<FskBit> frame_async(std::span<const std::uint8_t> codes, int data_bits = 5, double stop_bits = 1.5);
/// Words sent back to back, most significant bit first, no framing.
std::vector<FskBit> frame_sync(std::span<const std::uint8_t> words, int bits_per_word = 7);

/// Continuous-phase binary FSK; mark at +shift/2, space at -shift/2.
IqWaveform fsk_mod(std::span<const FskBit> bits, double baud, double shift_hz);

/// Continuous-phase MFSK with rectangular symbols; tone k sits at
/// (k - (tones - 1) / 2) * spacing. With `ifk` the transmitted tone is
/// (previous + 2 + symbol) mod tones, starting from tone 0.
IqWaveform mfsk_mod(const encoding::SymbolStream& symbols, double baud, int tones, double tone_spacing_hz,
                    bool ifk);

/// Tone index sequence actually transmitted by mfsk_mod.
std::vector<int> mfsk_tones(const encoding::SymbolStream& symbols, int tones, bool ifk);

/// Differential BPSK on `carriers` subcarriers spanning `bandwidth_hz`, bits
/// distributed round-robin across carriers. Initial carrier phases are drawn
/// from `seed`.
IqWaveform multicarrier_mod(std::span<const std::uint8_t> bits, int carriers, double baud_per_carrier,
                            double bandwidth_hz, std::uint64_t seed);

/// Keyed carrier at 0 Hz with raised-cosine edges of `edge_ms` placed inside
/// each ON segment.
IqWaveform ook_mod(const encoding::KeyingEnvelope& envelope, double edge_ms = 5.0);

/// Band-limits audio to 300-2700 Hz and forms the analytic signal; the lower
/// sideband is its complex conjugate.
IqWaveform ssb_mod(const RVector& audio, Sideband sideband);

/// x = 1 + depth * audio. Audio is peak-normalized and band-limited to 2.5 kHz.
IqWaveform am_mod(const RVector& audio, double depth);

/// Line scan at `lpm` lines per minute, black at -400 Hz and white at
/// +400 Hz, continuous phase.
IqWaveform fax_mod(const BinaryImage& image, double lpm = 120.0);

/// Procedural speech-like or music-like audio, band-limited to 2.7 kHz.
RVector synth_audio(AudioKind kind, double seconds, std::uint64_t seed);

/// Procedural black and white chart: text blocks, dithered gradients and line
/// art.
BinaryImage synth_fax_image(Index rows, Index cols, std::uint64_t seed);

/// 16-bit little-endian mono PCM, resampled to 6 kHz when `file_rate_hz`
/// differs. Scaled to [-1, 1).
RVector load_pcm16(const std::filesystem::path& path, double file_rate_hz = kSampleRate);

/// Binary PBM (P4) image; PBM's 1 = black is flipped so 1 = white.
BinaryImage load_pbm(const std::filesystem::path& path);

}  // namespace hfc
