#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gccphat {

/// 16-bit PCM audio, de-interleaved and scaled to [-1, 1) by 1/32768.
struct WavAudio {
    std::uint32_t rate = 0;
    std::vector<std::vector<double>> channels;

    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Reads a RIFF/WAVE file with 16-bit integer PCM samples. Throws FormatError
/// on anything else.
WavAudio read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM; samples are clipped to the representable range.
void write_wav(const std::filesystem::path& path, const WavAudio& audio);

/// Reads a two-channel file and checks its rate, throwing InputError with the
/// expected values otherwise.
WavAudio read_stereo_wav(const std::filesystem::path& path, std::uint32_t expected_rate);

}  // namespace gccphat
