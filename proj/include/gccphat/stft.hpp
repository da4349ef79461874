#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gccphat/core.hpp"

namespace gccphat {

enum class Window { hann, rectangular };

Window parse_window(std::string_view name);

/// Periodic window of length n.
std::vector<double> make_window(Window window, std::size_t n);

/// One-sided spectrum (N/2+1 bins) of one microphone over one frame.
struct FrameSpectrum {
    std::vector<Complex> bins;
};

/// PHAT-weighted cross-spectrum: unit modulus except at guarded zero bins.
struct CrossSpectrum {
    std::vector<Complex> bins;

    std::size_t size() const { return bins.size(); }
};

/// Number of full frames that fit in `length` samples.
std::size_t frame_count(std::size_t length, std::size_t n, std::size_t hop);

/// Frame l covers samples [l*hop, l*hop + n); each frame is windowed then
/// transformed. Throws SignalError when the signal is shorter than n.
std::vector<FrameSpectrum> stft_frames(std::span<const double> signal, std::size_t n,
                                       std::size_t hop, Window window = Window::hann);

/// Magnitude products below this are treated as silence and produce a zero bin.
inline constexpr double kPhatFloor = 1e-20;

CrossSpectrum cross_spectrum(const FrameSpectrum& x1, const FrameSpectrum& x2);

/// Cross-spectra for every frame of a stereo pair.
std::vector<CrossSpectrum> pair_cross_spectra(std::span<const double> ch1,
                                              std::span<const double> ch2, std::size_t n,
                                              std::size_t hop, Window window = Window::hann);

}  // namespace gccphat
