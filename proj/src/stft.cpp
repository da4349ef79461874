#include "gccphat/stft.hpp"

#include <cmath>
#include <string>

#include "gccphat/error.hpp"
#include "gccphat/fft.hpp"

namespace gccphat {

Window parse_window(std::string_view name) {
    if (name == "hann") return Window::hann;
    if (name == "rect" || name == "rectangular") return Window::rectangular;
    throw ConfigError("unknown window '" + std::string(name) + "' (expected hann or rect)");
}

std::vector<double> make_window(Window window, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (window == Window::hann) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        }
    }
    return w;
}

std::size_t frame_count(std::size_t length, std::size_t n, std::size_t hop) {
    if (hop == 0) throw ConfigError("hop must be positive");
    if (length < n) return 0;
    return (length - n) / hop + 1;
}

std::vector<FrameSpectrum> stft_frames(std::span<const double> signal, std::size_t n,
                                       std::size_t hop, Window window) {
    if (n < 4 || n % 2 != 0) throw ConfigError("frame size must be even and at least 4");
    if (signal.size() < n) {
        throw SignalError("signal has " + std::to_string(signal.size()) +
                          " samples, fewer than one frame of " + std::to_string(n));
    }
    const std::size_t frames = frame_count(signal.size(), n, hop);
    const auto w = make_window(window, n);
    const RealFft fft(n);

    AlignedBuffer<double> frame(n);
    AlignedBuffer<Complex> spec(n / 2 + 1);
    std::vector<FrameSpectrum> out(frames);
    for (std::size_t l = 0; l < frames; ++l) {
        const double* src = signal.data() + l * hop;
        for (std::size_t t = 0; t < n; ++t) frame.data()[t] = src[t] * w[t];
        fft.forward(frame.span(), spec.span());
        out[l].bins.assign(spec.data(), spec.data() + spec.size());
        out[l].bins.front().imag(0.0);
        out[l].bins.back().imag(0.0);
    }
    return out;
}

CrossSpectrum cross_spectrum(const FrameSpectrum& x1, const FrameSpectrum& x2) {
    if (x1.bins.size() != x2.bins.size()) {
        throw DimensionError("cross_spectrum: spectra have " + std::to_string(x1.bins.size()) +
                             " and " + std::to_string(x2.bins.size()) + " bins");
    }
    CrossSpectrum out;
    out.bins.resize(x1.bins.size());
    for (std::size_t k = 0; k < x1.bins.size(); ++k) {
        const double mag = std::abs(x1.bins[k]) * std::abs(x2.bins[k]);
        if (!(mag >= kPhatFloor) || !std::isfinite(mag)) {
            out.bins[k] = Complex(0.0, 0.0);
            continue;
        }
        out.bins[k] = x1.bins[k] * std::conj(x2.bins[k]) / mag;
    }
    return out;
}

std::vector<CrossSpectrum> pair_cross_spectra(std::span<const double> ch1,
                                              std::span<const double> ch2, std::size_t n,
                                              std::size_t hop, Window window) {
    if (ch1.size() != ch2.size()) {
        throw DimensionError("channels differ in length: " + std::to_string(ch1.size()) +
                             " vs " + std::to_string(ch2.size()));
    }
    const auto s1 = stft_frames(ch1, n, hop, window);
    const auto s2 = stft_frames(ch2, n, hop, window);
    std::vector<CrossSpectrum> out;
    out.reserve(s1.size());
    for (std::size_t l = 0; l < s1.size(); ++l) out.push_back(cross_spectrum(s1[l], s2[l]));
    return out;
}

}  // namespace gccphat
