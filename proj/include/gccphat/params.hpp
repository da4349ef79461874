#pragma once

#include <cstddef>
#include <string>

namespace gccphat {

/// Scalar configuration shared by every stage of the pipeline.
///
/// Defaults reproduce the reference setup: 181 angles (one degree), 32 ms
/// frames with a 10 ms hop at 16 kHz, 5 cm spacing and c = 343 m/s.
struct GccParams {
    std::size_t q = 181;        ///< number of discrete angles
    std::size_t n = 512;        ///< STFT frame size (samples)
    std::size_t hop = 160;      ///< hop between frames (samples)
    double dist = 0.05;         ///< microphone spacing (m)
    double speed = 343.0;       ///< speed of sound (m/s)
    double rate = 16000.0;      ///< sample rate (samples/s)
    double delta = 1e-5;        ///< low-rank reconstruction tolerance
    std::size_t interp = 1;     ///< zero-padding interpolation factor

    std::size_t bins() const { return n / 2 + 1; }

    /// Largest |TDOA| in samples, reached at +-90 degrees.
    double max_tdoa() const { return rate / speed * dist; }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    /// Short stable string identifying the parameter set (for reports).
    std::string fingerprint() const;
};

bool is_valid_interp(std::size_t factor);

}  // namespace gccphat
