#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gccphat/params.hpp"

namespace gccphat {

using Vec3 = std::array<double, 3>;
using Rng = std::mt19937_64;

enum class RoomCategory { small, medium, large };

std::string to_string(RoomCategory c);
RoomCategory parse_category(std::string_view name);

struct RoomSpec {
    Vec3 dims{};       ///< Lx, Ly, Lz in meters
    double beta = 0.0;  ///< pressure reflection coefficient of every wall
};

/// Lower and upper corner of the size range of a category.
std::array<Vec3, 2> room_bounds(RoomCategory category);

/// Maps a point of the unit cube onto the category's size range.
Vec3 room_from_unit(RoomCategory category, const Vec3& unit);

/// Each dimension uniform within the category bounds.
Vec3 sample_room(RoomCategory category, Rng& rng);

/// Uniform choice among the three categories.
RoomCategory sample_category(Rng& rng);

inline constexpr double kWallClearance = 0.5;

struct Placement {
    Vec3 mic_a{};
    Vec3 mic_b{};
    Vec3 source{};
    double theta0 = 0.0;
};

/// asin(u . v) with u the unit vector mic_a -> mic_b and v the unit vector
/// from the pair midpoint to the source.
double doa_of(const Vec3& mic_a, const Vec3& mic_b, const Vec3& source);

/// Pair center and source uniform in the room shrunk by the wall clearance,
/// pair axis uniform on the sphere. Sources closer than `min_source_distance`
/// to the pair center are redrawn.
Placement place_pair_and_source(const RoomSpec& room, double spacing, Rng& rng,
                                double min_source_distance = 0.0);

inline constexpr std::size_t kSincTaps = 81;
inline constexpr std::size_t kDefaultRirLength = 4096;

/// Image-method impulse response with fractional-delay (windowed sinc) taps.
std::vector<double> image_rir(const RoomSpec& room, const Vec3& source, const Vec3& mic,
                              double rate, std::size_t length, double speed = 343.0);

/// Speech-shaped noise: flat below 500 Hz, -6 dB/octave above, with a 4 Hz
/// raised-cosine envelope.
std::vector<double> speech_like_source(double duration_s, double rate, Rng& rng);

struct Scenario {
    std::uint64_t id = 0;
    RoomCategory category = RoomCategory::small;
    RoomSpec room;
    Vec3 mic_a{};
    Vec3 mic_b{};
    Vec3 source{};
    double theta0 = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();  // infinity disables noise
    std::uint64_t seed = 0;
};

struct RenderedPair {
    std::vector<double> ch1;  // mic_a
    std::vector<double> ch2;  // mic_b
    Scenario scenario;
};

/// Convolves the source with both RIRs and adds independent white Gaussian
/// noise per channel at the scenario's SNR. Output has `length` samples.
RenderedPair render(const Scenario& scenario, std::span<const double> source_signal,
                    std::size_t length, const GccParams& params,
                    std::size_t rir_length = kDefaultRirLength);

/// Adds independent white Gaussian noise to each channel so that its
/// signal-to-noise power ratio equals `snr_db`. The noise draw depends only on
/// `seed`, so one scenario rendered at several SNRs shares a noise pattern.
void add_noise(RenderedPair& pair, double snr_db, std::uint64_t seed);

/// Independent RNG stream for (seed, index, salt).
Rng derive_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

/// Random category, room and placement drawn from `seed`.
Scenario make_scenario(std::uint64_t id, std::uint64_t seed, double beta, double snr_db,
                       const GccParams& params, double min_source_distance);

/// Default minimum source distance: twenty microphone spacings.
double default_min_source_distance(const GccParams& params);

/// One JSON object per line, stable key order.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(std::string_view line);

/// Linear convolution truncated to `length` samples (FFT based).
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t length);

double mean_power(std::span<const double> x);

}  // namespace gccphat
