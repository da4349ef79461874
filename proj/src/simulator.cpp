#include "gccphat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "gccphat/core.hpp"
#include "gccphat/error.hpp"
#include "gccphat/fft.hpp"

namespace gccphat {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::string to_string(RoomCategory c) {
    switch (c) {
        case RoomCategory::small: return "small";
        case RoomCategory::medium: return "medium";
        case RoomCategory::large: return "large";
    }
    return "?";
}

RoomCategory parse_category(std::string_view name) {
    if (name == "small") return RoomCategory::small;
    if (name == "medium") return RoomCategory::medium;
    if (name == "large") return RoomCategory::large;
    throw ConfigError("unknown room category '" + std::string(name) + "'");
}

std::array<Vec3, 2> room_bounds(RoomCategory category) {
    switch (category) {
        case RoomCategory::small: return {Vec3{5, 5, 3}, Vec3{10, 10, 5}};
        case RoomCategory::medium: return {Vec3{10, 10, 3}, Vec3{20, 20, 5}};
        case RoomCategory::large: return {Vec3{20, 20, 5}, Vec3{20, 20, 10}};
    }
    throw ConfigError("unknown room category");
}

Vec3 room_from_unit(RoomCategory category, const Vec3& unit) {
    const auto [lo, hi] = room_bounds(category);
    Vec3 dims{};
    for (int a = 0; a < 3; ++a) dims[a] = lo[a] + std::clamp(unit[a], 0.0, 1.0) * (hi[a] - lo[a]);
    return dims;
}

Vec3 sample_room(RoomCategory category, Rng& rng) {
    Vec3 unit{};
    for (double& u : unit) u = uniform(rng, 0.0, 1.0);
    return room_from_unit(category, unit);
}

RoomCategory sample_category(Rng& rng) {
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return RoomCategory::small;
        case 1: return RoomCategory::medium;
        default: return RoomCategory::large;
    }
}

double doa_of(const Vec3& mic_a, const Vec3& mic_b, const Vec3& source) {
    const Vec3 axis = sub(mic_b, mic_a);
    const Vec3 mid{(mic_a[0] + mic_b[0]) / 2, (mic_a[1] + mic_b[1]) / 2, (mic_a[2] + mic_b[2]) / 2};
    const Vec3 look = sub(source, mid);
    const double denom = norm(axis) * norm(look);
    if (!(denom > 0.0)) throw ConfigError("doa_of: degenerate geometry");
    const double c = (axis[0] * look[0] + axis[1] * look[1] + axis[2] * look[2]) / denom;
    return std::asin(std::clamp(c, -1.0, 1.0));
}

Placement place_pair_and_source(const RoomSpec& room, double spacing, Rng& rng,
                                double min_source_distance) {
    const double half = spacing / 2.0;
    for (int a = 0; a < 3; ++a) {
        if (!(room.dims[a] > 2.0 * kWallClearance + spacing)) {
            throw ConfigError("room dimension " + std::to_string(room.dims[a]) +
                              " m too small for wall clearance");
        }
    }
    Vec3 center{};
    for (int a = 0; a < 3; ++a) {
        center[a] = uniform(rng, kWallClearance + half, room.dims[a] - kWallClearance - half);
    }
    Vec3 axis{};
    std::normal_distribution<double> gauss;
    double len = 0.0;
    while (!(len > 1e-9)) {
        for (double& v : axis) v = gauss(rng);
        len = norm(axis);
    }
    for (double& v : axis) v /= len;

    Placement p;
    for (int a = 0; a < 3; ++a) {
        p.mic_a[a] = center[a] - half * axis[a];
        p.mic_b[a] = center[a] + half * axis[a];
    }
    constexpr int kMaxDraws = 10000;
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
        for (int a = 0; a < 3; ++a) {
            p.source[a] = uniform(rng, kWallClearance, room.dims[a] - kWallClearance);
        }
        if (norm(sub(p.source, center)) >= std::max(min_source_distance, 1e-6)) {
            p.theta0 = doa_of(p.mic_a, p.mic_b, p.source);
            return p;
        }
    }
    throw ConfigError("no source position at least " + std::to_string(min_source_distance) +
                      " m from the pair fits in the room");
}

std::vector<double> image_rir(const RoomSpec& room, const Vec3& source, const Vec3& mic,
                              double rate, std::size_t length, double speed) {
    if (!(room.beta >= 0.0 && room.beta < 1.0)) throw ConfigError("beta must be in [0, 1)");
    std::vector<double> h(length, 0.0);
    if (length == 0) return h;

    constexpr int kHalf = static_cast<int>(kSincTaps / 2);
    const double window_span = kHalf + 1.0;
    const double max_dist = (static_cast<double>(length) + kHalf) * speed / rate;

    // Per-axis image offsets (relative to the mic) and reflection counts.
    struct AxisImage {
        double offset;
        int reflections;
    };
    std::array<std::vector<AxisImage>, 3> axes;
    for (int a = 0; a < 3; ++a) {
        const double l = room.dims[a];
        const int reach = static_cast<int>(std::ceil(max_dist / (2.0 * l))) + 1;
        for (int m = -reach; m <= reach; ++m) {
            for (int parity = 0; parity <= 1; ++parity) {
                const double pos = (1 - 2 * parity) * source[a] + 2.0 * m * l;
                const double off = pos - mic[a];
                if (std::abs(off) > max_dist) continue;
                axes[a].push_back({off, std::abs(m - parity) + std::abs(m)});
            }
        }
    }

    for (const auto& ix : axes[0]) {
        for (const auto& iy : axes[1]) {
            const double dxy2 = ix.offset * ix.offset + iy.offset * iy.offset;
            if (dxy2 > max_dist * max_dist) continue;
            for (const auto& iz : axes[2]) {
                const double dist = std::sqrt(dxy2 + iz.offset * iz.offset);
                if (dist > max_dist) continue;
                const int order = ix.reflections + iy.reflections + iz.reflections;
                const double gain = std::pow(room.beta, order);
                if (gain == 0.0) continue;
                const double amp = gain / (4.0 * kPi * std::max(dist, 1e-3));
                const double delay = dist * rate / speed;
                const auto center = static_cast<long>(std::llround(delay));
                for (long n = center - kHalf; n <= center + kHalf; ++n) {
                    if (n < 0 || n >= static_cast<long>(length)) continue;
                    const double t = static_cast<double>(n) - delay;
                    const double sinc = std::abs(t) < 1e-12 ? 1.0 : std::sin(kPi * t) / (kPi * t);
                    const double win = 0.5 * (1.0 + std::cos(kPi * t / window_span));
                    h[static_cast<std::size_t>(n)] += amp * sinc * win;
                }
            }
        }
    }
    return h;
}

std::vector<double> speech_like_source(double duration_s, double rate, Rng& rng) {
    if (!(duration_s > 0.0) || !(rate > 0.0)) throw ConfigError("duration and rate must be positive");
    const auto count = static_cast<std::size_t>(std::llround(duration_s * rate));
    if (count == 0) throw ConfigError("duration shorter than one sample");

    std::normal_distribution<double> gauss;
    const double pole = std::exp(-2.0 * kPi * 500.0 / rate);
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);

    std::vector<double> out(count);
    double state = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        state = (1.0 - pole) * gauss(rng) + pole * state;
        const double t = static_cast<double>(i) / rate;
        const double env = 0.5 * (1.0 - std::cos(2.0 * kPi * 4.0 * t + phase));
        out[i] = state * env;
    }
    const double rms = std::sqrt(mean_power(out));
    if (rms > 0.0) {
        for (double& v : out) v *= 0.1 / rms;
    }
    return out;
}

double mean_power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t length) {
    std::vector<double> out(length, 0.0);
    if (a.empty() || b.empty() || length == 0) return out;
    const std::size_t full = a.size() + b.size() - 1;
    std::size_t size = 2;
    while (size < full) size <<= 1;

    const RealFft fft(size);
    AlignedBuffer<double> ta(size), tb(size);
    AlignedBuffer<Complex> fa(fft.bins()), fb(fft.bins());
    std::copy(a.begin(), a.end(), ta.data());
    std::copy(b.begin(), b.end(), tb.data());
    fft.forward(ta.span(), fa.span());
    fft.forward(tb.span(), fb.span());
    for (std::size_t k = 0; k < fft.bins(); ++k) fa.data()[k] *= fb.data()[k];
    fft.inverse(fa.span(), ta.span());

    const double scale = 1.0 / static_cast<double>(size);
    const std::size_t keep = std::min(length, full);
    for (std::size_t i = 0; i < keep; ++i) out[i] = ta.data()[i] * scale;
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

Rng derive_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
    return Rng(derive_seed(seed, index, salt));
}

namespace {
constexpr std::uint64_t kNoiseSalt = 0x4e4f495345ULL;  // "NOISE"
}

void add_noise(RenderedPair& pair, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) return;
    Rng rng = derive_rng(seed, 0, kNoiseSalt);
    std::normal_distribution<double> gauss;
    for (auto* ch : {&pair.ch1, &pair.ch2}) {
        std::vector<double> noise(ch->size());
        for (double& v : noise) v = gauss(rng);
        const double signal_power = mean_power(*ch);
        const double noise_power = mean_power(noise);
        const double target = signal_power / std::pow(10.0, snr_db / 10.0);
        const double scale = noise_power > 0.0 ? std::sqrt(target / noise_power) : 0.0;
        for (std::size_t i = 0; i < ch->size(); ++i) (*ch)[i] += scale * noise[i];
    }
    pair.scenario.snr_db = snr_db;
}

RenderedPair render(const Scenario& scenario, std::span<const double> source_signal,
                    std::size_t length, const GccParams& params, std::size_t rir_length) {
    if (mean_power(source_signal) <= 0.0) throw ConfigError("render: source signal is silent");
    const auto h1 = image_rir(scenario.room, scenario.source, scenario.mic_a, params.rate,
                              rir_length, params.speed);
    const auto h2 = image_rir(scenario.room, scenario.source, scenario.mic_b, params.rate,
                              rir_length, params.speed);

    RenderedPair out;
    out.scenario = scenario;
    out.ch1 = convolve(source_signal, h1, length);
    out.ch2 = convolve(source_signal, h2, length);

    add_noise(out, scenario.snr_db, scenario.seed);
    return out;
}

double default_min_source_distance(const GccParams& params) { return 20.0 * params.dist; }

Scenario make_scenario(std::uint64_t id, std::uint64_t seed, double beta, double snr_db,
                       const GccParams& params, double min_source_distance) {
    Rng rng(seed);
    Scenario s;
    s.id = id;
    s.seed = seed;
    s.category = sample_category(rng);
    s.room.dims = sample_room(s.category, rng);
    s.room.beta = beta;
    s.snr_db = snr_db;
    const Placement p = place_pair_and_source(s.room, params.dist, rng, min_source_distance);
    s.mic_a = p.mic_a;
    s.mic_b = p.mic_b;
    s.source = p.source;
    s.theta0 = p.theta0;
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["category"] = to_string(s.category);
    j["dims"] = s.room.dims;
    j["beta"] = s.room.beta;
    j["mic_a"] = s.mic_a;
    j["mic_b"] = s.mic_b;
    j["source"] = s.source;
    j["theta0"] = s.theta0;
    if (std::isfinite(s.snr_db)) {
        j["snr_db"] = s.snr_db;
    } else {
        j["snr_db"] = nullptr;
    }
    j["seed"] = s.seed;
    return j.dump();
}

Scenario scenario_from_json(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        Scenario s;
        s.id = j.at("id").get<std::uint64_t>();
        s.category = parse_category(j.at("category").get<std::string>());
        s.room.dims = j.at("dims").get<Vec3>();
        s.room.beta = j.at("beta").get<double>();
        s.mic_a = j.at("mic_a").get<Vec3>();
        s.mic_b = j.at("mic_b").get<Vec3>();
        s.source = j.at("source").get<Vec3>();
        s.theta0 = j.at("theta0").get<double>();
        const auto& snr = j.at("snr_db");
        s.snr_db = snr.is_null() ? std::numeric_limits<double>::infinity() : snr.get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad scenario record: ") + e.what());
    }
}

}  // namespace gccphat
