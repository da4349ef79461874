#include "gccphat/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gccphat/error.hpp"

namespace gccphat {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(static_cast<unsigned char>(v));
    b.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

WavAudio read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open WAV file " + path.string());
    const std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
    const std::string name = path.string();
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
        std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
        throw FormatError(name + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const std::uint32_t size = le32(b.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > b.size()) throw FormatError(name + ": chunk overruns file");
        if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError(name + ": fmt chunk too short");
            format = le16(b.data() + body);
            channels = le16(b.data() + body + 2);
            rate = le32(b.data() + body + 4);
            bits = le16(b.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
            if (!have_fmt) throw FormatError(name + ": data chunk before fmt chunk");
            if (format != 1 || bits != 16) {
                throw FormatError(name + ": only 16-bit integer PCM is supported");
            }
            if (channels == 0) throw FormatError(name + ": zero channels");
            const std::size_t frames = size / (2u * channels);
            WavAudio audio;
            audio.rate = rate;
            audio.channels.assign(channels, std::vector<double>(frames));
            const unsigned char* p = b.data() + body;
            for (std::size_t i = 0; i < frames; ++i) {
                for (std::size_t c = 0; c < channels; ++c, p += 2) {
                    const auto s = static_cast<std::int16_t>(le16(p));
                    audio.channels[c][i] = static_cast<double>(s) / 32768.0;
                }
            }
            return audio;
        }
        pos = body + size + (size & 1u);
    }
    throw FormatError(name + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const WavAudio& audio) {
    const auto channels = static_cast<std::uint16_t>(audio.channels.size());
    if (channels == 0) throw InputError("write_wav: no channels");
    const std::size_t frames = audio.frames();
    for (const auto& ch : audio.channels) {
        if (ch.size() != frames) throw DimensionError("write_wav: channels differ in length");
    }
    const auto data_bytes = static_cast<std::uint32_t>(frames * channels * 2);

    std::vector<unsigned char> b;
    b.reserve(44 + data_bytes);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    put32(b, 36 + data_bytes);
    b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(b, 16);
    put16(b, 1);
    put16(b, channels);
    put32(b, audio.rate);
    put32(b, audio.rate * channels * 2);
    put16(b, static_cast<std::uint16_t>(channels * 2));
    put16(b, 16);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    put32(b, data_bytes);
    for (std::size_t i = 0; i < frames; ++i) {
        for (const auto& ch : audio.channels) {
            const double scaled = std::round(ch[i] * 32768.0);
            const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
            put16(b, static_cast<std::uint16_t>(s));
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out) throw Error("failed writing " + path.string());
}

WavAudio read_stereo_wav(const std::filesystem::path& path, std::uint32_t expected_rate) {
    WavAudio audio = read_wav(path);
    if (audio.channels.size() != 2) {
        throw InputError(path.string() + ": expected 2 channels, found " +
                         std::to_string(audio.channels.size()));
    }
    if (audio.rate != expected_rate) {
        throw InputError(path.string() + ": expected sample rate " + std::to_string(expected_rate) +
                         " Hz, found " + std::to_string(audio.rate) + " Hz");
    }
    return audio;
}

}  // namespace gccphat
