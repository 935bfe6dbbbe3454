#include "dfield/wav.hpp"

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

#include "dfield/util.hpp"

namespace dfield {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
    if (off + 4 > s.size()) throw std::runtime_error("wav: truncated file");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[off + i]);
    return v;
}
std::uint16_t get_u16(const std::string& s, std::size_t off) {
    if (off + 2 > s.size()) throw std::runtime_error("wav: truncated file");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                      (static_cast<unsigned char>(s[off + 1]) << 8));
}

} // namespace

void write_wav(const std::filesystem::path& path, const Recording& rec) {
    rec.validate();
    const auto channels = static_cast<std::uint16_t>(rec.channel_count());
    const auto frames = static_cast<std::uint32_t>(rec.frames());
    const auto rate = static_cast<std::uint32_t>(rec.sample_rate + 0.5);
    const std::uint16_t bytes_per_sample = 4;
    const std::uint32_t data_bytes = frames * channels * bytes_per_sample;

    std::string s;
    s.reserve(data_bytes + 64);
    s += "RIFF";
    put_u32(s, 36 + data_bytes);
    s += "WAVEfmt ";
    put_u32(s, 16);
    put_u16(s, 3); // IEEE float
    put_u16(s, channels);
    put_u32(s, rate);
    put_u32(s, rate * channels * bytes_per_sample);
    put_u16(s, static_cast<std::uint16_t>(channels * bytes_per_sample));
    put_u16(s, 32);
    s += "data";
    put_u32(s, data_bytes);
    for (std::uint32_t n = 0; n < frames; ++n) {
        for (std::uint16_t c = 0; c < channels; ++c) {
            const float v = static_cast<float>(rec.channels[c][n]);
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(s, bits);
        }
    }
    write_file_atomic(path, s);
    if (!rec.meta.empty()) {
        std::filesystem::path sidecar = path;
        sidecar += ".json";
        write_file_atomic(sidecar, rec.meta);
    }
}

Recording read_wav(const std::filesystem::path& path) {
    const std::string s = read_file(path);
    if (s.size() < 12 || s.compare(0, 4, "RIFF") != 0 || s.compare(8, 4, "WAVE") != 0)
        throw std::runtime_error("wav: not a RIFF/WAVE file: " + path.string());

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= s.size()) {
        const std::string id = s.substr(off, 4);
        const std::uint32_t len = get_u32(s, off + 4);
        const std::size_t body = off + 8;
        if (id == "fmt ") {
            format = get_u16(s, body);
            channels = get_u16(s, body + 2);
            rate = get_u32(s, body + 4);
            bits = get_u16(s, body + 14);
        } else if (id == "data") {
            data_off = body;
            data_len = len;
        }
        off = body + len + (len & 1);
    }
    if (channels == 0 || rate == 0 || data_off == 0)
        throw std::runtime_error("wav: missing fmt/data chunk: " + path.string());
    if (data_off + data_len > s.size()) data_len = s.size() - data_off;

    const bool is_float32 = (format == 3 && bits == 32);
    const bool is_pcm16 = (format == 1 && bits == 16);
    if (!is_float32 && !is_pcm16)
        throw std::runtime_error("wav: unsupported encoding (want float32 or pcm16)");

    const std::size_t bytes_per = bits / 8;
    const std::size_t frames = data_len / (bytes_per * channels);

    Recording rec;
    rec.sample_rate = rate;
    rec.channels.assign(channels, std::vector<double>(frames));
    for (std::size_t n = 0; n < frames; ++n) {
        for (std::uint16_t c = 0; c < channels; ++c) {
            const std::size_t p = data_off + (n * channels + c) * bytes_per;
            if (is_float32) {
                const std::uint32_t u = get_u32(s, p);
                float v;
                std::memcpy(&v, &u, 4);
                rec.channels[c][n] = v;
            } else {
                const auto v = static_cast<std::int16_t>(get_u16(s, p));
                rec.channels[c][n] = v / 32768.0;
            }
        }
    }

    std::filesystem::path sidecar = path;
    sidecar += ".json";
    if (std::filesystem::exists(sidecar)) rec.meta = read_file(sidecar);
    return rec;
}

} // namespace dfield
