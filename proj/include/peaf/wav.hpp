// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/audio.hpp"

namespace peaf {

// Fixed input contract: RIFF/WAVE, PCM 16-bit, mono, 16 kHz. Anything else is
// rejected with the offending value; there is no silent resampling.
inline constexpr int kRequiredSampleRate = 16000;

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 8) & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 16) & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 24) & 0xff));
}

inline void put_u16(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 8) & 0xff));
}

}  // namespace detail

/// Load a PCM16 mono 16 kHz WAV file. Samples are scaled to [-1, 1] by
/// dividing by 32768.
inline AudioBuffer load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_wav: cannot open file: " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
        std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("load_wav: not a RIFF/WAVE file: " + path);

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= raw.size()) {
        const char* id = reinterpret_cast<const char*>(raw.data() + pos);
        const std::uint32_t len = detail::read_u32(raw.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + len > raw.size())
            throw std::runtime_error("load_wav: truncated chunk in " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) throw std::runtime_error("load_wav: short fmt chunk in " + path);
            format = detail::read_u16(raw.data() + body);
            channels = detail::read_u16(raw.data() + body + 2);
            rate = detail::read_u32(raw.data() + body + 4);
            bits = detail::read_u16(raw.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_off = body;
            data_len = len;
        }
        pos = body + len + (len & 1u);  // chunks are word-aligned
    }

    if (!have_fmt) throw std::runtime_error("load_wav: missing fmt chunk in " + path);
    if (data_off == 0) throw std::runtime_error("load_wav: missing data chunk in " + path);
    if (format != 1)
        throw std::runtime_error("load_wav: codec=" + std::to_string(format) +
                                 ", expected PCM (1): " + path);
    if (channels != 1)
        throw std::runtime_error("load_wav: channels=" + std::to_string(channels) +
                                 ", expected mono: " + path);
    if (bits != 16)
        throw std::runtime_error("load_wav: bits=" + std::to_string(bits) +
                                 ", expected 16: " + path);
    if (rate != kRequiredSampleRate)
        throw std::runtime_error("load_wav: sample_rate=" + std::to_string(rate) + ", expected " +
                                 std::to_string(kRequiredSampleRate) + ": " + path);

    const std::size_t n = data_len / 2;
    if (n == 0) throw std::runtime_error("load_wav: empty data chunk in " + path);
    AudioBuffer out;
    out.sample_rate = static_cast<int>(rate);
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto lo = raw[data_off + 2 * i];
        const auto hi = raw[data_off + 2 * i + 1];
        const auto s = static_cast<std::int16_t>(lo | (hi << 8));
        out.samples[i] = static_cast<double>(s) / 32768.0;
    }
    return out;
}

/// Write a buffer as PCM16 mono WAV. Values are clamped to the int16 range;
/// buffers whose samples are exact multiples of 1/32768 round-trip bit-exactly.
inline void write_wav(const std::string& path, const AudioBuffer& buf) {
    buf.validate();
    const std::size_t n = buf.samples.size();
    std::vector<unsigned char> out;
    out.reserve(44 + 2 * n);
    const auto data_bytes = static_cast<std::uint32_t>(2 * n);

    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    detail::put_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    detail::put_u32(out, 16);
    detail::put_u16(out, 1);  // PCM
    detail::put_u16(out, 1);  // mono
    detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate * 2));  // byte rate
    detail::put_u16(out, 2);   // block align
    detail::put_u16(out, 16);  // bits
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    detail::put_u32(out, data_bytes);

    for (std::size_t i = 0; i < n; ++i) {
        double v = buf.samples[i] * 32768.0;
        long q = std::lround(v);
        if (q > 32767) q = 32767;
        if (q < -32768) q = -32768;
        detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_wav: cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_wav: write failed: " + path);
}

}  // namespace peaf
