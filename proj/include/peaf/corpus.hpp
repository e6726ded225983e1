// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/audio.hpp"
#include "peaf/manifest.hpp"
#include "peaf/random.hpp"
#include "peaf/wav.hpp"

namespace peaf {

// Desk-scale stand-in for a speech corpus: labeled parametric signal families
// with per-file jitter, generated deterministically from one seed.

enum class SignalFamily { tone, chirp, noise_burst, am_tone };

inline std::string family_name(SignalFamily f) {
    switch (f) {
        case SignalFamily::tone: return "tone";
        case SignalFamily::chirp: return "chirp";
        case SignalFamily::noise_burst: return "noise_burst";
        case SignalFamily::am_tone: return "am_tone";
    }
    throw std::invalid_argument("family_name: bad family");
}

inline SignalFamily family_from_name(const std::string& s) {
    if (s == "tone") return SignalFamily::tone;
    if (s == "chirp") return SignalFamily::chirp;
    if (s == "noise_burst") return SignalFamily::noise_burst;
    if (s == "am_tone") return SignalFamily::am_tone;
    throw std::invalid_argument("family_from_name: unknown family '" + s + "'");
}

/// Uniform jitter range [lo, hi]; collapse lo == hi for a fixed value.
struct JitterRange {
    double lo = 0.0;
    double hi = 0.0;

    JitterRange() = default;
    JitterRange(double l, double h) : lo(l), hi(h) {}
    explicit JitterRange(double v) : lo(v), hi(v) {}

    double draw(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

struct ClassRecipe {
    std::string name;
    SignalFamily family = SignalFamily::tone;
    JitterRange freq_hz{440.0, 440.0};          // tone / am_tone carrier
    JitterRange freq_start_hz{400.0, 400.0};    // chirp
    JitterRange freq_end_hz{800.0, 800.0};      // chirp
    JitterRange amplitude{0.5, 0.9};
    JitterRange mod_freq_hz{4.0, 16.0};         // am_tone
    JitterRange mod_depth{0.3, 0.9};            // am_tone
    JitterRange burst_start_frac{0.1, 0.4};     // noise_burst, fraction of duration
    JitterRange burst_len_frac{0.2, 0.5};       // noise_burst
};

struct CorpusRecipe {
    int sample_rate = 16000;
    double duration_s = 0.5;
    int per_class = 50;
    std::vector<ClassRecipe> classes;

    void validate() const {
        if (sample_rate <= 0) throw std::invalid_argument("corpus: sample_rate must be > 0");
        if (duration_s <= 0.0) throw std::invalid_argument("corpus: duration must be > 0");
        if (per_class < 1) throw std::invalid_argument("corpus: per_class must be >= 1");
        if (classes.size() < 2) throw std::invalid_argument("corpus: need at least 2 classes");
        const double nyq = 0.5 * sample_rate;
        for (const auto& c : classes) {
            if (c.name.empty()) throw std::invalid_argument("corpus: empty class name");
            auto check_range = [&](const JitterRange& r, const char* what, double lo_ok,
                                   double hi_ok) {
                if (!(r.lo <= r.hi) || r.lo < lo_ok || r.hi > hi_ok)
                    throw std::invalid_argument(std::string("corpus: bad ") + what + " range [" +
                                                std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                                                "] for class " + c.name);
            };
            check_range(c.amplitude, "amplitude", 0.0, 1.0);
            switch (c.family) {
                case SignalFamily::tone:
                    check_range(c.freq_hz, "freq", 1e-6, nyq - 1e-9);
                    break;
                case SignalFamily::am_tone:
                    check_range(c.freq_hz, "freq", 1e-6, nyq - 1e-9);
                    check_range(c.mod_freq_hz, "mod_freq", 1e-6, nyq - 1e-9);
                    check_range(c.mod_depth, "mod_depth", 0.0, 1.0);
                    break;
                case SignalFamily::chirp:
                    check_range(c.freq_start_hz, "freq_start", 1e-6, nyq - 1e-9);
                    check_range(c.freq_end_hz, "freq_end", 1e-6, nyq - 1e-9);
                    break;
                case SignalFamily::noise_burst:
                    check_range(c.burst_start_frac, "burst_start", 0.0, 1.0);
                    check_range(c.burst_len_frac, "burst_len", 0.0, 1.0);
                    break;
            }
        }
    }

    /// Two tone classes, 400-600 Hz vs 1800-2200 Hz, 50 files each.
    static CorpusRecipe two_tone_default() {
        CorpusRecipe r;
        ClassRecipe low;
        low.name = "low";
        low.family = SignalFamily::tone;
        low.freq_hz = {400.0, 600.0};
        ClassRecipe high = low;
        high.name = "high";
        high.freq_hz = {1800.0, 2200.0};
        r.classes = {low, high};
        return r;
    }
};

namespace detail {

inline AudioBuffer synth_class_sample(const ClassRecipe& cls, int sample_rate, double duration_s,
                                      Rng& rng) {
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    AudioBuffer buf;
    buf.sample_rate = sample_rate;
    buf.samples.assign(n, 0.0);
    const double amp = cls.amplitude.draw(rng);
    const double two_pi = 2.0 * std::numbers::pi;

    switch (cls.family) {
        case SignalFamily::tone: {
            const double f = cls.freq_hz.draw(rng);
            const double phase = rng.uniform(0.0, two_pi);
            for (std::size_t i = 0; i < n; ++i)
                buf.samples[i] = amp * std::sin(two_pi * f * static_cast<double>(i) / sample_rate +
                                                phase);
            break;
        }
        case SignalFamily::chirp: {
            const double f0 = cls.freq_start_hz.draw(rng);
            const double f1 = cls.freq_end_hz.draw(rng);
            const double phase = rng.uniform(0.0, two_pi);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                buf.samples[i] =
                    amp * std::sin(two_pi * (f0 * t + (f1 - f0) * t * t / (2.0 * duration_s)) +
                                   phase);
            }
            break;
        }
        case SignalFamily::noise_burst: {
            const double start = cls.burst_start_frac.draw(rng) * duration_s;
            const double len = cls.burst_len_frac.draw(rng) * duration_s;
            const auto i0 = static_cast<std::size_t>(start * sample_rate);
            const auto i1 = std::min(n, static_cast<std::size_t>((start + len) * sample_rate));
            for (std::size_t i = i0; i < i1; ++i) buf.samples[i] = rng.uniform(-amp, amp);
            break;
        }
        case SignalFamily::am_tone: {
            const double f = cls.freq_hz.draw(rng);
            const double fm = cls.mod_freq_hz.draw(rng);
            const double depth = cls.mod_depth.draw(rng);
            const double phase = rng.uniform(0.0, two_pi);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                const double env = (1.0 + depth * std::sin(two_pi * fm * t)) / (1.0 + depth);
                buf.samples[i] = amp * env * std::sin(two_pi * f * t + phase);
            }
            break;
        }
    }
    return buf;
}

}  // namespace detail

/// Generate the corpus into out_dir: one WAV per (class, index) plus
/// manifest.csv. Pure function of (recipe, seed): a second run with the same
/// arguments produces bit-identical files.
inline DatasetManifest synth_corpus(const CorpusRecipe& recipe, const std::string& out_dir,
                                    std::uint64_t seed) {
    recipe.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("synth_corpus: cannot create directory " + out_dir + ": " +
                                 ec.message());

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    Rng rng(seed);
    for (const auto& cls : recipe.classes) manifest.class_names.push_back(cls.name);

    for (const auto& cls : recipe.classes) {
        for (int i = 0; i < recipe.per_class; ++i) {
            const AudioBuffer buf =
                detail::synth_class_sample(cls, recipe.sample_rate, recipe.duration_s, rng);
            char name[256];
            std::snprintf(name, sizeof(name), "%s_%03d.wav", cls.name.c_str(), i);
            write_wav((std::filesystem::path(out_dir) / name).string(), buf);
            manifest.entries.push_back({name, cls.name});
        }
    }
    manifest.validate();
    write_manifest((std::filesystem::path(out_dir) / "manifest.csv").string(), manifest);
    return manifest;
}

}  // namespace peaf
