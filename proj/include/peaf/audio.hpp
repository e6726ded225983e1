// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace peaf {

/// Mono sampled waveform, normalized to [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 16000;

    void validate() const {
        if (sample_rate <= 0)
            throw std::invalid_argument("AudioBuffer: sample_rate must be positive, got " +
                                        std::to_string(sample_rate));
        if (samples.empty()) throw std::invalid_argument("AudioBuffer: empty sample vector");
        for (double s : samples) {
            if (!std::isfinite(s))
                throw std::invalid_argument("AudioBuffer: non-finite sample");
            if (std::abs(s) > 1.0)
                throw std::invalid_argument("AudioBuffer: sample out of [-1, 1]: " +
                                            std::to_string(s));
        }
    }

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Generate amplitude * sin(2*pi*freq*n/sample_rate + phase) for duration_s seconds.
/// freq must lie strictly below Nyquist; amplitude in (0, 1] keeps the buffer valid.
inline AudioBuffer synth_tone(double freq_hz, double duration_s, double amplitude,
                              int sample_rate, double phase_rad = 0.0) {
    if (sample_rate <= 0) throw std::invalid_argument("synth_tone: sample_rate must be positive");
    if (freq_hz <= 0.0 || freq_hz >= 0.5 * sample_rate)
        throw std::invalid_argument("synth_tone: freq " + std::to_string(freq_hz) +
                                    " Hz not in (0, Nyquist=" +
                                    std::to_string(0.5 * sample_rate) + ")");
    if (amplitude < 0.0 || amplitude > 1.0)
        throw std::invalid_argument("synth_tone: amplitude must be in [0, 1], got " +
                                    std::to_string(amplitude));
    if (duration_s <= 0.0) throw std::invalid_argument("synth_tone: duration must be positive");

    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    AudioBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(n);
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = amplitude * std::sin(w * static_cast<double>(i) + phase_rad);
    return out;
}

}  // namespace peaf
