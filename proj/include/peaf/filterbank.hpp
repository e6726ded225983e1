// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/audio.hpp"

namespace peaf {

/// Mel scale used for center-frequency placement.
inline double hz_to_mel(double f_hz) { return 2595.0 * std::log10(1.0 + f_hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Bank of 2nd-order bandpass channels modeling the analog chip's filters.
/// The paper leaves channel count, Q and range open; these defaults are the
/// configurable engineering choice (16 channels, Mel-spaced 100-7800 Hz, Q=4).
struct FilterbankConfig {
    int n_channels = 16;
    double f_min_hz = 100.0;
    double f_max_hz = 7800.0;
    double q_factor = 4.0;
    int sample_rate = 16000;
    // Explicit per-channel centers; empty means Mel-spaced between f_min and
    // f_max. The optimizer writes trained centers back here.
    std::vector<double> center_freqs_hz;

    void validate() const {
        if (n_channels < 1) throw std::invalid_argument("filterbank: n_channels must be >= 1");
        if (q_factor <= 0.0) throw std::invalid_argument("filterbank: q_factor must be > 0");
        if (sample_rate <= 0) throw std::invalid_argument("filterbank: sample_rate must be > 0");
        if (!(0.0 < f_min_hz && f_min_hz < f_max_hz && f_max_hz < 0.5 * sample_rate))
            throw std::invalid_argument("filterbank: require 0 < f_min < f_max < Nyquist, got [" +
                                        std::to_string(f_min_hz) + ", " + std::to_string(f_max_hz) +
                                        "] at sr=" + std::to_string(sample_rate));
        if (!center_freqs_hz.empty()) {
            if (center_freqs_hz.size() != static_cast<std::size_t>(n_channels))
                throw std::invalid_argument("filterbank: center count != n_channels");
            for (double fc : center_freqs_hz)
                if (!(fc > 0.0 && fc < 0.5 * sample_rate))
                    throw std::invalid_argument("filterbank: center " + std::to_string(fc) +
                                                " Hz outside (0, Nyquist)");
        }
    }

    std::vector<double> centers() const;
};

/// Normalized biquad (a0 == 1). Poles must stay strictly inside the unit circle.
struct BiquadCoeffs {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    bool stable() const {
        // roots of z^2 + a1 z + a2: |a2| < 1 and |a1| < 1 + a2 (Jury criterion)
        return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
    }
};

/// Per-channel bandpassed signal; channels share length and sample rate.
struct MultiChannelSignal {
    std::vector<std::vector<double>> channels;
    std::vector<double> center_freqs_hz;
    int sample_rate = 0;

    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }

    void validate() const {
        if (channels.empty()) throw std::invalid_argument("MultiChannelSignal: no channels");
        const std::size_t n = channels.front().size();
        for (const auto& ch : channels) {
            if (ch.size() != n)
                throw std::invalid_argument("MultiChannelSignal: channel length mismatch");
            for (double v : ch)
                if (!std::isfinite(v))
                    throw std::invalid_argument("MultiChannelSignal: non-finite sample");
        }
    }
};

/// n center frequencies linearly spaced on the Mel scale, endpoints inclusive.
inline std::vector<double> mel_center_frequencies(int n, double f_min_hz, double f_max_hz) {
    if (n < 1) throw std::invalid_argument("mel_center_frequencies: n must be >= 1");
    if (!(0.0 < f_min_hz && f_min_hz <= f_max_hz))
        throw std::invalid_argument("mel_center_frequencies: require 0 < f_min <= f_max");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = f_min_hz;
        return out;
    }
    const double m0 = hz_to_mel(f_min_hz);
    const double m1 = hz_to_mel(f_max_hz);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = mel_to_hz(m0 + (m1 - m0) * i / (n - 1));
    out.front() = f_min_hz;  // pin endpoints against round-trip rounding
    out.back() = f_max_hz;
    return out;
}

inline std::vector<double> FilterbankConfig::centers() const {
    if (!center_freqs_hz.empty()) return center_freqs_hz;
    return mel_center_frequencies(n_channels, f_min_hz, f_max_hz);
}

/// Constant-peak-gain bandpass biquad: bilinear transform of
/// H(s) = (s/(Q w0)) / (s^2/w0^2 + s/(Q w0) + 1) with frequency pre-warping
/// at fc, so the discrete magnitude peaks at exactly fc with gain 1.
inline BiquadCoeffs design_bandpass(double fc_hz, double q, int sample_rate) {
    if (sample_rate <= 0) throw std::invalid_argument("design_bandpass: sample_rate must be > 0");
    if (q <= 0.0) throw std::invalid_argument("design_bandpass: q must be > 0");
    if (fc_hz <= 0.0 || fc_hz >= 0.5 * sample_rate)
        throw std::invalid_argument("design_bandpass: fc " + std::to_string(fc_hz) +
                                    " Hz not in (0, Nyquist=" +
                                    std::to_string(0.5 * sample_rate) + ")");
    const double w0 = 2.0 * std::numbers::pi * fc_hz / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    BiquadCoeffs c;
    c.b0 = alpha / a0;
    c.b1 = 0.0;
    c.b2 = -alpha / a0;
    c.a1 = -2.0 * std::cos(w0) / a0;
    c.a2 = (1.0 - alpha) / a0;
    return c;
}

/// Magnitude response of the discrete filter at f (evaluation on the unit circle).
inline double biquad_gain_at(const BiquadCoeffs& c, double f_hz, int sample_rate) {
    const double w = 2.0 * std::numbers::pi * f_hz / sample_rate;
    const double cw = std::cos(w), sw = std::sin(w);
    const double c2w = std::cos(2.0 * w), s2w = std::sin(2.0 * w);
    const double nr = c.b0 + c.b1 * cw + c.b2 * c2w;
    const double ni = -c.b1 * sw - c.b2 * s2w;
    const double dr = 1.0 + c.a1 * cw + c.a2 * c2w;
    const double di = -c.a1 * sw - c.a2 * s2w;
    return std::sqrt((nr * nr + ni * ni) / (dr * dr + di * di));
}

/// Magnitude of the 2nd-order analog bandpass prototype at f.
inline double analog_bandpass_gain(double f_hz, double fc_hz, double q) {
    const double d = q * (f_hz / fc_hz - fc_hz / f_hz);
    return 1.0 / std::sqrt(1.0 + d * d);
}

/// One biquad with direct-form II transposed state. State is local to the
/// instance; do not share one instance across concurrent streams.
class BiquadFilter {
public:
    explicit BiquadFilter(const BiquadCoeffs& c) : c_(c) {}

    double process(double x) {
        const double y = c_.b0 * x + s1_;
        s1_ = c_.b1 * x - c_.a1 * y + s2_;
        s2_ = c_.b2 * x - c_.a2 * y;
        return y;
    }

    void process(const std::vector<double>& in, std::vector<double>& out) {
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = process(in[i]);
    }

    void reset() { s1_ = s2_ = 0.0; }

private:
    BiquadCoeffs c_;
    double s1_ = 0.0, s2_ = 0.0;
};

/// Run the audio through every channel filter from zero initial state.
/// Output length equals input length for each channel.
inline MultiChannelSignal apply_filterbank(const AudioBuffer& audio, const FilterbankConfig& cfg) {
    cfg.validate();
    if (audio.sample_rate != cfg.sample_rate)
        throw std::invalid_argument("apply_filterbank: audio sample rate " +
                                    std::to_string(audio.sample_rate) + " != config " +
                                    std::to_string(cfg.sample_rate));

    MultiChannelSignal out;
    out.sample_rate = cfg.sample_rate;
    out.center_freqs_hz = cfg.centers();
    out.channels.resize(static_cast<std::size_t>(cfg.n_channels));
    for (int i = 0; i < cfg.n_channels; ++i) {
        BiquadFilter filt(design_bandpass(out.center_freqs_hz[static_cast<std::size_t>(i)],
                                          cfg.q_factor, cfg.sample_rate));
        filt.process(audio.samples, out.channels[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace peaf
