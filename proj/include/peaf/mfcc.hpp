// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "peaf/audio.hpp"
#include "peaf/feature.hpp"
#include "peaf/filterbank.hpp"  // hz_to_mel / mel_to_hz
#include "peaf/frontend.hpp"    // ExtractResult

namespace peaf {

/// Reference digital feature: 20 Mel bands, 10 cepstral coefficients
/// (c0 through c9 kept), 25 ms Hann window with 10 ms hop.
struct MfccConfig {
    int n_mels = 20;
    int n_coeffs = 10;
    int fft_size = 512;  // power of two, >= frame_window
    int frame_window = 400;
    int frame_hop = 160;
    double f_min_hz = 20.0;
    double f_max_hz = 8000.0;
    double log_floor = 1e-6;

    void validate() const {
        if (n_mels < 1 || n_coeffs < 1 || n_coeffs > n_mels)
            throw std::invalid_argument("mfcc: require 1 <= n_coeffs <= n_mels");
        if (frame_hop < 1 || frame_window < frame_hop)
            throw std::invalid_argument("mfcc: require frame_window >= frame_hop >= 1");
        if (fft_size < frame_window)
            throw std::invalid_argument("mfcc: fft_size must be >= frame_window");
        if ((fft_size & (fft_size - 1)) != 0)
            throw std::invalid_argument("mfcc: fft_size must be a power of two");
        if (!(0.0 <= f_min_hz && f_min_hz < f_max_hz))
            throw std::invalid_argument("mfcc: require 0 <= f_min < f_max");
        if (log_floor <= 0.0) throw std::invalid_argument("mfcc: log_floor must be > 0");
    }
};

namespace detail {

/// In-place iterative radix-2 FFT.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    return w;
}

}  // namespace detail

/// Hann-windowed power spectrogram, (fft_size/2 + 1) bins per frame.
inline FeatureMatrix stft_power(const AudioBuffer& audio, const MfccConfig& cfg) {
    cfg.validate();
    audio.validate();
    const auto total = static_cast<std::int64_t>(audio.samples.size());
    if (total < cfg.frame_window)
        throw std::invalid_argument("stft_power: input shorter than one frame window");
    const int frames = num_frames(total, cfg.frame_window, cfg.frame_hop);
    const int bins = cfg.fft_size / 2 + 1;
    const std::vector<double> win = detail::hann_window(cfg.frame_window);

    FeatureMatrix m(bins, frames, cfg.frame_window, cfg.frame_hop, audio.sample_rate,
                    "stft_power");
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
    for (int t = 0; t < frames; ++t) {
        const std::size_t start = static_cast<std::size_t>(t) * cfg.frame_hop;
        for (int i = 0; i < cfg.fft_size; ++i) {
            const double x = (i < cfg.frame_window)
                                 ? audio.samples[start + static_cast<std::size_t>(i)] *
                                       win[static_cast<std::size_t>(i)]
                                 : 0.0;
            buf[static_cast<std::size_t>(i)] = {x, 0.0};
        }
        detail::fft_radix2(buf);
        for (int k = 0; k < bins; ++k) m.at(k, t) = std::norm(buf[static_cast<std::size_t>(k)]);
    }
    return m;
}

/// Triangular Mel filter weights: n_mels rows, one per triangle with unit
/// peak at the Mel-spaced center points, linear in Hz between edge points.
inline std::vector<std::vector<double>> mel_filter_weights(const MfccConfig& cfg, int n_bins,
                                                           int sample_rate) {
    const int n_points = cfg.n_mels + 2;
    std::vector<double> pts(static_cast<std::size_t>(n_points));
    const double m0 = hz_to_mel(cfg.f_min_hz);
    const double m1 = hz_to_mel(cfg.f_max_hz);
    for (int i = 0; i < n_points; ++i)
        pts[static_cast<std::size_t>(i)] = mel_to_hz(m0 + (m1 - m0) * i / (n_points - 1));

    std::vector<std::vector<double>> w(static_cast<std::size_t>(cfg.n_mels),
                                       std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
    const double bin_hz = static_cast<double>(sample_rate) / (2.0 * (n_bins - 1));
    for (int band = 0; band < cfg.n_mels; ++band) {
        const double lo = pts[static_cast<std::size_t>(band)];
        const double mid = pts[static_cast<std::size_t>(band + 1)];
        const double hi = pts[static_cast<std::size_t>(band + 2)];
        for (int k = 0; k < n_bins; ++k) {
            const double f = k * bin_hz;
            double v = 0.0;
            if (f > lo && f < mid)
                v = (f - lo) / (mid - lo);
            else if (f == mid)
                v = 1.0;
            else if (f > mid && f < hi)
                v = (hi - f) / (hi - mid);
            w[static_cast<std::size_t>(band)][static_cast<std::size_t>(k)] = v;
        }
    }
    return w;
}

/// Apply the Mel filterbank to a power spectrogram.
inline FeatureMatrix mel_apply(const FeatureMatrix& spec, const MfccConfig& cfg) {
    cfg.validate();
    if (spec.n_channels != cfg.fft_size / 2 + 1)
        throw std::invalid_argument("mel_apply: expected " +
                                    std::to_string(cfg.fft_size / 2 + 1) + " spectrum bins, got " +
                                    std::to_string(spec.n_channels));
    const auto weights = mel_filter_weights(cfg, spec.n_channels, spec.sample_rate);
    FeatureMatrix m(cfg.n_mels, spec.n_frames, spec.frame_window, spec.frame_hop,
                    spec.sample_rate, "mel");
    for (int band = 0; band < cfg.n_mels; ++band)
        for (int t = 0; t < spec.n_frames; ++t) {
            double acc = 0.0;
            for (int k = 0; k < spec.n_channels; ++k)
                acc += weights[static_cast<std::size_t>(band)][static_cast<std::size_t>(k)] *
                       spec.at(k, t);
            m.at(band, t) = acc;
        }
    return m;
}

/// Orthonormal DCT-II of one length-n vector, first `keep` coefficients.
inline std::vector<double> dct2_orthonormal(const std::vector<double>& x, int keep) {
    const auto n = static_cast<int>(x.size());
    std::vector<double> y(static_cast<std::size_t>(keep), 0.0);
    for (int k = 0; k < keep; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += x[static_cast<std::size_t>(i)] *
                   std::cos(std::numbers::pi * (i + 0.5) * k / n);
        const double scale = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        y[static_cast<std::size_t>(k)] = scale * acc;
    }
    return y;
}

/// Full MFCC pipeline with a per-stage trace:
/// stft_power -> mel -> log(x + floor) -> DCT-II, keeping n_coeffs rows.
inline ExtractResult mfcc(const AudioBuffer& audio, const MfccConfig& cfg) {
    ExtractResult res;
    FeatureMatrix spec = stft_power(audio, cfg);
    FeatureMatrix mel = mel_apply(spec, cfg);

    FeatureMatrix logmel = mel;
    logmel.stage_tag = "log_mel";
    for (auto& v : logmel.values) v = std::log(v + cfg.log_floor);

    FeatureMatrix out(cfg.n_coeffs, logmel.n_frames, logmel.frame_window, logmel.frame_hop,
                      logmel.sample_rate, "mfcc");
    std::vector<double> col(static_cast<std::size_t>(cfg.n_mels));
    for (int t = 0; t < logmel.n_frames; ++t) {
        for (int band = 0; band < cfg.n_mels; ++band)
            col[static_cast<std::size_t>(band)] = logmel.at(band, t);
        const auto coeffs = dct2_orthonormal(col, cfg.n_coeffs);
        for (int k = 0; k < cfg.n_coeffs; ++k) out.at(k, t) = coeffs[static_cast<std::size_t>(k)];
    }

    res.trace.add("stft_power", std::move(spec));
    res.trace.add("mel", std::move(mel));
    res.trace.add("log_mel", std::move(logmel));
    res.trace.add("mfcc", out);
    res.feature = std::move(out);
    return res;
}

}  // namespace peaf
