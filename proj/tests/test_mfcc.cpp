// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "peaf/audio.hpp"
#include "peaf/frontend.hpp"
#include "peaf/mfcc.hpp"
#include "peaf/random.hpp"

using Catch::Approx;

namespace {

// ---------------------------------------------------------------------------
// Independent O(N^2) oracle: direct DFT, own mel triangles, direct cosine sum.
// Shares only the framing/windowing conventions with the implementation.
// ---------------------------------------------------------------------------

std::vector<double> oracle_frame_power(const std::vector<double>& windowed, int fft_size) {
    const int bins = fft_size / 2 + 1;
    std::vector<double> power(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < windowed.size(); ++n) {
            const double ang = -2.0 * std::numbers::pi * k * static_cast<double>(n) / fft_size;
            re += windowed[n] * std::cos(ang);
            im += windowed[n] * std::sin(ang);
        }
        power[static_cast<std::size_t>(k)] = re * re + im * im;
    }
    return power;
}

double oracle_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double oracle_mel_inv(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<std::vector<double>> oracle_mel_weights(const peaf::MfccConfig& cfg, int bins,
                                                    int sr) {
    std::vector<double> pts(static_cast<std::size_t>(cfg.n_mels) + 2);
    const double m0 = oracle_mel(cfg.f_min_hz), m1 = oracle_mel(cfg.f_max_hz);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = oracle_mel_inv(m0 + (m1 - m0) * static_cast<double>(i) /
                                         static_cast<double>(pts.size() - 1));
    std::vector<std::vector<double>> w(static_cast<std::size_t>(cfg.n_mels),
                                       std::vector<double>(static_cast<std::size_t>(bins), 0.0));
    for (int b = 0; b < cfg.n_mels; ++b) {
        const double lo = pts[static_cast<std::size_t>(b)];
        const double mid = pts[static_cast<std::size_t>(b) + 1];
        const double hi = pts[static_cast<std::size_t>(b) + 2];
        for (int k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sr / cfg.fft_size;
            if (f > lo && f < mid)
                w[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] = (f - lo) / (mid - lo);
            else if (f == mid)
                w[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] = 1.0;
            else if (f > mid && f < hi)
                w[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] = (hi - f) / (hi - mid);
        }
    }
    return w;
}

/// Full direct-pipeline oracle for one audio buffer.
peaf::FeatureMatrix oracle_mfcc(const peaf::AudioBuffer& audio, const peaf::MfccConfig& cfg) {
    const int frames = peaf::num_frames(static_cast<std::int64_t>(audio.samples.size()),
                                        cfg.frame_window, cfg.frame_hop);
    const int bins = cfg.fft_size / 2 + 1;
    const auto weights = oracle_mel_weights(cfg, bins, audio.sample_rate);

    peaf::FeatureMatrix out(cfg.n_coeffs, frames, cfg.frame_window, cfg.frame_hop,
                            audio.sample_rate, "oracle_mfcc");
    for (int t = 0; t < frames; ++t) {
        std::vector<double> windowed(static_cast<std::size_t>(cfg.frame_window));
        for (int i = 0; i < cfg.frame_window; ++i) {
            const double w =
                0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.frame_window);
            windowed[static_cast<std::size_t>(i)] =
                w * audio.samples[static_cast<std::size_t>(t) * cfg.frame_hop +
                                  static_cast<std::size_t>(i)];
        }
        const auto power = oracle_frame_power(windowed, cfg.fft_size);

        std::vector<double> logmel(static_cast<std::size_t>(cfg.n_mels));
        for (int b = 0; b < cfg.n_mels; ++b) {
            double acc = 0.0;
            for (int k = 0; k < bins; ++k)
                acc += weights[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] *
                       power[static_cast<std::size_t>(k)];
            logmel[static_cast<std::size_t>(b)] = std::log(acc + cfg.log_floor);
        }
        for (int k = 0; k < cfg.n_coeffs; ++k) {
            double acc = 0.0;
            for (int n = 0; n < cfg.n_mels; ++n)
                acc += logmel[static_cast<std::size_t>(n)] *
                       std::cos(std::numbers::pi * (n + 0.5) * k / cfg.n_mels);
            const double scale =
                (k == 0) ? std::sqrt(1.0 / cfg.n_mels) : std::sqrt(2.0 / cfg.n_mels);
            out.at(k, t) = scale * acc;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("stft_power") {
    peaf::MfccConfig cfg;  // 512-point FFT, 400/160 framing

    SECTION("1 kHz tone concentrates at bin 32") {
        const auto tone = peaf::synth_tone(1000.0, 0.3, 0.8, 16000);
        const auto spec = peaf::stft_power(tone, cfg);
        REQUIRE(spec.n_channels == 257);
        for (int t = 0; t < spec.n_frames; ++t) {
            int best = 0;
            for (int k = 1; k < spec.n_channels; ++k)
                if (spec.at(k, t) > spec.at(best, t)) best = k;
            REQUIRE(best == 32);  // round(1000 * 512 / 16000)
        }
    }

    SECTION("all power values nonnegative, DC input concentrates at bin 0") {
        peaf::AudioBuffer dc;
        dc.sample_rate = 16000;
        dc.samples.assign(1600, 1.0);
        const auto spec = peaf::stft_power(dc, cfg);
        for (double v : spec.values) REQUIRE(v >= 0.0);
        for (int t = 0; t < spec.n_frames; ++t) {
            int best = 0;
            for (int k = 1; k < spec.n_channels; ++k)
                if (spec.at(k, t) > spec.at(best, t)) best = k;
            REQUIRE(best == 0);
        }
    }

    SECTION("Parseval: full-spectrum power equals fft_size times windowed energy") {
        peaf::Rng rng(41);
        peaf::AudioBuffer buf;
        buf.sample_rate = 16000;
        buf.samples.resize(800);
        for (auto& v : buf.samples) v = rng.uniform(-0.9, 0.9);
        const auto spec = peaf::stft_power(buf, cfg);

        for (int t = 0; t < spec.n_frames; ++t) {
            // reconstruct the full symmetric spectrum from the half bins
            double spectral = spec.at(0, t) + spec.at(256, t);
            for (int k = 1; k < 256; ++k) spectral += 2.0 * spec.at(k, t);

            double time_energy = 0.0;
            for (int i = 0; i < cfg.frame_window; ++i) {
                const double w =
                    0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.frame_window);
                const double x =
                    w * buf.samples[static_cast<std::size_t>(t) * cfg.frame_hop +
                                    static_cast<std::size_t>(i)];
                time_energy += x * x;
            }
            REQUIRE(spectral == Approx(cfg.fft_size * time_energy).epsilon(1e-6));
        }
    }

    SECTION("input shorter than one window rejected") {
        peaf::AudioBuffer buf;
        buf.sample_rate = 16000;
        buf.samples.assign(100, 0.0);
        CHECK_THROWS_AS(peaf::stft_power(buf, cfg), std::invalid_argument);
    }
}

TEST_CASE("mel_apply") {
    peaf::MfccConfig cfg;

    SECTION("zero spectrogram maps to zero") {
        peaf::FeatureMatrix spec(257, 4, cfg.frame_window, cfg.frame_hop, 16000, "stft_power");
        const auto mel = peaf::mel_apply(spec, cfg);
        REQUIRE(mel.n_channels == 20);
        for (double v : mel.values) REQUIRE(v == 0.0);
    }

    SECTION("unit peak: a bin exactly at a triangle peak lands in one band") {
        // craft a 3-band config whose middle peak falls exactly on bin 64
        // (2000 Hz): solve mel(f_max) = 2 mel(2000) - mel(1000)
        peaf::MfccConfig small = cfg;
        small.n_mels = 3;
        small.n_coeffs = 3;
        small.f_min_hz = 1000.0;
        small.f_max_hz = oracle_mel_inv(2.0 * oracle_mel(2000.0) - oracle_mel(1000.0));

        peaf::FeatureMatrix spec(257, 1, small.frame_window, small.frame_hop, 16000,
                                 "stft_power");
        spec.at(64, 0) = 5.0;
        const auto mel = peaf::mel_apply(spec, small);
        CHECK(mel.at(1, 0) == Approx(5.0).epsilon(1e-9));  // middle band, unit peak
        CHECK(mel.at(0, 0) == Approx(0.0).margin(1e-9));   // adjacent bands zero at the peak
        CHECK(mel.at(2, 0) == Approx(0.0).margin(1e-9));
    }

    SECTION("flat spectrum produces outputs proportional to triangle areas") {
        peaf::FeatureMatrix spec(257, 1, cfg.frame_window, cfg.frame_hop, 16000, "stft_power");
        for (auto& v : spec.values) v = 1.0;
        const auto mel = peaf::mel_apply(spec, cfg);
        const auto weights = oracle_mel_weights(cfg, 257, 16000);
        for (int b = 0; b < 20; ++b) {
            double area = 0.0;
            for (double w : weights[static_cast<std::size_t>(b)]) area += w;
            REQUIRE(mel.at(b, 0) == Approx(area).epsilon(1e-9));
        }
    }

    SECTION("shape mismatch rejected") {
        peaf::FeatureMatrix spec(100, 4, cfg.frame_window, cfg.frame_hop, 16000, "stft_power");
        CHECK_THROWS_AS(peaf::mel_apply(spec, cfg), std::invalid_argument);
    }
}

TEST_CASE("mfcc pipeline") {
    peaf::MfccConfig cfg;

    SECTION("silence: c0 = sqrt(20) log(1e-6), higher coefficients vanish") {
        peaf::AudioBuffer silence;
        silence.sample_rate = 16000;
        silence.samples.assign(3200, 0.0);
        const auto [feature, trace] = peaf::mfcc(silence, cfg);
        REQUIRE(feature.n_channels == 10);
        const double c0 = std::sqrt(20.0) * std::log(1e-6);
        for (int t = 0; t < feature.n_frames; ++t) {
            REQUIRE(feature.at(0, t) == Approx(c0).epsilon(1e-9));
            for (int k = 1; k < 10; ++k) REQUIRE(feature.at(k, t) == Approx(0.0).margin(1e-9));
        }
        // every frame identical
        for (int t = 1; t < feature.n_frames; ++t)
            for (int k = 0; k < 10; ++k) REQUIRE(feature.at(k, t) == feature.at(k, 0));
    }

    SECTION("matches the direct-DFT direct-cosine oracle within 1e-6 relative") {
        peaf::Rng rng(42);
        for (int trial = 0; trial < 4; ++trial) {
            peaf::AudioBuffer buf;
            buf.sample_rate = 16000;
            buf.samples.resize(3200);  // 0.2 s
            for (auto& v : buf.samples) v = rng.uniform(-0.95, 0.95);
            const auto got = peaf::mfcc(buf, cfg).feature;
            const auto want = oracle_mfcc(buf, cfg);
            REQUIRE(got.n_frames == want.n_frames);
            for (std::size_t i = 0; i < got.values.size(); ++i)
                REQUIRE(std::abs(got.values[i] - want.values[i]) <=
                        1e-6 * (1.0 + std::abs(want.values[i])));
        }
    }

    SECTION("stage trace holds all four stages in order") {
        const auto tone = peaf::synth_tone(500.0, 0.2, 0.5, 16000);
        const auto [feature, trace] = peaf::mfcc(tone, cfg);
        REQUIRE(trace.stages.size() == 4);
        CHECK(trace.stages[0].first == "stft_power");
        CHECK(trace.stages[1].first == "mel");
        CHECK(trace.stages[2].first == "log_mel");
        CHECK(trace.stages[3].first == "mfcc");
        CHECK(trace.stages[1].second.n_channels == 20);
    }

    SECTION("invariant under polarity flip") {
        const auto tone = peaf::synth_tone(700.0, 0.2, 0.6, 16000, 0.3);
        peaf::AudioBuffer flipped = tone;
        for (auto& v : flipped.samples) v = -v;
        const auto a = peaf::mfcc(tone, cfg).feature;
        const auto b = peaf::mfcc(flipped, cfg).feature;
        REQUIRE(a.values == b.values);
    }

    SECTION("DCT-II orthonormality: transpose reconstructs within 1e-10") {
        peaf::Rng rng(43);
        std::vector<double> x(20);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        const auto y = peaf::dct2_orthonormal(x, 20);
        for (int n = 0; n < 20; ++n) {
            double rec = 0.0;
            for (int k = 0; k < 20; ++k) {
                const double scale =
                    (k == 0) ? std::sqrt(1.0 / 20.0) : std::sqrt(2.0 / 20.0);
                rec += scale * y[static_cast<std::size_t>(k)] *
                       std::cos(std::numbers::pi * (n + 0.5) * k / 20.0);
            }
            REQUIRE(rec == Approx(x[static_cast<std::size_t>(n)]).margin(1e-10));
        }
    }

    SECTION("frame count matches the analog frontend for shared window/hop") {
        peaf::MfccConfig narrow = cfg;
        narrow.frame_window = 160;
        narrow.frame_hop = 160;
        const auto tone = peaf::synth_tone(500.0, 0.5, 0.5, 16000);
        const auto digital = peaf::mfcc(tone, narrow).feature;
        const auto analog =
            peaf::extract_peaf(tone, peaf::default_frontend_config(peaf::FrontendVariant::l_peaf))
                .feature;
        CHECK(digital.n_frames == analog.n_frames);
    }

    SECTION("config validation") {
        peaf::MfccConfig bad = cfg;
        bad.n_coeffs = 30;  // > n_mels
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = cfg;
        bad.fft_size = 300;  // not a power of two
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = cfg;
        bad.fft_size = 256;  // < window
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}
