// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "peaf/audio.hpp"
#include "peaf/learnable.hpp"
#include "peaf/random.hpp"

using Catch::Approx;

namespace {

peaf::MultiChannelSignal one_channel(std::vector<double> samples, int sr = 16000) {
    peaf::MultiChannelSignal sig;
    sig.sample_rate = sr;
    sig.channels.push_back(std::move(samples));
    sig.center_freqs_hz.push_back(0.0);
    return sig;
}

peaf::FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
    peaf::FeatureMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 160,
                          160, 16000, "test");
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t t = 0; t < rows[c].size(); ++t)
            m.at(static_cast<int>(c), static_cast<int>(t)) = rows[c][t];
    return m;
}

}  // namespace

TEST_CASE("lowpass_first_order") {
    SECTION("DC gain is one") {
        const double c = 0.7;
        const auto out =
            peaf::lowpass_first_order(one_channel(std::vector<double>(4000, c)), {100.0});
        // residual decays as exp(-t/tau); below 1e-6 after 14 time constants
        const auto settle =
            static_cast<std::size_t>(14.0 * 16000 / (2.0 * std::numbers::pi * 100.0));
        for (std::size_t n = settle; n < 4000; ++n)
            REQUIRE(std::abs(out.channels[0][n] - c) < 1e-6 * c);
    }

    SECTION("step response reaches 1 - 1/e after about sr/(2 pi fc) samples") {
        const auto out =
            peaf::lowpass_first_order(one_channel(std::vector<double>(400, 1.0)), {100.0});
        const double target = 1.0 - std::exp(-1.0);
        std::size_t first_cross = 0;
        for (std::size_t n = 0; n < 400; ++n)
            if (out.channels[0][n] >= target) {
                first_cross = n;
                break;
            }
        const double expected = 16000.0 / (2.0 * std::numbers::pi * 100.0);  // 25.46
        CHECK(std::abs(static_cast<double>(first_cross) - expected) <= 1.0);
    }

    SECTION("zero input stays zero") {
        const auto out =
            peaf::lowpass_first_order(one_channel(std::vector<double>(100, 0.0)), {500.0});
        for (double v : out.channels[0]) REQUIRE(v == 0.0);
    }

    SECTION("per-channel cutoffs required and validated") {
        auto sig = one_channel(std::vector<double>(10, 0.0));
        CHECK_THROWS_AS(peaf::lowpass_first_order(sig, {100.0, 200.0}), std::invalid_argument);
        CHECK_THROWS_AS(peaf::lowpass_first_order(sig, {9000.0}), std::invalid_argument);
    }
}

TEST_CASE("gaussian_pool") {
    SECTION("constant input is reproduced in every frame") {
        const double c = 0.42;
        const auto m =
            peaf::gaussian_pool(one_channel(std::vector<double>(2000, c)), {20.0}, 160, 160);
        REQUIRE(m.n_frames == 12);
        for (double v : m.values) REQUIRE(v == Approx(c).margin(1e-6));
        CHECK(m.stage_tag == "gaussian_pool");
    }

    SECTION("impulse peak equals h / (sigma sqrt(2 pi))") {
        // sigma 30: truncation at 4 sigma leaves < 1e-6 absolute error here
        const double sigma = 30.0;
        const double h = 1.0;
        std::vector<double> x(1024, 0.0);
        // frame centers sit at t*hop + window/2; put the impulse on frame 5
        const int window = 64, hop = 64;
        const std::size_t m_pos = 5 * hop + window / 2;
        x[m_pos] = h;
        const auto m = peaf::gaussian_pool(one_channel(std::move(x)), {sigma}, window, hop);
        const double expected = h / (sigma * std::sqrt(2.0 * std::numbers::pi));
        CHECK(m.at(0, 5) == Approx(expected).margin(1e-6));
    }

    SECTION("very large sigma approaches the global mean") {
        peaf::Rng rng(21);
        std::vector<double> x(3200);
        double mean = 0.0;
        for (auto& v : x) {
            v = rng.uniform(0.0, 1.0);
            mean += v;
        }
        mean /= static_cast<double>(x.size());
        const auto m = peaf::gaussian_pool(one_channel(std::move(x)), {50000.0}, 160, 160);
        for (double v : m.values) REQUIRE(v == Approx(mean).margin(1e-3));
    }

    SECTION("mass preservation within 2% for long signals") {
        peaf::Rng rng(22);
        std::vector<double> x(16000);
        double input_sum = 0.0;
        for (auto& v : x) {
            v = rng.uniform(0.0, 1.0);
            input_sum += v;
        }
        const auto m = peaf::gaussian_pool(one_channel(std::move(x)), {8.0}, 160, 160);
        double framed_sum = 0.0;
        for (double v : m.values) framed_sum += v;
        CHECK(framed_sum == Approx(input_sum / 160.0).epsilon(0.02));
    }

    SECTION("nonnegativity preserved") {
        peaf::Rng rng(23);
        std::vector<double> x(2000);
        for (auto& v : x) v = rng.uniform(0.0, 2.0);
        const auto m = peaf::gaussian_pool(one_channel(std::move(x)), {12.0}, 160, 160);
        for (double v : m.values) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("pcen") {
    SECTION("zero input maps to zero") {
        auto feat = matrix_from({{0.0, 0.0, 0.0, 0.0}});
        const auto out = peaf::pcen(feat, peaf::PcenParams::defaults(1));
        for (double v : out.values) REQUIRE(v == 0.0);
        CHECK(out.stage_tag == "pcen");
    }

    SECTION("constant input converges to the closed form") {
        // alpha=1, delta=2, r=0.5, eps << c: out -> sqrt(3) - sqrt(2)
        const double c = 5.0;
        auto feat = matrix_from({std::vector<double>(200, c)});
        peaf::PcenParams p = peaf::PcenParams::defaults(1);
        p.smoothing = {0.3};
        p.alpha = {1.0};
        p.delta = {2.0};
        p.root = {0.5};
        p.eps = 1e-9;
        const auto out = peaf::pcen(feat, p);
        const double expected = std::sqrt(3.0) - std::sqrt(2.0);
        CHECK(expected == Approx(0.3178).margin(0.0001));
        CHECK(out.at(0, 199) == Approx(expected).epsilon(1e-6));
    }

    SECTION("alpha=0, r=1 is exactly the identity") {
        peaf::Rng rng(31);
        std::vector<std::vector<double>> rows(3, std::vector<double>(40));
        for (auto& row : rows)
            for (auto& v : row) v = rng.uniform(0.0, 10.0);
        auto feat = matrix_from(rows);
        peaf::PcenParams p = peaf::PcenParams::defaults(3);
        p.alpha = {0.0, 0.0, 0.0};
        p.root = {1.0, 1.0, 1.0};
        const auto out = peaf::pcen(feat, p);
        for (std::size_t i = 0; i < feat.values.size(); ++i)
            REQUIRE(out.values[i] == feat.values[i]);
    }

    SECTION("negative input rejected") {
        auto feat = matrix_from({{1.0, -0.5}});
        CHECK_THROWS_AS(peaf::pcen(feat, peaf::PcenParams::defaults(1)), std::invalid_argument);
    }
}

TEST_CASE("pcen_gradients") {
    SECTION("delta gradient vanishes at zero input") {
        auto feat = matrix_from({{0.0, 0.0, 0.0}});
        const auto g = peaf::pcen_gradients(feat, peaf::PcenParams::defaults(1));
        for (double v : g.d_delta.values) REQUIRE(v == Approx(0.0).margin(1e-15));
    }

    SECTION("smoothing gradient of the first frame is zero") {
        auto feat = matrix_from({{3.0, 1.0, 2.0}});
        const auto g = peaf::pcen_gradients(feat, peaf::PcenParams::defaults(1));
        CHECK(g.d_smoothing.at(0, 0) == 0.0);
    }

    SECTION("analytic gradients match central finite differences") {
        peaf::Rng rng(33);
        for (int trial = 0; trial < 5; ++trial) {
            const int frames = 30;
            std::vector<std::vector<double>> rows(2, std::vector<double>(frames));
            for (auto& row : rows)
                for (auto& v : row) v = rng.uniform(0.0, 10.0);
            auto feat = matrix_from(rows);

            peaf::PcenParams p = peaf::PcenParams::defaults(2);
            for (int c = 0; c < 2; ++c) {
                p.smoothing[c] = rng.uniform(0.05, 0.9);
                p.alpha[c] = rng.uniform(0.2, 2.0);
                p.delta[c] = rng.uniform(0.5, 4.0);
                p.root[c] = rng.uniform(0.2, 1.0);
            }

            const auto g = peaf::pcen_gradients(feat, p);
            auto fd_check = [&](std::vector<double> peaf::PcenParams::*field,
                                const peaf::FeatureMatrix& analytic) {
                for (int c = 0; c < 2; ++c) {
                    peaf::PcenParams hi = p, lo = p;
                    const double step = 1e-5 * std::abs((p.*field)[c]);
                    (hi.*field)[c] += step;
                    (lo.*field)[c] -= step;
                    const auto out_hi = peaf::pcen(feat, hi);
                    const auto out_lo = peaf::pcen(feat, lo);
                    for (int t = 0; t < frames; ++t) {
                        const double fd = (out_hi.at(c, t) - out_lo.at(c, t)) / (2.0 * step);
                        const double an = analytic.at(c, t);
                        const double denom = std::max({std::abs(an), std::abs(fd), 1e-6});
                        REQUIRE(std::abs(fd - an) / denom < 1e-4);
                    }
                }
            };
            fd_check(&peaf::PcenParams::smoothing, g.d_smoothing);
            fd_check(&peaf::PcenParams::alpha, g.d_alpha);
            fd_check(&peaf::PcenParams::delta, g.d_delta);
            fd_check(&peaf::PcenParams::root, g.d_root);
        }
    }
}

TEST_CASE("extract_learn_peaf") {
    peaf::FrontendConfig cfg = peaf::default_frontend_config(peaf::FrontendVariant::learn_peaf);

    SECTION("silence gives a zero feature and the full stage list") {
        peaf::AudioBuffer silence;
        silence.sample_rate = 16000;
        silence.samples.assign(8000, 0.0);
        const auto [feature, trace] = peaf::extract_learn_peaf(silence, cfg);
        for (double v : feature.values) REQUIRE(v == 0.0);
        REQUIRE(trace.stages.size() == 6);
        CHECK(trace.stages[3].first == "lowpass");
        CHECK(trace.stages[4].first == "gaussian_pool");
        CHECK(trace.stages[5].first == "pcen");
    }

    SECTION("identity-PCEN IAF pooling with near-Nyquist cutoffs reduces to l-peaf") {
        peaf::FrontendConfig lp = peaf::default_frontend_config(peaf::FrontendVariant::l_peaf);
        peaf::FrontendConfig learn = cfg;
        learn.iaf = lp.iaf;
        auto& ls = *learn.learnable;
        ls.pooling = peaf::PoolingKind::iaf;
        const int n = learn.filterbank.n_channels;
        ls.lowpass_cutoffs_hz.assign(n, 7999.0);
        ls.pcen.alpha.assign(n, 0.0);
        ls.pcen.root.assign(n, 1.0);

        const auto tone = peaf::synth_tone(1000.0, 0.5, 0.8, 16000);
        const auto a = peaf::extract_peaf(tone, lp).feature;
        const auto b = peaf::extract_learn_peaf(tone, learn).feature;
        REQUIRE(a.n_channels == b.n_channels);
        REQUIRE(a.n_frames == b.n_frames);
        for (std::size_t i = 0; i < a.values.size(); ++i)
            REQUIRE(std::abs(a.values[i] - b.values[i]) <= 1.0 + 1e-9);
    }

    SECTION("deterministic") {
        const auto tone = peaf::synth_tone(600.0, 0.3, 0.5, 16000);
        const auto a = peaf::extract_learn_peaf(tone, cfg);
        const auto b = peaf::extract_learn_peaf(tone, cfg);
        REQUIRE(a.feature.values == b.feature.values);
    }

    SECTION("wrong variant rejected") {
        peaf::FrontendConfig lp = peaf::default_frontend_config(peaf::FrontendVariant::l_peaf);
        peaf::AudioBuffer buf;
        buf.sample_rate = 16000;
        buf.samples.assign(1000, 0.0);
        CHECK_THROWS_AS(peaf::extract_learn_peaf(buf, lp), std::invalid_argument);
    }
}
