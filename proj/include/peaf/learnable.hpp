// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/feature.hpp"
#include "peaf/filterbank.hpp"
#include "peaf/frontend.hpp"

namespace peaf {

/// Per-channel one-pole lowpass y[n] = y[n-1] + k (x[n] - y[n-1]) with
/// k = 1 - exp(-2 pi fc / sr) and y[-1] = 0. DC gain is exactly 1.
inline MultiChannelSignal lowpass_first_order(const MultiChannelSignal& sig,
                                              const std::vector<double>& cutoffs_hz) {
    sig.validate();
    if (cutoffs_hz.size() != sig.channels.size())
        throw std::invalid_argument("lowpass_first_order: cutoff count != channel count");
    MultiChannelSignal out = sig;
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        const double fc = cutoffs_hz[c];
        if (!(fc > 0.0 && fc < 0.5 * sig.sample_rate))
            throw std::invalid_argument("lowpass_first_order: cutoff " + std::to_string(fc) +
                                        " Hz outside (0, Nyquist)");
        const double k = 1.0 - std::exp(-2.0 * std::numbers::pi * fc / sig.sample_rate);
        double y = 0.0;
        for (auto& v : out.channels[c]) {
            y += k * (v - y);
            v = y;
        }
    }
    return out;
}

/// Differentiable pooling that replaces the IAF during training: each frame
/// value is the signal averaged under a Gaussian window (halfwidth 4 sigma)
/// centered on the frame. Weights are renormalized over the in-range support,
/// so a constant input is reproduced exactly, including at the edges.
inline FeatureMatrix gaussian_pool(const MultiChannelSignal& sig,
                                   const std::vector<double>& sigma_samples, int frame_window,
                                   int frame_hop) {
    sig.validate();
    if (sigma_samples.size() != sig.channels.size())
        throw std::invalid_argument("gaussian_pool: sigma count != channel count");
    for (double s : sigma_samples)
        if (s <= 0.0) throw std::invalid_argument("gaussian_pool: sigma must be > 0");

    const auto total = static_cast<std::int64_t>(sig.length());
    const int frames = num_frames(total, frame_window, frame_hop);
    FeatureMatrix m(static_cast<int>(sig.channels.size()), frames, frame_window, frame_hop,
                    sig.sample_rate, "gaussian_pool");
    for (std::size_t c = 0; c < sig.channels.size(); ++c) {
        const double sigma = sigma_samples[c];
        const auto radius = static_cast<std::int64_t>(std::ceil(4.0 * sigma));
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        const auto& x = sig.channels[c];
        for (int t = 0; t < frames; ++t) {
            const std::int64_t center = static_cast<std::int64_t>(t) * frame_hop + frame_window / 2;
            double num = 0.0, den = 0.0;
            const std::int64_t lo = std::max<std::int64_t>(-radius, -center);
            const std::int64_t hi = std::min<std::int64_t>(radius, total - 1 - center);
            for (std::int64_t j = lo; j <= hi; ++j) {
                const double w = std::exp(-static_cast<double>(j) * static_cast<double>(j) * inv2s2);
                num += w * x[static_cast<std::size_t>(center + j)];
                den += w;
            }
            m.at(static_cast<int>(c), t) = num / den;
        }
    }
    return m;
}

/// PCEN: per channel, M[t] = (1-s) M[t-1] + s E[t] with M[0] = E[0], then
/// out = (E/(eps+M)^alpha + delta)^root - delta^root.
inline FeatureMatrix pcen(const FeatureMatrix& feat, const PcenParams& params) {
    feat.validate();
    params.validate(feat.n_channels);
    for (double v : feat.values)
        if (v < 0.0) throw std::invalid_argument("pcen: input values must be >= 0");

    FeatureMatrix out = feat;
    out.stage_tag = "pcen";
    for (int c = 0; c < feat.n_channels; ++c) {
        const double s = params.smoothing[static_cast<std::size_t>(c)];
        const double a = params.alpha[static_cast<std::size_t>(c)];
        const double d = params.delta[static_cast<std::size_t>(c)];
        const double r = params.root[static_cast<std::size_t>(c)];
        const double dr = std::pow(d, r);
        double m = 0.0;
        for (int t = 0; t < feat.n_frames; ++t) {
            const double e = feat.at(c, t);
            m = (t == 0) ? e : (1.0 - s) * m + s * e;
            const double scaled = e / std::pow(params.eps + m, a);
            // r == 1 collapses to the scaled energy itself; computing it that
            // way avoids the (x + delta) - delta cancellation
            out.at(c, t) = (r == 1.0) ? scaled : std::pow(scaled + d, r) - dr;
        }
    }
    return out;
}

/// Analytic partials of every PCEN output cell w.r.t. its channel's
/// (smoothing, alpha, delta, root), including the recurrence's dependence on
/// the smoothing coefficient.
struct PcenGradients {
    FeatureMatrix d_smoothing;
    FeatureMatrix d_alpha;
    FeatureMatrix d_delta;
    FeatureMatrix d_root;
};

inline PcenGradients pcen_gradients(const FeatureMatrix& feat, const PcenParams& params) {
    feat.validate();
    params.validate(feat.n_channels);

    PcenGradients g{feat, feat, feat, feat};
    g.d_smoothing.stage_tag = "pcen_d_smoothing";
    g.d_alpha.stage_tag = "pcen_d_alpha";
    g.d_delta.stage_tag = "pcen_d_delta";
    g.d_root.stage_tag = "pcen_d_root";

    for (int c = 0; c < feat.n_channels; ++c) {
        const double s = params.smoothing[static_cast<std::size_t>(c)];
        const double a = params.alpha[static_cast<std::size_t>(c)];
        const double d = params.delta[static_cast<std::size_t>(c)];
        const double r = params.root[static_cast<std::size_t>(c)];
        double m = 0.0;
        double dm_ds = 0.0;  // dM[t]/ds through the recurrence
        for (int t = 0; t < feat.n_frames; ++t) {
            const double e = feat.at(c, t);
            if (t == 0) {
                m = e;
                dm_ds = 0.0;  // M[0] = E[0] does not depend on s
            } else {
                dm_ds = (1.0 - s) * dm_ds + (e - m);
                m = (1.0 - s) * m + s * e;
            }
            const double base = params.eps + m;
            const double pw = std::pow(base, -a);  // (eps+M)^(-alpha)
            const double u = e * pw + d;
            const double ur1 = std::pow(u, r - 1.0);

            g.d_root.at(c, t) = std::pow(u, r) * std::log(u) - std::pow(d, r) * std::log(d);
            g.d_delta.at(c, t) = r * ur1 - r * std::pow(d, r - 1.0);
            g.d_alpha.at(c, t) = r * ur1 * (-e * pw * std::log(base));
            g.d_smoothing.at(c, t) = r * ur1 * (-a * e * std::pow(base, -a - 1.0) * dm_ds);
        }
    }
    return g;
}

/// Learn-PEAF pipeline: bandpass -> absolute activation -> per-channel
/// first-order lowpass -> pooling (Gaussian, or IAF+counting) -> PCEN.
inline ExtractResult extract_learn_peaf(const AudioBuffer& audio, const FrontendConfig& cfg) {
    cfg.validate();
    audio.validate();
    if (cfg.variant != FrontendVariant::learn_peaf)
        throw std::invalid_argument("extract_learn_peaf: config variant is not learn-peaf");
    if (audio.sample_rate != cfg.filterbank.sample_rate)
        throw std::invalid_argument("extract_learn_peaf: audio sample rate " +
                                    std::to_string(audio.sample_rate) + " != config " +
                                    std::to_string(cfg.filterbank.sample_rate));
    const LearnableSpec& ls = *cfg.learnable;

    ExtractResult res;
    res.trace.add("input", rms_frames(audio, cfg.frame_window, cfg.frame_hop, "input"));
    const MultiChannelSignal banded = apply_filterbank(audio, cfg.filterbank);
    res.trace.add("bandpass", rms_frames(banded, cfg.frame_window, cfg.frame_hop, "bandpass"));
    const MultiChannelSignal activated = activate(banded, cfg.activation);
    res.trace.add("activation",
                  rms_frames(activated, cfg.frame_window, cfg.frame_hop, "activation"));
    const MultiChannelSignal smoothed = lowpass_first_order(activated, ls.lowpass_cutoffs_hz);
    res.trace.add("lowpass", rms_frames(smoothed, cfg.frame_window, cfg.frame_hop, "lowpass"));

    FeatureMatrix pooled;
    if (ls.pooling == PoolingKind::gaussian) {
        pooled = gaussian_pool(smoothed, ls.gaussian_sigma, cfg.frame_window, cfg.frame_hop);
    } else {
        pooled = count_spikes(iaf_encode(smoothed, cfg.iaf), cfg.frame_window, cfg.frame_hop);
    }
    res.trace.add(pooled.stage_tag, pooled);

    res.feature = pcen(pooled, ls.pcen);
    res.trace.add("pcen", res.feature);
    return res;
}

}  // namespace peaf
