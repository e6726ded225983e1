// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/audio.hpp"
#include "peaf/feature.hpp"
#include "peaf/filterbank.hpp"

namespace peaf {

// ---------------------------------------------------------------------------
// Activation
// ---------------------------------------------------------------------------

enum class ActivationKind { absolute, clipped_exponential };

/// Pointwise nonlinearity between the filterbank and the spike encoder.
/// absolute:             y = |x|
/// clipped_exponential:  y = min(exp(gain*|x|) - 1, clip)
struct ActivationSpec {
    ActivationKind kind = ActivationKind::absolute;
    double gain = 4.0;   // clipped_exponential only
    double clip = 10.0;  // clipped_exponential only

    void validate() const {
        if (kind == ActivationKind::clipped_exponential) {
            if (gain <= 0.0) throw std::invalid_argument("activation: gain must be > 0");
            if (clip <= 0.0) throw std::invalid_argument("activation: clip must be > 0");
        }
    }

    double apply(double x) const {
        const double a = std::abs(x);
        if (kind == ActivationKind::absolute) return a;
        return std::min(std::exp(gain * a) - 1.0, clip);
    }
};

inline MultiChannelSignal activate(const MultiChannelSignal& sig, const ActivationSpec& spec) {
    spec.validate();
    MultiChannelSignal out = sig;
    for (auto& ch : out.channels)
        for (auto& v : ch) v = spec.apply(v);
    return out;
}

// ---------------------------------------------------------------------------
// Integrate-and-fire encoding
// ---------------------------------------------------------------------------

/// Charge-accumulating spike encoder. Each sample adds integration_gain * x to
/// the accumulator; on crossing threshold a spike is emitted and threshold is
/// subtracted (charge-conserving reset, no refractory period). At most one
/// spike per sample index; keep per-sample increments below threshold for the
/// count ~= integral/threshold identity to hold.
struct IafSpec {
    double threshold = 2.0373;  // see calibrate_iaf
    double integration_gain = 1.0;

    void validate() const {
        if (threshold <= 0.0) throw std::invalid_argument("iaf: threshold must be > 0");
        if (integration_gain <= 0.0)
            throw std::invalid_argument("iaf: integration_gain must be > 0");
    }
};

/// Per-channel ordered spike sample indices.
struct SpikeTrain {
    std::vector<std::vector<std::int64_t>> spikes;  // strictly increasing per channel
    std::int64_t total_samples = 0;
    int sample_rate = 0;

    std::int64_t total_count() const {
        std::int64_t n = 0;
        for (const auto& ch : spikes) n += static_cast<std::int64_t>(ch.size());
        return n;
    }
};

/// Mean activated output for a full-scale sine, used to pick IAF thresholds.
inline double fullscale_activation_mean(const ActivationSpec& spec) {
    if (spec.kind == ActivationKind::absolute) return 2.0 / std::numbers::pi;
    // midpoint rule over half a period of |sin|
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = std::numbers::pi * (i + 0.5) / n;
        acc += spec.apply(std::sin(phi));
    }
    return acc / n;
}

/// Threshold such that a full-scale tone at a channel center yields about
/// `target_spikes_per_frame` spikes per frame (integration_gain fixed at 1).
inline IafSpec calibrate_iaf(const ActivationSpec& activation, int frame_window,
                             double target_spikes_per_frame = 50.0) {
    if (frame_window < 1) throw std::invalid_argument("calibrate_iaf: frame_window must be >= 1");
    if (target_spikes_per_frame <= 0.0)
        throw std::invalid_argument("calibrate_iaf: target must be > 0");
    IafSpec spec;
    spec.integration_gain = 1.0;
    spec.threshold = fullscale_activation_mean(activation) * frame_window / target_spikes_per_frame;
    return spec;
}

inline SpikeTrain iaf_encode(const MultiChannelSignal& sig, const IafSpec& spec) {
    spec.validate();
    sig.validate();
    SpikeTrain train;
    train.total_samples = static_cast<std::int64_t>(sig.length());
    train.sample_rate = sig.sample_rate;
    train.spikes.resize(sig.channels.size());
    for (std::size_t c = 0; c < sig.channels.size(); ++c) {
        double acc = 0.0;
        const auto& ch = sig.channels[c];
        auto& out = train.spikes[c];
        for (std::size_t n = 0; n < ch.size(); ++n) {
            if (ch[n] < 0.0)
                throw std::invalid_argument("iaf_encode: negative input sample " +
                                            std::to_string(ch[n]) + " at index " +
                                            std::to_string(n));
            acc += spec.integration_gain * ch[n];
            if (acc >= spec.threshold) {
                out.push_back(static_cast<std::int64_t>(n));
                acc -= spec.threshold;
            }
        }
    }
    return train;
}

/// values[c][t] = number of spikes of channel c in [t*hop, t*hop + window).
inline FeatureMatrix count_spikes(const SpikeTrain& train, int frame_window, int frame_hop) {
    const int frames = num_frames(train.total_samples, frame_window, frame_hop);
    FeatureMatrix m(static_cast<int>(train.spikes.size()), frames, frame_window, frame_hop,
                    train.sample_rate, "spike_count");
    for (std::size_t c = 0; c < train.spikes.size(); ++c) {
        for (std::int64_t idx : train.spikes[c]) {
            // frames whose window [t*hop, t*hop+window) covers idx
            std::int64_t t_hi = idx / frame_hop;
            std::int64_t t_lo =
                (idx >= frame_window) ? (idx - frame_window) / frame_hop + 1 : 0;
            if (t_hi > frames - 1) t_hi = frames - 1;
            for (std::int64_t t = t_lo; t <= t_hi; ++t)
                if (idx >= t * frame_hop && idx < t * frame_hop + frame_window)
                    m.at(static_cast<int>(c), static_cast<int>(t)) += 1.0;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Learn-PEAF configuration (operations live in learnable.hpp)
// ---------------------------------------------------------------------------

/// Per-channel energy normalization parameters. out = (E/(eps+M)^alpha + delta)^root
/// - delta^root, with M the s-smoothed version of E.
struct PcenParams {
    std::vector<double> smoothing;  // s in (0, 1], per channel
    std::vector<double> alpha;      // >= 0, per channel
    std::vector<double> delta;      // > 0, per channel
    std::vector<double> root;       // r in (0, 1], per channel
    double eps = 1e-6;              // global floor

    static PcenParams defaults(int n_channels) {
        PcenParams p;
        p.smoothing.assign(static_cast<std::size_t>(n_channels), 0.04);
        p.alpha.assign(static_cast<std::size_t>(n_channels), 0.96);
        p.delta.assign(static_cast<std::size_t>(n_channels), 2.0);
        p.root.assign(static_cast<std::size_t>(n_channels), 0.5);
        return p;
    }

    void validate(int n_channels) const {
        const auto n = static_cast<std::size_t>(n_channels);
        if (smoothing.size() != n || alpha.size() != n || delta.size() != n || root.size() != n)
            throw std::invalid_argument("pcen: per-channel parameter count mismatch");
        if (eps <= 0.0) throw std::invalid_argument("pcen: eps must be > 0");
        for (std::size_t c = 0; c < n; ++c) {
            if (!(smoothing[c] > 0.0 && smoothing[c] <= 1.0))
                throw std::invalid_argument("pcen: smoothing must be in (0, 1]");
            if (alpha[c] < 0.0) throw std::invalid_argument("pcen: alpha must be >= 0");
            if (delta[c] <= 0.0) throw std::invalid_argument("pcen: delta must be > 0");
            if (!(root[c] > 0.0 && root[c] <= 1.0))
                throw std::invalid_argument("pcen: root must be in (0, 1]");
        }
    }
};

enum class PoolingKind { iaf, gaussian };

/// Learn-PEAF additions: per-channel first-order lowpass, a pooling stage
/// (IAF or the differentiable Gaussian lowpass), PCEN, and the set of
/// parameters exposed to the optimizer.
struct LearnableSpec {
    std::vector<double> lowpass_cutoffs_hz;  // per channel, in (0, Nyquist)
    PoolingKind pooling = PoolingKind::gaussian;
    std::vector<double> gaussian_sigma;  // samples, per channel, > 0
    PcenParams pcen;
    bool train_center_freqs = true;
    bool train_cutoffs = false;
    bool train_sigma = false;
    bool train_pcen = false;

    static LearnableSpec defaults(int n_channels, int frame_window) {
        LearnableSpec s;
        s.lowpass_cutoffs_hz.assign(static_cast<std::size_t>(n_channels), 500.0);
        s.gaussian_sigma.assign(static_cast<std::size_t>(n_channels), frame_window / 4.0);
        s.pcen = PcenParams::defaults(n_channels);
        return s;
    }

    void validate(int n_channels, int sample_rate) const {
        const auto n = static_cast<std::size_t>(n_channels);
        if (lowpass_cutoffs_hz.size() != n)
            throw std::invalid_argument("learnable: cutoff count != channel count");
        for (double fc : lowpass_cutoffs_hz)
            if (!(fc > 0.0 && fc < 0.5 * sample_rate))
                throw std::invalid_argument("learnable: cutoff " + std::to_string(fc) +
                                            " Hz outside (0, Nyquist)");
        if (gaussian_sigma.size() != n)
            throw std::invalid_argument("learnable: sigma count != channel count");
        for (double s : gaussian_sigma)
            if (s <= 0.0) throw std::invalid_argument("learnable: sigma must be > 0");
        pcen.validate(n_channels);
    }

    bool any_trainable() const {
        return train_center_freqs || train_cutoffs || train_sigma || train_pcen;
    }
};

// ---------------------------------------------------------------------------
// Frontend configuration and extraction
// ---------------------------------------------------------------------------

enum class FrontendVariant { l_peaf, n_peaf, learn_peaf };

inline std::string variant_name(FrontendVariant v) {
    switch (v) {
        case FrontendVariant::l_peaf: return "l-peaf";
        case FrontendVariant::n_peaf: return "n-peaf";
        case FrontendVariant::learn_peaf: return "learn-peaf";
    }
    throw std::invalid_argument("variant_name: bad variant");
}

/// Full parameterization of one PEAF variant.
struct FrontendConfig {
    FrontendVariant variant = FrontendVariant::l_peaf;
    FilterbankConfig filterbank;
    ActivationSpec activation;
    IafSpec iaf;
    int frame_window = 160;  // samples (10 ms at 16 kHz)
    int frame_hop = 160;     // samples, non-overlapping by default
    std::optional<LearnableSpec> learnable;  // present iff variant == learn_peaf

    void validate() const {
        filterbank.validate();
        activation.validate();
        iaf.validate();
        if (frame_hop < 1 || frame_window < frame_hop)
            throw std::invalid_argument("frontend: require frame_window >= frame_hop >= 1");
        switch (variant) {
            case FrontendVariant::l_peaf:
                if (activation.kind != ActivationKind::absolute)
                    throw std::invalid_argument("frontend: l-peaf requires absolute activation");
                break;
            case FrontendVariant::n_peaf:
                if (activation.kind != ActivationKind::clipped_exponential)
                    throw std::invalid_argument(
                        "frontend: n-peaf requires clipped_exponential activation");
                break;
            case FrontendVariant::learn_peaf:
                if (activation.kind != ActivationKind::absolute)
                    throw std::invalid_argument("frontend: learn-peaf requires absolute activation");
                if (!learnable.has_value())
                    throw std::invalid_argument("frontend: learn-peaf requires learnable spec");
                learnable->validate(filterbank.n_channels, filterbank.sample_rate);
                break;
        }
        if (variant != FrontendVariant::learn_peaf && learnable.has_value())
            throw std::invalid_argument("frontend: learnable spec only valid for learn-peaf");
    }
};

/// Defaults for each variant; IAF threshold is calibrated so a full-scale tone
/// at a channel center yields ~50 spikes per 10 ms frame.
inline FrontendConfig default_frontend_config(FrontendVariant variant) {
    FrontendConfig cfg;
    cfg.variant = variant;
    if (variant == FrontendVariant::n_peaf)
        cfg.activation.kind = ActivationKind::clipped_exponential;
    else
        cfg.activation.kind = ActivationKind::absolute;
    cfg.iaf = calibrate_iaf(cfg.activation, cfg.frame_window);
    if (variant == FrontendVariant::learn_peaf)
        cfg.learnable = LearnableSpec::defaults(cfg.filterbank.n_channels, cfg.frame_window);
    return cfg;
}

/// Snapshot a continuous-time stage as per-frame RMS so every trace entry is a
/// FeatureMatrix comparable across stages.
inline FeatureMatrix rms_frames(const MultiChannelSignal& sig, int frame_window, int frame_hop,
                                const std::string& tag) {
    const int frames = num_frames(static_cast<std::int64_t>(sig.length()), frame_window, frame_hop);
    FeatureMatrix m(static_cast<int>(sig.channels.size()), frames, frame_window, frame_hop,
                    sig.sample_rate, tag);
    for (std::size_t c = 0; c < sig.channels.size(); ++c) {
        for (int t = 0; t < frames; ++t) {
            double acc = 0.0;
            const std::size_t start = static_cast<std::size_t>(t) * frame_hop;
            for (int i = 0; i < frame_window; ++i) {
                const double v = sig.channels[c][start + static_cast<std::size_t>(i)];
                acc += v * v;
            }
            m.at(static_cast<int>(c), t) = std::sqrt(acc / frame_window);
        }
    }
    return m;
}

inline FeatureMatrix rms_frames(const AudioBuffer& audio, int frame_window, int frame_hop,
                                const std::string& tag) {
    MultiChannelSignal mono;
    mono.channels.push_back(audio.samples);
    mono.sample_rate = audio.sample_rate;
    return rms_frames(mono, frame_window, frame_hop, tag);
}

struct ExtractResult {
    FeatureMatrix feature;
    StageTrace trace;
};

// Defined in learnable.hpp; include peaf/learnable.hpp (or peaf/peaf.hpp) when
// extracting the learn-peaf variant.
ExtractResult extract_learn_peaf(const AudioBuffer& audio, const FrontendConfig& cfg);

/// Run the configured PEAF pipeline: bandpass -> activation -> IAF -> spike
/// counting for L/N variants; the learnable variant is delegated. The trace
/// records an RMS snapshot of every stage from the input onward.
inline ExtractResult extract_peaf(const AudioBuffer& audio, const FrontendConfig& cfg) {
    cfg.validate();
    audio.validate();
    if (audio.sample_rate != cfg.filterbank.sample_rate)
        throw std::invalid_argument("extract_peaf: audio sample rate " +
                                    std::to_string(audio.sample_rate) + " != config " +
                                    std::to_string(cfg.filterbank.sample_rate));
    if (cfg.variant == FrontendVariant::learn_peaf) return extract_learn_peaf(audio, cfg);

    ExtractResult res;
    res.trace.add("input", rms_frames(audio, cfg.frame_window, cfg.frame_hop, "input"));
    const MultiChannelSignal banded = apply_filterbank(audio, cfg.filterbank);
    res.trace.add("bandpass", rms_frames(banded, cfg.frame_window, cfg.frame_hop, "bandpass"));
    const MultiChannelSignal activated = activate(banded, cfg.activation);
    res.trace.add("activation",
                  rms_frames(activated, cfg.frame_window, cfg.frame_hop, "activation"));
    const SpikeTrain train = iaf_encode(activated, cfg.iaf);
    res.feature = count_spikes(train, cfg.frame_window, cfg.frame_hop);
    res.trace.add("spike_count", res.feature);
    return res;
}

}  // namespace peaf

// extract_peaf dispatches into the learn-peaf pipeline; pull in its
// definition so a lone include of this header still links.
#include "peaf/learnable.hpp"
