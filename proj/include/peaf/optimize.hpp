// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/learnable.hpp"
#include "peaf/manifest.hpp"
#include "peaf/mlp.hpp"
#include "peaf/random.hpp"
#include "peaf/wav.hpp"

namespace peaf {

/// Joint descent recipe: the classifier trains with analytic backprop, the
/// masked frontend parameters with central finite differences on the same
/// batch-averaged cross-entropy. The frontend step is a fixed 1e-2 on
/// normalized parameters (frequencies over Nyquist, sigma over the frame
/// window, PCEN parameters as-is).
struct OptimizeOptions {
    std::vector<int> hidden_sizes = {64};
    double classifier_lr = 0.5;
    double frontend_step = 1e-2;
    double fd_step = 1e-4;  // probe half-width, normalized units
};

struct OptimizeResult {
    FrontendConfig config;
    std::vector<double> loss_history;  // loss before each step, plus the final loss
};

namespace detail {

enum class ParamKind { center, cutoff, sigma, pcen_s, pcen_alpha, pcen_delta, pcen_root };

struct ParamRef {
    ParamKind kind;
    int channel;
};

inline double param_get(const FrontendConfig& cfg, const ParamRef& p) {
    const auto c = static_cast<std::size_t>(p.channel);
    const LearnableSpec& ls = *cfg.learnable;
    switch (p.kind) {
        case ParamKind::center: return cfg.filterbank.center_freqs_hz[c];
        case ParamKind::cutoff: return ls.lowpass_cutoffs_hz[c];
        case ParamKind::sigma: return ls.gaussian_sigma[c];
        case ParamKind::pcen_s: return ls.pcen.smoothing[c];
        case ParamKind::pcen_alpha: return ls.pcen.alpha[c];
        case ParamKind::pcen_delta: return ls.pcen.delta[c];
        case ParamKind::pcen_root: return ls.pcen.root[c];
    }
    throw std::invalid_argument("param_get: bad kind");
}

inline void param_set(FrontendConfig& cfg, const ParamRef& p, double v) {
    const auto c = static_cast<std::size_t>(p.channel);
    LearnableSpec& ls = *cfg.learnable;
    switch (p.kind) {
        case ParamKind::center: cfg.filterbank.center_freqs_hz[c] = v; return;
        case ParamKind::cutoff: ls.lowpass_cutoffs_hz[c] = v; return;
        case ParamKind::sigma: ls.gaussian_sigma[c] = v; return;
        case ParamKind::pcen_s: ls.pcen.smoothing[c] = v; return;
        case ParamKind::pcen_alpha: ls.pcen.alpha[c] = v; return;
        case ParamKind::pcen_delta: ls.pcen.delta[c] = v; return;
        case ParamKind::pcen_root: ls.pcen.root[c] = v; return;
    }
    throw std::invalid_argument("param_set: bad kind");
}

inline double param_scale(const FrontendConfig& cfg, const ParamRef& p) {
    switch (p.kind) {
        case ParamKind::center:
        case ParamKind::cutoff: return 0.5 * cfg.filterbank.sample_rate;
        case ParamKind::sigma: return static_cast<double>(cfg.frame_window);
        default: return 1.0;
    }
}

inline double param_clamp(const FrontendConfig& cfg, const ParamRef& p, double v) {
    const double nyq = 0.5 * cfg.filterbank.sample_rate;
    switch (p.kind) {
        case ParamKind::center:
        case ParamKind::cutoff: return std::clamp(v, 10.0, 0.999 * nyq);
        case ParamKind::sigma: return std::clamp(v, 0.5, 10.0 * cfg.frame_window);
        case ParamKind::pcen_s: return std::clamp(v, 1e-3, 1.0);
        case ParamKind::pcen_alpha: return std::clamp(v, 0.0, 10.0);
        case ParamKind::pcen_delta: return std::clamp(v, 1e-6, 100.0);
        case ParamKind::pcen_root: return std::clamp(v, 1e-3, 1.0);
    }
    throw std::invalid_argument("param_clamp: bad kind");
}

}  // namespace detail

/// Gradient-descend the masked frontend parameters jointly with a small MLP
/// classifier on the manifest's corpus. Requires the differentiable Gaussian
/// pooling surrogate. Deterministic given the seed.
inline OptimizeResult optimize_frontend(const DatasetManifest& manifest,
                                        const FrontendConfig& initial,
                                        const OptimizeOptions& opts, int steps,
                                        std::uint64_t seed) {
    initial.validate();
    manifest.validate();
    if (steps < 0) throw std::invalid_argument("optimize_frontend: steps must be >= 0");
    if (initial.variant != FrontendVariant::learn_peaf)
        throw std::invalid_argument("optimize_frontend: config variant must be learn-peaf");
    if (initial.learnable->pooling != PoolingKind::gaussian)
        throw std::invalid_argument(
            "optimize_frontend: IAF pooling is not differentiable; use gaussian pooling");
    if (!initial.learnable->any_trainable())
        throw std::invalid_argument("optimize_frontend: empty trainable mask");
    if (manifest.entries.empty())
        throw std::invalid_argument("optimize_frontend: empty manifest");

    // Load the corpus once; labels become indices in class_names order.
    std::vector<AudioBuffer> audio;
    std::vector<int> labels;
    for (const auto& e : manifest.entries) {
        audio.push_back(load_wav(manifest.resolve(e)));
        const auto it =
            std::find(manifest.class_names.begin(), manifest.class_names.end(), e.label);
        labels.push_back(static_cast<int>(it - manifest.class_names.begin()));
    }
    const int n_classes = static_cast<int>(manifest.class_names.size());
    if (n_classes < 2) throw std::invalid_argument("optimize_frontend: need >= 2 classes");

    FrontendConfig cfg = initial;
    // materialize explicit centers so they are updatable and serialized back
    cfg.filterbank.center_freqs_hz = cfg.filterbank.centers();

    std::vector<detail::ParamRef> params;
    const LearnableSpec& ls0 = *cfg.learnable;
    for (int c = 0; c < cfg.filterbank.n_channels; ++c) {
        if (ls0.train_center_freqs) params.push_back({detail::ParamKind::center, c});
        if (ls0.train_cutoffs) params.push_back({detail::ParamKind::cutoff, c});
        if (ls0.train_sigma) params.push_back({detail::ParamKind::sigma, c});
        if (ls0.train_pcen) {
            params.push_back({detail::ParamKind::pcen_s, c});
            params.push_back({detail::ParamKind::pcen_alpha, c});
            params.push_back({detail::ParamKind::pcen_delta, c});
            params.push_back({detail::ParamKind::pcen_root, c});
        }
    }

    auto extract_all = [&](const FrontendConfig& c) {
        std::vector<std::vector<double>> xs;
        xs.reserve(audio.size());
        for (const auto& a : audio) xs.push_back(extract_learn_peaf(a, c).feature.values);
        return xs;
    };

    std::vector<std::vector<double>> feats = extract_all(cfg);
    for (const auto& f : feats)
        if (f.size() != feats.front().size())
            throw std::invalid_argument("optimize_frontend: corpus items must share one duration");
    const auto input_dim = static_cast<int>(feats.front().size());

    // Per-dimension standardization (classifier-harness convention), with the
    // statistics frozen from the initial config's features: the loss stays a
    // smooth deterministic function of the frontend parameters.
    const auto dim = static_cast<std::size_t>(input_dim);
    std::vector<double> mu(dim, 0.0), sigma(dim, 0.0);
    for (const auto& f : feats)
        for (std::size_t d = 0; d < dim; ++d) mu[d] += f[d];
    for (auto& v : mu) v /= static_cast<double>(feats.size());
    for (const auto& f : feats)
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = f[d] - mu[d];
            sigma[d] += diff * diff;
        }
    for (auto& v : sigma) {
        v = std::sqrt(v / static_cast<double>(feats.size()));
        if (v < 1e-12) v = 1.0;
    }
    auto standardize = [&](std::vector<std::vector<double>> xs) {
        for (auto& x : xs)
            for (std::size_t d = 0; d < dim; ++d) x[d] = (x[d] - mu[d]) / sigma[d];
        return xs;
    };

    Rng rng(seed);
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    for (int h : opts.hidden_sizes) sizes.push_back(h);
    sizes.push_back(n_classes);
    MlpModel model = MlpModel::init(sizes, rng.next_u64());

    auto loss_of = [&](const FrontendConfig& c) {
        return mlp_batch_loss(model, standardize(extract_all(c)), labels);
    };

    OptimizeResult res;
    MlpGradients grads;
    std::vector<std::vector<double>> feats_std = standardize(std::move(feats));
    for (int step = 0; step < steps; ++step) {
        res.loss_history.push_back(mlp_batch_loss(model, feats_std, labels));

        // classifier step (analytic, full batch)
        mlp_batch_gradients(model, feats_std, labels, grads);
        mlp_apply_step(model, grads, opts.classifier_lr);

        // frontend step (central differences on normalized parameters,
        // simultaneous update against the post-step classifier)
        std::vector<double> gradient(params.size(), 0.0);
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& p = params[k];
            const double scale = detail::param_scale(cfg, p);
            const double v0 = detail::param_get(cfg, p);
            const double v_plus = detail::param_clamp(cfg, p, v0 + opts.fd_step * scale);
            const double v_minus = detail::param_clamp(cfg, p, v0 - opts.fd_step * scale);
            if (v_plus == v_minus) continue;  // pinned against both clamps

            FrontendConfig probe = cfg;
            detail::param_set(probe, p, v_plus);
            const double loss_plus = loss_of(probe);
            detail::param_set(probe, p, v_minus);
            const double loss_minus = loss_of(probe);
            gradient[k] = (loss_plus - loss_minus) / ((v_plus - v_minus) / scale);
        }
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& p = params[k];
            const double scale = detail::param_scale(cfg, p);
            const double updated =
                detail::param_get(cfg, p) - opts.frontend_step * gradient[k] * scale;
            detail::param_set(cfg, p, detail::param_clamp(cfg, p, updated));
        }

        feats_std = standardize(extract_all(cfg));
    }
    res.loss_history.push_back(mlp_batch_loss(model, feats_std, labels));
    res.config = cfg;
    return res;
}

inline void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_loss_csv: cannot open " + path);
    f << "step,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        f << i << "," << detail::format_double(losses[i]) << "\n";
    if (!f) throw std::runtime_error("write_loss_csv: write failed: " + path);
}

}  // namespace peaf
