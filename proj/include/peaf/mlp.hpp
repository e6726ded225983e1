// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/feature.hpp"
#include "peaf/random.hpp"

namespace peaf {

// ---------------------------------------------------------------------------
// Small MLP: flatten -> rectified hidden layers -> softmax
// ---------------------------------------------------------------------------

/// Weights plus the standardization applied to raw inputs. When feat_mean /
/// feat_std are empty the inputs pass through unscaled.
struct MlpModel {
    std::vector<int> sizes;                     // input, hidden..., n_classes
    std::vector<std::vector<double>> weights;   // per layer, row-major out x in
    std::vector<std::vector<double>> biases;    // per layer
    std::vector<double> feat_mean, feat_std;    // per input dim (optional)

    static MlpModel init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
        if (layer_sizes.size() < 2)
            throw std::invalid_argument("MlpModel: need at least input and output sizes");
        for (int s : layer_sizes)
            if (s < 1) throw std::invalid_argument("MlpModel: layer sizes must be >= 1");
        MlpModel m;
        m.sizes = layer_sizes;
        Rng rng(seed);
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
            const int in = layer_sizes[l], out = layer_sizes[l + 1];
            std::vector<double> w(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
            const double scale = std::sqrt(2.0 / in);
            for (auto& v : w) v = scale * rng.normal();
            m.weights.push_back(std::move(w));
            m.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
        }
        return m;
    }

    int n_classes() const { return sizes.back(); }
    int input_dim() const { return sizes.front(); }

    std::vector<double> standardize(const std::vector<double>& x) const {
        if (feat_mean.empty()) return x;
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - feat_mean[i]) / feat_std[i];
        return z;
    }

    /// Softmax class scores for one raw (unstandardized) input vector.
    std::vector<double> scores(const std::vector<double>& raw) const;

    void validate() const {
        if (sizes.size() < 2 || weights.size() != sizes.size() - 1 ||
            biases.size() != sizes.size() - 1)
            throw std::invalid_argument("MlpModel: inconsistent layer bookkeeping");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto in = static_cast<std::size_t>(sizes[l]);
            const auto out = static_cast<std::size_t>(sizes[l + 1]);
            if (weights[l].size() != in * out || biases[l].size() != out)
                throw std::invalid_argument("MlpModel: weight shape mismatch at layer " +
                                            std::to_string(l));
            for (double v : weights[l])
                if (!std::isfinite(v)) throw std::invalid_argument("MlpModel: non-finite weight");
        }
    }
};

namespace detail {

inline std::vector<double> softmax(std::vector<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : z) v /= sum;
    return z;
}

/// Forward pass on a standardized input; records pre/post activations for
/// backprop when `acts` is non-null.
inline std::vector<double> mlp_forward(const MlpModel& m, const std::vector<double>& x,
                                       std::vector<std::vector<double>>* acts = nullptr) {
    std::vector<double> cur = x;
    if (acts) acts->push_back(cur);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const auto in = static_cast<std::size_t>(m.sizes[l]);
        const auto out = static_cast<std::size_t>(m.sizes[l + 1]);
        std::vector<double> next(out);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = m.biases[l][o];
            const double* row = m.weights[l].data() + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * cur[i];
            next[o] = acc;
        }
        const bool hidden = l + 1 < m.weights.size();
        if (hidden)
            for (auto& v : next) v = std::max(0.0, v);  // rectifier
        cur = std::move(next);
        if (acts) acts->push_back(cur);
    }
    return softmax(cur);
}

}  // namespace detail

inline std::vector<double> MlpModel::scores(const std::vector<double>& raw) const {
    if (raw.size() != static_cast<std::size_t>(input_dim()))
        throw std::invalid_argument("MlpModel::scores: input dim " + std::to_string(raw.size()) +
                                    " != " + std::to_string(input_dim()));
    return detail::mlp_forward(*this, standardize(raw));
}

/// Gradient of the mean cross-entropy over a batch, matching the weight
/// layout of the model.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Mean cross-entropy of already-standardized inputs.
inline double mlp_batch_loss(const MlpModel& m, const std::vector<std::vector<double>>& xs,
                             const std::vector<int>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("mlp_batch_loss: batch shape mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto p = detail::mlp_forward(m, xs[i]);
        loss -= std::log(std::max(p[static_cast<std::size_t>(ys[i])], 1e-300));
    }
    return loss / static_cast<double>(xs.size());
}

/// Analytic backprop of the mean cross-entropy; returns the pre-update loss.
inline double mlp_batch_gradients(const MlpModel& m, const std::vector<std::vector<double>>& xs,
                                  const std::vector<int>& ys, MlpGradients& grads) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("mlp_batch_gradients: batch shape mismatch");
    grads.weights.clear();
    grads.biases.clear();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        grads.weights.emplace_back(m.weights[l].size(), 0.0);
        grads.biases.emplace_back(m.biases[l].size(), 0.0);
    }

    const double inv_n = 1.0 / static_cast<double>(xs.size());
    double loss = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        std::vector<std::vector<double>> acts;  // acts[0]=input, acts[l+1]=post-layer-l
        const auto p = detail::mlp_forward(m, xs[s], &acts);
        loss -= std::log(std::max(p[static_cast<std::size_t>(ys[s])], 1e-300));

        // delta at the softmax input: p - one_hot(y)
        std::vector<double> delta = p;
        delta[static_cast<std::size_t>(ys[s])] -= 1.0;

        for (std::size_t l = m.weights.size(); l-- > 0;) {
            const auto in = static_cast<std::size_t>(m.sizes[l]);
            const auto out = static_cast<std::size_t>(m.sizes[l + 1]);
            const auto& below = acts[l];
            for (std::size_t o = 0; o < out; ++o) {
                grads.biases[l][o] += inv_n * delta[o];
                double* grow = grads.weights[l].data() + o * in;
                for (std::size_t i = 0; i < in; ++i) grow[i] += inv_n * delta[o] * below[i];
            }
            if (l > 0) {
                std::vector<double> prev(in, 0.0);
                for (std::size_t o = 0; o < out; ++o) {
                    const double* row = m.weights[l].data() + o * in;
                    for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
                }
                // rectifier gate from the recorded hidden activation
                for (std::size_t i = 0; i < in; ++i)
                    if (acts[l][i] <= 0.0) prev[i] = 0.0;
                delta = std::move(prev);
            }
        }
    }
    return loss * inv_n;
}

inline void mlp_apply_step(MlpModel& m, const MlpGradients& grads, double lr) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (std::size_t i = 0; i < m.weights[l].size(); ++i)
            m.weights[l][i] -= lr * grads.weights[l][i];
        for (std::size_t i = 0; i < m.biases[l].size(); ++i)
            m.biases[l][i] -= lr * grads.biases[l][i];
    }
}

// ---------------------------------------------------------------------------
// Training and evaluation
// ---------------------------------------------------------------------------

struct MlpConfig {
    std::vector<int> hidden_sizes = {64};
    int epochs = 50;
    double learning_rate = 0.05;
    int batch_size = 16;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::vector<double> loss_per_epoch;
    double final_train_accuracy = 0.0;
    double final_val_accuracy = 0.0;
    std::uint64_t seed = 0;
    int epochs = 0;
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<std::vector<double>> scores;  // per sample, softmax outputs
};

/// Argmax with ties broken toward the lowest class index.
inline int argmax_class(const std::vector<double>& scores) {
    int best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

namespace detail {

inline std::vector<double> flatten_feature(const FeatureMatrix& f) { return f.values; }

inline double accuracy_standardized(const MlpModel& m,
                                    const std::vector<std::vector<double>>& xs,
                                    const std::vector<int>& ys) {
    if (xs.empty()) return 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (argmax_class(mlp_forward(m, xs[i])) == ys[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(xs.size());
}

}  // namespace detail

/// Train on flattened features: seeded stratified train/val split, per-feature
/// standardization from the training split only, mini-batch gradient descent
/// on cross-entropy.
inline std::pair<MlpModel, TrainReport> train_mlp(const std::vector<FeatureMatrix>& features,
                                                  const std::vector<int>& labels,
                                                  const MlpConfig& cfg) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("train_mlp: features/labels size mismatch");
    const int ch = features.front().n_channels, fr = features.front().n_frames;
    for (const auto& f : features)
        if (f.n_channels != ch || f.n_frames != fr)
            throw std::invalid_argument("train_mlp: features must share one shape");

    int n_classes = 0;
    for (int y : labels) {
        if (y < 0) throw std::invalid_argument("train_mlp: negative label");
        n_classes = std::max(n_classes, y + 1);
    }
    std::vector<int> class_counts(static_cast<std::size_t>(n_classes), 0);
    for (int y : labels) ++class_counts[static_cast<std::size_t>(y)];
    if (std::count_if(class_counts.begin(), class_counts.end(), [](int c) { return c > 0; }) < 2)
        throw std::invalid_argument("train_mlp: need at least 2 classes present");

    Rng rng(cfg.seed);

    // stratified split
    std::vector<std::size_t> train_idx, val_idx;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        rng.shuffle(idx);
        const auto n_val = static_cast<std::size_t>(
            std::floor(cfg.val_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? val_idx : train_idx).push_back(idx[i]);
    }
    if (train_idx.empty()) throw std::invalid_argument("train_mlp: empty training split");

    const auto dim = static_cast<std::size_t>(ch) * static_cast<std::size_t>(fr);
    std::vector<double> mean(dim, 0.0), stdev(dim, 0.0);
    for (std::size_t i : train_idx)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += features[i].values[d];
    for (auto& v : mean) v /= static_cast<double>(train_idx.size());
    for (std::size_t i : train_idx)
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = features[i].values[d] - mean[d];
            stdev[d] += diff * diff;
        }
    for (auto& v : stdev) {
        v = std::sqrt(v / static_cast<double>(train_idx.size()));
        if (v < 1e-12) v = 1.0;  // constant dims stay zero after centering
    }

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(dim));
    for (int h : cfg.hidden_sizes) sizes.push_back(h);
    sizes.push_back(n_classes);
    MlpModel model = MlpModel::init(sizes, rng.next_u64());
    model.feat_mean = mean;
    model.feat_std = stdev;

    auto standardized = [&](std::size_t i) {
        std::vector<double> z(dim);
        for (std::size_t d = 0; d < dim; ++d) z[d] = (features[i].values[d] - mean[d]) / stdev[d];
        return z;
    };
    std::vector<std::vector<double>> xs_train, xs_val;
    std::vector<int> ys_train, ys_val;
    for (std::size_t i : train_idx) {
        xs_train.push_back(standardized(i));
        ys_train.push_back(labels[i]);
    }
    for (std::size_t i : val_idx) {
        xs_val.push_back(standardized(i));
        ys_val.push_back(labels[i]);
    }

    TrainReport report;
    report.seed = cfg.seed;
    report.epochs = cfg.epochs;

    if (cfg.epochs == 0) {
        report.loss_per_epoch.push_back(mlp_batch_loss(model, xs_train, ys_train));
    } else {
        std::vector<std::size_t> order(xs_train.size());
        std::iota(order.begin(), order.end(), 0);
        MlpGradients grads;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            rng.shuffle(order);
            double epoch_loss = 0.0;
            int n_batches = 0;
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(cfg.batch_size)) {
                const std::size_t stop =
                    std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
                std::vector<std::vector<double>> bx;
                std::vector<int> by;
                for (std::size_t i = start; i < stop; ++i) {
                    bx.push_back(xs_train[order[i]]);
                    by.push_back(ys_train[order[i]]);
                }
                epoch_loss += mlp_batch_gradients(model, bx, by, grads);
                mlp_apply_step(model, grads, cfg.learning_rate);
                ++n_batches;
            }
            report.loss_per_epoch.push_back(epoch_loss / n_batches);
        }
    }

    report.final_train_accuracy = detail::accuracy_standardized(model, xs_train, ys_train);
    report.final_val_accuracy =
        xs_val.empty() ? 0.0 : detail::accuracy_standardized(model, xs_val, ys_val);
    return {model, report};
}

inline EvalResult evaluate(const MlpModel& model, const std::vector<FeatureMatrix>& features,
                           const std::vector<int>& labels) {
    if (features.size() != labels.size() || features.empty())
        throw std::invalid_argument("evaluate: features/labels size mismatch");
    model.validate();
    EvalResult res;
    int correct = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto s = model.scores(features[i].values);
        if (argmax_class(s) == labels[i]) ++correct;
        res.scores.push_back(s);
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(features.size());
    return res;
}

// ---------------------------------------------------------------------------
// ROC
// ---------------------------------------------------------------------------

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), fpr nondecreasing
    double auc = 0.0;
};

/// Threshold sweep over the distinct positive-class scores; AUC by the
/// trapezoid rule. Equal scores move together (one sweep point per distinct
/// value).
inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("roc_curve: scores/labels size mismatch");
    std::int64_t n_pos = 0, n_neg = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("roc_curve: labels must be 0/1");
        (y == 1 ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_curve: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve roc;
    roc.points.emplace_back(0.0, 0.0);
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos));
    }

    double auc = 0.0;
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const auto& [x0, y0] = roc.points[k - 1];
        const auto& [x1, y1] = roc.points[k];
        auc += (x1 - x0) * 0.5 * (y0 + y1);
    }
    roc.auc = auc;
    return roc;
}

/// Highest-recall threshold whose false-alarm count stays within
/// max_false_alarms_per_hour over the given test-set duration.
struct OperatingPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

inline OperatingPoint pick_operating_point(const std::vector<double>& scores,
                                           const std::vector<int>& labels,
                                           double max_false_alarms_per_hour,
                                           double test_duration_hours) {
    if (max_false_alarms_per_hour < 0.0 || test_duration_hours <= 0.0)
        throw std::invalid_argument("pick_operating_point: bad rate/duration");
    std::int64_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("pick_operating_point: both classes must be present");
    const auto allowed_fp =
        static_cast<std::int64_t>(std::floor(max_false_alarms_per_hour * test_duration_hours));

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    OperatingPoint best;
    best.threshold = scores[order[0]] + 1.0;  // above every score: nothing fires
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        if (fp <= allowed_fp) {
            best.threshold = s;
            best.fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
            best.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        }
    }
    return best;
}

inline void write_roc_csv(const std::string& path, const RocCurve& roc) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_roc_csv: cannot open " + path);
    f << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : roc.points)
        f << detail::format_double(fpr) << "," << detail::format_double(tpr) << "\n";
    if (!f) throw std::runtime_error("write_roc_csv: write failed: " + path);
}

}  // namespace peaf
