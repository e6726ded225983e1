// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "peaf/feature.hpp"  // detail::format_double

namespace peaf {

/// Energy efficiency of the reference neural-network processor, OPS/W.
inline constexpr double kEnergyEfficiencyOpsPerWatt = 36.5e12;

enum class PowerTask { kws, wwd };

/// Inference frame rate per task: 30 fps for keyword spotting, 10 fps for
/// wake-word detection.
inline double task_frame_rate(PowerTask task) {
    return task == PowerTask::kws ? 30.0 : 10.0;
}

inline std::string task_name(PowerTask task) { return task == PowerTask::kws ? "kws" : "wwd"; }

enum class FeatureKind { mfcc_with_adc, n_peaf, l_peaf, learn_peaf };

inline std::string feature_kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::mfcc_with_adc: return "mfcc";
        case FeatureKind::n_peaf: return "n-peaf";
        case FeatureKind::l_peaf: return "l-peaf";
        case FeatureKind::learn_peaf: return "learn-peaf";
    }
    throw std::invalid_argument("feature_kind_name: bad kind");
}

/// Measured feature-extraction power in watts. MFCC includes the ADC; the
/// learnable variant adds the lowpass stage (16% of L-PEAF, same as the
/// bandpass bank) and a DSP PCEN step (another 10%) on top of L-PEAF.
inline double feature_power(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::mfcc_with_adc: return 7.5e-6;  // 0.34 uW MFCC + 7.2 uW ADC
        case FeatureKind::n_peaf: return 0.072e-6;
        case FeatureKind::l_peaf: return 0.38e-6;
        case FeatureKind::learn_peaf: return 0.38e-6 * (1.0 + 0.16 + 0.10);
    }
    throw std::invalid_argument("feature_power: bad kind");
}

inline std::string feature_power_provenance(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::mfcc_with_adc: return "measured: 0.34 uW MFCC chip + 7.2 uW ADC";
        case FeatureKind::n_peaf: return "measured: nonlinear analog frontend chip";
        case FeatureKind::l_peaf: return "measured: linear analog frontend chip";
        case FeatureKind::learn_peaf: return "derived: L-PEAF * (1 + 0.16 lowpass + 0.10 PCEN)";
    }
    return "";
}

/// P_class = n_ops * fr / e_eff.
inline double classifier_power(double n_ops, double fr, double e_eff) {
    if (n_ops < 0.0) throw std::invalid_argument("classifier_power: n_ops must be >= 0");
    if (fr <= 0.0) throw std::invalid_argument("classifier_power: frame rate must be > 0");
    if (e_eff <= 0.0) throw std::invalid_argument("classifier_power: efficiency must be > 0");
    return n_ops * fr / e_eff;
}

// ---------------------------------------------------------------------------
// Operation counting (one OP = one multiply or one add; a MAC costs 2)
// ---------------------------------------------------------------------------

struct DenseLayer {
    std::int64_t in = 0, out = 0;
};
struct Conv2dLayer {
    std::int64_t in_ch = 0, out_ch = 0, kh = 0, kw = 0, out_h = 0, out_w = 0;
};
struct DepthwiseConv2dLayer {
    std::int64_t ch = 0, kh = 0, kw = 0, out_h = 0, out_w = 0;
};
struct PoolingLayer {};     // zero-cost by convention
struct ActivationLayer {};  // zero-cost by convention

using Layer = std::variant<DenseLayer, Conv2dLayer, DepthwiseConv2dLayer, PoolingLayer,
                           ActivationLayer>;

struct LayerSpec {
    std::vector<Layer> layers;
};

inline std::int64_t count_ops(const LayerSpec& spec) {
    std::int64_t total = 0;
    // element count flowing out of the previous parametric layer, when known;
    // pooling erases spatial shape so checking resumes at the next known point
    std::optional<std::int64_t> prev_elems;
    for (const auto& layer : spec.layers) {
        if (std::holds_alternative<DenseLayer>(layer)) {
            const auto& d = std::get<DenseLayer>(layer);
            if (d.in <= 0 || d.out <= 0)
                throw std::invalid_argument("count_ops: dense dims must be positive");
            if (prev_elems && *prev_elems != d.in)
                throw std::invalid_argument("count_ops: dense input " + std::to_string(d.in) +
                                            " != previous output " + std::to_string(*prev_elems));
            total += 2 * d.in * d.out;
            prev_elems = d.out;
        } else if (std::holds_alternative<Conv2dLayer>(layer)) {
            const auto& c = std::get<Conv2dLayer>(layer);
            if (c.in_ch <= 0 || c.out_ch <= 0 || c.kh <= 0 || c.kw <= 0 || c.out_h <= 0 ||
                c.out_w <= 0)
                throw std::invalid_argument("count_ops: conv2d dims must be positive");
            total += 2 * c.kh * c.kw * c.in_ch * c.out_ch * c.out_h * c.out_w;
            prev_elems = c.out_ch * c.out_h * c.out_w;
        } else if (std::holds_alternative<DepthwiseConv2dLayer>(layer)) {
            const auto& c = std::get<DepthwiseConv2dLayer>(layer);
            if (c.ch <= 0 || c.kh <= 0 || c.kw <= 0 || c.out_h <= 0 || c.out_w <= 0)
                throw std::invalid_argument("count_ops: depthwise dims must be positive");
            total += 2 * c.kh * c.kw * c.ch * c.out_h * c.out_w;
            prev_elems = c.ch * c.out_h * c.out_w;
        } else if (std::holds_alternative<PoolingLayer>(layer)) {
            prev_elems.reset();
        }
        // activation: zero ops, shape preserved
    }
    return total;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// One row of the power decomposition P_tot = P_feat + N_OPS * FR / E_eff,
/// with the provenance of each term.
struct PowerEntry {
    std::string feature;
    std::string classifier;
    std::string task;
    double p_feat_w = 0.0;
    double n_ops = 0.0;
    double frame_rate = 0.0;
    double e_eff = kEnergyEfficiencyOpsPerWatt;
    double p_class_w = 0.0;
    double p_tot_w = 0.0;
    std::string p_feat_provenance;
    std::string n_ops_provenance;
};

inline PowerEntry power_report(FeatureKind feature, double n_ops, PowerTask task,
                               const std::string& classifier_name = "explicit",
                               const std::string& n_ops_provenance = "user-supplied n_ops") {
    PowerEntry e;
    e.feature = feature_kind_name(feature);
    e.classifier = classifier_name;
    e.task = task_name(task);
    e.p_feat_w = feature_power(feature);
    e.n_ops = n_ops;
    e.frame_rate = task_frame_rate(task);
    e.p_class_w = classifier_power(n_ops, e.frame_rate, e.e_eff);
    e.p_tot_w = e.p_feat_w + e.p_class_w;
    e.p_feat_provenance = feature_power_provenance(feature);
    e.n_ops_provenance = n_ops_provenance;
    return e;
}

inline PowerEntry power_report(FeatureKind feature, const LayerSpec& layers, PowerTask task,
                               const std::string& classifier_name = "custom-layers") {
    return power_report(feature, static_cast<double>(count_ops(layers)), task, classifier_name,
                        "counted from layer spec (MAC = 2 OPS)");
}

/// Classifier operation counts recovered by inverting the power equation
/// against the published per-task classifier power figures; the published
/// architectures are not detailed enough to count directly.
struct ClassifierPreset {
    std::string name;
    std::optional<double> n_ops_kws;
    std::optional<double> n_ops_wwd;
};

inline const std::vector<ClassifierPreset>& classifier_presets() {
    static const std::vector<ClassifierPreset> presets = {
        {"mini-efficientnet", 1.180e5, 2.884e5},
        {"lenet-5", 4.136e5, 1.095e6},
        {"ds-cnn", 1.010e7, 1.971e7},
        {"efficientnet-b0", 5.840e7, std::nullopt},
    };
    return presets;
}

inline const ClassifierPreset& find_preset(const std::string& name) {
    for (const auto& p : classifier_presets())
        if (p.name == name) return p;
    throw std::invalid_argument("find_preset: unknown classifier '" + name + "'");
}

inline PowerEntry power_report_preset(FeatureKind feature, const ClassifierPreset& preset,
                                      PowerTask task) {
    const auto& n_ops =
        task == PowerTask::kws ? preset.n_ops_kws : preset.n_ops_wwd;
    if (!n_ops)
        throw std::invalid_argument("power_report_preset: no " + task_name(task) +
                                    " preset for '" + preset.name + "'");
    return power_report(feature, *n_ops, task, preset.name,
                        "derived: published classifier power inverted through the power equation");
}

inline void write_power_csv(const std::string& path, const std::vector<PowerEntry>& entries) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_power_csv: cannot open " + path);
    f << "feature,classifier,task,P_feat_uW,P_class_uW,P_tot_uW\n";
    for (const auto& e : entries)
        f << e.feature << "," << e.classifier << "," << e.task << ","
          << detail::format_double(e.p_feat_w * 1e6, "%.6g") << ","
          << detail::format_double(e.p_class_w * 1e6, "%.6g") << ","
          << detail::format_double(e.p_tot_w * 1e6, "%.6g") << "\n";
    if (!f) throw std::runtime_error("write_power_csv: write failed: " + path);
}

}  // namespace peaf
