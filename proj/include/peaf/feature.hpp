// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace peaf {

/// Frames of `window` samples advancing by `hop`; a trailing partial window is
/// dropped. Shared by every framed stage so pipelines stay column-aligned.
inline int num_frames(std::int64_t total_samples, int window, int hop) {
    if (window < 1 || hop < 1 || window < hop)
        throw std::invalid_argument("num_frames: require window >= hop >= 1");
    if (total_samples < window) return 0;
    return static_cast<int>((total_samples - window) / hop) + 1;
}

/// channels x frames real-valued feature, the inter-stage currency of every
/// pipeline. Row-major storage.
struct FeatureMatrix {
    std::vector<double> values;  // row-major, n_channels * n_frames
    int n_channels = 0;
    int n_frames = 0;
    int frame_window = 0;  // samples
    int frame_hop = 0;     // samples
    int sample_rate = 0;   // Hz
    std::string stage_tag;

    FeatureMatrix() = default;
    FeatureMatrix(int channels, int frames, int window, int hop, int sr, std::string tag)
        : values(static_cast<std::size_t>(channels) * static_cast<std::size_t>(frames), 0.0),
          n_channels(channels),
          n_frames(frames),
          frame_window(window),
          frame_hop(hop),
          sample_rate(sr),
          stage_tag(std::move(tag)) {}

    double& at(int c, int t) {
        return values[static_cast<std::size_t>(c) * n_frames + static_cast<std::size_t>(t)];
    }
    double at(int c, int t) const {
        return values[static_cast<std::size_t>(c) * n_frames + static_cast<std::size_t>(t)];
    }

    std::size_t size() const { return values.size(); }

    void validate() const {
        if (values.size() != static_cast<std::size_t>(n_channels) * static_cast<std::size_t>(n_frames))
            throw std::invalid_argument("FeatureMatrix: shape/storage mismatch");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("FeatureMatrix: non-finite value");
    }
};

/// Ordered per-stage snapshots of one pipeline run, input first. Tags are
/// unique and in pipeline order.
struct StageTrace {
    std::vector<std::pair<std::string, FeatureMatrix>> stages;

    void add(std::string tag, FeatureMatrix m) {
        for (const auto& [t, _] : stages)
            if (t == tag) throw std::invalid_argument("StageTrace: duplicate tag '" + tag + "'");
        stages.emplace_back(std::move(tag), std::move(m));
    }

    const FeatureMatrix* find(const std::string& tag) const {
        for (const auto& [t, m] : stages)
            if (t == tag) return &m;
        return nullptr;
    }
};

namespace detail {

inline std::string format_double(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace detail

/// CSV export: one row per channel, one column per frame.
inline void write_feature_csv(const std::string& path, const FeatureMatrix& m) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_feature_csv: cannot open " + path);
    for (int c = 0; c < m.n_channels; ++c) {
        for (int t = 0; t < m.n_frames; ++t) {
            if (t) f << ",";
            f << detail::format_double(m.at(c, t));
        }
        f << "\n";
    }
    if (!f) throw std::runtime_error("write_feature_csv: write failed: " + path);
}

}  // namespace peaf
