// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "peaf/audio.hpp"
#include "peaf/feature.hpp"
#include "peaf/manifest.hpp"
#include "peaf/random.hpp"
#include "peaf/wav.hpp"

namespace peaf {

/// Feature flattened row-major, with each data point paired to a spatial
/// label 1..N recording its position. The labels are implicit by index:
/// pair k is (values[k], k+1).
struct EncodedFeature {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::int64_t label(std::size_t k) const { return static_cast<std::int64_t>(k) + 1; }
};

inline EncodedFeature encode_feature(const FeatureMatrix& feat) {
    if (feat.size() == 0) throw std::invalid_argument("encode_feature: empty feature");
    feat.validate();
    return EncodedFeature{feat.values};
}

/// 2D histogram over (value, spatial label) with equal-width bins on each
/// axis. The value axis spans [min, max] of the data (one degenerate bin when
/// min == max); the spatial axis partitions labels 1..N into B_spatial equal
/// chunks, so when B_spatial divides N every chunk holds exactly N/B_spatial
/// labels. Top edges are inclusive on both axes.
struct HistogramDistribution {
    std::vector<std::int64_t> counts;  // row-major, B_value x B_spatial
    std::vector<double> probabilities;
    double value_min = 0.0, value_max = 0.0;
    int b_value = 0, b_spatial = 0;
    std::int64_t n_total = 0;
};

inline HistogramDistribution histogram2d(const EncodedFeature& enc, int b_value, int b_spatial) {
    if (b_value < 1 || b_spatial < 1)
        throw std::invalid_argument("histogram2d: bin counts must be >= 1");
    if (enc.values.empty()) throw std::invalid_argument("histogram2d: empty encoding");

    HistogramDistribution h;
    h.b_value = b_value;
    h.b_spatial = b_spatial;
    h.n_total = static_cast<std::int64_t>(enc.values.size());
    h.counts.assign(static_cast<std::size_t>(b_value) * static_cast<std::size_t>(b_spatial), 0);

    const auto [mn, mx] = std::minmax_element(enc.values.begin(), enc.values.end());
    h.value_min = *mn;
    h.value_max = *mx;
    const double span = h.value_max - h.value_min;
    const auto n = static_cast<std::int64_t>(enc.values.size());

    for (std::size_t k = 0; k < enc.values.size(); ++k) {
        int vbin = 0;
        if (span > 0.0) {
            vbin = static_cast<int>((enc.values[k] - h.value_min) / span * b_value);
            if (vbin >= b_value) vbin = b_value - 1;  // top edge inclusive
        }
        const auto sbin =
            static_cast<int>((static_cast<std::int64_t>(k) * b_spatial) / n);  // labels 1..N
        h.counts[static_cast<std::size_t>(vbin) * b_spatial + static_cast<std::size_t>(sbin)] += 1;
    }

    h.probabilities.resize(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        h.probabilities[i] = static_cast<double>(h.counts[i]) / static_cast<double>(n);
    return h;
}

/// S = -sum p_i log2 p_i, zero-probability bins contributing nothing.
inline double shannon_entropy(const HistogramDistribution& dist) {
    double total = 0.0;
    for (double p : dist.probabilities) {
        if (p < 0.0) throw std::invalid_argument("shannon_entropy: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("shannon_entropy: distribution not normalized (sum=" +
                                    std::to_string(total) + ")");
    double s = 0.0;
    for (double p : dist.probabilities)
        if (p > 0.0) s -= p * std::log2(p);
    return s;
}

/// Entropy of one feature matrix under the 2D histogram estimator.
inline double feature_entropy(const FeatureMatrix& feat, int b_value, int b_spatial) {
    return shannon_entropy(histogram2d(encode_feature(feat), b_value, b_spatial));
}

// ---------------------------------------------------------------------------
// Corpus-level stage report
// ---------------------------------------------------------------------------

/// A named feature pipeline producing a per-stage trace.
struct Pipeline {
    std::string name;
    std::function<StageTrace(const AudioBuffer&)> run;
};

struct StageStat {
    std::string stage_tag;
    double mean_bits = 0.0;
    double std_bits = 0.0;  // population standard deviation
    int n = 0;
};

struct EntropyReport {
    std::string pipeline;
    std::vector<StageStat> stages;  // in pipeline order
};

/// Per-stage mean +- std of the histogram entropy over a class-balanced,
/// seeded draw of up to sample_limit corpus items.
inline std::vector<EntropyReport> stage_entropy_report(const DatasetManifest& manifest,
                                                       const std::vector<Pipeline>& pipelines,
                                                       int b_value, int b_spatial,
                                                       int sample_limit, std::uint64_t seed) {
    manifest.validate();
    if (manifest.entries.empty())
        throw std::invalid_argument("stage_entropy_report: empty manifest");
    if (sample_limit < 1)
        throw std::invalid_argument("stage_entropy_report: sample_limit must be >= 1");

    // Class-balanced draw: shuffle each class bucket, take an equal share per
    // class (never more than sample_limit in total).
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        buckets[manifest.entries[i].label].push_back(i);
    const std::size_t n_classes = buckets.size();
    const std::size_t base = static_cast<std::size_t>(sample_limit) / n_classes;
    const std::size_t rem = static_cast<std::size_t>(sample_limit) % n_classes;

    Rng rng(seed);
    std::vector<std::size_t> chosen;
    for (std::size_t ci = 0; ci < manifest.class_names.size(); ++ci) {
        auto idx = buckets.at(manifest.class_names[ci]);
        rng.shuffle(idx);
        const std::size_t want = base + (ci < rem ? 1 : 0);
        for (std::size_t i = 0; i < want && i < idx.size(); ++i) chosen.push_back(idx[i]);
    }

    std::vector<EntropyReport> reports;
    for (const auto& pipe : pipelines) {
        // stage name -> accumulated entropies, discovered in pipeline order
        std::vector<std::string> order;
        std::map<std::string, std::vector<double>> acc;
        for (std::size_t i : chosen) {
            const AudioBuffer audio = load_wav(manifest.resolve(manifest.entries[i]));
            const StageTrace trace = pipe.run(audio);
            for (const auto& [tag, feat] : trace.stages) {
                if (!acc.count(tag)) order.push_back(tag);
                acc[tag].push_back(feature_entropy(feat, b_value, b_spatial));
            }
        }
        EntropyReport rep;
        rep.pipeline = pipe.name;
        for (const auto& tag : order) {
            const auto& xs = acc[tag];
            StageStat st;
            st.stage_tag = tag;
            st.n = static_cast<int>(xs.size());
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size());
            st.mean_bits = mean;
            st.std_bits = std::sqrt(var);
            rep.stages.push_back(st);
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

inline void write_entropy_csv(const std::string& path, const std::vector<EntropyReport>& reports) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_entropy_csv: cannot open " + path);
    f << "pipeline,stage,mean_bits,std_bits,n\n";
    for (const auto& rep : reports)
        for (const auto& st : rep.stages)
            f << rep.pipeline << "," << st.stage_tag << "," << detail::format_double(st.mean_bits)
              << "," << detail::format_double(st.std_bits) << "," << st.n << "\n";
    if (!f) throw std::runtime_error("write_entropy_csv: write failed: " + path);
}

}  // namespace peaf
