// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "peaf/corpus.hpp"
#include "peaf/frontend.hpp"
#include "peaf/mfcc.hpp"
#include "peaf/mlp.hpp"

// JSON schemas for the on-disk artifacts (frontend config, corpus recipe,
// trained model). Field names are part of the CLI contract; see README.

namespace peaf {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// FrontendConfig
// ---------------------------------------------------------------------------

inline FrontendVariant variant_from_name(const std::string& s) {
    if (s == "l-peaf") return FrontendVariant::l_peaf;
    if (s == "n-peaf") return FrontendVariant::n_peaf;
    if (s == "learn-peaf") return FrontendVariant::learn_peaf;
    throw std::invalid_argument("variant_from_name: unknown variant '" + s + "'");
}

inline json to_json(const FilterbankConfig& c) {
    json j{{"n_channels", c.n_channels}, {"f_min_hz", c.f_min_hz},   {"f_max_hz", c.f_max_hz},
           {"q_factor", c.q_factor},     {"sample_rate", c.sample_rate}};
    if (!c.center_freqs_hz.empty()) j["center_freqs_hz"] = c.center_freqs_hz;
    return j;
}

inline FilterbankConfig filterbank_from_json(const json& j) {
    FilterbankConfig c;
    c.n_channels = j.value("n_channels", c.n_channels);
    c.f_min_hz = j.value("f_min_hz", c.f_min_hz);
    c.f_max_hz = j.value("f_max_hz", c.f_max_hz);
    c.q_factor = j.value("q_factor", c.q_factor);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    if (j.contains("center_freqs_hz"))
        c.center_freqs_hz = j.at("center_freqs_hz").get<std::vector<double>>();
    return c;
}

inline json to_json(const ActivationSpec& a) {
    json j{{"kind", a.kind == ActivationKind::absolute ? "absolute" : "clipped_exponential"}};
    if (a.kind == ActivationKind::clipped_exponential) {
        j["gain"] = a.gain;
        j["clip"] = a.clip;
    }
    return j;
}

inline ActivationSpec activation_from_json(const json& j) {
    ActivationSpec a;
    const std::string kind = j.value("kind", "absolute");
    if (kind == "absolute")
        a.kind = ActivationKind::absolute;
    else if (kind == "clipped_exponential")
        a.kind = ActivationKind::clipped_exponential;
    else
        throw std::invalid_argument("activation_from_json: unknown kind '" + kind + "'");
    a.gain = j.value("gain", a.gain);
    a.clip = j.value("clip", a.clip);
    return a;
}

inline json to_json(const LearnableSpec& s) {
    return json{{"lowpass_cutoffs_hz", s.lowpass_cutoffs_hz},
                {"pooling", s.pooling == PoolingKind::gaussian ? "gaussian" : "iaf"},
                {"gaussian_sigma", s.gaussian_sigma},
                {"pcen",
                 {{"smoothing", s.pcen.smoothing},
                  {"alpha", s.pcen.alpha},
                  {"delta", s.pcen.delta},
                  {"root", s.pcen.root},
                  {"eps", s.pcen.eps}}},
                {"train",
                 {{"center_freqs", s.train_center_freqs},
                  {"cutoffs", s.train_cutoffs},
                  {"sigma", s.train_sigma},
                  {"pcen", s.train_pcen}}}};
}

inline LearnableSpec learnable_from_json(const json& j, int n_channels, int frame_window) {
    LearnableSpec s = LearnableSpec::defaults(n_channels, frame_window);
    if (j.contains("lowpass_cutoffs_hz"))
        s.lowpass_cutoffs_hz = j.at("lowpass_cutoffs_hz").get<std::vector<double>>();
    if (j.contains("pooling")) {
        const std::string p = j.at("pooling").get<std::string>();
        if (p == "gaussian")
            s.pooling = PoolingKind::gaussian;
        else if (p == "iaf")
            s.pooling = PoolingKind::iaf;
        else
            throw std::invalid_argument("learnable_from_json: unknown pooling '" + p + "'");
    }
    if (j.contains("gaussian_sigma"))
        s.gaussian_sigma = j.at("gaussian_sigma").get<std::vector<double>>();
    if (j.contains("pcen")) {
        const auto& p = j.at("pcen");
        if (p.contains("smoothing")) s.pcen.smoothing = p.at("smoothing").get<std::vector<double>>();
        if (p.contains("alpha")) s.pcen.alpha = p.at("alpha").get<std::vector<double>>();
        if (p.contains("delta")) s.pcen.delta = p.at("delta").get<std::vector<double>>();
        if (p.contains("root")) s.pcen.root = p.at("root").get<std::vector<double>>();
        s.pcen.eps = p.value("eps", s.pcen.eps);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        s.train_center_freqs = t.value("center_freqs", s.train_center_freqs);
        s.train_cutoffs = t.value("cutoffs", s.train_cutoffs);
        s.train_sigma = t.value("sigma", s.train_sigma);
        s.train_pcen = t.value("pcen", s.train_pcen);
    }
    return s;
}

inline json to_json(const FrontendConfig& c) {
    json j{{"variant", variant_name(c.variant)},
           {"filterbank", to_json(c.filterbank)},
           {"activation", to_json(c.activation)},
           {"iaf", {{"threshold", c.iaf.threshold}, {"integration_gain", c.iaf.integration_gain}}},
           {"frame_window", c.frame_window},
           {"frame_hop", c.frame_hop}};
    if (c.learnable) j["learnable"] = to_json(*c.learnable);
    return j;
}

inline FrontendConfig frontend_from_json(const json& j) {
    FrontendConfig base = default_frontend_config(
        variant_from_name(j.value("variant", std::string("l-peaf"))));
    FrontendConfig c;
    c.variant = base.variant;
    c.frame_window = j.value("frame_window", base.frame_window);
    c.frame_hop = j.value("frame_hop", base.frame_hop);
    c.filterbank =
        j.contains("filterbank") ? filterbank_from_json(j.at("filterbank")) : base.filterbank;
    c.activation =
        j.contains("activation") ? activation_from_json(j.at("activation")) : base.activation;
    if (j.contains("iaf")) {
        c.iaf.threshold = j.at("iaf").value("threshold", base.iaf.threshold);
        c.iaf.integration_gain = j.at("iaf").value("integration_gain", base.iaf.integration_gain);
    } else {
        c.iaf = calibrate_iaf(c.activation, c.frame_window);
    }
    if (c.variant == FrontendVariant::learn_peaf)
        c.learnable = j.contains("learnable")
                          ? learnable_from_json(j.at("learnable"), c.filterbank.n_channels,
                                                c.frame_window)
                          : LearnableSpec::defaults(c.filterbank.n_channels, c.frame_window);
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// MfccConfig
// ---------------------------------------------------------------------------

inline json to_json(const MfccConfig& c) {
    return json{{"n_mels", c.n_mels},
                {"n_coeffs", c.n_coeffs},
                {"fft_size", c.fft_size},
                {"frame_window", c.frame_window},
                {"frame_hop", c.frame_hop},
                {"f_min_hz", c.f_min_hz},
                {"f_max_hz", c.f_max_hz},
                {"log_floor", c.log_floor}};
}

inline MfccConfig mfcc_from_json(const json& j) {
    MfccConfig c;
    c.n_mels = j.value("n_mels", c.n_mels);
    c.n_coeffs = j.value("n_coeffs", c.n_coeffs);
    c.fft_size = j.value("fft_size", c.fft_size);
    c.frame_window = j.value("frame_window", c.frame_window);
    c.frame_hop = j.value("frame_hop", c.frame_hop);
    c.f_min_hz = j.value("f_min_hz", c.f_min_hz);
    c.f_max_hz = j.value("f_max_hz", c.f_max_hz);
    c.log_floor = j.value("log_floor", c.log_floor);
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// CorpusRecipe
// ---------------------------------------------------------------------------

inline JitterRange jitter_from_json(const json& j) {
    if (j.is_number()) return JitterRange(j.get<double>());
    if (j.is_array() && j.size() == 2)
        return JitterRange(j.at(0).get<double>(), j.at(1).get<double>());
    throw std::invalid_argument("jitter_from_json: expected number or [lo, hi]");
}

inline json to_json(const JitterRange& r) { return json::array({r.lo, r.hi}); }

inline json to_json(const CorpusRecipe& r) {
    json classes = json::array();
    for (const auto& c : r.classes) {
        json jc{{"name", c.name}, {"family", family_name(c.family)},
                {"amplitude", to_json(c.amplitude)}};
        switch (c.family) {
            case SignalFamily::tone: jc["freq_hz"] = to_json(c.freq_hz); break;
            case SignalFamily::am_tone:
                jc["freq_hz"] = to_json(c.freq_hz);
                jc["mod_freq_hz"] = to_json(c.mod_freq_hz);
                jc["mod_depth"] = to_json(c.mod_depth);
                break;
            case SignalFamily::chirp:
                jc["freq_start_hz"] = to_json(c.freq_start_hz);
                jc["freq_end_hz"] = to_json(c.freq_end_hz);
                break;
            case SignalFamily::noise_burst:
                jc["burst_start_frac"] = to_json(c.burst_start_frac);
                jc["burst_len_frac"] = to_json(c.burst_len_frac);
                break;
        }
        classes.push_back(jc);
    }
    return json{{"sample_rate", r.sample_rate},
                {"duration_s", r.duration_s},
                {"per_class", r.per_class},
                {"classes", classes}};
}

inline CorpusRecipe corpus_from_json(const json& j) {
    CorpusRecipe r;
    r.sample_rate = j.value("sample_rate", r.sample_rate);
    r.duration_s = j.value("duration_s", r.duration_s);
    r.per_class = j.value("per_class", r.per_class);
    if (!j.contains("classes"))
        throw std::invalid_argument("corpus_from_json: missing 'classes'");
    for (const auto& jc : j.at("classes")) {
        ClassRecipe c;
        c.name = jc.at("name").get<std::string>();
        c.family = family_from_name(jc.value("family", std::string("tone")));
        if (jc.contains("amplitude")) c.amplitude = jitter_from_json(jc.at("amplitude"));
        if (jc.contains("freq_hz")) c.freq_hz = jitter_from_json(jc.at("freq_hz"));
        if (jc.contains("freq_start_hz"))
            c.freq_start_hz = jitter_from_json(jc.at("freq_start_hz"));
        if (jc.contains("freq_end_hz")) c.freq_end_hz = jitter_from_json(jc.at("freq_end_hz"));
        if (jc.contains("mod_freq_hz")) c.mod_freq_hz = jitter_from_json(jc.at("mod_freq_hz"));
        if (jc.contains("mod_depth")) c.mod_depth = jitter_from_json(jc.at("mod_depth"));
        if (jc.contains("burst_start_frac"))
            c.burst_start_frac = jitter_from_json(jc.at("burst_start_frac"));
        if (jc.contains("burst_len_frac"))
            c.burst_len_frac = jitter_from_json(jc.at("burst_len_frac"));
        r.classes.push_back(std::move(c));
    }
    r.validate();
    return r;
}

// ---------------------------------------------------------------------------
// MlpModel
// ---------------------------------------------------------------------------

inline json to_json(const MlpModel& m) {
    return json{{"sizes", m.sizes},
                {"weights", m.weights},
                {"biases", m.biases},
                {"feat_mean", m.feat_mean},
                {"feat_std", m.feat_std}};
}

inline MlpModel mlp_from_json(const json& j) {
    MlpModel m;
    m.sizes = j.at("sizes").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    m.feat_mean = j.value("feat_mean", std::vector<double>{});
    m.feat_std = j.value("feat_std", std::vector<double>{});
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_json: cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("load_json: parse failure in " + path + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("save_json: cannot open " + path);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("save_json: write failed: " + path);
}

}  // namespace peaf
