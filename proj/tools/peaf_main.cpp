// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// peaf: command-line entry point for the analog acoustic feature toolkit.
//
// Subcommands: synth-data | extract | entropy-report | power | train | eval |
// optimize-frontend. Every subcommand is deterministic given its flags and
// --seed, and logs the resolved configuration as JSON beside its outputs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peaf/peaf.hpp"

namespace fs = std::filesystem;
using peaf::json;

namespace {

std::string with_suffix(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    p.replace_extension();
    return p.string() + suffix;
}

std::string format4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// --config accepts either a bare FrontendConfig / CorpusRecipe document or an
// experiment object with optional keys: frontend, mfcc, corpus, classifier,
// entropy.
struct ExperimentConfig {
    json raw = json::object();

    static ExperimentConfig load(const std::string& path) {
        ExperimentConfig c;
        if (!path.empty()) c.raw = peaf::load_json(path);
        return c;
    }

    bool is_bare_frontend() const { return raw.contains("variant"); }
    bool is_bare_corpus() const { return raw.contains("classes"); }

    /// When strict, a configured frontend of the wrong variant is an error;
    /// otherwise (multi-pipeline reports) the defaults apply instead.
    peaf::FrontendConfig frontend_for(peaf::FrontendVariant variant, bool strict = true) const {
        json doc;
        if (is_bare_frontend())
            doc = raw;
        else if (raw.contains("frontend"))
            doc = raw.at("frontend");
        else
            return peaf::default_frontend_config(variant);
        const peaf::FrontendConfig cfg = peaf::frontend_from_json(doc);
        if (cfg.variant != variant) {
            if (strict)
                throw std::invalid_argument("config: frontend variant '" +
                                            peaf::variant_name(cfg.variant) +
                                            "' does not match requested '" +
                                            peaf::variant_name(variant) + "'");
            return peaf::default_frontend_config(variant);
        }
        return cfg;
    }

    peaf::MfccConfig mfcc() const {
        if (raw.contains("mfcc")) return peaf::mfcc_from_json(raw.at("mfcc"));
        return peaf::MfccConfig{};
    }

    peaf::CorpusRecipe corpus() const {
        if (is_bare_corpus()) return peaf::corpus_from_json(raw);
        if (raw.contains("corpus")) return peaf::corpus_from_json(raw.at("corpus"));
        return peaf::CorpusRecipe::two_tone_default();
    }

    peaf::MlpConfig classifier() const {
        peaf::MlpConfig c;
        if (!raw.contains("classifier")) return c;
        const auto& j = raw.at("classifier");
        if (j.contains("hidden_sizes")) c.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
        c.epochs = j.value("epochs", c.epochs);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.val_fraction = j.value("val_fraction", c.val_fraction);
        return c;
    }
};

/// One feature pipeline selected by name, with the configs resolved.
struct Extractor {
    std::string feature;  // mfcc | l-peaf | n-peaf | learn-peaf
    std::optional<peaf::FrontendConfig> frontend;
    std::optional<peaf::MfccConfig> mfcc_cfg;

    static Extractor build(const std::string& feature, const ExperimentConfig& cfg,
                           bool strict = true) {
        Extractor e;
        e.feature = feature;
        if (feature == "mfcc") {
            e.mfcc_cfg = cfg.mfcc();
        } else {
            e.frontend = cfg.frontend_for(peaf::variant_from_name(feature), strict);
        }
        return e;
    }

    peaf::ExtractResult run(const peaf::AudioBuffer& audio) const {
        if (mfcc_cfg) return peaf::mfcc(audio, *mfcc_cfg);
        return peaf::extract_peaf(audio, *frontend);
    }

    json config_json() const {
        if (mfcc_cfg) return peaf::to_json(*mfcc_cfg);
        return peaf::to_json(*frontend);
    }
};

struct LabeledFeatures {
    std::vector<peaf::FeatureMatrix> features;
    std::vector<int> labels;
    std::vector<std::string> paths;
};

LabeledFeatures extract_manifest(const peaf::DatasetManifest& manifest, const Extractor& ex) {
    LabeledFeatures out;
    for (const auto& entry : manifest.entries) {
        const auto audio = peaf::load_wav(manifest.resolve(entry));
        out.features.push_back(ex.run(audio).feature);
        const auto it = std::find(manifest.class_names.begin(), manifest.class_names.end(),
                                  entry.label);
        out.labels.push_back(static_cast<int>(it - manifest.class_names.begin()));
        out.paths.push_back(entry.path);
    }
    return out;
}

void log_config(const std::string& path, const json& resolved) { peaf::save_json(path, resolved); }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct SynthDataArgs {
    std::string out_dir;
    std::string config_path;
    std::uint64_t seed = 0;
};

void run_synth_data(const SynthDataArgs& a) {
    const auto cfg = ExperimentConfig::load(a.config_path);
    const peaf::CorpusRecipe recipe = cfg.corpus();
    const auto manifest = peaf::synth_corpus(recipe, a.out_dir, a.seed);
    log_config((fs::path(a.out_dir) / "config.json").string(),
               json{{"subcommand", "synth-data"},
                    {"seed", a.seed},
                    {"out", a.out_dir},
                    {"corpus", peaf::to_json(recipe)}});
    std::cout << "wrote " << manifest.entries.size() << " files across "
              << manifest.class_names.size() << " classes to " << a.out_dir << "\n";
}

struct ExtractArgs {
    std::string feature = "l-peaf";
    std::string in_path;
    std::string out_path;
    std::string config_path;
};

void run_extract(const ExtractArgs& a) {
    const auto ex = Extractor::build(a.feature, ExperimentConfig::load(a.config_path));
    const auto audio = peaf::load_wav(a.in_path);
    const auto result = ex.run(audio);
    peaf::write_feature_csv(a.out_path, result.feature);

    peaf::save_json(with_suffix(a.out_path, ".meta.json"),
                    json{{"stage_tag", result.feature.stage_tag},
                         {"n_channels", result.feature.n_channels},
                         {"n_frames", result.feature.n_frames},
                         {"frame_window", result.feature.frame_window},
                         {"frame_hop", result.feature.frame_hop},
                         {"sample_rate", result.feature.sample_rate}});
    log_config(with_suffix(a.out_path, ".config.json"),
               json{{"subcommand", "extract"},
                    {"feature", a.feature},
                    {"in", a.in_path},
                    {"out", a.out_path},
                    {"config", ex.config_json()}});
    std::cout << "wrote " << result.feature.n_channels << "x" << result.feature.n_frames
              << " feature to " << a.out_path << "\n";
}

struct EntropyArgs {
    std::string manifest_path;
    std::string pipelines = "l-peaf,mfcc";
    std::string out_path = "entropy_report.csv";
    std::string config_path;
    int bins_value = 64;
    int bins_spatial = 64;
    int samples = 1000;
    std::uint64_t seed = 0;
};

void run_entropy_report(const EntropyArgs& a) {
    const auto cfg = ExperimentConfig::load(a.config_path);
    const auto manifest = peaf::read_manifest(a.manifest_path);

    std::vector<peaf::Pipeline> pipes;
    json resolved_configs = json::object();
    std::string token;
    std::stringstream ss(a.pipelines);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto ex = Extractor::build(token, cfg, /*strict=*/false);
        resolved_configs[token] = ex.config_json();
        pipes.push_back(peaf::Pipeline{
            token, [ex](const peaf::AudioBuffer& audio) { return ex.run(audio).trace; }});
    }
    if (pipes.empty()) throw std::invalid_argument("entropy-report: no pipelines requested");

    const auto reports = peaf::stage_entropy_report(manifest, pipes, a.bins_value, a.bins_spatial,
                                                    a.samples, a.seed);
    peaf::write_entropy_csv(a.out_path, reports);
    log_config(with_suffix(a.out_path, ".config.json"),
               json{{"subcommand", "entropy-report"},
                    {"manifest", a.manifest_path},
                    {"pipelines", a.pipelines},
                    {"bins_value", a.bins_value},
                    {"bins_spatial", a.bins_spatial},
                    {"samples", a.samples},
                    {"seed", a.seed},
                    {"configs", resolved_configs}});
    std::cout << "wrote entropy report for " << pipes.size() << " pipeline(s) to " << a.out_path
              << "\n";
}

struct PowerArgs {
    std::string feature;
    std::string task = "kws";
    std::string classifier;
    std::string out_path;
    double n_ops = -1.0;
};

peaf::FeatureKind feature_kind_from_cli(const std::string& s) {
    if (s == "mfcc") return peaf::FeatureKind::mfcc_with_adc;
    if (s == "l-peaf") return peaf::FeatureKind::l_peaf;
    if (s == "n-peaf") return peaf::FeatureKind::n_peaf;
    if (s == "learn-peaf") return peaf::FeatureKind::learn_peaf;
    throw std::invalid_argument("power: unknown feature '" + s + "'");
}

peaf::PowerTask task_from_cli(const std::string& s) {
    if (s == "kws") return peaf::PowerTask::kws;
    if (s == "wwd") return peaf::PowerTask::wwd;
    throw std::invalid_argument("power: unknown task '" + s + "', expected kws|wwd");
}

void run_power(const PowerArgs& a) {
    std::vector<peaf::PowerEntry> entries;
    const bool explicit_ops = a.n_ops >= 0.0;

    if (explicit_ops && a.feature.empty())
        throw std::invalid_argument("power: --n-ops requires --feature");

    if (explicit_ops) {
        entries.push_back(peaf::power_report(feature_kind_from_cli(a.feature), a.n_ops,
                                             task_from_cli(a.task)));
    } else if (!a.classifier.empty()) {
        const auto& preset = peaf::find_preset(a.classifier);
        if (a.feature.empty())
            throw std::invalid_argument("power: --classifier requires --feature");
        entries.push_back(peaf::power_report_preset(feature_kind_from_cli(a.feature), preset,
                                                    task_from_cli(a.task)));
    } else {
        // full grid of feature kinds x classifier presets for the task
        const peaf::PowerTask task = task_from_cli(a.task);
        for (const auto kind :
             {peaf::FeatureKind::mfcc_with_adc, peaf::FeatureKind::n_peaf,
              peaf::FeatureKind::l_peaf, peaf::FeatureKind::learn_peaf}) {
            if (!a.feature.empty() && peaf::feature_kind_name(kind) != a.feature) continue;
            for (const auto& preset : peaf::classifier_presets()) {
                const auto& ops = task == peaf::PowerTask::kws ? preset.n_ops_kws
                                                               : preset.n_ops_wwd;
                if (!ops) continue;
                entries.push_back(peaf::power_report_preset(kind, preset, task));
            }
        }
    }

    if (entries.size() == 1) {
        std::cout << "P_tot = " << format4(entries.front().p_tot_w * 1e6) << " uW\n";
    } else {
        for (const auto& e : entries)
            std::cout << e.feature << "," << e.classifier << "," << e.task << ",P_tot="
                      << format4(e.p_tot_w * 1e6) << "uW\n";
    }
    if (!a.out_path.empty()) {
        peaf::write_power_csv(a.out_path, entries);
        log_config(with_suffix(a.out_path, ".config.json"),
                   json{{"subcommand", "power"},
                        {"feature", a.feature},
                        {"task", a.task},
                        {"classifier", a.classifier},
                        {"n_ops", a.n_ops},
                        {"E_eff_ops_per_watt", peaf::kEnergyEfficiencyOpsPerWatt}});
    }
}

struct TrainArgs {
    std::string feature = "l-peaf";
    std::string manifest_path;
    std::string out_path = "model.json";
    std::string config_path;
    std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
    const auto cfg = ExperimentConfig::load(a.config_path);
    const auto ex = Extractor::build(a.feature, cfg);
    const auto manifest = peaf::read_manifest(a.manifest_path);
    const auto data = extract_manifest(manifest, ex);

    peaf::MlpConfig mlp_cfg = cfg.classifier();
    mlp_cfg.seed = a.seed;
    const auto [model, report] = peaf::train_mlp(data.features, data.labels, mlp_cfg);

    peaf::save_json(a.out_path, peaf::to_json(model));
    peaf::write_loss_csv(with_suffix(a.out_path, ".loss.csv"), report.loss_per_epoch);
    log_config(with_suffix(a.out_path, ".config.json"),
               json{{"subcommand", "train"},
                    {"feature", a.feature},
                    {"manifest", a.manifest_path},
                    {"seed", a.seed},
                    {"classifier",
                     {{"hidden_sizes", mlp_cfg.hidden_sizes},
                      {"epochs", mlp_cfg.epochs},
                      {"learning_rate", mlp_cfg.learning_rate},
                      {"batch_size", mlp_cfg.batch_size},
                      {"val_fraction", mlp_cfg.val_fraction}}},
                    {"frontend", ex.config_json()}});
    std::cout << "train_accuracy=" << peaf::detail::format_double(report.final_train_accuracy)
              << " val_accuracy=" << peaf::detail::format_double(report.final_val_accuracy)
              << " final_loss=" << peaf::detail::format_double(report.loss_per_epoch.back())
              << "\n";
}

struct EvalArgs {
    std::string feature = "l-peaf";
    std::string manifest_path;
    std::string model_path;
    std::string out_path;
    std::string config_path;
};

void run_eval(const EvalArgs& a) {
    const auto cfg = ExperimentConfig::load(a.config_path);
    const auto ex = Extractor::build(a.feature, cfg);
    const auto manifest = peaf::read_manifest(a.manifest_path);
    const auto data = extract_manifest(manifest, ex);
    const auto model = peaf::mlp_from_json(peaf::load_json(a.model_path));
    const auto result = peaf::evaluate(model, data.features, data.labels);

    std::cout << "accuracy=" << peaf::detail::format_double(result.accuracy) << "\n";
    if (a.out_path.empty()) return;

    std::ofstream f(a.out_path, std::ios::trunc);
    if (!f) throw std::runtime_error("eval: cannot open " + a.out_path);
    f << "path,label,predicted";
    for (const auto& name : manifest.class_names) f << ",score_" << name;
    f << "\n";
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const auto& scores = result.scores[i];
        f << data.paths[i] << "," << manifest.class_names[static_cast<std::size_t>(data.labels[i])]
          << "," << manifest.class_names[static_cast<std::size_t>(peaf::argmax_class(scores))];
        for (double s : scores) f << "," << peaf::detail::format_double(s);
        f << "\n";
    }
    f.close();

    // binary task: also emit the ROC curve against class index 1
    if (manifest.class_names.size() == 2) {
        std::vector<double> pos_scores;
        for (const auto& s : result.scores) pos_scores.push_back(s[1]);
        peaf::write_roc_csv(with_suffix(a.out_path, ".roc.csv"),
                            peaf::roc_curve(pos_scores, data.labels));
    }
    log_config(with_suffix(a.out_path, ".config.json"),
               json{{"subcommand", "eval"},
                    {"feature", a.feature},
                    {"manifest", a.manifest_path},
                    {"model", a.model_path},
                    {"frontend", ex.config_json()}});
}

struct OptimizeArgs {
    std::string manifest_path;
    std::string out_path = "optimized.json";
    std::string config_path;
    int steps = 200;
    std::uint64_t seed = 0;
};

void run_optimize(const OptimizeArgs& a) {
    const auto cfg = ExperimentConfig::load(a.config_path);
    const peaf::FrontendConfig initial = cfg.frontend_for(peaf::FrontendVariant::learn_peaf);
    const auto manifest = peaf::read_manifest(a.manifest_path);

    peaf::OptimizeOptions opts;
    const auto result = peaf::optimize_frontend(manifest, initial, opts, a.steps, a.seed);

    peaf::save_json(a.out_path, peaf::to_json(result.config));
    peaf::write_loss_csv(with_suffix(a.out_path, ".loss.csv"), result.loss_history);
    log_config(with_suffix(a.out_path, ".config.json"),
               json{{"subcommand", "optimize-frontend"},
                    {"manifest", a.manifest_path},
                    {"steps", a.steps},
                    {"seed", a.seed},
                    {"initial", peaf::to_json(initial)}});
    std::cout << "initial_loss=" << peaf::detail::format_double(result.loss_history.front())
              << " final_loss=" << peaf::detail::format_double(result.loss_history.back()) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and analysis toolkit for power-efficient analog acoustic features"};
    app.require_subcommand(1);

    SynthDataArgs synth;
    auto* cmd_synth = app.add_subcommand("synth-data", "Generate a labeled synthetic WAV corpus");
    cmd_synth->add_option("--out", synth.out_dir, "Output directory for WAVs and manifest.csv")
        ->required();
    cmd_synth->add_option("--config", synth.config_path,
                          "Corpus recipe JSON (default: two tone classes)");
    cmd_synth->add_option("--seed", synth.seed, "RNG seed (u64)");
    cmd_synth->callback([&] { run_synth_data(synth); });

    ExtractArgs extract;
    auto* cmd_extract = app.add_subcommand("extract", "Extract one feature matrix from a WAV");
    cmd_extract
        ->add_option("--feature", extract.feature, "Feature kind: mfcc|l-peaf|n-peaf|learn-peaf")
        ->required();
    cmd_extract->add_option("--in", extract.in_path, "Input WAV (PCM16 mono 16 kHz)")->required();
    cmd_extract->add_option("--out", extract.out_path, "Output CSV (rows=channels, cols=frames)")
        ->required();
    cmd_extract->add_option("--config", extract.config_path, "Config JSON (frontend or mfcc)");
    cmd_extract->callback([&] { run_extract(extract); });

    EntropyArgs entropy;
    auto* cmd_entropy =
        app.add_subcommand("entropy-report", "Per-stage Shannon entropy over a corpus");
    cmd_entropy->add_option("--manifest", entropy.manifest_path, "Dataset manifest CSV")
        ->required();
    cmd_entropy->add_option("--pipelines", entropy.pipelines,
                            "Comma-separated pipelines (mfcc,l-peaf,n-peaf,learn-peaf)");
    cmd_entropy->add_option("--bins-value", entropy.bins_value, "Histogram bins, value axis");
    cmd_entropy->add_option("--bins-spatial", entropy.bins_spatial, "Histogram bins, spatial axis");
    cmd_entropy->add_option("--samples", entropy.samples, "Max corpus items (class-balanced)");
    cmd_entropy->add_option("--seed", entropy.seed, "RNG seed (u64) for the corpus draw");
    cmd_entropy->add_option("--out", entropy.out_path, "Output CSV path");
    cmd_entropy->add_option("--config", entropy.config_path, "Experiment config JSON");
    cmd_entropy->callback([&] { run_entropy_report(entropy); });

    PowerArgs power;
    auto* cmd_power = app.add_subcommand("power", "Power decomposition report");
    cmd_power->add_option("--feature", power.feature,
                          "Feature kind: mfcc|l-peaf|n-peaf|learn-peaf (empty: all)");
    cmd_power->add_option("--task", power.task, "Task: kws (30 fps) | wwd (10 fps)");
    cmd_power->add_option("--n-ops", power.n_ops, "Classifier operations per inference");
    cmd_power->add_option("--classifier", power.classifier,
                          "Classifier preset: mini-efficientnet|lenet-5|ds-cnn|efficientnet-b0");
    cmd_power->add_option("--out", power.out_path, "Output CSV path");
    cmd_power->callback([&] { run_power(power); });

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "Train the desk-scale MLP on a corpus");
    cmd_train->add_option("--feature", train.feature, "Feature kind: mfcc|l-peaf|n-peaf|learn-peaf");
    cmd_train->add_option("--manifest", train.manifest_path, "Dataset manifest CSV")->required();
    cmd_train->add_option("--out", train.out_path, "Output model JSON");
    cmd_train->add_option("--seed", train.seed, "RNG seed (u64)");
    cmd_train->add_option("--config", train.config_path, "Experiment config JSON");
    cmd_train->callback([&] { run_train(train); });

    EvalArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate a trained model on a corpus");
    cmd_eval->add_option("--feature", eval.feature, "Feature kind: mfcc|l-peaf|n-peaf|learn-peaf");
    cmd_eval->add_option("--manifest", eval.manifest_path, "Dataset manifest CSV")->required();
    cmd_eval->add_option("--model", eval.model_path, "Trained model JSON")->required();
    cmd_eval->add_option("--out", eval.out_path, "Per-sample scores CSV (binary: +ROC)");
    cmd_eval->add_option("--config", eval.config_path, "Experiment config JSON");
    cmd_eval->callback([&] { run_eval(eval); });

    OptimizeArgs opt;
    auto* cmd_opt = app.add_subcommand("optimize-frontend",
                                       "Gradient-descend learn-peaf frontend parameters");
    cmd_opt->add_option("--manifest", opt.manifest_path, "Training corpus manifest CSV")
        ->required();
    cmd_opt->add_option("--steps", opt.steps, "Optimization steps");
    cmd_opt->add_option("--seed", opt.seed, "RNG seed (u64)");
    cmd_opt->add_option("--out", opt.out_path, "Output config JSON (+ .loss.csv)");
    cmd_opt->add_option("--config", opt.config_path, "Initial learn-peaf frontend config JSON");
    cmd_opt->callback([&] { run_optimize(opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
