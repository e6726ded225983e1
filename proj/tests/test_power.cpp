// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "peaf/power.hpp"
#include "peaf/random.hpp"

using Catch::Approx;

namespace {

double round_to_2sf(double v) {
    if (v == 0.0) return 0.0;
    const double scale = std::pow(10.0, std::floor(std::log10(std::abs(v))) - 1.0);
    return std::round(v / scale) * scale;
}

}  // namespace

TEST_CASE("feature_power") {
    CHECK(peaf::feature_power(peaf::FeatureKind::mfcc_with_adc) * 1e6 ==
          Approx(7.5).margin(1e-12));
    CHECK(peaf::feature_power(peaf::FeatureKind::n_peaf) * 1e6 == Approx(0.072).margin(1e-12));
    CHECK(peaf::feature_power(peaf::FeatureKind::l_peaf) * 1e6 == Approx(0.38).margin(1e-12));
    // 0.38 * (1 + 0.16 + 0.10)
    CHECK(peaf::feature_power(peaf::FeatureKind::learn_peaf) * 1e6 ==
          Approx(0.4788).margin(1e-9));
}

TEST_CASE("classifier_power") {
    SECTION("no classifier means no classifier power") {
        CHECK(peaf::classifier_power(0.0, 30.0, peaf::kEnergyEfficiencyOpsPerWatt) == 0.0);
    }
    SECTION("inverted presets reproduce the published classifier figures") {
        // LeNet-5 KWS: 4.136e5 ops at 30 fps -> 0.34 uW
        const double lenet = peaf::classifier_power(4.136e5, 30.0, 36.5e12);
        CHECK(round_to_2sf(lenet * 1e6) == Approx(0.34).margin(1e-12));
        // Mini-EfficientNet KWS: 1.18e5 ops at 30 fps -> 0.097 uW
        const double mini = peaf::classifier_power(1.18e5, 30.0, 36.5e12);
        CHECK(round_to_2sf(mini * 1e6) == Approx(0.097).margin(1e-12));
    }
    SECTION("nonpositive rate or efficiency rejected, negative ops rejected") {
        CHECK_THROWS_AS(peaf::classifier_power(-1.0, 30.0, 36.5e12), std::invalid_argument);
        CHECK_THROWS_AS(peaf::classifier_power(1e5, 0.0, 36.5e12), std::invalid_argument);
        CHECK_THROWS_AS(peaf::classifier_power(1e5, 30.0, 0.0), std::invalid_argument);
    }
    SECTION("exactly linear in n_ops") {
        peaf::Rng rng(61);
        for (int trial = 0; trial < 1000; ++trial) {
            const double n = rng.uniform(1.0, 1e9);
            const double fr = rng.uniform(1.0, 100.0);
            const double e = rng.uniform(1e11, 1e14);
            REQUIRE(peaf::classifier_power(2.0 * n, fr, e) ==
                    2.0 * peaf::classifier_power(n, fr, e));
        }
    }
}

TEST_CASE("count_ops") {
    using peaf::Conv2dLayer;
    using peaf::DenseLayer;
    using peaf::DepthwiseConv2dLayer;

    SECTION("dense") {
        CHECK(peaf::count_ops({{DenseLayer{10, 1}}}) == 20);
    }
    SECTION("conv2d") {
        CHECK(peaf::count_ops({{Conv2dLayer{1, 8, 3, 3, 10, 10}}}) == 14400);
    }
    SECTION("depthwise") {
        CHECK(peaf::count_ops({{DepthwiseConv2dLayer{8, 3, 3, 10, 10}}}) == 2 * 3 * 3 * 8 * 100);
    }
    SECTION("harness MLP: 16x98 flattened -> 64 -> 2") {
        const peaf::LayerSpec mlp{{DenseLayer{1568, 64}, peaf::ActivationLayer{},
                                   DenseLayer{64, 2}}};
        CHECK(peaf::count_ops(mlp) == 200960);
    }
    SECTION("pooling and activation are free") {
        const peaf::LayerSpec spec{{Conv2dLayer{1, 4, 3, 3, 8, 8}, peaf::PoolingLayer{},
                                    peaf::ActivationLayer{}}};
        CHECK(peaf::count_ops(spec) == 2 * 9 * 4 * 64);
    }
    SECTION("incompatible dense chain rejected") {
        CHECK_THROWS_AS(peaf::count_ops({{DenseLayer{10, 5}, DenseLayer{6, 2}}}),
                        std::invalid_argument);
    }
    SECTION("pooling erases the shape so the next layer is unchecked") {
        CHECK_NOTHROW(peaf::count_ops(
            {{Conv2dLayer{1, 4, 3, 3, 8, 8}, peaf::PoolingLayer{}, DenseLayer{64, 2}}}));
    }
}

TEST_CASE("power_report") {
    SECTION("L-PEAF with the LeNet KWS preset lands at 0.72 uW") {
        const auto e = peaf::power_report(peaf::FeatureKind::l_peaf, 4.136e5, peaf::PowerTask::kws);
        CHECK(round_to_2sf(e.p_tot_w * 1e6) == Approx(0.72).margin(1e-12));
    }
    SECTION("MFCC with no classifier is the feature power alone") {
        const auto e =
            peaf::power_report(peaf::FeatureKind::mfcc_with_adc, 0.0, peaf::PowerTask::wwd);
        CHECK(e.p_tot_w * 1e6 == Approx(7.5).margin(1e-12));
        CHECK(e.p_class_w == 0.0);
    }
    SECTION("N-PEAF forward power equation") {
        const auto e = peaf::power_report(peaf::FeatureKind::n_peaf, 4.136e5, peaf::PowerTask::wwd);
        CHECK(e.p_tot_w * 1e6 == Approx(0.1853).margin(5e-5));
    }
    SECTION("entry invariants") {
        peaf::Rng rng(62);
        for (int trial = 0; trial < 100; ++trial) {
            const double n = rng.uniform(0.0, 1e8);
            const auto task = trial % 2 ? peaf::PowerTask::kws : peaf::PowerTask::wwd;
            const auto e = peaf::power_report(peaf::FeatureKind::l_peaf, n, task);
            REQUIRE(e.p_class_w ==
                    Approx(e.n_ops * e.frame_rate / e.e_eff).epsilon(1e-12));
            REQUIRE(e.p_tot_w == e.p_feat_w + e.p_class_w);  // exact sum
        }
    }
    SECTION("monotone in each argument") {
        const auto base =
            peaf::power_report(peaf::FeatureKind::l_peaf, 1e6, peaf::PowerTask::wwd);
        const auto more_ops =
            peaf::power_report(peaf::FeatureKind::l_peaf, 2e6, peaf::PowerTask::wwd);
        const auto faster = peaf::power_report(peaf::FeatureKind::l_peaf, 1e6, peaf::PowerTask::kws);
        const auto pricier_feat =
            peaf::power_report(peaf::FeatureKind::mfcc_with_adc, 1e6, peaf::PowerTask::wwd);
        CHECK(more_ops.p_tot_w > base.p_tot_w);
        CHECK(faster.p_tot_w > base.p_tot_w);
        CHECK(pricier_feat.p_tot_w > base.p_tot_w);
        // and strictly decreasing in processor efficiency
        CHECK(peaf::classifier_power(1e6, 10.0, 2.0 * 36.5e12) <
              peaf::classifier_power(1e6, 10.0, 36.5e12));
    }
    SECTION("task frame rates") {
        CHECK(peaf::task_frame_rate(peaf::PowerTask::kws) == 30.0);
        CHECK(peaf::task_frame_rate(peaf::PowerTask::wwd) == 10.0);
    }
}

TEST_CASE("classifier presets reproduce the published power figures to two significant figures") {
    struct Row {
        const char* name;
        peaf::PowerTask task;
        double published_uw;
    };
    const Row rows[] = {
        {"mini-efficientnet", peaf::PowerTask::kws, 0.097},
        {"mini-efficientnet", peaf::PowerTask::wwd, 0.079},
        {"lenet-5", peaf::PowerTask::kws, 0.34},
        {"lenet-5", peaf::PowerTask::wwd, 0.30},
        {"ds-cnn", peaf::PowerTask::kws, 8.3},
        {"ds-cnn", peaf::PowerTask::wwd, 5.4},
        {"efficientnet-b0", peaf::PowerTask::kws, 48.0},
    };
    for (const auto& row : rows) {
        const auto& preset = peaf::find_preset(row.name);
        const auto& n_ops = row.task == peaf::PowerTask::kws ? preset.n_ops_kws : preset.n_ops_wwd;
        REQUIRE(n_ops.has_value());
        const double p_uw =
            peaf::classifier_power(*n_ops, peaf::task_frame_rate(row.task), 36.5e12) * 1e6;
        INFO(row.name << " " << peaf::task_name(row.task));
        CHECK(round_to_2sf(p_uw) == Approx(row.published_uw).epsilon(1e-9));
    }

    SECTION("EfficientNet-B0 has no published WWD figure") {
        CHECK_THROWS_AS(peaf::power_report_preset(peaf::FeatureKind::l_peaf,
                                                  peaf::find_preset("efficientnet-b0"),
                                                  peaf::PowerTask::wwd),
                        std::invalid_argument);
    }
    SECTION("unknown preset rejected") {
        CHECK_THROWS_AS(peaf::find_preset("resnet"), std::invalid_argument);
    }
}
