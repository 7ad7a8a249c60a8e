#pragma once

#include <array>
#include <span>

#include "abba/advisor/records.hpp"
#include "abba/rl/actor_critic.hpp"

namespace abba::advisor {

/// Thresholds of the tight range and the scales mapping raw excursions onto [0, 1].
struct FeatureConfig {
    double g_low = 90.0;
    double g_high = 150.0;
    double hyper_scale = 250.0;  // 400 - g_high
    double hypo_scale = 50.0;    // g_low - 40
};

/// Mean excess above g_high over the samples above it, and mean deficit below
/// g_low over the samples below it. Empty sets give exactly 0.
struct RawFeatures {
    double hyper_mgdl = 0.0;
    double hypo_mgdl = 0.0;
    int n_hyper = 0;
    int n_hypo = 0;
    int n_samples = 0;
};

struct SupervisoryInputs {
    int hyponumber = 0;  // samples < 70
    int n1 = 0;          // samples < 80
    int n2 = 0;          // samples > 130
};

struct DailyFeatures {
    rl::FeatureVector br;
    std::array<rl::FeatureVector, kMainMeals> cir{};
    RawFeatures br_raw;
    std::array<RawFeatures, kMainMeals> cir_raw{};
    SupervisoryInputs br_counts;
    bool no_data = false;
    std::array<bool, kMainMeals> cir_no_data{true, true, true};
};

RawFeatures raw_features(std::span<const GlucoseSample> samples, const FeatureConfig& cfg = {});
rl::FeatureVector normalize(const RawFeatures& raw, const FeatureConfig& cfg = {});
SupervisoryInputs supervisory_inputs(std::span<const GlucoseSample> samples);

/// Samples the basal features are computed from: t in [0, 1440).
std::span<const GlucoseSample> day_samples(const GlucoseDayRecord& record);

/// Samples in meal `meal_index`'s window: from its announcement up to the next
/// main-meal announcement (which may fall on the following morning). Empty if
/// the meal was not announced that day.
std::vector<GlucoseSample> meal_window(const GlucoseDayRecord& record, int meal_index);

DailyFeatures extract_features_smbg(const GlucoseDayRecord& record, const FeatureConfig& cfg = {});
DailyFeatures extract_features_cgm(const GlucoseDayRecord& record, const FeatureConfig& cfg = {});
DailyFeatures extract_features(const GlucoseDayRecord& record, const FeatureConfig& cfg = {});

}  // namespace abba::advisor
