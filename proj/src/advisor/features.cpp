#include "abba/advisor/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace abba::advisor {

std::string_view to_string(Mode mode) { return mode == Mode::Smbg ? "SMBG" : "CGM"; }

Mode mode_from_string(std::string_view text) {
    if (text == "SMBG" || text == "smbg") return Mode::Smbg;
    if (text == "CGM" || text == "cgm") return Mode::Cgm;
    throw std::invalid_argument("unknown monitoring mode '" + std::string(text) + "'");
}

bool TherapyProfile::valid() const {
    if (!(br > 0.0) || !std::isfinite(br)) return false;
    return std::all_of(cir.begin(), cir.end(), [](double c) { return c > 0.0 && std::isfinite(c); });
}

void GlucoseDayRecord::validate() const {
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (!std::isfinite(s.t) || !std::isfinite(s.mgdl) || s.mgdl <= 0.0) {
            throw std::invalid_argument("glucose record: non-finite or non-positive sample");
        }
        if (!(s.t > prev)) {
            throw std::invalid_argument("glucose record: sample timestamps not strictly increasing at t=" +
                                        std::to_string(s.t));
        }
        prev = s.t;
    }
    if (mode == Mode::Smbg) {
        const auto n = day_samples(*this).size();
        if (n > 4) {
            throw std::invalid_argument("glucose record: SMBG day carries " + std::to_string(n) +
                                        " samples, at most 4 expected");
        }
    }
    prev = -std::numeric_limits<double>::infinity();
    for (const auto& m : meals) {
        if (m.meal_index < kSnackIndex || m.meal_index > kMainMeals) {
            throw std::invalid_argument("glucose record: meal index out of range");
        }
        if (!(m.t > prev) || !(m.announced_cho >= 0.0)) {
            throw std::invalid_argument("glucose record: malformed meal announcement");
        }
        prev = m.t;
    }
}

RawFeatures raw_features(std::span<const GlucoseSample> samples, const FeatureConfig& cfg) {
    RawFeatures raw;
    double excess = 0.0;
    double deficit = 0.0;
    for (const auto& s : samples) {
        ++raw.n_samples;
        if (s.mgdl > cfg.g_high) {
            excess += s.mgdl - cfg.g_high;
            ++raw.n_hyper;
        } else if (s.mgdl < cfg.g_low) {
            deficit += cfg.g_low - s.mgdl;
            ++raw.n_hypo;
        }
    }
    raw.hyper_mgdl = raw.n_hyper > 0 ? excess / raw.n_hyper : 0.0;
    raw.hypo_mgdl = raw.n_hypo > 0 ? deficit / raw.n_hypo : 0.0;
    return raw;
}

rl::FeatureVector normalize(const RawFeatures& raw, const FeatureConfig& cfg) {
    return {std::clamp(raw.hyper_mgdl / cfg.hyper_scale, 0.0, 1.0),
            std::clamp(raw.hypo_mgdl / cfg.hypo_scale, 0.0, 1.0)};
}

SupervisoryInputs supervisory_inputs(std::span<const GlucoseSample> samples) {
    SupervisoryInputs in;
    for (const auto& s : samples) {
        if (s.mgdl < 70.0) ++in.hyponumber;
        if (s.mgdl < 80.0) ++in.n1;
        if (s.mgdl > 130.0) ++in.n2;
    }
    return in;
}

std::span<const GlucoseSample> day_samples(const GlucoseDayRecord& record) {
    const auto end = std::partition_point(record.samples.begin(), record.samples.end(),
                                          [](const GlucoseSample& s) { return s.t < kMinutesPerDay; });
    return {record.samples.data(), static_cast<std::size_t>(end - record.samples.begin())};
}

std::vector<GlucoseSample> meal_window(const GlucoseDayRecord& record, int meal_index) {
    const auto start_it = std::find_if(record.meals.begin(), record.meals.end(), [&](const MealAnnouncement& m) {
        return m.meal_index == meal_index && m.t < kMinutesPerDay;
    });
    if (start_it == record.meals.end()) {
        return {};
    }
    const double start = start_it->t;
    double end = std::numeric_limits<double>::infinity();
    for (auto it = std::next(start_it); it != record.meals.end(); ++it) {
        if (it->meal_index != kSnackIndex) {
            end = it->t;
            break;
        }
    }
    std::vector<GlucoseSample> window;
    for (const auto& s : record.samples) {
        if (s.t >= start && s.t < end) window.push_back(s);
    }
    return window;
}

namespace {

DailyFeatures extract(const GlucoseDayRecord& record, const FeatureConfig& cfg) {
    record.validate();
    DailyFeatures out;
    const auto day = day_samples(record);
    out.no_data = day.empty();
    out.br_raw = raw_features(day, cfg);
    out.br = normalize(out.br_raw, cfg);
    out.br_counts = supervisory_inputs(day);
    for (int i = 0; i < kMainMeals; ++i) {
        const auto window = meal_window(record, i + 1);
        out.cir_no_data[i] = window.empty();
        out.cir_raw[i] = raw_features(window, cfg);
        out.cir[i] = normalize(out.cir_raw[i], cfg);
    }
    return out;
}

}  // namespace

DailyFeatures extract_features_smbg(const GlucoseDayRecord& record, const FeatureConfig& cfg) {
    if (record.mode != Mode::Smbg) {
        throw std::invalid_argument("extract_features_smbg: record is not in SMBG mode");
    }
    return extract(record, cfg);
}

DailyFeatures extract_features_cgm(const GlucoseDayRecord& record, const FeatureConfig& cfg) {
    if (record.mode != Mode::Cgm) {
        throw std::invalid_argument("extract_features_cgm: record is not in CGM mode");
    }
    return extract(record, cfg);
}

DailyFeatures extract_features(const GlucoseDayRecord& record, const FeatureConfig& cfg) {
    return record.mode == Mode::Smbg ? extract_features_smbg(record, cfg) : extract_features_cgm(record, cfg);
}

}  // namespace abba::advisor
