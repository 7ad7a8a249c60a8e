#include "abba/metrics/glycaemic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace abba::metrics {

BandReport band_percentages(std::span<const double> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("band_percentages: empty trace");
    }
    std::size_t target = 0, hypo = 0, severe_hypo = 0, hyper = 0, severe_hyper = 0;
    for (double g : trace) {
        if (g < 50.0) {
            ++severe_hypo;
        } else if (g < 70.0) {
            ++hypo;
        } else if (g <= 180.0) {
            ++target;
        } else if (g <= 300.0) {
            ++hyper;
        } else {
            ++severe_hyper;
        }
    }
    const double scale = 100.0 / static_cast<double>(trace.size());
    return {target * scale, hypo * scale, severe_hypo * scale, hyper * scale, severe_hyper * scale};
}

double risk_transform(double mgdl) { return 1.509 * (std::pow(std::log(mgdl), 1.084) - 5.381); }

RiskIndices bg_risk_indices(std::span<const double> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("bg_risk_indices: empty trace");
    }
    double low = 0.0;
    double high = 0.0;
    for (double g : trace) {
        if (!(g > 0.0)) {
            throw std::invalid_argument("bg_risk_indices: non-positive glucose sample");
        }
        const double f = risk_transform(g);
        const double r = 10.0 * f * f;
        if (f < 0.0) {
            low += r;
        } else if (f > 0.0) {
            high += r;
        }
    }
    const auto n = static_cast<double>(trace.size());
    return {low / n, high / n};
}

namespace {

struct TurningPoint {
    double value;
    bool peak;
};

std::vector<TurningPoint> turning_points(std::span<const double> day) {
    std::vector<double> v;
    for (double g : day) {
        if (v.empty() || g != v.back()) v.push_back(g);
    }
    std::vector<TurningPoint> tps;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] > v[i - 1] && v[i] > v[i + 1]) {
            tps.push_back({v[i], true});
        } else if (v[i] < v[i - 1] && v[i] < v[i + 1]) {
            tps.push_back({v[i], false});
        }
    }
    return tps;
}

double more_extreme(const TurningPoint& a, const TurningPoint& b) {
    return a.peak ? std::max(a.value, b.value) : std::min(a.value, b.value);
}

/// Remove sub-threshold swings, smallest first, keeping the outer extremes.
void reduce(std::vector<TurningPoint>& tps, double threshold) {
    while (tps.size() >= 2) {
        std::size_t k = 0;
        double smallest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < tps.size(); ++i) {
            const double swing = std::abs(tps[i + 1].value - tps[i].value);
            if (swing < smallest) {
                smallest = swing;
                k = i;
            }
        }
        if (smallest >= threshold) {
            return;
        }
        if (k == 0) {
            if (tps.size() > 2) tps[2].value = more_extreme(tps[2], tps[0]);
            tps.erase(tps.begin());
        } else if (k + 2 == tps.size()) {
            tps[k - 1].value = more_extreme(tps[k - 1], tps[k + 1]);
            tps.pop_back();
        } else {
            // x, a, b, y -> x', y' where x' keeps the stronger of x and b, y' of a and y
            tps[k - 1].value = more_extreme(tps[k - 1], tps[k + 1]);
            tps[k + 2].value = more_extreme(tps[k + 2], tps[k]);
            tps.erase(tps.begin() + static_cast<std::ptrdiff_t>(k), tps.begin() + static_cast<std::ptrdiff_t>(k + 2));
        }
    }
}

double population_sd(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace

MageResult mage(std::span<const double> trace, std::size_t samples_per_day) {
    if (trace.empty() || samples_per_day == 0) {
        throw std::invalid_argument("mage: empty trace");
    }
    double total = 0.0;
    MageResult out;
    for (std::size_t start = 0; start < trace.size(); start += samples_per_day) {
        const auto day = trace.subspan(start, std::min(samples_per_day, trace.size() - start));
        const double sd = population_sd(day);
        if (!(sd > 0.0)) continue;
        auto tps = turning_points(day);
        reduce(tps, sd);
        for (std::size_t i = 0; i + 1 < tps.size(); ++i) {
            total += std::abs(tps[i + 1].value - tps[i].value);
            ++out.excursions;
        }
    }
    if (out.excursions == 0) {
        out.no_excursion = true;
        return out;
    }
    out.value = total / static_cast<double>(out.excursions);
    return out;
}

double DayDeliveries::basal_units() const {
    double units = 0.0;
    double rate = initial_rate;
    double from = 0.0;
    for (const auto& [t, r] : rate_changes) {
        units += rate * (t - from) / 60.0;
        from = t;
        rate = r;
    }
    units += rate * (1440.0 - from) / 60.0;
    return units;
}

double DayDeliveries::bolus_units() const {
    double units = 0.0;
    for (const auto& b : boluses) units += b.units;
    return units;
}

double tdi(const DayDeliveries& day) { return day.basal_units() + day.bolus_units(); }

}  // namespace abba::metrics
