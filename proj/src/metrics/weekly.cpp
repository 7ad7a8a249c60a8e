#include "abba/metrics/weekly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace abba::metrics {

PatientWeekMetrics week_metrics(std::string patient, std::span<const double> trace,
                                std::span<const DayDeliveries> days, std::size_t samples_per_day) {
    PatientWeekMetrics m;
    m.patient = std::move(patient);
    m.bands = band_percentages(trace);
    m.risk = bg_risk_indices(trace);
    m.mage = mage(trace, samples_per_day);
    if (!days.empty()) {
        double total = 0.0;
        for (const auto& d : days) total += tdi(d);
        m.tdi = total / static_cast<double>(days.size());
    }
    return m;
}

FieldStats field_stats(std::vector<double> values) {
    FieldStats s;
    if (values.empty()) return s;
    const auto n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (n - 1.0));
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

WeeklySummary summarize_week(std::string week, std::vector<PatientWeekMetrics> patients) {
    std::sort(patients.begin(), patients.end(),
              [](const PatientWeekMetrics& a, const PatientWeekMetrics& b) { return a.patient < b.patient; });
    WeeklySummary s;
    s.week = std::move(week);
    auto collect = [&](const std::function<double(const PatientWeekMetrics&)>& field) {
        std::vector<double> v;
        v.reserve(patients.size());
        for (const auto& p : patients) v.push_back(field(p));
        return field_stats(std::move(v));
    };
    s.target = collect([](const auto& p) { return p.bands.target; });
    s.hypo = collect([](const auto& p) { return p.bands.hypo; });
    s.severe_hypo = collect([](const auto& p) { return p.bands.severe_hypo; });
    s.hyper = collect([](const auto& p) { return p.bands.hyper; });
    s.severe_hyper = collect([](const auto& p) { return p.bands.severe_hyper; });
    s.lbgi = collect([](const auto& p) { return p.risk.lbgi; });
    s.hbgi = collect([](const auto& p) { return p.risk.hbgi; });
    s.mage = collect([](const auto& p) { return p.mage.value; });
    s.tdi = collect([](const auto& p) { return p.tdi; });
    s.patients = std::move(patients);
    return s;
}

}  // namespace abba::metrics
