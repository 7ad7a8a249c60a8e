#pragma once

// Reference evaluators written independently of the library, used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

struct Reading {
    double t;
    double mgdl;
};

struct Announcement {
    double t;
    int meal;  // 0 snack, 1..3 main
};

struct Features {
    double hyper = 0.0;
    double hypo = 0.0;
};

// Mean excess over 150 of the readings above 150, mean deficit below 90 of
// those below 90, divided by 250 and 50 and capped to [0, 1].
inline Features tight_range_features(const std::vector<Reading>& readings) {
    double over = 0.0, under = 0.0;
    double n_over = 0.0, n_under = 0.0;
    for (const Reading& r : readings) {
        if (r.mgdl > 150.0) {
            over += r.mgdl - 150.0;
            n_over += 1.0;
        }
        if (r.mgdl < 90.0) {
            under += 90.0 - r.mgdl;
            n_under += 1.0;
        }
    }
    Features f;
    if (n_over > 0.0) f.hyper = std::min(1.0, std::max(0.0, over / n_over / 250.0));
    if (n_under > 0.0) f.hypo = std::min(1.0, std::max(0.0, under / n_under / 50.0));
    return f;
}

// Basal features: readings of the record day itself.
inline Features basal_features(const std::vector<Reading>& readings) {
    std::vector<Reading> day;
    for (const Reading& r : readings) {
        if (r.t < 1440.0) day.push_back(r);
    }
    return tight_range_features(day);
}

// Meal features: readings from the meal's announcement (that day) until the
// first later main-meal announcement, which may be the next morning's.
inline Features meal_features(const std::vector<Reading>& readings, const std::vector<Announcement>& meals, int meal) {
    double start = -1.0;
    for (const Announcement& a : meals) {
        if (a.meal == meal && a.t < 1440.0) {
            start = a.t;
            break;
        }
    }
    if (start < 0.0) return {};
    double stop = std::numeric_limits<double>::infinity();
    for (const Announcement& a : meals) {
        if (a.meal != 0 && a.t > start && a.t < stop) stop = a.t;
    }
    std::vector<Reading> window;
    for (const Reading& r : readings) {
        if (start <= r.t && r.t < stop) window.push_back(r);
    }
    return tight_range_features(window);
}

// Kovatchev risk: f = 1.509 ((ln g)^1.084 - 5.381), r = 10 f^2 split by sign of f.
inline void risk_indices(const std::vector<double>& g, double& lbgi, double& hbgi) {
    long double lo = 0.0L, hi = 0.0L;
    for (double v : g) {
        const long double f = 1.509L * (std::pow(std::log(static_cast<long double>(v)), 1.084L) - 5.381L);
        const long double r = 10.0L * f * f;
        if (f < 0) lo += r;
        if (f > 0) hi += r;
    }
    lbgi = static_cast<double>(lo / g.size());
    hbgi = static_cast<double>(hi / g.size());
}

// Two-sided signed-rank p by visiting every sign assignment of the observed
// absolute differences. Ranks are tie-averaged by counting.
inline double signed_rank_p_enumerated(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) d.push_back(x[i] - y[i]);
    }
    const std::size_t n = d.size();
    if (n == 0) return 1.0;
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double below = 0.0, same = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::fabs(d[j]) < std::fabs(d[i])) below += 1.0;
            if (std::fabs(d[j]) == std::fabs(d[i])) same += 1.0;
        }
        rank[i] = below + (same + 1.0) / 2.0;
    }
    double total = 0.0, plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += rank[i];
        if (d[i] > 0) plus += rank[i];
    }
    const double observed = std::min(plus, total - plus);
    std::uint64_t hits = 0;
    const std::uint64_t assignments = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < assignments; ++mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) s += rank[i];
        }
        if (std::min(s, total - s) <= observed + 1e-9) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(assignments);
}

// Central difference of a scalar function of a 2-vector.
template <class F>
inline void central_gradient(F f, const double theta[2], double step, double out[2]) {
    for (int k = 0; k < 2; ++k) {
        double up[2] = {theta[0], theta[1]};
        double dn[2] = {theta[0], theta[1]};
        up[k] += step;
        dn[k] -= step;
        out[k] = (f(up) - f(dn)) / (2.0 * step);
    }
}

}  // namespace oracle
