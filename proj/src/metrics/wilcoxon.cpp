#include "abba/metrics/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace abba::metrics {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, std::size_t exact_limit) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("wilcoxon_signed_rank: samples differ in length");
    }
    if (x.size() < 6) {
        throw std::invalid_argument("wilcoxon_signed_rank: at least 6 pairs required");
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    WilcoxonResult r;
    r.n = diffs.size();
    if (r.n == 0) {
        r.all_zero = true;
        return r;
    }
    std::vector<double> magnitudes(r.n);
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    const std::vector<double> ranks = average_ranks(magnitudes);
    for (std::size_t i = 0; i < r.n; ++i) {
        (diffs[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
    }
    r.statistic = std::min(r.w_plus, r.w_minus);

    if (r.n <= exact_limit) {
        // distribution of the doubled positive-rank sum; tie-averaged ranks double to integers
        std::vector<int> doubled(r.n);
        std::transform(ranks.begin(), ranks.end(), doubled.begin(),
                       [](double rank) { return static_cast<int>(std::lround(2.0 * rank)); });
        const int total = std::accumulate(doubled.begin(), doubled.end(), 0);
        std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
        counts[0] = 1.0;
        int reach = 0;
        for (int d : doubled) {
            for (int s = reach; s >= 0; --s) {
                counts[static_cast<std::size_t>(s + d)] += counts[static_cast<std::size_t>(s)];
            }
            reach += d;
        }
        const long threshold = std::lround(2.0 * r.statistic);
        double tail = 0.0;
        for (long s = 0; s <= threshold; ++s) tail += counts[static_cast<std::size_t>(s)];
        r.p = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(r.n)));
        r.exact = true;
        return r;
    }

    const double n = static_cast<double>(r.n);
    double tie_term = 0.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    r.exact = false;
    return r;
}

}  // namespace abba::metrics
