#include "abba/advisor/transfer_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "abba/rng.hpp"

namespace abba::advisor {

std::vector<int> equiprobable_bins(std::span<const double> x, int bins) {
    if (bins < 1) {
        throw std::invalid_argument("equiprobable_bins: bins must be >= 1");
    }
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<int> symbols(n, 0);
    std::size_t first_rank = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r > 0 && x[order[r]] != x[order[r - 1]]) {
            first_rank = r;
        }
        symbols[order[r]] = static_cast<int>(first_rank * static_cast<std::size_t>(bins) / n);
    }
    return symbols;
}

namespace {

double te_from_symbols(const std::vector<int>& xs, const std::vector<int>& ys, int bins, int lag) {
    const std::size_t n = ys.size();
    const auto b = static_cast<std::size_t>(bins);
    if (n <= static_cast<std::size_t>(lag)) {
        return 0.0;
    }
    const std::size_t count = n - static_cast<std::size_t>(lag);
    // joint counts indexed [y'][y][x]
    std::vector<double> joint(b * b * b, 0.0);
    for (std::size_t t = 0; t < count; ++t) {
        const auto yn = static_cast<std::size_t>(ys[t + lag]);
        const auto y = static_cast<std::size_t>(ys[t + lag - 1]);
        const auto x = static_cast<std::size_t>(xs[t]);
        joint[(yn * b + y) * b + x] += 1.0;
    }
    std::vector<double> yx(b * b, 0.0);   // [y][x]
    std::vector<double> yny(b * b, 0.0);  // [y'][y]
    std::vector<double> y_only(b, 0.0);
    for (std::size_t yn = 0; yn < b; ++yn) {
        for (std::size_t y = 0; y < b; ++y) {
            for (std::size_t x = 0; x < b; ++x) {
                const double c = joint[(yn * b + y) * b + x];
                yx[y * b + x] += c;
                yny[yn * b + y] += c;
                y_only[y] += c;
            }
        }
    }
    double te = 0.0;
    const double total = static_cast<double>(count);
    for (std::size_t yn = 0; yn < b; ++yn) {
        for (std::size_t y = 0; y < b; ++y) {
            for (std::size_t x = 0; x < b; ++x) {
                const double c = joint[(yn * b + y) * b + x];
                if (c == 0.0) continue;
                te += (c / total) * std::log((c * y_only[y]) / (yx[y * b + x] * yny[yn * b + y]));
            }
        }
    }
    return std::max(te, 0.0);
}

}  // namespace

double transfer_entropy(std::span<const double> source, std::span<const double> target, int bins, int lag) {
    if (source.size() != target.size()) {
        throw std::invalid_argument("transfer_entropy: series lengths differ");
    }
    if (lag < 1) {
        throw std::invalid_argument("transfer_entropy: lag must be >= 1");
    }
    return te_from_symbols(equiprobable_bins(source, bins), equiprobable_bins(target, bins), bins, lag);
}

TeEstimate estimate_transfer_entropy(std::span<const double> source, std::span<const double> target, int bins,
                                     int surrogates, std::uint64_t seed) {
    if (source.size() != target.size()) {
        throw std::invalid_argument("estimate_transfer_entropy: series lengths differ");
    }
    TeEstimate est;
    std::vector<int> xs = equiprobable_bins(source, bins);
    const std::vector<int> ys = equiprobable_bins(target, bins);
    est.raw = te_from_symbols(xs, ys, bins, 1);
    if (surrogates < 2) {
        est.effective = est.raw;
        return est;
    }
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int s = 0; s < surrogates; ++s) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::swap(xs[i - 1], xs[rng.below(i)]);
        }
        const double te = te_from_symbols(xs, ys, bins, 1);
        sum += te;
        sum_sq += te * te;
    }
    const double n = static_cast<double>(surrogates);
    est.surrogate_mean = sum / n;
    est.surrogate_sd = std::sqrt(std::max(0.0, (sum_sq - n * est.surrogate_mean * est.surrogate_mean) / (n - 1.0)));
    est.effective = std::max(0.0, est.raw - est.surrogate_mean - 2.0 * est.surrogate_sd);
    return est;
}

std::vector<double> active_insulin(std::span<const double> deliveries, double time_constant, double slot_minutes) {
    if (!(time_constant >= slot_minutes) || !(slot_minutes > 0.0)) {
        throw std::invalid_argument("active_insulin: time constant must be at least one slot");
    }
    const double a = slot_minutes / time_constant;
    std::vector<double> out;
    out.reserve(deliveries.size());
    double c1 = 0.0;
    double c2 = 0.0;
    for (double u : deliveries) {
        const double moved = a * c1;
        c1 += u - moved;
        c2 += moved - a * c2;
        out.push_back(c2);
    }
    return out;
}

double reference_transfer_entropy() {
    static const double value = [] {
        constexpr std::size_t kSamples = 7 * 288;
        Rng rng(derive_seed(0, 0, 0, "reference-responder"));
        std::vector<double> insulin(kSamples);
        std::vector<double> glucose(kSamples);
        for (auto& u : insulin) u = rng.uniform();
        double g = 0.0;
        for (std::size_t t = 0; t < kSamples; ++t) {
            glucose[t] = g;
            g = 0.9 * g - 0.4 * insulin[t] + 0.3 * rng.normal();
        }
        return estimate_transfer_entropy(insulin, glucose).effective;
    }();
    return value;
}

}  // namespace abba::advisor
