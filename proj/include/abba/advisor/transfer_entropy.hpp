#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace abba::advisor {

/// Rank-based equiprobable discretization into `bins` symbols. Equal values
/// share the symbol of their lowest rank, so a constant series maps to 0.
std::vector<int> equiprobable_bins(std::span<const double> x, int bins);

/// Plug-in transfer entropy source -> target in nats, history length 1 and
/// source lag `lag` steps:
///   sum p(y', y, x) log[ p(y' | y, x) / p(y' | y) ]
/// with y' = target[t + lag], y = target[t + lag - 1], x = source[t].
double transfer_entropy(std::span<const double> source, std::span<const double> target, int bins = 6, int lag = 1);

struct TeEstimate {
    double raw = 0.0;
    double surrogate_mean = 0.0;
    double surrogate_sd = 0.0;
    /// raw minus the shuffled-source significance level (mean + 2 sd), floored at 0.
    double effective = 0.0;
};

/// Transfer entropy corrected for the finite-sample bias of the plug-in
/// estimator using shuffled-source surrogates.
TeEstimate estimate_transfer_entropy(std::span<const double> source, std::span<const double> target, int bins = 6,
                                     int surrogates = 32, std::uint64_t seed = 0x5eed);

/// Active insulin on the delivery grid: per-slot deliveries passed through two
/// first-order compartments with time constant `time_constant` minutes.
std::vector<double> active_insulin(std::span<const double> deliveries, double time_constant = 55.0,
                                   double slot_minutes = 5.0);

/// Effective transfer entropy of the synthetic reference responder: a linear
/// glucose-like AR(1) target driven by an i.i.d. insulin-like source over one
/// week of 5-min samples. Computed once and cached.
double reference_transfer_entropy();

}  // namespace abba::advisor
