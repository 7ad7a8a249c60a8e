#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace abba::metrics {

struct WilcoxonResult {
    double statistic = 0.0;  // min(W+, W-)
    double w_plus = 0.0;
    double w_minus = 0.0;
    std::size_t n = 0;       // non-zero differences
    double p = 1.0;          // two-sided
    bool exact = true;
    bool all_zero = false;
};

/// Tie-averaged ranks (1-based) of the given values.
std::vector<double> average_ranks(std::span<const double> values);

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped. Exact null distribution for n <= exact_limit (ties handled by
/// enumerating the tie-averaged ranks), otherwise a normal approximation with
/// tie and continuity corrections. Throws std::invalid_argument unless both
/// samples have the same length >= 6.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    std::size_t exact_limit = 25);

}  // namespace abba::metrics
