#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "abba/advisor/transfer_entropy.hpp"
#include "abba/rng.hpp"

using namespace abba;
using namespace abba::advisor;

namespace {

// TE as H(Y'|Y) - H(Y'|Y,X) from symbol counts.
double te_by_entropies(const std::vector<int>& x, const std::vector<int>& y) {
    std::map<std::tuple<int, int, int>, double> c3;
    std::map<std::pair<int, int>, double> cyy, cyx;
    std::map<int, double> cy;
    const std::size_t n = y.size() - 1;
    for (std::size_t t = 0; t < n; ++t) {
        c3[{y[t + 1], y[t], x[t]}] += 1;
        cyy[{y[t + 1], y[t]}] += 1;
        cyx[{y[t], x[t]}] += 1;
        cy[y[t]] += 1;
    }
    double h_yn_y = 0.0, h_yn_yx = 0.0;
    for (const auto& [k, c] : cyy) h_yn_y -= c / n * std::log(c / cy[k.second]);
    for (const auto& [k, c] : c3) h_yn_yx -= c / n * std::log(c / cyx[{std::get<1>(k), std::get<2>(k)}]);
    return h_yn_y - h_yn_yx;
}

}  // namespace

TEST_SUITE("transfer entropy") {

TEST_CASE("equiprobable bins") {
    std::vector<double> x(600);
    Rng rng(1);
    for (auto& v : x) v = rng.normal();
    const auto s = equiprobable_bins(x, 6);
    std::vector<int> counts(6, 0);
    for (int v : s) counts[static_cast<std::size_t>(v)]++;
    for (int c : counts) CHECK(c == 100);
    const auto flat = equiprobable_bins(std::vector<double>(50, 3.0), 6);
    for (int v : flat) CHECK(v == 0);
    CHECK_THROWS_AS(equiprobable_bins(x, 0), std::invalid_argument);
}

TEST_CASE("plug-in estimate matches the entropy decomposition") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(500), y(500);
        double g = 0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            x[t] = rng.uniform();
            y[t] = g;
            g = 0.5 * g + rng.uniform(-1, 1) * (trial % 3) + x[t];
        }
        const double expected = te_by_entropies(equiprobable_bins(x, 6), equiprobable_bins(y, 6));
        CHECK(transfer_entropy(x, y) == doctest::Approx(std::max(expected, 0.0)).epsilon(1e-10));
    }
}

TEST_CASE("independent series carry no effective transfer") {
    Rng rng(3);
    std::vector<double> x(2016), y(2016);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = rng.uniform();
        y[t] = rng.uniform();
    }
    const auto est = estimate_transfer_entropy(x, y);
    CHECK(est.raw < 0.1);
    CHECK(est.effective < 0.01);
}

TEST_CASE("a target copying the lagged source reaches the bin limit") {
    Rng rng(4);
    std::vector<double> x(2016), y(2016);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = rng.uniform();
        y[t] = t > 0 ? 3.0 * x[t - 1] : 0.0;
    }
    const auto est = estimate_transfer_entropy(x, y);
    CHECK(est.raw > 0.95 * std::log(6.0));
    CHECK(est.raw <= std::log(6.0) + 1e-9);
    CHECK(est.effective > 0.85 * std::log(6.0));
}

TEST_CASE("active insulin impulse response") {
    std::vector<double> impulse(200, 0.0);
    impulse[0] = 1.0;
    const auto out = active_insulin(impulse, 55.0, 5.0);
    const double a = 5.0 / 55.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double expected = k == 0 ? 0.0 : static_cast<double>(k) * a * std::pow(1 - a, static_cast<double>(k - 1));
        CHECK(out[k] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK_THROWS_AS(active_insulin(impulse, 1.0, 5.0), std::invalid_argument);
}

TEST_CASE("reference responder") {
    const double te = reference_transfer_entropy();
    CHECK(te > 0.0);
    CHECK(te < std::log(6.0));
    CHECK(reference_transfer_entropy() == te);
}

}
