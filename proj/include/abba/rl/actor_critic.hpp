#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "abba/rng.hpp"

namespace abba::rl {

/// Normalized daily state of one controlled quantity. Both components live
/// in [0, 1]; (0, 0) means the day stayed inside the tight range.
struct FeatureVector {
    double hyper = 0.0;
    double hypo = 0.0;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

using PolicyParams = std::array<double, 2>;

/// Number of critic basis functions: (hyper, hypo, bias).
inline constexpr std::size_t kBasisSize = 3;

std::vector<double> basis(FeatureVector f);

/// a_k = initial / (1 + k / decay_steps); positive and non-increasing in k.
struct LearningRateSchedule {
    double initial = 0.1;
    double decay_steps = 50.0;

    double at(std::size_t k) const;
};

struct CriticState {
    std::vector<double> w = std::vector<double>(kBasisSize, 0.0);
    std::vector<double> z = std::vector<double>(kBasisSize, 0.0);
    double gamma = 0.9;
    double lambda = 0.5;
    LearningRateSchedule schedule;
    std::size_t step = 0;
    double last_value = 0.0;
};

struct ActorState {
    PolicyParams theta{0.0, 0.0};
    double beta = 0.5;
    double h = 0.5;
    double c_sigma = 0.05;
};

struct ControlAction {
    double p_a = 0.0;
    double p_s = 0.0;
    double p_d = 0.0;
    double noise = 0.0;
    double p_e = 0.0;
    double sigma = 0.0;
};

/// Linear value estimate w . g. Throws std::invalid_argument on a dimension mismatch.
double value_approx(const CriticState& critic, std::span<const double> g);

/// d = cost + gamma * v_next - v_now.
double td_error(double cost, double v_now, double v_next, double gamma);

/// w' = w + a_k d z with the current trace, then z' = lambda z + g_next.
CriticState critic_update(CriticState critic, double d, std::span<const double> g_next);

double deterministic_action(const PolicyParams& theta, FeatureVector f);

/// sigma = c_sigma * |F|^2.
double exploration_sigma(FeatureVector f, double c_sigma);

/// p_d = h p_a + (1 - h) p_s, p_e = p_d + N(0, sigma). No draw is consumed when sigma == 0.
ControlAction compose_action(double p_a, double p_s, double sigma, Rng& rng, double h = 0.5);

/// Gradient of p_d with respect to theta. p_s does not depend on theta, so this is h F.
PolicyParams policy_gradient(const ActorState& actor, FeatureVector f);

/// theta' = theta - beta d ((p_e - p_d) / sigma^2) grad p_d. A zero sigma carries
/// no likelihood-ratio signal and leaves the actor untouched.
ActorState actor_update(ActorState actor, double d, const ControlAction& action, FeatureVector f);

/// One learning step's record: the features the action was computed from and the action.
struct Decision {
    FeatureVector features;
    ControlAction action;
};

/// Actor plus critic for a single controlled quantity (the basal rate or one CIR).
struct ControllerUnit {
    ActorState actor;
    CriticState critic;
    std::optional<Decision> previous;
    std::size_t updates = 0;
};

struct UnitStep {
    double cost = 0.0;
    double td = 0.0;
    ControlAction action;
    bool actor_updated = false;
};

/// Observe the day's features and cost, credit the previous action with the
/// resulting TD error, then choose the next action.
UnitStep advance(ControllerUnit& unit, FeatureVector f, double cost, double p_s, Rng& rng);

}  // namespace abba::rl
