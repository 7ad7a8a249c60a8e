#include "abba/rl/actor_critic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace abba::rl {

std::vector<double> basis(FeatureVector f) { return {f.hyper, f.hypo, 1.0}; }

double LearningRateSchedule::at(std::size_t k) const {
    return initial / (1.0 + static_cast<double>(k) / decay_steps);
}

double value_approx(const CriticState& critic, std::span<const double> g) {
    if (g.size() != critic.w.size()) {
        throw std::invalid_argument("value_approx: basis has " + std::to_string(g.size()) +
                                    " entries, weights have " + std::to_string(critic.w.size()));
    }
    double v = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        v += critic.w[i] * g[i];
    }
    return v;
}

double td_error(double cost, double v_now, double v_next, double gamma) {
    return cost + gamma * v_next - v_now;
}

CriticState critic_update(CriticState critic, double d, std::span<const double> g_next) {
    if (g_next.size() != critic.w.size() || critic.z.size() != critic.w.size()) {
        throw std::invalid_argument("critic_update: inconsistent vector dimensions");
    }
    const double a = critic.schedule.at(critic.step);
    for (std::size_t i = 0; i < critic.w.size(); ++i) {
        critic.w[i] += a * d * critic.z[i];
    }
    for (std::size_t i = 0; i < critic.z.size(); ++i) {
        critic.z[i] = critic.lambda * critic.z[i] + g_next[i];
    }
    ++critic.step;
    return critic;
}

double deterministic_action(const PolicyParams& theta, FeatureVector f) {
    return f.hyper * theta[0] + f.hypo * theta[1];
}

double exploration_sigma(FeatureVector f, double c_sigma) {
    return c_sigma * (f.hyper * f.hyper + f.hypo * f.hypo);
}

ControlAction compose_action(double p_a, double p_s, double sigma, Rng& rng, double h) {
    ControlAction a;
    a.p_a = p_a;
    a.p_s = p_s;
    a.sigma = sigma;
    a.p_d = h * p_a + (1.0 - h) * p_s;
    a.noise = sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0;
    a.p_e = a.p_d + a.noise;
    return a;
}

PolicyParams policy_gradient(const ActorState& actor, FeatureVector f) {
    return {actor.h * f.hyper, actor.h * f.hypo};
}

ActorState actor_update(ActorState actor, double d, const ControlAction& action, FeatureVector f) {
    if (!(action.sigma > 0.0)) {
        return actor;
    }
    const double ratio = (action.p_e - action.p_d) / (action.sigma * action.sigma);
    const PolicyParams grad = policy_gradient(actor, f);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        actor.theta[i] -= actor.beta * d * ratio * grad[i];
    }
    return actor;
}

UnitStep advance(ControllerUnit& unit, FeatureVector f, double cost, double p_s, Rng& rng) {
    UnitStep out;
    out.cost = cost;
    const std::vector<double> g = basis(f);
    const double v_next = value_approx(unit.critic, g);

    if (unit.previous) {
        out.td = td_error(cost, unit.critic.last_value, v_next, unit.critic.gamma);
        const ActorState before = unit.actor;
        unit.actor = actor_update(unit.actor, out.td, unit.previous->action, unit.previous->features);
        out.actor_updated = before.theta != unit.actor.theta;
    }
    unit.critic = critic_update(std::move(unit.critic), out.td, g);
    // the new state's value under the updated weights seeds the next TD error
    unit.critic.last_value = value_approx(unit.critic, g);

    const double p_a = deterministic_action(unit.actor.theta, f);
    const double sigma = exploration_sigma(f, unit.actor.c_sigma);
    out.action = compose_action(p_a, p_s, sigma, rng, unit.actor.h);
    unit.previous = Decision{f, out.action};
    ++unit.updates;
    return out;
}

}  // namespace abba::rl
