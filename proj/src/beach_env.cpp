#include "mardpg/beach_env.hpp"

#include <cmath>
#include <stdexcept>

namespace mardpg {

BeachEnv::BeachEnv(const BeachConfig& config) : config_(config) {
    if (config.grid < 2 || config.rho <= 0.0) {
        throw std::invalid_argument("BeachEnv: need grid >= 2 and rho > 0");
    }
}

std::pair<Vec, int> BeachEnv::reset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    pos_[0] = u(rng);
    pos_[1] = u(rng);
    turn_ = 0;
    terminal_ = false;
    return {observation(0), 0};
}

Vec BeachEnv::observation(int agent) const {
    return {pos_[agent], pos_[1 - agent], static_cast<double>(agent),
            static_cast<double>(turn_) / 2.0};
}

EnvStep BeachEnv::step(const Vec& padded_action) {
    if (terminal_) {
        throw std::runtime_error("BeachEnv: stepped after terminal");
    }
    const AgentSpec& spec = specs_[static_cast<std::size_t>(turn_)];
    for (int i = 0; i < static_cast<int>(padded_action.size()); ++i) {
        const bool inside = i >= spec.slice_begin && i < spec.slice_begin + spec.action_dim;
        if (!inside && padded_action[static_cast<std::size_t>(i)] != 0.0) {
            throw std::invalid_argument("BeachEnv: action outside agent " +
                                        std::to_string(spec.agent_id) + "'s slice");
        }
    }
    // The 2-dim simplex action encodes the target position as its first
    // component; the second is slack.
    const double target = padded_action[static_cast<std::size_t>(spec.slice_begin)];
    pos_[turn_] = std::min(1.0, std::max(0.0, target));

    EnvStep out;
    if (turn_ == 0) {
        turn_ = 1;
        out.next_obs = observation(1);
        out.next_agent = 1;
        out.reward = 0.0;
        out.terminal = false;
    } else {
        out.reward = coverage(pos_[0], pos_[1], config_.rho, config_.grid);
        out.terminal = true;
        terminal_ = true;
    }
    return out;
}

int BeachEnv::coverage(double p0, double p1, double rho, int grid) {
    int served = 0;
    for (int j = 0; j < grid; ++j) {
        const double x = static_cast<double>(j) / (grid - 1);
        const double d = std::min(std::abs(x - p0), std::abs(x - p1));
        if (d <= rho + 1e-12) served += 1;
    }
    return served;
}

BeachOracleResult beach_bruteforce(double rho, int grid, int resolution) {
    if (resolution < 2) {
        throw std::invalid_argument("beach_bruteforce: resolution must be >= 2");
    }
    BeachOracleResult result;
    result.hotelling_reward = BeachEnv::coverage(0.5, 0.5, rho, grid);
    for (int i = 0; i < resolution; ++i) {
        const double p0 = static_cast<double>(i) / (resolution - 1);
        for (int j = i; j < resolution; ++j) {
            const double p1 = static_cast<double>(j) / (resolution - 1);
            const int reward = BeachEnv::coverage(p0, p1, rho, grid);
            if (reward > result.best_reward) {
                result.best_reward = reward;
                result.best_p0 = p0;
                result.best_p1 = p1;
            }
        }
    }
    return result;
}

}  // namespace mardpg
