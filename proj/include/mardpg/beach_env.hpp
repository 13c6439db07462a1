#pragma once

#include "mardpg/env.hpp"

namespace mardpg {

// Two snack sellers on a [0,1] beach with G customers on a uniform grid.
// Each episode: seller 0 repositions, then seller 1, then the team is paid
// one unit per customer within `rho` of the nearest seller. The competitive
// (Hotelling) habit of meeting in the middle is strictly worse than spreading
// out, which is what the team reward is meant to teach.
struct BeachConfig {
    double rho = 0.25;
    int grid = 101;
};

class BeachEnv : public Env {
public:
    explicit BeachEnv(const BeachConfig& config);

    std::pair<Vec, int> reset(std::mt19937_64& rng) override;
    EnvStep step(const Vec& padded_action) override;

    int obs_dim() const override { return 4; }  // own pos, other pos, agent flag, turn flag
    const std::vector<AgentSpec>& agent_specs() const override { return specs_; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<BeachEnv>(*this); }

    // Customers within rho of the nearest seller, each counted once.
    static int coverage(double p0, double p1, double rho, int grid);

    const BeachConfig& config() const { return config_; }
    std::pair<double, double> positions() const { return {pos_[0], pos_[1]}; }

private:
    Vec observation(int agent) const;

    BeachConfig config_;
    std::vector<AgentSpec> specs_ = {{0, 2, 0}, {1, 2, 2}};
    double pos_[2] = {0.0, 0.0};
    int turn_ = 0;
    bool terminal_ = true;
};

struct BeachOracleResult {
    double best_p0 = 0.0;
    double best_p1 = 0.0;
    int best_reward = 0;
    int hotelling_reward = 0;  // both sellers at the center
};

// Exhaustive search over a resolution x resolution position grid for the
// cooperative optimum.
BeachOracleResult beach_bruteforce(double rho, int grid, int resolution);

}  // namespace mardpg
