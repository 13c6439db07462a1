#pragma once

#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "mardpg/agents.hpp"
#include "mardpg/vec.hpp"

namespace mardpg {

struct EnvStep {
    Vec next_obs;        // empty when terminal
    int next_agent = -1; // undefined when terminal
    double reward = 0.0;
    bool terminal = false;
};

// Episodic environment with exactly one active agent per timestep. reset()
// draws a fresh session from the caller's rng; all sampling inside the
// session is then internally seeded, so identical reset draws give identical
// trajectories for identical action sequences.
class Env {
public:
    virtual ~Env() = default;

    virtual std::pair<Vec, int> reset(std::mt19937_64& rng) = 0;
    virtual EnvStep step(const Vec& padded_action) = 0;

    virtual int obs_dim() const = 0;
    virtual const std::vector<AgentSpec>& agent_specs() const = 0;
    virtual std::unique_ptr<Env> clone() const = 0;

    int padded_dim() const {
        int total = 0;
        for (const auto& a : agent_specs()) total += a.action_dim;
        return total;
    }
};

// Descending order of candidate rows by inner product with `weights`; ties
// break toward the lower index. Returns the permutation.
std::vector<int> rank_items(const std::vector<Vec>& feature_rows, const Vec& weights);

}  // namespace mardpg
