#pragma once

#include <deque>
#include <random>
#include <vector>

#include "mardpg/vec.hpp"

namespace mardpg {

struct Transition {
    int agent_id = 0;
    Vec obs;
    Vec action;  // padded
    double reward = 0.0;
    bool terminal = false;
};

// One collected trajectory. Messages are recomputed from (obs, action) with
// the current communication parameters during training; the trace recorded at
// collection time is kept only as a diagnostic. When a non-terminal episode
// is cut off at the step limit, the observation that would have come next is
// kept so TD targets can still bootstrap.
struct Episode {
    std::vector<Transition> steps;
    std::vector<Vec> message_trace;  // h_1..h_T as produced during collection

    Vec final_obs;        // set iff truncated (last transition non-terminal)
    int final_agent = -1;

    int length() const { return static_cast<int>(steps.size()); }
    bool truncated() const { return !steps.empty() && !steps.back().terminal; }
    double total_reward() const {
        double sum = 0.0;
        for (const auto& t : steps) sum += t.reward;
        return sum;
    }
};

// Bounded FIFO of episodes, oldest evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void store(Episode episode);
    // Uniform sample of k episodes: without replacement while k <= size,
    // with replacement once k exceeds the buffer size.
    std::vector<const Episode*> sample(std::size_t k, std::mt19937_64& rng) const;

    std::size_t size() const { return episodes_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Episode& at(std::size_t i) const { return episodes_[i]; }

private:
    std::size_t capacity_;
    std::deque<Episode> episodes_;
};

}  // namespace mardpg
