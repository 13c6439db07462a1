#pragma once

#include <random>
#include <string>
#include <vector>

#include "mardpg/nn.hpp"
#include "mardpg/optim.hpp"
#include "mardpg/vec.hpp"

namespace mardpg {

// One agent's identity: which contiguous slice of the padded action vector it
// owns. Slices of distinct agents are disjoint and together cover the padded
// length exactly.
struct AgentSpec {
    int agent_id = 0;
    int action_dim = 0;
    int slice_begin = 0;
};

struct ModelDims {
    int obs_dim = 52;
    int msg_dim = 10;
    std::vector<int> hidden = {32, 32};
    std::vector<AgentSpec> agents = {{0, 7, 0}, {1, 3, 7}};

    int padded_dim() const;
    int num_agents() const { return static_cast<int>(agents.size()); }
    void validate() const;
};

// Deterministic policy: (message, observation) -> simplex weight vector.
struct Actor {
    AgentSpec spec;
    Mlp net;  // (msg_dim + obs_dim) -> hidden... -> action_dim, ReLU/.../softmax
};

// Centralized action-value estimator Q(message, observation, padded action).
struct Critic {
    Mlp net;  // (msg_dim + obs_dim + padded_dim) -> hidden... -> 1, linear output
};

// Recurrent message channel. The hidden state h is the message passed between
// agents; the cell state c never leaves the channel.
struct CommChannel {
    LstmParams cell;  // input = obs_dim + padded_dim, hidden = msg_dim
    Vec h, c;

    void reset();
    // Advances one step on [obs; padded_action] and returns the new message.
    const Vec& step(const Vec& obs, const Vec& padded_action);
};

struct MardpgModel {
    ModelDims dims;
    std::vector<Actor> actors;
    Critic critic;
    LstmParams comm;
};

MardpgModel make_model(const ModelDims& dims, uint64_t seed);

Vec actor_forward(const Actor& actor, const Vec& message, const Vec& obs);

// Exploration variant: zero-mean Gaussian noise on the pre-softmax logits,
// renormalized through the softmax.
Vec actor_forward_explore(const Actor& actor, const Vec& message, const Vec& obs,
                          std::mt19937_64& rng, double sigma);

double critic_forward(const Critic& critic, const Vec& message, const Vec& obs,
                      const Vec& padded_action);

Vec pad_action(const AgentSpec& spec, const Vec& action, int padded_dim);
Vec unpad_action(const AgentSpec& spec, const Vec& padded);

// Parameter views over the full model, with stable names (actor0.l0.w, ...,
// critic.l1.b, comm.wi, ...). Gradient stores mirror the same order.
ParamViews model_param_views(MardpgModel& model);

}  // namespace mardpg
