#include "mardpg/agents.hpp"

#include <algorithm>
#include <stdexcept>

namespace mardpg {

int ModelDims::padded_dim() const {
    int total = 0;
    for (const auto& a : agents) total += a.action_dim;
    return total;
}

void ModelDims::validate() const {
    if (obs_dim <= 0 || msg_dim <= 0) {
        throw std::invalid_argument("ModelDims: obs_dim and msg_dim must be positive");
    }
    if (agents.empty()) {
        throw std::invalid_argument("ModelDims: need at least one agent");
    }
    // Slices must be disjoint and cover [0, padded_dim) exactly.
    std::vector<AgentSpec> sorted = agents;
    std::sort(sorted.begin(), sorted.end(),
              [](const AgentSpec& a, const AgentSpec& b) { return a.slice_begin < b.slice_begin; });
    int cursor = 0;
    for (const auto& a : sorted) {
        if (a.action_dim <= 0) {
            throw std::invalid_argument("ModelDims: agent " + std::to_string(a.agent_id) +
                                        " has non-positive action_dim");
        }
        if (a.slice_begin != cursor) {
            throw std::invalid_argument("ModelDims: agent slices must tile the padded vector; "
                                        "gap or overlap at index " + std::to_string(cursor));
        }
        cursor += a.action_dim;
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].agent_id != static_cast<int>(i)) {
            throw std::invalid_argument("ModelDims: agents must be listed in agent_id order");
        }
    }
}

void CommChannel::reset() {
    const int hidden = cell.hidden_dim();
    h.assign(static_cast<std::size_t>(hidden), 0.0);
    c.assign(static_cast<std::size_t>(hidden), 0.0);
}

const Vec& CommChannel::step(const Vec& obs, const Vec& padded_action) {
    const Vec x = concat(obs, padded_action);
    lstm_cell_forward(cell, h, c, x, h, c);
    return h;
}

MardpgModel make_model(const ModelDims& dims, uint64_t seed) {
    dims.validate();
    MardpgModel model;
    model.dims = dims;
    std::mt19937_64 rng(seed);

    for (const auto& spec : dims.agents) {
        std::vector<int> layer_dims = {dims.msg_dim + dims.obs_dim};
        std::vector<Act> acts;
        for (int hidden_layer : dims.hidden) {
            layer_dims.push_back(hidden_layer);
            acts.push_back(Act::relu);
        }
        layer_dims.push_back(spec.action_dim);
        acts.push_back(Act::softmax);
        Actor actor{spec, make_mlp(layer_dims, acts)};
        init_glorot(actor.net, rng);
        model.actors.push_back(std::move(actor));
    }

    {
        std::vector<int> layer_dims = {dims.msg_dim + dims.obs_dim + dims.padded_dim()};
        std::vector<Act> acts;
        for (int hidden_layer : dims.hidden) {
            layer_dims.push_back(hidden_layer);
            acts.push_back(Act::relu);
        }
        layer_dims.push_back(1);
        acts.push_back(Act::linear);
        model.critic.net = make_mlp(layer_dims, acts);
        init_glorot(model.critic.net, rng);
    }

    model.comm = make_lstm(dims.obs_dim + dims.padded_dim(), dims.msg_dim);
    init_glorot(model.comm, rng);
    return model;
}

Vec actor_forward(const Actor& actor, const Vec& message, const Vec& obs) {
    return mlp_forward(actor.net, concat(message, obs));
}

Vec actor_forward_explore(const Actor& actor, const Vec& message, const Vec& obs,
                          std::mt19937_64& rng, double sigma) {
    Vec logits = mlp_logits(actor.net, concat(message, obs));
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (double& z : logits) z += noise(rng);
    }
    return softmax(logits);
}

double critic_forward(const Critic& critic, const Vec& message, const Vec& obs,
                      const Vec& padded_action) {
    return mlp_forward(critic.net, concat(message, obs, padded_action))[0];
}

Vec pad_action(const AgentSpec& spec, const Vec& action, int padded_dim) {
    if (static_cast<int>(action.size()) != spec.action_dim) {
        throw std::invalid_argument("pad_action: agent " + std::to_string(spec.agent_id) +
                                    " action length " + std::to_string(action.size()) + " != " +
                                    std::to_string(spec.action_dim));
    }
    Vec padded(static_cast<std::size_t>(padded_dim), 0.0);
    std::copy(action.begin(), action.end(),
              padded.begin() + static_cast<std::ptrdiff_t>(spec.slice_begin));
    return padded;
}

Vec unpad_action(const AgentSpec& spec, const Vec& padded) {
    return slice(padded, static_cast<std::size_t>(spec.slice_begin),
                 static_cast<std::size_t>(spec.action_dim));
}

ParamViews model_param_views(MardpgModel& model) {
    std::vector<ParamViews> groups;
    for (std::size_t i = 0; i < model.actors.size(); ++i) {
        groups.push_back(views_of(model.actors[i].net, "actor" + std::to_string(i)));
    }
    groups.push_back(views_of(model.critic.net, "critic"));
    groups.push_back(views_of(model.comm, "comm"));
    return join(std::move(groups));
}

}  // namespace mardpg
