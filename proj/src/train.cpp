#include "mardpg/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "mardpg/checkpoint.hpp"

namespace mardpg {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double clip_grads(LstmGrads& grads, double max_norm) {
    ParamViews views = views_of(grads, "g");
    const double norm = l2_norm(views);
    if (norm > max_norm) {
        grads.scale(max_norm / norm);
        return norm;
    }
    return norm;
}

bool grads_finite(LstmGrads& grads) {
    for (const ParamView& v : views_of(grads, "g")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v.data[i])) return false;
        }
    }
    return true;
}

}  // namespace

uint64_t mix_seed(uint64_t base, uint64_t index) {
    uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Episode collect_episode(Env& env, const std::vector<Actor>& actors, const LstmParams& comm,
                        std::mt19937_64& rng, double noise_sigma, int max_steps) {
    Episode episode;
    auto [obs, agent] = env.reset(rng);
    const int padded_dim = env.padded_dim();
    Vec h(static_cast<std::size_t>(comm.hidden_dim()), 0.0);
    Vec c(h.size(), 0.0);

    for (int t = 0; t < max_steps; ++t) {
        const Actor& actor = actors[static_cast<std::size_t>(agent)];
        const Vec action = actor_forward_explore(actor, h, obs, rng, noise_sigma);
        const Vec padded = pad_action(actor.spec, action, padded_dim);

        EnvStep step;
        try {
            step = env.step(padded);
        } catch (const std::exception& e) {
            throw std::runtime_error("collect_episode: env step failed at step " +
                                     std::to_string(t) + ": " + e.what());
        }

        episode.steps.push_back({agent, obs, padded, step.reward, step.terminal});
        lstm_cell_forward(comm, h, c, concat(obs, padded), h, c);
        episode.message_trace.push_back(h);

        if (step.terminal) break;
        if (t + 1 == max_steps) {
            episode.final_obs = step.next_obs;
            episode.final_agent = step.next_agent;
            break;
        }
        obs = std::move(step.next_obs);
        agent = step.next_agent;
    }
    return episode;
}

std::vector<Episode> collect_batch(const Env& proto, const std::vector<Actor>& actors,
                                   const LstmParams& comm, int count, uint64_t seed_base,
                                   double noise_sigma, int max_steps, ExecMode mode) {
    std::vector<Episode> episodes(static_cast<std::size_t>(count));
    std::vector<std::string> errors(static_cast<std::size_t>(count));
    parallel_for(count, mode, [&](int i) {
        try {
            auto env = proto.clone();
            std::mt19937_64 rng(mix_seed(seed_base, static_cast<uint64_t>(i)));
            episodes[static_cast<std::size_t>(i)] =
                collect_episode(*env, actors, comm, rng, noise_sigma, max_steps);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("collect_batch: episode " + std::to_string(i) + ": " +
                                     errors[i]);
        }
    }
    return episodes;
}

std::vector<Vec> recompute_messages(const LstmParams& comm, const Episode& episode) {
    std::vector<Vec> messages;
    messages.reserve(episode.steps.size() + 1);
    Vec h(static_cast<std::size_t>(comm.hidden_dim()), 0.0);
    Vec c(h.size(), 0.0);
    messages.push_back(h);
    for (const Transition& tr : episode.steps) {
        lstm_cell_forward(comm, h, c, concat(tr.obs, tr.action), h, c);
        messages.push_back(h);
    }
    return messages;
}

double td_target(const Critic& critic, const std::vector<Actor>& actors,
                 const std::vector<Vec>& messages, const Episode& episode, int t, double gamma) {
    const Transition& tr = episode.steps[static_cast<std::size_t>(t)];
    if (tr.terminal) return tr.reward;

    const Vec* next_obs = nullptr;
    int next_agent = -1;
    if (t + 1 < episode.length()) {
        next_obs = &episode.steps[static_cast<std::size_t>(t + 1)].obs;
        next_agent = episode.steps[static_cast<std::size_t>(t + 1)].agent_id;
    } else {
        if (episode.final_agent < 0) {
            throw std::runtime_error("td_target: truncated episode without a final observation");
        }
        next_obs = &episode.final_obs;
        next_agent = episode.final_agent;
    }
    const Actor& next_actor = actors[static_cast<std::size_t>(next_agent)];
    const Vec& h_next = messages[static_cast<std::size_t>(t + 1)];
    const Vec a_next = actor_forward(next_actor, h_next, *next_obs);
    const int padded_dim = static_cast<int>(tr.action.size());
    const double q_next =
        critic_forward(critic, h_next, *next_obs, pad_action(next_actor.spec, a_next, padded_dim));
    return tr.reward + gamma * q_next;
}

// ---------------------------------------------------------------------------
// Batch kernels
// ---------------------------------------------------------------------------

CriticBatchGrads critic_batch_grads(const MardpgModel& model, const Critic& bootstrap_critic,
                                    const std::vector<const Episode*>& batch, double gamma,
                                    ExecMode mode) {
    if (batch.empty()) {
        throw std::invalid_argument("critic_batch_grads: empty batch");
    }
    long total_steps = 0;
    for (const Episode* ep : batch) total_steps += ep->length();
    const double scale = 1.0 / static_cast<double>(total_steps);

    struct Slot {
        MlpGrads grads;
        double loss = 0.0;
        double q_sum = 0.0;
        std::string error;
    };
    std::vector<Slot> slots(batch.size());

    parallel_for(static_cast<int>(batch.size()), mode, [&](int i) {
        Slot& slot = slots[static_cast<std::size_t>(i)];
        try {
            const Episode& ep = *batch[static_cast<std::size_t>(i)];
            slot.grads = make_grads(model.critic.net);
            const std::vector<Vec> messages = recompute_messages(model.comm, ep);
            for (int t = 0; t < ep.length(); ++t) {
                const Transition& tr = ep.steps[static_cast<std::size_t>(t)];
                MlpTape tape;
                const double q = mlp_forward(model.critic.net,
                                             concat(messages[static_cast<std::size_t>(t)], tr.obs,
                                                    tr.action),
                                             &tape)[0];
                const double y =
                    td_target(bootstrap_critic, model.actors, messages, ep, t, gamma);
                const double err = q - y;
                if (!std::isfinite(err)) {
                    slot.error = "non-finite TD error at step " + std::to_string(t);
                    return;
                }
                mlp_backward(model.critic.net, tape, {2.0 * err * scale}, slot.grads);
                slot.loss += err * err * scale;
                slot.q_sum += q;
            }
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    CriticBatchGrads out;
    out.grads = make_grads(model.critic.net);
    out.steps = total_steps;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].error.empty()) {
            throw std::runtime_error("critic update: episode " + std::to_string(i) + ": " +
                                     slots[i].error);
        }
        out.grads.add(slots[i].grads);
        out.loss += slots[i].loss;
        out.mean_q += slots[i].q_sum;
    }
    out.mean_q /= static_cast<double>(total_steps);
    return out;
}

ActorBatchGrads actor_batch_grads(const MardpgModel& model,
                                  const std::vector<const Episode*>& batch, ExecMode mode,
                                  double entropy_weight) {
    if (batch.empty()) {
        throw std::invalid_argument("actor_batch_grads: empty batch");
    }
    const std::size_t n_agents = model.actors.size();
    const int padded_dim = model.dims.padded_dim();
    const int msg_dim = model.dims.msg_dim;
    const int obs_dim = model.dims.obs_dim;

    struct Slot {
        std::vector<MlpGrads> grads;
        std::vector<double> q_sum;
        std::vector<long> count;
        long skipped = 0;
        std::string error;
    };
    std::vector<Slot> slots(batch.size());

    parallel_for(static_cast<int>(batch.size()), mode, [&](int i) {
        Slot& slot = slots[static_cast<std::size_t>(i)];
        try {
            const Episode& ep = *batch[static_cast<std::size_t>(i)];
            slot.q_sum.assign(n_agents, 0.0);
            slot.count.assign(n_agents, 0);
            for (const Actor& actor : model.actors) slot.grads.push_back(make_grads(actor.net));

            const std::vector<Vec> messages = recompute_messages(model.comm, ep);
            MlpGrads critic_scratch = make_grads(model.critic.net);
            for (int t = 0; t < ep.length(); ++t) {
                const Transition& tr = ep.steps[static_cast<std::size_t>(t)];
                const Actor& actor = model.actors[static_cast<std::size_t>(tr.agent_id)];
                const Vec& h = messages[static_cast<std::size_t>(t)];

                MlpTape actor_tape;
                const Vec a = mlp_forward(actor.net, concat(h, tr.obs), &actor_tape);
                MlpTape critic_tape;
                const double q =
                    mlp_forward(model.critic.net,
                                concat(h, tr.obs, pad_action(actor.spec, a, padded_dim)),
                                &critic_tape)[0];

                const Vec d_input =
                    mlp_backward(model.critic.net, critic_tape, {1.0}, critic_scratch);
                Vec d_action = slice(
                    d_input, static_cast<std::size_t>(msg_dim + obs_dim + actor.spec.slice_begin),
                    static_cast<std::size_t>(actor.spec.action_dim));
                if (entropy_weight > 0.0) {
                    // d/da_i of H(a) = -ln a_i - 1.
                    for (std::size_t k = 0; k < d_action.size(); ++k) {
                        d_action[k] += entropy_weight * (-std::log(a[k] + 1e-12) - 1.0);
                    }
                }
                if (!all_finite(d_action) || !std::isfinite(q)) {
                    slot.skipped += 1;
                    continue;
                }
                mlp_backward(actor.net, actor_tape, d_action,
                             slot.grads[static_cast<std::size_t>(tr.agent_id)]);
                slot.q_sum[static_cast<std::size_t>(tr.agent_id)] += q;
                slot.count[static_cast<std::size_t>(tr.agent_id)] += 1;
            }
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    ActorBatchGrads out;
    for (const Actor& actor : model.actors) out.grads.push_back(make_grads(actor.net));
    out.mean_q.assign(n_agents, 0.0);
    out.active_steps.assign(n_agents, 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].error.empty()) {
            throw std::runtime_error("actor update: episode " + std::to_string(i) + ": " +
                                     slots[i].error);
        }
        for (std::size_t a = 0; a < n_agents; ++a) {
            out.grads[a].add(slots[i].grads[a]);
            out.mean_q[a] += slots[i].q_sum[a];
            out.active_steps[a] += slots[i].count[a];
        }
        out.skipped += slots[i].skipped;
    }
    for (std::size_t a = 0; a < n_agents; ++a) {
        if (out.active_steps[a] > 0) {
            const double inv = 1.0 / static_cast<double>(out.active_steps[a]);
            out.grads[a].scale(inv);
            out.mean_q[a] *= inv;
        }
    }
    return out;
}

CommBatchGrads comm_batch_grads(const MardpgModel& model, const Critic& bootstrap_critic,
                                const std::vector<const Episode*>& batch, double gamma,
                                double q_weight, double clip, ExecMode mode) {
    if (batch.empty()) {
        throw std::invalid_argument("comm_batch_grads: empty batch");
    }
    long total_steps = 0;
    for (const Episode* ep : batch) total_steps += ep->length();
    const double scale = 1.0 / static_cast<double>(total_steps);
    const int msg_dim = model.dims.msg_dim;

    struct Slot {
        LstmGrads grads;
        double loss = 0.0;
        bool clipped = false;
        bool skipped = false;
        std::string error;
    };
    std::vector<Slot> slots(batch.size());

    parallel_for(static_cast<int>(batch.size()), mode, [&](int i) {
        Slot& slot = slots[static_cast<std::size_t>(i)];
        try {
            const Episode& ep = *batch[static_cast<std::size_t>(i)];
            slot.grads = make_grads(model.comm);
            const int T = ep.length();

            // Forward the message chain with tapes.
            std::vector<Vec> messages;
            std::vector<LstmTape> tapes(static_cast<std::size_t>(T));
            messages.reserve(static_cast<std::size_t>(T) + 1);
            Vec h(static_cast<std::size_t>(msg_dim), 0.0), c(h.size(), 0.0);
            messages.push_back(h);
            for (int t = 0; t < T; ++t) {
                const Transition& tr = ep.steps[static_cast<std::size_t>(t)];
                lstm_cell_forward(model.comm, h, c, concat(tr.obs, tr.action), h, c,
                                  &tapes[static_cast<std::size_t>(t)]);
                messages.push_back(h);
            }

            // Per-step message cotangents: the critic consumes h_{t-1}
            // (messages[t]) at step t, through both loss terms. TD targets
            // are constants.
            std::vector<Vec> injections(static_cast<std::size_t>(T),
                                        Vec(static_cast<std::size_t>(msg_dim), 0.0));
            MlpGrads critic_scratch = make_grads(model.critic.net);
            for (int t = 0; t < T; ++t) {
                const Transition& tr = ep.steps[static_cast<std::size_t>(t)];
                MlpTape tape;
                const double q = mlp_forward(model.critic.net,
                                             concat(messages[static_cast<std::size_t>(t)], tr.obs,
                                                    tr.action),
                                             &tape)[0];
                const double y =
                    td_target(bootstrap_critic, model.actors, messages, ep, t, gamma);
                slot.loss += ((q - y) * (q - y) - q_weight * q) * scale;
                const double coeff = (2.0 * (q - y) - q_weight) * scale;
                const Vec d_input = mlp_backward(model.critic.net, tape, {coeff}, critic_scratch);
                injections[static_cast<std::size_t>(t)] =
                    slice(d_input, 0, static_cast<std::size_t>(msg_dim));
            }

            // Backpropagation through time over the whole chain. The cell at
            // index t maps messages[t] -> messages[t+1]; messages[T] is never
            // consumed by the loss.
            Vec dh(static_cast<std::size_t>(msg_dim), 0.0), dc(dh.size(), 0.0);
            for (int t = T - 1; t >= 0; --t) {
                if (t + 1 < T) {
                    for (int k = 0; k < msg_dim; ++k) {
                        dh[static_cast<std::size_t>(k)] +=
                            injections[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(k)];
                    }
                }
                const LstmBack back = lstm_cell_backward(
                    model.comm, tapes[static_cast<std::size_t>(t)], dh, dc, slot.grads);
                dh = back.dh_prev;
                dc = back.dc_prev;
            }

            if (!grads_finite(slot.grads)) {
                slot.grads.zero();
                slot.skipped = true;
                return;
            }
            if (clip > 0.0 && clip_grads(slot.grads, clip) > clip) slot.clipped = true;
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    CommBatchGrads out;
    out.grads = make_grads(model.comm);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].error.empty()) {
            throw std::runtime_error("comm update: episode " + std::to_string(i) + ": " +
                                     slots[i].error);
        }
        out.grads.add(slots[i].grads);
        out.loss += slots[i].loss;
        if (slots[i].clipped) out.clipped_episodes += 1;
        if (slots[i].skipped) out.skipped_episodes += 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(MardpgModel& model, const TrainConfig& config)
    : model_(model), config_(config), target_critic_(model.critic) {
    opt_critic_ = RmsProp{config.lr_critic, config.rmsprop_decay, config.rmsprop_eps};
    opt_comm_ = RmsProp{config.lr_comm, config.rmsprop_decay, config.rmsprop_eps};
    for (std::size_t a = 0; a < model.actors.size(); ++a) {
        opt_actors_.push_back(RmsProp{config.lr_actor, config.rmsprop_decay, config.rmsprop_eps});
    }
}

double Trainer::critic_step(const std::vector<const Episode*>& batch, double* mean_q) {
    CriticBatchGrads result =
        critic_batch_grads(model_, bootstrap_critic(), batch, config_.gamma, config_.exec);
    opt_critic_.step(views_of(model_.critic.net, "critic"), views_of(result.grads, "critic"));
    if (mean_q) *mean_q = result.mean_q;
    return result.loss;
}

std::vector<double> Trainer::actor_step(const std::vector<const Episode*>& batch) {
    ActorBatchGrads result = actor_batch_grads(model_, batch, config_.exec, config_.actor_entropy);
    for (std::size_t a = 0; a < model_.actors.size(); ++a) {
        if (result.active_steps[a] == 0) continue;
        result.grads[a].scale(-1.0);  // ascent on the Q objective
        opt_actors_[a].step(views_of(model_.actors[a].net, "actor"),
                            views_of(result.grads[a], "actor"));
    }
    return result.mean_q;
}

double Trainer::comm_step(const std::vector<const Episode*>& batch) {
    CommBatchGrads result =
        comm_batch_grads(model_, bootstrap_critic(), batch, config_.gamma, config_.comm_q_weight,
                         config_.bptt_clip, config_.exec);
    opt_comm_.step(views_of(model_.comm, "comm"), views_of(result.grads, "comm"));
    return result.loss;
}

void Trainer::soft_update_target() {
    if (!config_.use_target_network) return;
    const double tau = config_.target_tau;
    for (std::size_t l = 0; l < model_.critic.net.layers.size(); ++l) {
        auto& src = model_.critic.net.layers[l];
        auto& dst = target_critic_.net.layers[l];
        for (std::size_t i = 0; i < src.w.data.size(); ++i) {
            dst.w.data[i] += tau * (src.w.data[i] - dst.w.data[i]);
        }
        for (std::size_t i = 0; i < src.b.size(); ++i) {
            dst.b[i] += tau * (src.b[i] - dst.b[i]);
        }
    }
}

// Algorithm-faithful inner loop: one parameter update per timestep, iterating
// each sampled episode from its last step back to its first. Kept behind a
// config flag for fidelity testing; the batched path is the default.
void Trainer::literal_per_timestep_pass(const std::vector<const Episode*>& batch) {
    const int msg_dim = model_.dims.msg_dim;
    const int obs_dim = model_.dims.obs_dim;
    const int padded_dim = model_.dims.padded_dim();

    for (const Episode* ep_ptr : batch) {
        const Episode& ep = *ep_ptr;
        for (int t = ep.length() - 1; t >= 0; --t) {
            const Transition& tr = ep.steps[static_cast<std::size_t>(t)];
            const Actor& actor = model_.actors[static_cast<std::size_t>(tr.agent_id)];

            // Critic on the single TD term.
            {
                const std::vector<Vec> messages = recompute_messages(model_.comm, ep);
                MlpTape tape;
                const double q =
                    mlp_forward(model_.critic.net,
                                concat(messages[static_cast<std::size_t>(t)], tr.obs, tr.action),
                                &tape)[0];
                const double y =
                    td_target(bootstrap_critic(), model_.actors, messages, ep, t, config_.gamma);
                MlpGrads grads = make_grads(model_.critic.net);
                mlp_backward(model_.critic.net, tape, {2.0 * (q - y)}, grads);
                opt_critic_.step(views_of(model_.critic.net, "critic"), views_of(grads, "critic"));
            }

            // Active actor, ascending the live critic.
            {
                const std::vector<Vec> messages = recompute_messages(model_.comm, ep);
                const Vec& h = messages[static_cast<std::size_t>(t)];
                MlpTape actor_tape;
                const Vec a = mlp_forward(actor.net, concat(h, tr.obs), &actor_tape);
                MlpTape critic_tape;
                mlp_forward(model_.critic.net,
                            concat(h, tr.obs, pad_action(actor.spec, a, padded_dim)),
                            &critic_tape);
                MlpGrads critic_scratch = make_grads(model_.critic.net);
                const Vec d_input =
                    mlp_backward(model_.critic.net, critic_tape, {1.0}, critic_scratch);
                const Vec d_action = slice(
                    d_input, static_cast<std::size_t>(msg_dim + obs_dim + actor.spec.slice_begin),
                    static_cast<std::size_t>(actor.spec.action_dim));
                MlpGrads grads = make_grads(actor.net);
                mlp_backward(actor.net, actor_tape, d_action, grads);
                grads.scale(-1.0);
                opt_actors_[static_cast<std::size_t>(tr.agent_id)].step(
                    views_of(model_.actors[static_cast<std::size_t>(tr.agent_id)].net, "actor"),
                    views_of(grads, "actor"));
            }

            // Communication component on the single step's objective,
            // backpropagated through the chain prefix.
            {
                std::vector<Vec> messages;
                std::vector<LstmTape> tapes(static_cast<std::size_t>(t) + 1);
                Vec h(static_cast<std::size_t>(msg_dim), 0.0), c(h.size(), 0.0);
                messages.push_back(h);
                for (int j = 0; j <= t; ++j) {
                    const Transition& tj = ep.steps[static_cast<std::size_t>(j)];
                    lstm_cell_forward(model_.comm, h, c, concat(tj.obs, tj.action), h, c,
                                      &tapes[static_cast<std::size_t>(j)]);
                    messages.push_back(h);
                }
                MlpTape tape;
                const double q =
                    mlp_forward(model_.critic.net,
                                concat(messages[static_cast<std::size_t>(t)], tr.obs, tr.action),
                                &tape)[0];
                const double y =
                    td_target(bootstrap_critic(), model_.actors, messages, ep, t, config_.gamma);
                MlpGrads critic_scratch = make_grads(model_.critic.net);
                const double coeff = 2.0 * (q - y) - config_.comm_q_weight;
                const Vec d_input = mlp_backward(model_.critic.net, tape, {coeff}, critic_scratch);

                LstmGrads grads = make_grads(model_.comm);
                Vec dh = slice(d_input, 0, static_cast<std::size_t>(msg_dim));
                Vec dc(dh.size(), 0.0);
                // The consumed message is messages[t], produced by cell t-1.
                for (int j = t - 1; j >= 0; --j) {
                    const LstmBack back = lstm_cell_backward(
                        model_.comm, tapes[static_cast<std::size_t>(j)], dh, dc, grads);
                    dh = back.dh_prev;
                    dc = back.dc_prev;
                }
                if (t > 0) {
                    if (config_.bptt_clip > 0.0) clip_grads(grads, config_.bptt_clip);
                    opt_comm_.step(views_of(model_.comm, "comm"), views_of(grads, "comm"));
                }
            }
        }
    }
}

std::string format_log_record(const TrainLogRecord& record, bool include_wall) {
    std::string line = "step=" + std::to_string(record.step);
    if (include_wall) line += " wall_ms=" + fmt(record.wall_ms);
    line += " critic_loss=" + fmt(record.critic_loss);
    line += " comm_loss=" + fmt(record.comm_loss);
    line += " mean_q=" + fmt(record.mean_q);
    line += " mean_episode_reward=" + fmt(record.mean_episode_reward);
    for (std::size_t a = 0; a < record.mean_actions.size(); ++a) {
        line += " actor" + std::to_string(a) + "_mean_action=";
        for (std::size_t k = 0; k < record.mean_actions[a].size(); ++k) {
            if (k) line += ",";
            line += fmt(record.mean_actions[a][k]);
        }
    }
    if (record.aborted) line += " aborted=1 error=\"" + record.error + "\"";
    return line;
}

TrainResult Trainer::run(Env& env, ReplayBuffer& buffer, uint64_t seed, std::ostream* log_stream,
                         const std::string& checkpoint_dir) {
    TrainResult result;
    std::mt19937_64 sample_rng(mix_seed(seed, 0xB0FF));
    int consecutive_aborts = 0;

    for (int step = 0; step < config_.steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const double frac =
            config_.steps > 1 ? static_cast<double>(step) / (config_.steps - 1) : 0.0;
        const double sigma =
            config_.noise_start + (config_.noise_end - config_.noise_start) * frac;

        const std::vector<Episode> collected =
            collect_batch(env, model_.actors, model_.comm, config_.episodes_per_step,
                          mix_seed(seed, 0xC0111EC7 + static_cast<uint64_t>(step)), sigma,
                          config_.max_episode_steps, config_.exec);

        TrainLogRecord record;
        record.step = step;
        double reward_sum = 0.0;
        std::vector<Vec> action_sums;
        std::vector<long> action_counts(model_.actors.size(), 0);
        for (const Actor& actor : model_.actors) {
            action_sums.push_back(Vec(static_cast<std::size_t>(actor.spec.action_dim), 0.0));
        }
        for (const Episode& ep : collected) {
            reward_sum += ep.total_reward();
            for (const Transition& tr : ep.steps) {
                const auto a = static_cast<std::size_t>(tr.agent_id);
                const Vec raw = unpad_action(model_.actors[a].spec, tr.action);
                for (std::size_t k = 0; k < raw.size(); ++k) action_sums[a][k] += raw[k];
                action_counts[a] += 1;
            }
        }
        record.mean_episode_reward = reward_sum / static_cast<double>(collected.size());
        for (std::size_t a = 0; a < action_sums.size(); ++a) {
            if (action_counts[a] > 0) {
                for (double& v : action_sums[a]) v /= static_cast<double>(action_counts[a]);
            }
            record.mean_actions.push_back(action_sums[a]);
        }
        for (const Episode& ep : collected) buffer.store(ep);

        const std::vector<const Episode*> batch =
            buffer.sample(static_cast<std::size_t>(config_.minibatch), sample_rng);

        try {
            if (config_.per_timestep_updates) {
                const CriticBatchGrads pre = critic_batch_grads(model_, bootstrap_critic(), batch,
                                                                config_.gamma, config_.exec);
                record.critic_loss = pre.loss;
                record.mean_q = pre.mean_q;
                literal_per_timestep_pass(batch);
                record.comm_loss = 0.0;
            } else {
                record.critic_loss = critic_step(batch, &record.mean_q);
                actor_step(batch);
                record.comm_loss = comm_step(batch);
            }
            soft_update_target();
            consecutive_aborts = 0;
        } catch (const std::exception& e) {
            record.aborted = true;
            record.error = e.what();
            record.critic_loss = record.comm_loss = record.mean_q =
                std::numeric_limits<double>::quiet_NaN();
            result.aborted_steps += 1;
            consecutive_aborts += 1;
        }

        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        if (log_stream) (*log_stream) << format_log_record(record) << "\n";
        result.log.push_back(std::move(record));

        if (!checkpoint_dir.empty() && config_.checkpoint_every > 0 &&
            (step + 1) % config_.checkpoint_every == 0) {
            save_checkpoint(checkpoint_dir + "/checkpoint_step" + std::to_string(step + 1) + ".txt",
                            model_param_views(model_), {seed, step + 1});
        }
        if (consecutive_aborts >= 3) {
            result.stopped_early = true;
            break;
        }
    }
    return result;
}

}  // namespace mardpg
