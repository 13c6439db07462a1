#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mardpg/agents.hpp"
#include "mardpg/env.hpp"
#include "mardpg/optim.hpp"
#include "mardpg/parallel.hpp"
#include "mardpg/replay.hpp"

namespace mardpg {

struct TrainConfig {
    double gamma = 0.9;
    double lr_actor = 1e-3;
    double lr_critic = 1e-5;
    double lr_comm = 1e-5;
    double rmsprop_decay = 0.9;
    double rmsprop_eps = 1e-8;

    int minibatch = 100;
    int episodes_per_step = 10;
    int max_episode_steps = 15;
    int steps = 1000;
    std::size_t buffer_capacity = 10000;

    // Exploration: Gaussian noise on pre-softmax logits, with sigma decaying
    // linearly from noise_start to noise_end over the run.
    double noise_start = 0.3;
    double noise_end = 0.02;

    double bptt_clip = 5.0;      // per-episode gradient norm cap for the LSTM
    double comm_q_weight = 1.0;  // weight of the return term in the comm loss

    // Entropy bonus on the actor objective (J = Q + w * H(a)). A deterministic
    // softmax policy that saturates at a vertex stops learning; a small bonus
    // keeps it trainable. 0 recovers the bare objective.
    double actor_entropy = 0.0;

    bool use_target_network = false;  // optional DDPG-style target critic
    double target_tau = 0.01;
    bool per_timestep_updates = false;  // literal inner loop, for fidelity tests

    int checkpoint_every = 0;  // steps; 0 disables
    ExecMode exec = ExecMode::parallel;
};

// Deterministic stream of per-task seeds.
uint64_t mix_seed(uint64_t base, uint64_t index);

// Runs one episode with exploration noise. Messages advance after every env
// step on [obs_t; action_t]; the trace is stored for diagnostics only.
Episode collect_episode(Env& env, const std::vector<Actor>& actors, const LstmParams& comm,
                        std::mt19937_64& rng, double noise_sigma, int max_steps);

// Collects `count` episodes from clones of `proto`, one independent rng
// stream per episode. Results are identical for both exec modes.
std::vector<Episode> collect_batch(const Env& proto, const std::vector<Actor>& actors,
                                   const LstmParams& comm, int count, uint64_t seed_base,
                                   double noise_sigma, int max_steps, ExecMode mode);

// Messages h_0..h_T for an episode under the given parameters; h_0 = 0.
std::vector<Vec> recompute_messages(const LstmParams& comm, const Episode& episode);

// One-step bootstrapped target, a constant for gradient purposes. Terminal
// steps return the bare reward; truncated tails bootstrap through the stored
// final observation.
double td_target(const Critic& critic, const std::vector<Actor>& actors,
                 const std::vector<Vec>& messages, const Episode& episode, int t, double gamma);

// ---------------------------------------------------------------------------
// Batch gradient kernels. Each maps independently over the episodes of the
// minibatch and reduces in episode order; tests pin serial == parallel.
// ---------------------------------------------------------------------------

struct CriticBatchGrads {
    MlpGrads grads;  // gradient of the mean squared TD error
    double loss = 0.0;
    double mean_q = 0.0;
    long steps = 0;
};

CriticBatchGrads critic_batch_grads(const MardpgModel& model, const Critic& bootstrap_critic,
                                    const std::vector<const Episode*>& batch, double gamma,
                                    ExecMode mode);

struct ActorBatchGrads {
    std::vector<MlpGrads> grads;  // ascent direction of the mean Q objective
    std::vector<double> mean_q;   // per-agent objective value
    std::vector<long> active_steps;
    long skipped = 0;  // timesteps dropped for non-finite chained gradients
};

ActorBatchGrads actor_batch_grads(const MardpgModel& model,
                                  const std::vector<const Episode*>& batch, ExecMode mode,
                                  double entropy_weight = 0.0);

struct CommBatchGrads {
    LstmGrads grads;  // gradient of mean[(q - y)^2] - q_weight * mean[q]
    double loss = 0.0;
    long clipped_episodes = 0;
    long skipped_episodes = 0;  // non-finite BPTT, reported and dropped
};

CommBatchGrads comm_batch_grads(const MardpgModel& model, const Critic& bootstrap_critic,
                                const std::vector<const Episode*>& batch, double gamma,
                                double q_weight, double clip, ExecMode mode);

// ---------------------------------------------------------------------------
// Trainer: owns the optimizers (and the optional target critic) and applies
// one RMSProp step per network per minibatch.
// ---------------------------------------------------------------------------

struct TrainLogRecord {
    int step = 0;
    double wall_ms = 0.0;
    double critic_loss = 0.0;
    double comm_loss = 0.0;
    double mean_q = 0.0;
    double mean_episode_reward = 0.0;
    std::vector<Vec> mean_actions;  // per agent, over this step's collections
    bool aborted = false;
    std::string error;
};

// Line-delimited structured text; wall_ms is excluded when `include_wall` is
// false so that seeded runs compare bit-identically.
std::string format_log_record(const TrainLogRecord& record, bool include_wall = true);

struct TrainResult {
    std::vector<TrainLogRecord> log;
    long aborted_steps = 0;
    bool stopped_early = false;
};

class Trainer {
public:
    Trainer(MardpgModel& model, const TrainConfig& config);

    // Algorithm: per training step, collect M episodes, store them, sample a
    // minibatch, then update critic, actors and the communication channel.
    TrainResult run(Env& env, ReplayBuffer& buffer, uint64_t seed,
                    std::ostream* log_stream = nullptr, const std::string& checkpoint_dir = "");

    // Single-minibatch updates, exposed for tests and oracles.
    double critic_step(const std::vector<const Episode*>& batch, double* mean_q = nullptr);
    std::vector<double> actor_step(const std::vector<const Episode*>& batch);
    double comm_step(const std::vector<const Episode*>& batch);

    const TrainConfig& config() const { return config_; }

private:
    void literal_per_timestep_pass(const std::vector<const Episode*>& batch);
    const Critic& bootstrap_critic() const {
        return config_.use_target_network ? target_critic_ : model_.critic;
    }
    void soft_update_target();

    MardpgModel& model_;
    TrainConfig config_;
    Critic target_critic_;
    RmsProp opt_critic_, opt_comm_;
    std::vector<RmsProp> opt_actors_;
};

}  // namespace mardpg
