#include "mardpg/experiment.hpp"

#include <stdexcept>

#include "mardpg/checkpoint.hpp"

namespace mardpg {

Vec PolicySet::act(int scenario, const Vec& message, const Vec& obs) const {
    const PolicyKind kind = scenario == kScenarioMain ? main_kind : inshop_kind;
    switch (kind) {
        case PolicyKind::EW:
            return ew->act(scenario);
        case PolicyKind::L2R:
            return l2r_rank(scenario == kScenarioMain ? *l2r_main : *l2r_inshop, obs);
        case PolicyKind::MARDPG:
            return actor_forward(model->actors[static_cast<std::size_t>(scenario)], message, obs);
    }
    throw std::logic_error("PolicySet::act: unknown policy kind");
}

std::string PolicySet::pair_name() const {
    return policy_name(main_kind) + "+" + policy_name(inshop_kind);
}

MetricsRecord evaluate_pair(const ShoppingEnv& proto, const PolicySet& policies, int sessions,
                            uint64_t seed, ExecMode mode, const std::string& run_id) {
    struct SessionStats {
        double gmv_main = 0.0, gmv_inshop = 0.0;
        long clicks = 0, purchases = 0;
        std::string error;
    };
    std::vector<SessionStats> slots(static_cast<std::size_t>(sessions));
    const bool comm_on = policies.uses_mardpg();

    parallel_for(sessions, mode, [&](int i) {
        SessionStats& slot = slots[static_cast<std::size_t>(i)];
        try {
            auto env_ptr = proto.clone();
            auto& env = static_cast<ShoppingEnv&>(*env_ptr);
            std::mt19937_64 rng(mix_seed(seed, static_cast<uint64_t>(i)));
            auto [obs, agent] = env.reset(rng);

            Vec h(comm_on ? static_cast<std::size_t>(policies.model->comm.hidden_dim()) : 1, 0.0);
            Vec c(h.size(), 0.0);
            const int padded_dim = env.padded_dim();

            while (true) {
                const Vec weights = policies.act(agent, h, obs);
                const AgentSpec& spec = env.agent_specs()[static_cast<std::size_t>(agent)];
                const Vec padded = pad_action(spec, weights, padded_dim);
                const EnvStep step = env.step(padded);
                if (comm_on) {
                    lstm_cell_forward(policies.model->comm, h, c, concat(obs, padded), h, c);
                }
                if (step.terminal) break;
                obs = step.next_obs;
                agent = step.next_agent;
            }
            slot.gmv_main = env.session_gmv_main();
            slot.gmv_inshop = env.session_gmv_inshop();
            slot.clicks = env.session_clicks();
            slot.purchases = env.session_purchases();
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    MetricsRecord record;
    record.run_id = run_id;
    record.seed = seed;
    record.policy_main = policy_name(policies.main_kind);
    record.policy_inshop = policy_name(policies.inshop_kind);
    record.sessions = sessions;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].error.empty()) {
            throw std::runtime_error("evaluate_pair: session " + std::to_string(i) + ": " +
                                     slots[i].error);
        }
        record.gmv_main += slots[i].gmv_main;
        record.gmv_inshop += slots[i].gmv_inshop;
        record.clicks += slots[i].clicks;
        record.purchases += slots[i].purchases;
    }
    record.gmv_total = record.gmv_main + record.gmv_inshop;
    return record;
}

Experiment::Experiment(const ExperimentConfig& config, uint64_t seed)
    : config_(config), seed_(seed), ew_(config.ew) {
    config_.validate();
    if (config_.env_kind != "shopping") {
        throw std::runtime_error("Experiment: evaluation requires env.kind = shopping");
    }
    env_ = std::make_unique<ShoppingEnv>(config_.env);
}

void Experiment::ensure_l2r() {
    if (l2r_main_) return;
    const auto pages = log_ew_sessions(*env_, ew_, config_.l2r_sessions, mix_seed(seed_, 0x10C));
    l2r_main_ = make_l2r(config_.model.obs_dim, config_.model.hidden, kMainFeatures,
                         mix_seed(seed_, 0x11A));
    l2r_inshop_ = make_l2r(config_.model.obs_dim, config_.model.hidden, kInshopFeatures,
                           mix_seed(seed_, 0x11B));
    l2r_train(*l2r_main_, pages, kScenarioMain, config_.l2r, mix_seed(seed_, 0x12A));
    l2r_train(*l2r_inshop_, pages, kScenarioInshop, config_.l2r, mix_seed(seed_, 0x12B));
}

void Experiment::ensure_mardpg(std::ostream* train_log, const std::string& checkpoint_dir) {
    if (model_) return;
    model_ = make_model(config_.model, mix_seed(seed_, 0x30DE1));
    Trainer trainer(*model_, config_.train);
    ReplayBuffer buffer(config_.train.buffer_capacity);
    train_result_ = trainer.run(*env_, buffer, seed_, train_log, checkpoint_dir);
}

void Experiment::load_mardpg(const std::string& checkpoint_path) {
    model_ = make_model(config_.model, mix_seed(seed_, 0x30DE1));
    load_checkpoint(checkpoint_path, model_param_views(*model_));
}

PolicySet Experiment::policies(PolicyKind main_kind, PolicyKind inshop_kind) const {
    PolicySet set;
    set.main_kind = main_kind;
    set.inshop_kind = inshop_kind;
    set.ew = &ew_;
    set.l2r_main = l2r_main_ ? &*l2r_main_ : nullptr;
    set.l2r_inshop = l2r_inshop_ ? &*l2r_inshop_ : nullptr;
    set.model = model_ ? &*model_ : nullptr;
    if ((main_kind == PolicyKind::L2R && !set.l2r_main) ||
        (inshop_kind == PolicyKind::L2R && !set.l2r_inshop)) {
        throw std::runtime_error("Experiment: L2R requested but not trained");
    }
    if (set.uses_mardpg() && !set.model) {
        throw std::runtime_error("Experiment: MARDPG requested but not trained");
    }
    return set;
}

std::vector<MetricsRecord> Experiment::evaluate(PolicyKind main_kind, PolicyKind inshop_kind) {
    if (main_kind == PolicyKind::L2R || inshop_kind == PolicyKind::L2R) ensure_l2r();
    if (main_kind == PolicyKind::MARDPG || inshop_kind == PolicyKind::MARDPG) ensure_mardpg();
    const PolicySet set = policies(main_kind, inshop_kind);

    std::vector<MetricsRecord> records;
    for (int i = 0; i < config_.eval_seeds; ++i) {
        // Eval seeds depend only on (seed, index), not the pair, so records
        // with the same index share user streams across pairs.
        const uint64_t eval_seed = mix_seed(seed_, 0xE7A1000 + static_cast<uint64_t>(i));
        if (config_.eval_sessions == 0) continue;
        records.push_back(evaluate_pair(*env_, set, config_.eval_sessions, eval_seed,
                                        config_.train.exec, set.pair_name()));
    }
    return records;
}

ModelDims beach_model_dims(const ExperimentConfig& config) {
    ModelDims dims;
    dims.obs_dim = 4;
    dims.msg_dim = config.model.msg_dim;
    dims.hidden = config.model.hidden;
    dims.agents = {{0, 2, 0}, {1, 2, 2}};
    return dims;
}

}  // namespace mardpg
