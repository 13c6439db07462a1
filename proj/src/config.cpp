#include "mardpg/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mardpg {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double to_double(const std::string& path, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: " + path + ": not a number: '" + value + "'");
    }
}

long long to_int(const std::string& path, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: " + path + ": not an integer: '" + value + "'");
    }
}

bool to_bool(const std::string& path, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: " + path + ": not a bool: '" + value + "'");
}

std::vector<double> to_list(const std::string& path, const std::string& value,
                            std::size_t expect) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(to_double(path, part));
    if (out.size() != expect) {
        throw std::runtime_error("config: " + path + ": expected " + std::to_string(expect) +
                                 " comma-separated values, got " + std::to_string(out.size()));
    }
    return out;
}

std::string join(const double* values, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    return out;
}

struct Field {
    std::string path;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& registry() {
    static const std::vector<Field> fields = {
        {"env.kind", [](ExperimentConfig& c, const std::string& v) { c.env_kind = v; },
         [](const ExperimentConfig& c) { return c.env_kind; }},

        {"env.n_shops",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.n_shops = static_cast<int>(to_int("env.n_shops", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.n_shops); }},
        {"env.items_per_shop",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.items_per_shop = static_cast<int>(to_int("env.items_per_shop", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.items_per_shop); }},
        {"env.page_size",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.page_size = static_cast<int>(to_int("env.page_size", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.page_size); }},
        {"env.candidates_main",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.candidates_main = static_cast<int>(to_int("env.candidates_main", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.candidates_main); }},
        {"env.p_main_to_inshop",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.p_main_to_inshop = to_double("env.p_main_to_inshop", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.p_main_to_inshop); }},
        {"env.p_inshop_to_main",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.p_inshop_to_main = to_double("env.p_inshop_to_main", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.p_inshop_to_main); }},
        {"env.leave_prob",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.leave_prob = to_double("env.leave_prob", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.leave_prob); }},
        {"env.max_session_steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.max_session_steps = static_cast<int>(to_int("env.max_session_steps", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.max_session_steps); }},
        {"env.click_beta",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.click_beta = to_double("env.click_beta", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.click_beta); }},
        {"env.click_bias",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.click_bias = to_double("env.click_bias", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.click_bias); }},
        {"env.purchase_affinity_scale",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_affinity_scale = to_double("env.purchase_affinity_scale", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_affinity_scale); }},
        {"env.purchase_price_sens",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_price_sens = to_double("env.purchase_price_sens", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_price_sens); }},
        {"env.purchase_quality_bonus_main",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_quality_bonus_main = to_double("env.purchase_quality_bonus_main", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_quality_bonus_main); }},
        {"env.purchase_quality_bonus_inshop",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_quality_bonus_inshop =
                 to_double("env.purchase_quality_bonus_inshop", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_quality_bonus_inshop); }},
        {"env.purchase_match_weight",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_match_weight = to_double("env.purchase_match_weight", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_match_weight); }},
        {"env.purchase_bias",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.purchase_bias = to_double("env.purchase_bias", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.purchase_bias); }},
        {"env.price_min",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.price_min = to_double("env.price_min", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.price_min); }},
        {"env.price_max",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.price_max = to_double("env.price_max", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.price_max); }},
        {"env.age_dist",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("env.age_dist", v, 8);
             std::copy(list.begin(), list.end(), c.env.age_dist.begin());
         },
         [](const ExperimentConfig& c) { return join(c.env.age_dist.data(), 8); }},
        {"env.gender_dist",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("env.gender_dist", v, 2);
             std::copy(list.begin(), list.end(), c.env.gender_dist.begin());
         },
         [](const ExperimentConfig& c) { return join(c.env.gender_dist.data(), 2); }},
        {"env.purchase_power_dist",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("env.purchase_power_dist", v, 3);
             std::copy(list.begin(), list.end(), c.env.purchase_power_dist.begin());
         },
         [](const ExperimentConfig& c) { return join(c.env.purchase_power_dist.data(), 3); }},
        {"env.pref_main_base",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("env.pref_main_base", v, 7);
             std::copy(list.begin(), list.end(), c.env.pref_main_base.begin());
         },
         [](const ExperimentConfig& c) { return join(c.env.pref_main_base.data(), 7); }},
        {"env.pref_inshop_base",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("env.pref_inshop_base", v, 3);
             std::copy(list.begin(), list.end(), c.env.pref_inshop_base.begin());
         },
         [](const ExperimentConfig& c) { return join(c.env.pref_inshop_base.data(), 3); }},
        {"env.pref_noise",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.pref_noise = to_double("env.pref_noise", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.env.pref_noise); }},
        {"env.catalog_seed",
         [](ExperimentConfig& c, const std::string& v) {
             c.env.catalog_seed = static_cast<uint64_t>(to_int("env.catalog_seed", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.env.catalog_seed); }},

        {"beach.rho",
         [](ExperimentConfig& c, const std::string& v) { c.beach.rho = to_double("beach.rho", v); },
         [](const ExperimentConfig& c) { return fmt(c.beach.rho); }},
        {"beach.grid",
         [](ExperimentConfig& c, const std::string& v) {
             c.beach.grid = static_cast<int>(to_int("beach.grid", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.beach.grid); }},

        {"model.obs_dim",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.obs_dim = static_cast<int>(to_int("model.obs_dim", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.obs_dim); }},
        {"model.msg_dim",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.msg_dim = static_cast<int>(to_int("model.msg_dim", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.msg_dim); }},
        {"model.hidden1",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.hidden[0] = static_cast<int>(to_int("model.hidden1", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.hidden[0]); }},
        {"model.hidden2",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.hidden[1] = static_cast<int>(to_int("model.hidden2", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.hidden[1]); }},
        {"model.action_dim_main",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.agents[0].action_dim = static_cast<int>(to_int("model.action_dim_main", v));
             c.model.agents[1].slice_begin = c.model.agents[0].action_dim;
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.agents[0].action_dim); }},
        {"model.action_dim_inshop",
         [](ExperimentConfig& c, const std::string& v) {
             c.model.agents[1].action_dim = static_cast<int>(to_int("model.action_dim_inshop", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.model.agents[1].action_dim); }},

        {"train.gamma",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.gamma = to_double("train.gamma", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.gamma); }},
        {"train.lr_actor",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.lr_actor = to_double("train.lr_actor", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.lr_actor); }},
        {"train.lr_critic",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.lr_critic = to_double("train.lr_critic", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.lr_critic); }},
        {"train.lr_comm",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.lr_comm = to_double("train.lr_comm", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.lr_comm); }},
        {"train.rmsprop_decay",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.rmsprop_decay = to_double("train.rmsprop_decay", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.rmsprop_decay); }},
        {"train.rmsprop_eps",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.rmsprop_eps = to_double("train.rmsprop_eps", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.rmsprop_eps); }},
        {"train.minibatch",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.minibatch = static_cast<int>(to_int("train.minibatch", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.minibatch); }},
        {"train.episodes_per_step",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.episodes_per_step = static_cast<int>(to_int("train.episodes_per_step", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.episodes_per_step); }},
        {"train.max_episode_steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.max_episode_steps = static_cast<int>(to_int("train.max_episode_steps", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.max_episode_steps); }},
        {"train.steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.steps = static_cast<int>(to_int("train.steps", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.steps); }},
        {"train.buffer_capacity",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.buffer_capacity = static_cast<std::size_t>(to_int("train.buffer_capacity", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.buffer_capacity); }},
        {"train.noise_start",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.noise_start = to_double("train.noise_start", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.noise_start); }},
        {"train.noise_end",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.noise_end = to_double("train.noise_end", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.noise_end); }},
        {"train.bptt_clip",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.bptt_clip = to_double("train.bptt_clip", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.bptt_clip); }},
        {"train.comm_q_weight",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.comm_q_weight = to_double("train.comm_q_weight", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.comm_q_weight); }},
        {"train.actor_entropy",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.actor_entropy = to_double("train.actor_entropy", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.actor_entropy); }},
        {"train.use_target_network",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.use_target_network = to_bool("train.use_target_network", v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.train.use_target_network ? "true" : "false");
         }},
        {"train.target_tau",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.target_tau = to_double("train.target_tau", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.train.target_tau); }},
        {"train.per_timestep_updates",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.per_timestep_updates = to_bool("train.per_timestep_updates", v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.train.per_timestep_updates ? "true" : "false");
         }},
        {"train.checkpoint_every",
         [](ExperimentConfig& c, const std::string& v) {
             c.train.checkpoint_every = static_cast<int>(to_int("train.checkpoint_every", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.train.checkpoint_every); }},
        {"train.exec",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "serial") {
                 c.train.exec = ExecMode::serial;
             } else if (v == "parallel") {
                 c.train.exec = ExecMode::parallel;
             } else {
                 throw std::runtime_error("config: train.exec: expected serial|parallel, got '" +
                                          v + "'");
             }
         },
         [](const ExperimentConfig& c) {
             return std::string(c.train.exec == ExecMode::serial ? "serial" : "parallel");
         }},

        {"eval.sessions",
         [](ExperimentConfig& c, const std::string& v) {
             c.eval_sessions = static_cast<int>(to_int("eval.sessions", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.eval_sessions); }},
        {"eval.seeds",
         [](ExperimentConfig& c, const std::string& v) {
             c.eval_seeds = static_cast<int>(to_int("eval.seeds", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.eval_seeds); }},

        {"policy.main",
         [](ExperimentConfig& c, const std::string& v) { c.policy_main = parse_policy(v); },
         [](const ExperimentConfig& c) { return policy_name(c.policy_main); }},
        {"policy.inshop",
         [](ExperimentConfig& c, const std::string& v) { c.policy_inshop = parse_policy(v); },
         [](const ExperimentConfig& c) { return policy_name(c.policy_inshop); }},

        {"ew.weights_main",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("ew.weights_main", v, 7);
             c.ew.weights_main.assign(list.begin(), list.end());
         },
         [](const ExperimentConfig& c) {
             return join(c.ew.weights_main.data(), c.ew.weights_main.size());
         }},
        {"ew.weights_inshop",
         [](ExperimentConfig& c, const std::string& v) {
             const auto list = to_list("ew.weights_inshop", v, 3);
             c.ew.weights_inshop.assign(list.begin(), list.end());
         },
         [](const ExperimentConfig& c) {
             return join(c.ew.weights_inshop.data(), c.ew.weights_inshop.size());
         }},

        {"l2r.sessions",
         [](ExperimentConfig& c, const std::string& v) {
             c.l2r_sessions = static_cast<int>(to_int("l2r.sessions", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.l2r_sessions); }},
        {"l2r.epochs",
         [](ExperimentConfig& c, const std::string& v) {
             c.l2r.epochs = static_cast<int>(to_int("l2r.epochs", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.l2r.epochs); }},
        {"l2r.lr",
         [](ExperimentConfig& c, const std::string& v) { c.l2r.lr = to_double("l2r.lr", v); },
         [](const ExperimentConfig& c) { return fmt(c.l2r.lr); }},
        {"l2r.entropy_reg",
         [](ExperimentConfig& c, const std::string& v) {
             c.l2r.entropy_reg = to_double("l2r.entropy_reg", v);
         },
         [](const ExperimentConfig& c) { return fmt(c.l2r.entropy_reg); }},
        {"l2r.minibatch",
         [](ExperimentConfig& c, const std::string& v) {
             c.l2r.minibatch = static_cast<int>(to_int("l2r.minibatch", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.l2r.minibatch); }},
    };
    return fields;
}

void apply_env_overrides(ExperimentConfig& config) {
    for (const Field& field : registry()) {
        // MARDPG_ prefix, '.' mapped to "__".
        std::string full = "MARDPG_";
        for (char ch : field.path) {
            if (ch == '.') {
                full += "__";
            } else {
                full += ch;
            }
        }
        if (const char* v = std::getenv(full.c_str())) {
            field.set(config, v);
        }
    }
}

void check(bool ok, const std::string& message) {
    if (!ok) throw std::runtime_error("config: " + message);
}

}  // namespace

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::EW: return "EW";
        case PolicyKind::L2R: return "L2R";
        case PolicyKind::MARDPG: return "MARDPG";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "EW") return PolicyKind::EW;
    if (name == "L2R") return PolicyKind::L2R;
    if (name == "MARDPG") return PolicyKind::MARDPG;
    throw std::runtime_error("config: unknown policy '" + name + "' (expected EW|L2R|MARDPG)");
}

void ExperimentConfig::validate() const {
    check(env_kind == "shopping" || env_kind == "beach",
          "env.kind: expected shopping|beach, got '" + env_kind + "'");
    check(train.gamma >= 0.0 && train.gamma < 1.0, "train.gamma: must be in [0, 1)");
    check(train.lr_actor > 0.0, "train.lr_actor: must be positive");
    check(train.lr_critic > 0.0, "train.lr_critic: must be positive");
    check(train.lr_comm > 0.0, "train.lr_comm: must be positive");
    check(train.minibatch > 0, "train.minibatch: must be positive");
    check(train.episodes_per_step > 0, "train.episodes_per_step: must be positive");
    check(train.max_episode_steps > 0, "train.max_episode_steps: must be positive");
    check(train.steps >= 0, "train.steps: must be nonnegative");
    check(train.buffer_capacity > 0, "train.buffer_capacity: must be positive");
    check(train.noise_start >= 0.0 && train.noise_end >= 0.0,
          "train.noise_start/noise_end: must be nonnegative");

    check(env.p_main_to_inshop >= 0.0, "env.p_main_to_inshop: must be nonnegative");
    check(env.p_inshop_to_main >= 0.0 && env.p_inshop_to_main <= 1.0,
          "env.p_inshop_to_main: must be in [0, 1]");
    check(env.leave_prob >= 0.0 && env.leave_prob <= 1.0, "env.leave_prob: must be in [0, 1]");
    check(env.n_shops > 0, "env.n_shops: must be positive");
    check(env.items_per_shop > 0, "env.items_per_shop: must be positive");
    check(env.page_size > 0 && env.page_size <= env.candidates_main &&
              env.page_size <= env.items_per_shop,
          "env.page_size: must fit in every candidate pool");
    check(env.max_session_steps > 0, "env.max_session_steps: must be positive");
    check(env.price_min > 0.0 && env.price_max > env.price_min,
          "env.price_min/price_max: need 0 < min < max");

    auto check_dist = [](const double* w, std::size_t n, const std::string& path) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            check(w[i] >= 0.0, path + ": entries must be nonnegative");
            sum += w[i];
        }
        check(std::abs(sum - 1.0) < 1e-6, path + ": must sum to 1");
    };
    check_dist(env.age_dist.data(), 8, "env.age_dist");
    check_dist(env.gender_dist.data(), 2, "env.gender_dist");
    check_dist(env.purchase_power_dist.data(), 3, "env.purchase_power_dist");

    check(beach.grid >= 2, "beach.grid: must be at least 2");
    check(beach.rho > 0.0, "beach.rho: must be positive");

    check(model.obs_dim > 0 && model.msg_dim > 0, "model dims must be positive");
    check(model.hidden.size() == 2 && model.hidden[0] > 0 && model.hidden[1] > 0,
          "model.hidden1/hidden2: must be positive");
    model.validate();
    if (env_kind == "shopping") {
        check(model.obs_dim == 52, "model.obs_dim: the shopping simulator emits 52 dims");
        check(model.agents[0].action_dim == kMainFeatures,
              "model.action_dim_main: must match the 7 main-search features");
        check(model.agents[1].action_dim == kInshopFeatures,
              "model.action_dim_inshop: must match the 3 in-shop features");
    }

    check(eval_sessions >= 0, "eval.sessions: must be nonnegative");
    check(eval_seeds >= 1, "eval.seeds: must be at least 1");
    check(l2r_sessions > 0, "l2r.sessions: must be positive");
    check(l2r.epochs > 0, "l2r.epochs: must be positive");
    check(l2r.lr > 0.0, "l2r.lr: must be positive");
    check(l2r.minibatch > 0, "l2r.minibatch: must be positive");

    auto check_simplex = [](const Vec& w, const std::string& path) {
        double sum = 0.0;
        for (double v : w) {
            check(v >= 0.0, path + ": weights must be nonnegative");
            sum += v;
        }
        check(std::abs(sum - 1.0) < 1e-9, path + ": weights must sum to 1");
    };
    check_simplex(ew.weights_main, "ew.weights_main");
    check_simplex(ew.weights_inshop, "ew.weights_inshop");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no += 1;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: line " + std::to_string(line_no) +
                                     ": expected 'path = value'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);

        bool found = false;
        for (const Field& field : registry()) {
            if (field.path == key) {
                field.set(config, value);
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::runtime_error("config: unknown field '" + key + "' on line " +
                                     std::to_string(line_no));
        }
    }
    apply_env_overrides(config);
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot open " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string dump_config(const ExperimentConfig& config) {
    std::string out;
    for (const Field& field : registry()) {
        out += field.path + " = " + field.get(config) + "\n";
    }
    return out;
}

}  // namespace mardpg
