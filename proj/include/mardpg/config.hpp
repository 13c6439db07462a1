#pragma once

#include <string>

#include "mardpg/agents.hpp"
#include "mardpg/baselines.hpp"
#include "mardpg/beach_env.hpp"
#include "mardpg/shopping_env.hpp"
#include "mardpg/train.hpp"

namespace mardpg {

enum class PolicyKind { EW, L2R, MARDPG };

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);  // throws on unknown names

// Full experiment description. The on-disk format is line-oriented
// "dotted.path = value" pairs with '#' comments; every field has a default,
// so an empty file is a valid config. Environment variables named
// MARDPG_<path with '.' replaced by '__'> override file values.
struct ExperimentConfig {
    std::string env_kind = "shopping";  // shopping | beach

    ShoppingConfig env;
    BeachConfig beach;

    ModelDims model;  // hidden layers fixed at two, sizes configurable

    TrainConfig train;

    int eval_sessions = 10000;
    int eval_seeds = 5;

    PolicyKind policy_main = PolicyKind::EW;
    PolicyKind policy_inshop = PolicyKind::EW;

    EwPolicy ew;

    int l2r_sessions = 10000;
    L2rTrainConfig l2r;

    // Consistency checks across blocks; throws with the offending field path.
    void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);  // same grammar
std::string dump_config(const ExperimentConfig& config);

}  // namespace mardpg
