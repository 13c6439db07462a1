#pragma once

#include <memory>
#include <optional>

#include "mardpg/config.hpp"
#include "mardpg/metrics.hpp"

namespace mardpg {

// What serves each scenario during evaluation. Exploration is always off;
// the communication channel runs only when some scenario is MARDPG-served.
struct PolicySet {
    PolicyKind main_kind = PolicyKind::EW;
    PolicyKind inshop_kind = PolicyKind::EW;
    const EwPolicy* ew = nullptr;
    const L2rModel* l2r_main = nullptr;
    const L2rModel* l2r_inshop = nullptr;
    const MardpgModel* model = nullptr;

    bool uses_mardpg() const {
        return main_kind == PolicyKind::MARDPG || inshop_kind == PolicyKind::MARDPG;
    }
    Vec act(int scenario, const Vec& message, const Vec& obs) const;
    std::string pair_name() const;
};

// Plays `sessions` seeded sessions of the shopping simulator under the given
// policy pair and aggregates GMV/click/purchase counts. Sessions fan out as a
// data-parallel kernel; aggregation is in session order, so serial and
// parallel modes agree bitwise.
MetricsRecord evaluate_pair(const ShoppingEnv& proto, const PolicySet& policies, int sessions,
                            uint64_t seed, ExecMode mode, const std::string& run_id);

// Owns everything one experiment needs: the environment, baselines trained on
// demand, and the MA-RDPG model. Training happens at most once per component
// and is shared across every evaluated pair.
class Experiment {
public:
    Experiment(const ExperimentConfig& config, uint64_t seed);

    void ensure_l2r();
    void ensure_mardpg(std::ostream* train_log = nullptr, const std::string& checkpoint_dir = "");

    // One record per eval seed; eval seeds are aligned across pairs so that
    // comparisons are paired session-for-session.
    std::vector<MetricsRecord> evaluate(PolicyKind main_kind, PolicyKind inshop_kind);

    const ShoppingEnv& env() const { return *env_; }
    const ExperimentConfig& config() const { return config_; }
    MardpgModel* model() { return model_ ? &*model_ : nullptr; }
    const TrainResult& train_result() const { return train_result_; }
    const L2rModel* l2r_main() const { return l2r_main_ ? &*l2r_main_ : nullptr; }
    const L2rModel* l2r_inshop() const { return l2r_inshop_ ? &*l2r_inshop_ : nullptr; }

    // Loads MA-RDPG parameters from a checkpoint instead of training.
    void load_mardpg(const std::string& checkpoint_path);

private:
    PolicySet policies(PolicyKind main_kind, PolicyKind inshop_kind) const;

    ExperimentConfig config_;
    uint64_t seed_;
    std::unique_ptr<ShoppingEnv> env_;
    EwPolicy ew_;
    std::optional<L2rModel> l2r_main_;
    std::optional<L2rModel> l2r_inshop_;
    std::optional<MardpgModel> model_;
    TrainResult train_result_;
};

// Model dimensions used when training on the beach environment.
ModelDims beach_model_dims(const ExperimentConfig& config);

}  // namespace mardpg
