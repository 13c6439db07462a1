#pragma once

#include <cstdint>
#include <vector>

#include "mardpg/nn.hpp"
#include "mardpg/optim.hpp"
#include "mardpg/shopping_env.hpp"

namespace mardpg {

// Fixed expert-style weights per scenario; ignores the observation.
struct EwPolicy {
    Vec weights_main = Vec(kMainFeatures, 1.0 / kMainFeatures);
    Vec weights_inshop = Vec(kInshopFeatures, 1.0 / kInshopFeatures);

    const Vec& act(int scenario) const {
        return scenario == kScenarioMain ? weights_main : weights_inshop;
    }
};

// Point-wise learning-to-rank scorer. The network has the actor's shape minus
// the message input; its softmax head is an explicit feature-importance
// vector w(obs), so the item score is <w(obs), item features> and the same
// vector serves as the ranking weights. A learned affine (scale, bias) maps
// scores to click-or-purchase probabilities for the logistic loss.
struct L2rModel {
    Mlp net;  // obs_dim -> hidden -> hidden -> action_dim, ReLU/ReLU/softmax
    double scale = 1.0;
    double bias = 0.0;
};

L2rModel make_l2r(int obs_dim, const std::vector<int>& hidden, int action_dim, uint64_t seed);
ParamViews l2r_param_views(L2rModel& model, const std::string& prefix);

Vec l2r_rank(const L2rModel& model, const Vec& obs);
double l2r_predict(const L2rModel& model, const Vec& obs, const Vec& item_features);

// One logged page impression: the observation the policy saw, the shown items
// and their per-position click-or-purchase labels.
struct LoggedPage {
    int scenario = kScenarioMain;
    Vec obs;
    std::vector<Vec> item_features;
    std::vector<uint8_t> labels;
};

// Off-policy bootstrap data for L2R: sessions run under the EW policy.
std::vector<LoggedPage> log_ew_sessions(const ShoppingEnv& proto, const EwPolicy& ew,
                                        int sessions, uint64_t seed);

struct L2rTrainConfig {
    int epochs = 2;
    double lr = 1e-3;
    int minibatch = 100;
    double rmsprop_decay = 0.9;
    double rmsprop_eps = 1e-8;
    // Entropy pull on the importance head. The softmax gradient dies at
    // corners, so without it a lucky feature can win an early race and lock
    // in; the regularizer keeps the head trainable.
    double entropy_reg = 2e-3;
};

struct L2rTrainStats {
    std::vector<double> epoch_loss;  // mean logistic loss per epoch
    long samples = 0;
};

// Trains on every (page, position) sample of the given scenario.
L2rTrainStats l2r_train(L2rModel& model, const std::vector<LoggedPage>& pages, int scenario,
                        const L2rTrainConfig& config, uint64_t seed);

}  // namespace mardpg
