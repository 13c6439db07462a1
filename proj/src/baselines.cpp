#include "mardpg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mardpg {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

L2rModel make_l2r(int obs_dim, const std::vector<int>& hidden, int action_dim, uint64_t seed) {
    std::vector<int> dims = {obs_dim};
    std::vector<Act> acts;
    for (int h : hidden) {
        dims.push_back(h);
        acts.push_back(Act::relu);
    }
    dims.push_back(action_dim);
    acts.push_back(Act::softmax);
    L2rModel model;
    model.net = make_mlp(dims, acts);
    std::mt19937_64 rng(seed);
    init_glorot(model.net, rng);
    return model;
}

ParamViews l2r_param_views(L2rModel& model, const std::string& prefix) {
    ParamViews views = views_of(model.net, prefix);
    views.push_back({prefix + ".scale", &model.scale, 1, 1});
    views.push_back({prefix + ".bias", &model.bias, 1, 1});
    return views;
}

Vec l2r_rank(const L2rModel& model, const Vec& obs) { return mlp_forward(model.net, obs); }

double l2r_predict(const L2rModel& model, const Vec& obs, const Vec& item_features) {
    const Vec w = l2r_rank(model, obs);
    return sigmoid(model.scale * dot(w, item_features) + model.bias);
}

std::vector<LoggedPage> log_ew_sessions(const ShoppingEnv& proto, const EwPolicy& ew,
                                        int sessions, uint64_t seed) {
    std::vector<LoggedPage> pages;
    std::mt19937_64 rng(seed);
    auto env_ptr = proto.clone();
    auto& env = static_cast<ShoppingEnv&>(*env_ptr);
    const int padded_dim = env.padded_dim();

    for (int s = 0; s < sessions; ++s) {
        auto [obs, agent] = env.reset(rng);
        while (true) {
            const AgentSpec& spec = env.agent_specs()[static_cast<std::size_t>(agent)];
            const Vec action = ew.act(agent);
            const EnvStep step = env.step(pad_action(spec, action, padded_dim));

            LoggedPage page;
            page.scenario = env.last_scenario();
            page.obs = obs;
            const PageEvents& events = env.last_events();
            for (std::size_t pos = 0; pos < env.last_page().size(); ++pos) {
                const Item& item =
                    env.catalog().items[static_cast<std::size_t>(env.last_page()[pos])];
                page.item_features.push_back(
                    ShoppingEnv::scenario_features(item, page.scenario));
                const bool clicked =
                    std::find(events.clicked_positions.begin(), events.clicked_positions.end(),
                              static_cast<int>(pos)) != events.clicked_positions.end();
                page.labels.push_back(clicked ? 1 : 0);
            }
            pages.push_back(std::move(page));

            if (step.terminal) break;
            obs = step.next_obs;
            agent = step.next_agent;
        }
    }
    return pages;
}

L2rTrainStats l2r_train(L2rModel& model, const std::vector<LoggedPage>& pages, int scenario,
                        const L2rTrainConfig& config, uint64_t seed) {
    struct Sample {
        const LoggedPage* page;
        int position;
    };
    std::vector<Sample> samples;
    for (const LoggedPage& page : pages) {
        if (page.scenario != scenario) continue;
        for (int pos = 0; pos < static_cast<int>(page.labels.size()); ++pos) {
            samples.push_back({&page, pos});
        }
    }
    if (samples.empty()) {
        throw std::invalid_argument("l2r_train: no logged samples for scenario " +
                                    std::to_string(scenario));
    }

    RmsProp opt{config.lr, config.rmsprop_decay, config.rmsprop_eps};
    std::mt19937_64 rng(seed);
    L2rTrainStats stats;
    stats.samples = static_cast<long>(samples.size());

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t cursor = 0;
        while (cursor < order.size()) {
            const std::size_t batch_end =
                std::min(order.size(), cursor + static_cast<std::size_t>(config.minibatch));
            const double inv = 1.0 / static_cast<double>(batch_end - cursor);

            MlpGrads grads = make_grads(model.net);
            double d_scale = 0.0, d_bias = 0.0;
            for (std::size_t i = cursor; i < batch_end; ++i) {
                const Sample& sample = samples[order[i]];
                const Vec& f = sample.page->item_features[static_cast<std::size_t>(sample.position)];
                const double label =
                    sample.page->labels[static_cast<std::size_t>(sample.position)];

                MlpTape tape;
                const Vec w = mlp_forward(model.net, sample.page->obs, &tape);
                const double score = dot(w, f);
                const double p = sigmoid(model.scale * score + model.bias);
                // d(BCE)/d(logit) = p - label.
                const double err = (p - label) * inv;
                Vec dw(f.size());
                const double eps = 1e-12;
                for (std::size_t k = 0; k < f.size(); ++k) {
                    dw[k] = err * model.scale * f[k] +
                            config.entropy_reg * inv * (1.0 + std::log(w[k] + eps));
                }
                mlp_backward(model.net, tape, dw, grads);
                d_scale += err * score;
                d_bias += err;

                epoch_loss -= (label * std::log(p + eps) + (1.0 - label) * std::log(1.0 - p + eps));
                for (double wk : w) epoch_loss += config.entropy_reg * wk * std::log(wk + eps);
            }
            ParamViews params = l2r_param_views(model, "l2r");
            ParamViews gviews = views_of(grads, "l2r");
            gviews.push_back({"l2r.scale", &d_scale, 1, 1});
            gviews.push_back({"l2r.bias", &d_bias, 1, 1});
            opt.step(params, gviews);
            cursor = batch_end;
        }
        stats.epoch_loss.push_back(epoch_loss / static_cast<double>(samples.size()));
    }
    return stats;
}

}  // namespace mardpg
