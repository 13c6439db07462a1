#include "mardpg/shopping_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace mardpg {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

int sample_categorical(const double* weights, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += weights[i];
    double r = u(rng) * total;
    for (int i = 0; i < n; ++i) {
        r -= weights[i];
        if (r < 0.0) return i;
    }
    return n - 1;
}

}  // namespace

std::vector<int> rank_items(const std::vector<Vec>& feature_rows, const Vec& weights) {
    std::vector<double> scores(feature_rows.size());
    for (std::size_t i = 0; i < feature_rows.size(); ++i) {
        scores[i] = dot(feature_rows[i], weights);  // throws on dim mismatch
    }
    std::vector<int> order(feature_rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    return order;
}

ShoppingEnv::ShoppingEnv(const ShoppingConfig& config)
    : config_(config), catalog_(std::make_shared<const Catalog>(build_catalog(config))) {
    if (config.page_size <= 0 || config.candidates_main < config.page_size ||
        config.items_per_shop < config.page_size) {
        throw std::invalid_argument("ShoppingEnv: page_size must fit in every candidate pool");
    }
}

Catalog ShoppingEnv::build_catalog(const ShoppingConfig& config) {
    Catalog catalog;
    std::mt19937_64 rng(config.catalog_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);

    catalog.shops.reserve(static_cast<std::size_t>(config.n_shops));
    catalog.items.reserve(
        static_cast<std::size_t>(config.n_shops) * config.items_per_shop);
    for (int s = 0; s < config.n_shops; ++s) {
        Shop shop;
        shop.shop_id = s;
        shop.quality = u(rng);
        shop.first_item = static_cast<int>(catalog.items.size());
        shop.item_count = config.items_per_shop;
        for (int k = 0; k < config.items_per_shop; ++k) {
            Item item;
            item.item_id = static_cast<int>(catalog.items.size());
            item.shop_id = s;
            item.main_features.assign(kMainFeatures, 0.0);
            item.main_features[kFtCtr] = u(rng);
            item.main_features[kFtRating] = clamp01(u(rng));
            item.main_features[kFtShopPop] = clamp01(0.70 * shop.quality + 0.30 * u(rng));
            item.main_features[kFtPriceNorm] = clamp01(0.25 + 0.25 * shop.quality + 0.25 * n(rng));
            item.main_features[kFtConv] =
                clamp01(0.6 * u(rng) + 0.4 * (1.0 - item.main_features[kFtPriceNorm]));
            item.main_features[kFtSales] = clamp01(u(rng) * u(rng));
            item.main_features[kFtRel] = u(rng);
            item.inshop_features.assign(kInshopFeatures, 0.0);
            item.inshop_features[kFtLatest] = u(rng) < 0.3 ? 1.0 : 0.0;
            item.inshop_features[kFtSalesIn] = item.main_features[kFtSales];
            item.inshop_features[kFtRelIn] = item.main_features[kFtRel];
            item.price = config.price_min +
                         (config.price_max - config.price_min) * item.main_features[kFtPriceNorm];
            catalog.items.push_back(std::move(item));
        }
        catalog.shops.push_back(shop);
    }
    return catalog;
}

User ShoppingEnv::sample_user(std::mt19937_64& rng) const {
    User user;
    user.age_bucket = sample_categorical(config_.age_dist.data(), 8, rng);
    user.gender = sample_categorical(config_.gender_dist.data(), 2, rng);
    user.purchase_power = sample_categorical(config_.purchase_power_dist.data(), 3, rng);
    std::uniform_int_distribution<int> qt(0, 7);
    user.query_type = qt(rng);

    std::normal_distribution<double> n(0.0, 1.0);
    auto draw_pref = [&](const double* base, int len) {
        Vec pref(static_cast<std::size_t>(len));
        double sum = 0.0;
        for (int i = 0; i < len; ++i) {
            pref[static_cast<std::size_t>(i)] = base[i] * std::exp(config_.pref_noise * n(rng));
            sum += pref[static_cast<std::size_t>(i)];
        }
        for (double& p : pref) p /= sum;
        return pref;
    };
    user.pref_main = draw_pref(config_.pref_main_base.data(), kMainFeatures);
    user.pref_inshop = draw_pref(config_.pref_inshop_base.data(), kInshopFeatures);
    return user;
}

Vec ShoppingEnv::scenario_features(const Item& item, int scenario) {
    return scenario == kScenarioMain ? item.main_features : item.inshop_features;
}

double ShoppingEnv::click_probability(const User& user, const Item& item, int scenario,
                                      int position) const {
    const Vec& pref = scenario == kScenarioMain ? user.pref_main : user.pref_inshop;
    const double match = dot(pref, scenario_features(item, scenario));
    const double base = sigmoid(config_.click_beta * match + config_.click_bias);
    const double position_bias = 1.0 / std::log2(static_cast<double>(position) + 2.0);
    return base * position_bias;
}

double ShoppingEnv::purchase_probability(const User& user, const Item& item, int scenario) const {
    static constexpr double kAffinity[3] = {0.2, 0.5, 0.9};
    const double quality = catalog_->shops[static_cast<std::size_t>(item.shop_id)].quality;
    const Vec& pref = scenario == kScenarioMain ? user.pref_main : user.pref_inshop;
    const double match = dot(pref, scenario_features(item, scenario));
    const double quality_bonus = scenario == kScenarioMain ? config_.purchase_quality_bonus_main
                                                            : config_.purchase_quality_bonus_inshop;
    const double z = config_.purchase_affinity_scale * kAffinity[user.purchase_power] -
                     config_.purchase_price_sens * item.main_features[kFtPriceNorm] +
                     quality_bonus * quality + config_.purchase_match_weight * match +
                     config_.purchase_bias;
    return sigmoid(z);
}

PageEvents ShoppingEnv::simulate_page(const User& user, const std::vector<int>& page_items,
                                      int scenario, std::mt19937_64& rng) const {
    if (page_items.empty()) {
        throw std::invalid_argument("simulate_page: empty page");
    }
    PageEvents events;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int pos = 0; pos < static_cast<int>(page_items.size()); ++pos) {
        const Item& item = catalog_->items[static_cast<std::size_t>(page_items[pos])];
        if (u(rng) >= click_probability(user, item, scenario, pos)) continue;
        events.clicked_positions.push_back(pos);
        if (!events.purchased() && u(rng) < purchase_probability(user, item, scenario)) {
            events.purchased_position = pos;  // at most one purchase per page
            events.purchased_price = item.price;
        }
    }
    return events;
}

double ShoppingEnv::page_reward(const PageEvents& events) const {
    if (events.purchased()) return events.purchased_price;
    if (events.any_click()) return 1.0;
    return -1.0;
}

void ShoppingEnv::sample_candidates() {
    candidates_.clear();
    if (scenario_ == kScenarioMain) {
        // Query-dependent pool: distinct items drawn across the whole catalog.
        const int total = static_cast<int>(catalog_->items.size());
        std::uniform_int_distribution<int> pick(0, total - 1);
        while (static_cast<int>(candidates_.size()) < config_.candidates_main) {
            const int id = pick(session_rng_);
            if (std::find(candidates_.begin(), candidates_.end(), id) == candidates_.end()) {
                candidates_.push_back(id);
            }
        }
        std::sort(candidates_.begin(), candidates_.end());
    } else {
        const Shop& shop = catalog_->shops[static_cast<std::size_t>(current_shop_)];
        for (int k = 0; k < shop.item_count; ++k) candidates_.push_back(shop.first_item + k);
    }
}

Vec ShoppingEnv::observation() const {
    Vec obs(52, 0.0);
    obs[static_cast<std::size_t>(user_.age_bucket)] = 1.0;
    obs[static_cast<std::size_t>(8 + user_.gender)] = 1.0;
    obs[static_cast<std::size_t>(10 + user_.purchase_power)] = 1.0;

    if (session_click_count_ > 0) {
        const double inv = 1.0 / static_cast<double>(session_click_count_);
        obs[13] = std::min(1.0, static_cast<double>(session_click_count_) / 10.0);
        obs[14] = clicked_feature_sum_[kFtPriceNorm] * inv;
        obs[15] = clicked_feature_sum_[kFtRating] * inv;
        obs[16] = clicked_feature_sum_[kFtConv] * inv;
        obs[17] = clicked_feature_sum_[kFtSales] * inv;
        obs[18] = clicked_feature_sum_[kFtShopPop] * inv;
    }

    obs[static_cast<std::size_t>(19 + user_.query_type)] = 1.0;
    obs[static_cast<std::size_t>(27 + scenario_)] = 1.0;

    const int feat_dim = scenario_ == kScenarioMain ? kMainFeatures : kInshopFeatures;
    Vec mean(static_cast<std::size_t>(feat_dim), 0.0);
    Vec sq(static_cast<std::size_t>(feat_dim), 0.0);
    for (int id : candidates_) {
        const Vec f = scenario_features(catalog_->items[static_cast<std::size_t>(id)], scenario_);
        for (int k = 0; k < feat_dim; ++k) {
            mean[static_cast<std::size_t>(k)] += f[static_cast<std::size_t>(k)];
            sq[static_cast<std::size_t>(k)] +=
                f[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(k)];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(candidates_.size());
    for (int k = 0; k < feat_dim; ++k) {
        const double m = mean[static_cast<std::size_t>(k)] * inv_n;
        const double var = std::max(0.0, sq[static_cast<std::size_t>(k)] * inv_n - m * m);
        obs[static_cast<std::size_t>(29 + k)] = m;
        // std of [0,1] data is at most 0.5; doubled to use the full range.
        obs[static_cast<std::size_t>(39 + k)] = std::min(1.0, 2.0 * std::sqrt(var));
    }

    obs[49] = static_cast<double>(step_count_) / static_cast<double>(config_.max_session_steps);
    obs[50] = 0.5 + 0.5 * std::tanh(last_reward_ / 20.0);
    obs[51] = std::min(1.0, config_.leave_prob * static_cast<double>(no_click_streak_));
    return obs;
}

std::pair<Vec, int> ShoppingEnv::reset(std::mt19937_64& rng) {
    session_rng_.seed(rng());
    user_ = sample_user(session_rng_);
    scenario_ = kScenarioMain;
    current_shop_ = -1;
    step_count_ = 0;
    no_click_streak_ = 0;
    last_reward_ = 0.0;
    terminal_ = false;
    session_click_count_ = 0;
    clicked_feature_sum_.assign(kMainFeatures, 0.0);
    gmv_main_ = gmv_inshop_ = 0.0;
    clicks_ = purchases_ = 0;
    sample_candidates();
    return {observation(), kScenarioMain};
}

EnvStep ShoppingEnv::step(const Vec& padded_action) {
    if (terminal_) {
        throw std::runtime_error("ShoppingEnv: stepped after terminal");
    }
    const AgentSpec& spec = specs_[static_cast<std::size_t>(scenario_)];
    if (static_cast<int>(padded_action.size()) != padded_dim()) {
        throw std::invalid_argument("ShoppingEnv: padded action length mismatch");
    }
    for (int i = 0; i < static_cast<int>(padded_action.size()); ++i) {
        const bool inside = i >= spec.slice_begin && i < spec.slice_begin + spec.action_dim;
        if (!inside && padded_action[static_cast<std::size_t>(i)] != 0.0) {
            throw std::invalid_argument("ShoppingEnv: action outside the active agent's slice "
                                        "(active agent " + std::to_string(spec.agent_id) + ")");
        }
    }
    const Vec weights = unpad_action(spec, padded_action);

    // Rank the candidate pool and show the top page.
    std::vector<Vec> rows;
    rows.reserve(candidates_.size());
    for (int id : candidates_) {
        rows.push_back(scenario_features(catalog_->items[static_cast<std::size_t>(id)], scenario_));
    }
    const std::vector<int> order = rank_items(rows, weights);
    std::vector<int> page;
    for (int k = 0; k < config_.page_size; ++k) {
        page.push_back(candidates_[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
    }

    const PageEvents events = simulate_page(user_, page, scenario_, session_rng_);
    double reward = page_reward(events);
    last_events_ = events;
    last_page_ = page;
    last_scenario_ = scenario_;

    clicks_ += static_cast<long>(events.clicked_positions.size());
    for (int pos : events.clicked_positions) {
        const Item& item = catalog_->items[static_cast<std::size_t>(page[static_cast<std::size_t>(pos)])];
        session_click_count_ += 1;
        for (int k = 0; k < kMainFeatures; ++k) {
            clicked_feature_sum_[static_cast<std::size_t>(k)] +=
                item.main_features[static_cast<std::size_t>(k)];
        }
    }
    if (events.purchased()) {
        purchases_ += 1;
        (scenario_ == kScenarioMain ? gmv_main_ : gmv_inshop_) += events.purchased_price;
    }

    step_count_ += 1;
    no_click_streak_ = events.any_click() ? 0 : no_click_streak_ + 1;

    // Leave decision: rising pressure after consecutive no-click pages, hard
    // stop at the session cap.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool leave = step_count_ >= config_.max_session_steps;
    if (!leave && !events.any_click()) {
        leave = u(session_rng_) < std::min(1.0, config_.leave_prob *
                                                    static_cast<double>(no_click_streak_));
    }

    EnvStep out;
    if (leave) {
        const bool bought_anything = gmv_main_ + gmv_inshop_ > 0.0;
        if (!bought_anything) reward += -5.0;
        out.reward = reward;
        out.terminal = true;
        terminal_ = true;
        last_reward_ = reward;
        return out;
    }

    // Scenario transition.
    if (scenario_ == kScenarioMain && events.any_click()) {
        const int last_pos = events.purchased() ? events.purchased_position
                                                : events.clicked_positions.back();
        const Item& entered =
            catalog_->items[static_cast<std::size_t>(page[static_cast<std::size_t>(last_pos)])];
        const double quality = catalog_->shops[static_cast<std::size_t>(entered.shop_id)].quality;
        if (u(session_rng_) < config_.p_main_to_inshop * quality) {
            scenario_ = kScenarioInshop;
            current_shop_ = entered.shop_id;
        }
    } else if (scenario_ == kScenarioInshop) {
        if (u(session_rng_) < config_.p_inshop_to_main) {
            scenario_ = kScenarioMain;
            current_shop_ = -1;
        }
    }

    last_reward_ = reward;
    sample_candidates();
    out.next_obs = observation();
    out.next_agent = scenario_;
    out.reward = reward;
    out.terminal = false;
    return out;
}

void ShoppingEnv::dump_snapshot(std::ostream& out) const {
    out << "shopping-env snapshot\n";
    out << "shops " << catalog_->shops.size() << " items " << catalog_->items.size()
        << " catalog_seed " << config_.catalog_seed << "\n";
    out << "age_dist";
    for (double w : config_.age_dist) out << " " << w;
    out << "\ngender_dist";
    for (double w : config_.gender_dist) out << " " << w;
    out << "\npurchase_power_dist";
    for (double w : config_.purchase_power_dist) out << " " << w;
    out << "\n";
    for (const Shop& shop : catalog_->shops) {
        out << "shop " << shop.shop_id << " quality " << shop.quality << " items "
            << shop.item_count << "\n";
    }
    out << "item_id shop_id price ctr rating shop_pop price_norm conv sales rel latest\n";
    for (const Item& item : catalog_->items) {
        out << item.item_id << " " << item.shop_id << " " << item.price;
        for (double f : item.main_features) out << " " << f;
        out << " " << item.inshop_features[kFtLatest] << "\n";
    }
}

}  // namespace mardpg
