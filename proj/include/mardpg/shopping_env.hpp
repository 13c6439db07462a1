#pragma once

#include <array>
#include <iosfwd>
#include <memory>

#include "mardpg/env.hpp"

namespace mardpg {

// Main-search feature columns.
inline constexpr int kFtCtr = 0;
inline constexpr int kFtRating = 1;
inline constexpr int kFtShopPop = 2;
inline constexpr int kFtPriceNorm = 3;
inline constexpr int kFtConv = 4;
inline constexpr int kFtSales = 5;
inline constexpr int kFtRel = 6;
inline constexpr int kMainFeatures = 7;

// In-shop feature columns.
inline constexpr int kFtLatest = 0;
inline constexpr int kFtSalesIn = 1;
inline constexpr int kFtRelIn = 2;
inline constexpr int kInshopFeatures = 3;

inline constexpr int kScenarioMain = 0;
inline constexpr int kScenarioInshop = 1;

struct Item {
    int item_id = 0;
    int shop_id = 0;
    Vec main_features;    // 7 columns, all in [0,1]
    Vec inshop_features;  // 3 columns, all in [0,1]
    double price = 0.0;
};

struct Shop {
    int shop_id = 0;
    double quality = 0.0;  // in [0,1]; drives popularity, prices and purchases
    int first_item = 0;
    int item_count = 0;
};

struct Catalog {
    std::vector<Shop> shops;
    std::vector<Item> items;
};

struct ShoppingConfig {
    int n_shops = 50;
    int items_per_shop = 40;
    int page_size = 10;
    int candidates_main = 50;

    // Cross-scenario switch statistics observed in production traffic.
    double p_main_to_inshop = 0.2546;
    double p_inshop_to_main = 0.0912;

    // Session termination: the leave probability after k consecutive no-click
    // pages is min(1, leave_prob * k); sessions are hard-capped at
    // max_session_steps pages.
    double leave_prob = 0.3;
    int max_session_steps = 15;

    // Click model: p(click at 0-based position p) =
    //   sigmoid(click_beta * <pref, features> + click_bias) / log2(p + 2).
    double click_beta = 10.0;
    double click_bias = -7.0;

    // Purchase model (given a click):
    //   sigmoid(affinity_scale * affinity - price_sens * price_norm
    //           + quality_bonus * shop_quality + match_weight * <pref, features>
    //           + purchase_bias).
    // The quality bonus is much stronger inside the shop: users who were
    // routed into a good shop buy there, which is the cross-scenario payoff
    // a cooperating main search can set up.
    double purchase_affinity_scale = 1.2;
    double purchase_price_sens = 2.0;
    double purchase_quality_bonus_main = 0.6;
    double purchase_quality_bonus_inshop = 2.8;
    double purchase_match_weight = 4.0;
    double purchase_bias = -5.0;

    double price_min = 1.0;
    double price_max = 100.0;

    // User population.
    std::array<double, 8> age_dist = {0.06, 0.10, 0.16, 0.20, 0.16, 0.13, 0.11, 0.08};
    std::array<double, 2> gender_dist = {0.52, 0.48};
    std::array<double, 3> purchase_power_dist = {0.30, 0.50, 0.20};
    std::array<double, 7> pref_main_base = {0.40, 0.05, 0.02, 0.02, 0.06, 0.08, 0.37};
    std::array<double, 3> pref_inshop_base = {0.40, 0.32, 0.28};
    double pref_noise = 0.5;  // log-normal spread of individual preferences

    uint64_t catalog_seed = 20180423;
};

struct User {
    int age_bucket = 0;
    int gender = 0;
    int purchase_power = 0;
    int query_type = 0;
    Vec pref_main;    // 7, sums to 1
    Vec pref_inshop;  // 3, sums to 1
};

// Result of one page interaction.
struct PageEvents {
    std::vector<int> clicked_positions;  // page positions, ascending
    int purchased_position = -1;
    double purchased_price = 0.0;

    bool any_click() const { return !clicked_positions.empty(); }
    bool purchased() const { return purchased_position >= 0; }
};

// Two-scenario e-commerce session simulator. Exactly one agent (the scenario
// the user is in) acts per page. Observations are 52-dim, all entries in
// [0,1]:
//   0-7   age one-hot          8-9   gender one-hot     10-12 purchase power
//   13-18 clicked-item aggregates (count, price, rating, conv, sales, pop)
//   19-26 query type one-hot   27-28 scenario one-hot
//   29-38 candidate feature means (scenario dims, rest 0)
//   39-48 candidate feature stds (x2, scenario dims, rest 0)
//   49    step / max_steps     50    squashed last reward
//   51    no-click-streak leave probability
class ShoppingEnv : public Env {
public:
    explicit ShoppingEnv(const ShoppingConfig& config);

    std::pair<Vec, int> reset(std::mt19937_64& rng) override;
    EnvStep step(const Vec& padded_action) override;

    int obs_dim() const override { return 52; }
    const std::vector<AgentSpec>& agent_specs() const override { return specs_; }
    std::unique_ptr<Env> clone() const override { return std::make_unique<ShoppingEnv>(*this); }

    const Catalog& catalog() const { return *catalog_; }
    const ShoppingConfig& config() const { return config_; }

    // Session telemetry for metrics (valid after a terminal step).
    double session_gmv_main() const { return gmv_main_; }
    double session_gmv_inshop() const { return gmv_inshop_; }
    long session_clicks() const { return clicks_; }
    long session_purchases() const { return purchases_; }

    // Exposed pieces of the user model, used directly by tests and the
    // baseline logger.
    User sample_user(std::mt19937_64& rng) const;
    PageEvents simulate_page(const User& user, const std::vector<int>& page_items, int scenario,
                             std::mt19937_64& rng) const;
    double click_probability(const User& user, const Item& item, int scenario, int position) const;
    double purchase_probability(const User& user, const Item& item, int scenario) const;
    int scenario() const { return scenario_; }
    const User& user() const { return user_; }
    const std::vector<int>& candidates() const { return candidates_; }

    // Page interaction trace of the most recent step, for logging and tests.
    const PageEvents& last_events() const { return last_events_; }
    const std::vector<int>& last_page() const { return last_page_; }
    int last_scenario() const { return last_scenario_; }

    double page_reward(const PageEvents& events) const;

    static Vec scenario_features(const Item& item, int scenario);
    void dump_snapshot(std::ostream& out) const;

private:
    static Catalog build_catalog(const ShoppingConfig& config);
    void sample_candidates();
    Vec observation() const;

    ShoppingConfig config_;
    std::shared_ptr<const Catalog> catalog_;
    std::vector<AgentSpec> specs_ = {{0, kMainFeatures, 0}, {1, kInshopFeatures, kMainFeatures}};

    // Session state.
    std::mt19937_64 session_rng_{0};
    User user_;
    int scenario_ = kScenarioMain;
    int current_shop_ = -1;
    int step_count_ = 0;
    int no_click_streak_ = 0;
    double last_reward_ = 0.0;
    bool terminal_ = true;
    std::vector<int> candidates_;  // item ids for the upcoming page, ascending

    // Session aggregates.
    long session_click_count_ = 0;
    Vec clicked_feature_sum_;  // over main features of clicked items
    double gmv_main_ = 0.0;
    double gmv_inshop_ = 0.0;
    long clicks_ = 0;
    long purchases_ = 0;

    PageEvents last_events_;
    std::vector<int> last_page_;
    int last_scenario_ = kScenarioMain;
};

}  // namespace mardpg
