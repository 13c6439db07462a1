#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mardpg/experiment.hpp"
#include "mardpg/train.hpp"
#include "oracles.hpp"

using namespace mardpg;

// The serial paths are the reference implementations; the OpenMP paths must
// reproduce them bitwise. Reductions run in index order, so this holds for
// any thread count.

namespace {

struct Fixture {
    MardpgModel model;
    ShoppingEnv env;
    std::vector<Episode> episodes;
    std::vector<const Episode*> batch;

    Fixture() : model(make_model(ModelDims{}, 4242)), env(ShoppingConfig{}) {
        episodes = collect_batch(env, model.actors, model.comm, 24, 99, 0.2, 10,
                                 ExecMode::serial);
        for (const Episode& ep : episodes) batch.push_back(&ep);
    }
};

}  // namespace

TEST_CASE("collect_batch: serial and parallel agree bitwise") {
    Fixture fx;
    const auto parallel = collect_batch(fx.env, fx.model.actors, fx.model.comm, 24, 99, 0.2, 10,
                                        ExecMode::parallel);
    REQUIRE(parallel.size() == fx.episodes.size());
    for (std::size_t i = 0; i < parallel.size(); ++i) {
        REQUIRE(parallel[i].length() == fx.episodes[i].length());
        for (int t = 0; t < parallel[i].length(); ++t) {
            const auto& a = parallel[i].steps[static_cast<std::size_t>(t)];
            const auto& b = fx.episodes[i].steps[static_cast<std::size_t>(t)];
            CHECK(a.obs == b.obs);
            CHECK(a.action == b.action);
            CHECK(a.reward == b.reward);
        }
    }
}

TEST_CASE("critic kernel: serial and parallel agree bitwise") {
    Fixture fx;
    const auto serial =
        critic_batch_grads(fx.model, fx.model.critic, fx.batch, 0.9, ExecMode::serial);
    const auto parallel =
        critic_batch_grads(fx.model, fx.model.critic, fx.batch, 0.9, ExecMode::parallel);
    CHECK(serial.loss == parallel.loss);
    CHECK(serial.mean_q == parallel.mean_q);
    for (std::size_t l = 0; l < serial.grads.layers.size(); ++l) {
        CHECK(serial.grads.layers[l].dw.data == parallel.grads.layers[l].dw.data);
        CHECK(serial.grads.layers[l].db == parallel.grads.layers[l].db);
    }
}

TEST_CASE("actor kernel: serial and parallel agree bitwise") {
    Fixture fx;
    const auto serial = actor_batch_grads(fx.model, fx.batch, ExecMode::serial);
    const auto parallel = actor_batch_grads(fx.model, fx.batch, ExecMode::parallel);
    CHECK(serial.mean_q == parallel.mean_q);
    CHECK(serial.active_steps == parallel.active_steps);
    for (std::size_t a = 0; a < serial.grads.size(); ++a) {
        for (std::size_t l = 0; l < serial.grads[a].layers.size(); ++l) {
            CHECK(serial.grads[a].layers[l].dw.data == parallel.grads[a].layers[l].dw.data);
        }
    }
}

TEST_CASE("comm kernel: serial and parallel agree bitwise") {
    Fixture fx;
    const auto serial =
        comm_batch_grads(fx.model, fx.model.critic, fx.batch, 0.9, 1.0, 5.0, ExecMode::serial);
    const auto parallel =
        comm_batch_grads(fx.model, fx.model.critic, fx.batch, 0.9, 1.0, 5.0, ExecMode::parallel);
    CHECK(serial.loss == parallel.loss);
    CHECK(serial.clipped_episodes == parallel.clipped_episodes);
    CHECK(serial.grads.dwi.data == parallel.grads.dwi.data);
    CHECK(serial.grads.dwf.data == parallel.grads.dwf.data);
    CHECK(serial.grads.dwg.data == parallel.grads.dwg.data);
    CHECK(serial.grads.dwo.data == parallel.grads.dwo.data);
}

TEST_CASE("evaluation kernel: serial and parallel agree bitwise") {
    Fixture fx;
    EwPolicy ew;
    PolicySet set;
    set.ew = &ew;
    const MetricsRecord serial = evaluate_pair(fx.env, set, 300, 7, ExecMode::serial, "EW+EW");
    const MetricsRecord parallel =
        evaluate_pair(fx.env, set, 300, 7, ExecMode::parallel, "EW+EW");
    CHECK(serial.gmv_main == parallel.gmv_main);
    CHECK(serial.gmv_inshop == parallel.gmv_inshop);
    CHECK(serial.clicks == parallel.clicks);
    CHECK(serial.purchases == parallel.purchases);
}
