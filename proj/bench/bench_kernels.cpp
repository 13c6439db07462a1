// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: episode collection, the three gradient kernels, and
// evaluation session fan-out.

#include <chrono>
#include <cstdio>

#include "mardpg/experiment.hpp"
#include "mardpg/train.hpp"

using namespace mardpg;

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn, int repeats) {
    // One warmup, then best-of-n.
    fn();
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        fn();
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-22s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", hardware_threads());

    MardpgModel model = make_model(ModelDims{}, 7);
    ShoppingEnv env(ShoppingConfig{});

    const int n_episodes = 100;
    std::vector<Episode> episodes = collect_batch(env, model.actors, model.comm, n_episodes, 3,
                                                  0.2, 12, ExecMode::serial);
    std::vector<const Episode*> batch;
    for (const Episode& ep : episodes) batch.push_back(&ep);

    report("collect_batch",
           time_ms([&] { collect_batch(env, model.actors, model.comm, n_episodes, 3, 0.2, 12,
                                       ExecMode::serial); }, 3),
           time_ms([&] { collect_batch(env, model.actors, model.comm, n_episodes, 3, 0.2, 12,
                                       ExecMode::parallel); }, 3));

    report("critic_batch_grads",
           time_ms([&] { critic_batch_grads(model, model.critic, batch, 0.9, ExecMode::serial); },
                   5),
           time_ms([&] { critic_batch_grads(model, model.critic, batch, 0.9,
                                            ExecMode::parallel); }, 5));

    report("actor_batch_grads",
           time_ms([&] { actor_batch_grads(model, batch, ExecMode::serial); }, 5),
           time_ms([&] { actor_batch_grads(model, batch, ExecMode::parallel); }, 5));

    report("comm_batch_grads",
           time_ms([&] { comm_batch_grads(model, model.critic, batch, 0.9, 1.0, 5.0,
                                          ExecMode::serial); }, 5),
           time_ms([&] { comm_batch_grads(model, model.critic, batch, 0.9, 1.0, 5.0,
                                          ExecMode::parallel); }, 5));

    EwPolicy ew;
    PolicySet set;
    set.ew = &ew;
    report("evaluate_pair",
           time_ms([&] { evaluate_pair(env, set, 2000, 5, ExecMode::serial, "EW+EW"); }, 3),
           time_ms([&] { evaluate_pair(env, set, 2000, 5, ExecMode::parallel, "EW+EW"); }, 3));

    return 0;
}
