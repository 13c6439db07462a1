// Command-line front end: train MA-RDPG, evaluate policy pairs, compare
// against the EW/L2R baselines, run the gradient checker, and query the
// beach-game brute-force oracle.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mardpg/checkpoint.hpp"
#include "mardpg/experiment.hpp"
#include "mardpg/gradsuite.hpp"

namespace fs = std::filesystem;
using namespace mardpg;

namespace {

ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return parse_config_text("");
    return load_config(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

void dump_catalog_snapshot(const ShoppingEnv& env, const std::string& out_dir) {
    std::ofstream out(out_dir + "/catalog.txt");
    if (!out) throw std::runtime_error("cannot open " + out_dir + "/catalog.txt");
    env.dump_snapshot(out);
}

int cmd_train(const std::string& config_path, uint64_t seed, const std::string& out_dir) {
    const ExperimentConfig config = load_or_default(config_path);
    fs::create_directories(out_dir);
    write_text(out_dir + "/config_resolved.cfg", dump_config(config));

    if (config.env_kind == "beach") {
        BeachEnv env(config.beach);
        MardpgModel model = make_model(beach_model_dims(config), mix_seed(seed, 0x30DE1));
        Trainer trainer(model, config.train);
        ReplayBuffer buffer(config.train.buffer_capacity);
        std::ofstream log(out_dir + "/training_log.txt");
        const TrainResult result = trainer.run(env, buffer, seed, &log, out_dir);
        save_checkpoint(out_dir + "/checkpoint_final.txt", model_param_views(model),
                        {seed, config.train.steps});

        // Greedy rollout for a quick look at what was learned.
        std::mt19937_64 rng(mix_seed(seed, 0xE7A1));
        auto [obs, agent] = env.reset(rng);
        Vec h(static_cast<std::size_t>(model.comm.hidden_dim()), 0.0), c(h.size(), 0.0);
        double reward = 0.0;
        while (true) {
            const Vec a = actor_forward(model.actors[static_cast<std::size_t>(agent)], h, obs);
            const Vec padded =
                pad_action(model.actors[static_cast<std::size_t>(agent)].spec, a, 4);
            const EnvStep step = env.step(padded);
            lstm_cell_forward(model.comm, h, c, concat(obs, padded), h, c);
            if (step.terminal) {
                reward = step.reward;
                break;
            }
            obs = step.next_obs;
            agent = step.next_agent;
        }
        const auto [p0, p1] = env.positions();
        const BeachOracleResult oracle = beach_bruteforce(config.beach.rho, config.beach.grid, 201);
        std::cout << "trained beach policy: positions (" << p0 << ", " << p1 << ") reward "
                  << reward << " (cooperative optimum " << oracle.best_reward << ", Hotelling "
                  << oracle.hotelling_reward << ")\n";
        std::cout << "training steps: " << result.log.size()
                  << ", aborted: " << result.aborted_steps << "\n";
        return 0;
    }

    Experiment exp(config, seed);
    dump_catalog_snapshot(exp.env(), out_dir);
    std::ofstream log(out_dir + "/training_log.txt");
    exp.ensure_mardpg(&log, out_dir);
    save_checkpoint(out_dir + "/checkpoint_final.txt", model_param_views(*exp.model()),
                    {seed, config.train.steps});
    const auto& result = exp.train_result();
    std::cout << "trained " << result.log.size() << " steps, aborted " << result.aborted_steps
              << "\n";
    if (!result.log.empty()) {
        std::cout << "final: " << format_log_record(result.log.back()) << "\n";
    }
    std::cout << "checkpoint: " << out_dir << "/checkpoint_final.txt\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, uint64_t seed, const std::string& out_dir,
                 const std::string& checkpoint) {
    const ExperimentConfig config = load_or_default(config_path);
    fs::create_directories(out_dir);
    Experiment exp(config, seed);
    dump_catalog_snapshot(exp.env(), out_dir);

    const bool needs_model =
        config.policy_main == PolicyKind::MARDPG || config.policy_inshop == PolicyKind::MARDPG;
    if (needs_model && !checkpoint.empty()) {
        exp.load_mardpg(checkpoint);
    }

    const auto records = exp.evaluate(config.policy_main, config.policy_inshop);
    if (records.empty()) {
        std::cerr << "warning: eval.sessions = 0, no metrics produced\n";
        return 0;
    }
    write_metrics_csv(records, out_dir + "/metrics.csv");
    write_metrics_summary(records, out_dir + "/summary.txt");
    std::cout << metrics_summary(records);
    return 0;
}

int cmd_compare(const std::string& config_path, uint64_t seed, const std::string& out_dir,
                const std::string& checkpoint) {
    const ExperimentConfig config = load_or_default(config_path);
    fs::create_directories(out_dir);
    Experiment exp(config, seed);
    dump_catalog_snapshot(exp.env(), out_dir);

    const bool with_mardpg = !checkpoint.empty() ||
                             config.policy_main == PolicyKind::MARDPG ||
                             config.policy_inshop == PolicyKind::MARDPG;
    if (!checkpoint.empty()) exp.load_mardpg(checkpoint);

    std::vector<std::pair<PolicyKind, PolicyKind>> pairs = {
        {PolicyKind::EW, PolicyKind::EW},
        {PolicyKind::EW, PolicyKind::L2R},
        {PolicyKind::L2R, PolicyKind::EW},
        {PolicyKind::L2R, PolicyKind::L2R}};
    if (with_mardpg) pairs.push_back({PolicyKind::MARDPG, PolicyKind::MARDPG});

    std::vector<MetricsRecord> all;
    for (const auto& [main_kind, inshop_kind] : pairs) {
        if (with_mardpg && checkpoint.empty() &&
            (main_kind == PolicyKind::MARDPG || inshop_kind == PolicyKind::MARDPG)) {
            std::ofstream log(out_dir + "/training_log.txt");
            exp.ensure_mardpg(&log, out_dir);
            save_checkpoint(out_dir + "/checkpoint_final.txt", model_param_views(*exp.model()),
                            {seed, config.train.steps});
        }
        const auto records = exp.evaluate(main_kind, inshop_kind);
        all.insert(all.end(), records.begin(), records.end());
    }
    if (all.empty()) {
        std::cerr << "warning: eval.sessions = 0, no metrics produced\n";
        return 0;
    }
    write_metrics_csv(all, out_dir + "/metrics.csv");
    write_metrics_summary(all, out_dir + "/summary.txt");
    std::cout << metrics_summary(all);
    return 0;
}

int cmd_gradcheck(uint64_t seed, int n_seeds, const std::string& out_dir) {
    const GradSuiteResult result = run_gradient_suite(n_seeds, seed, &std::cout);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(out_dir + "/gradcheck.txt");
        for (const auto& block : result.blocks) {
            out << "gradcheck " << block.name << ": max relative error " << block.max_rel_err
                << "\n";
        }
    }
    const double tol = 1e-4;
    if (!result.pass(tol)) {
        std::cerr << "error: gradient check failed: max relative error " << result.max_rel_err
                  << " >= " << tol << "\n";
        return 1;
    }
    std::cout << "all gradient checks passed (< " << tol << ")\n";
    return 0;
}

int cmd_beach_oracle(const std::string& config_path, const std::string& out_dir, int resolution) {
    const ExperimentConfig config = load_or_default(config_path);
    const BeachOracleResult result =
        beach_bruteforce(config.beach.rho, config.beach.grid, resolution);
    std::string text = "rho " + std::to_string(config.beach.rho) + " grid " +
                       std::to_string(config.beach.grid) + " resolution " +
                       std::to_string(resolution) + "\n";
    text += "cooperative optimum: reward " + std::to_string(result.best_reward) + " at (" +
            std::to_string(result.best_p0) + ", " + std::to_string(result.best_p1) + ")\n";
    text += "hotelling (both at 0.5): reward " + std::to_string(result.hotelling_reward) + "\n";
    std::cout << text;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(out_dir + "/beach_oracle.txt", text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MA-RDPG multi-scenario ranking: training, evaluation and baselines"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", checkpoint;
    uint64_t seed = 1;
    int n_seeds = 10;
    int resolution = 201;

    auto add_common = [&](CLI::App* cmd, bool with_checkpoint = false) {
        cmd->add_option("--config", config_path, "config file (dotted-path format)");
        cmd->add_option("--seed", seed, "master random seed");
        cmd->add_option("--out", out_dir, "output directory");
        if (with_checkpoint) {
            cmd->add_option("--checkpoint", checkpoint, "MA-RDPG checkpoint to load");
        }
    };

    auto* train = app.add_subcommand("train", "train MA-RDPG on the configured environment");
    add_common(train);
    auto* evaluate = app.add_subcommand("evaluate", "evaluate the configured policy pair");
    add_common(evaluate, true);
    auto* compare = app.add_subcommand("compare", "run the baseline-pair comparison table");
    add_common(compare, true);
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    add_common(gradcheck);
    gradcheck->add_option("--seeds", n_seeds, "number of random instances");
    auto* beach = app.add_subcommand("beach-oracle", "brute-force beach game optimum");
    add_common(beach);
    beach->add_option("--resolution", resolution, "position grid resolution");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, seed, out_dir);
        if (evaluate->parsed()) return cmd_evaluate(config_path, seed, out_dir, checkpoint);
        if (compare->parsed()) return cmd_compare(config_path, seed, out_dir, checkpoint);
        if (gradcheck->parsed()) return cmd_gradcheck(seed, n_seeds, out_dir);
        if (beach->parsed()) return cmd_beach_oracle(config_path, out_dir, resolution);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
