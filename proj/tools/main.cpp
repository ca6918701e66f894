#include "evoir/cli_app.hpp"
#include "evoir/corpus.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace evoir;

namespace {

// Optional JSON config file; explicitly passed flags override its keys.
void apply_config_file(const std::string& path, cli::RunOptions& opt, const CLI::App& cmd) {
    std::ifstream in(path);
    if (!in)
        throw CLI::ValidationError("--config", "cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;

    auto unset = [&](const char* flag) { return cmd.get_option(flag)->count() == 0; };
    if (j.contains("bench") && unset("--bench"))
        opt.bench = j["bench"].get<std::string>();
    if (j.contains("kernel") && unset("--kernel"))
        opt.kernel_path = j["kernel"].get<std::string>();
    if (j.contains("tests") && unset("--tests"))
        opt.tests_dir = j["tests"].get<std::string>();
    if (j.contains("heldout") && unset("--heldout"))
        opt.heldout_dir = j["heldout"].get<std::string>();
    if (j.contains("mode") && unset("--mode"))
        opt.mode = j["mode"].get<std::string>();
    if (j.contains("tolerance") && unset("--tolerance"))
        opt.tolerance = j["tolerance"].get<double>();
    if (j.contains("pop") && unset("--pop"))
        opt.pop = j["pop"].get<int>();
    if (j.contains("generations") && unset("--generations"))
        opt.generations = j["generations"].get<int>();
    if (j.contains("wallclock") && unset("--wallclock"))
        opt.wallclock_seconds = j["wallclock"].get<double>();
    if (j.contains("cross_rate") && unset("--cross-rate"))
        opt.cross_rate = j["cross_rate"].get<double>();
    if (j.contains("mutate_rate") && unset("--mutate-rate"))
        opt.mutate_rate = j["mutate_rate"].get<double>();
    if (j.contains("init_dist") && unset("--init-dist"))
        opt.init_dist = j["init_dist"].get<int>();
    if (j.contains("seed") && unset("--seed"))
        opt.seed = j["seed"].get<uint64_t>();
    if (j.contains("jobs") && unset("--jobs"))
        opt.jobs = j["jobs"].get<int>();
    if (j.contains("train_tests") && unset("--train-tests"))
        opt.train_tests = j["train_tests"].get<int>();
    if (j.contains("heldout_tests") && unset("--heldout-tests"))
        opt.heldout_tests = j["heldout_tests"].get<int>();
    if (j.contains("out") && unset("--out"))
        opt.out_dir = j["out"].get<std::string>();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary optimizer for kernels in a small SSA IR"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    cli::RunOptions run;
    std::string config_path;
    double tolerance_flag = -1.0;
    int generations_flag = -1;
    double wallclock_flag = -1.0;
    CLI::App* run_cmd = app.add_subcommand("run", "Search for faster variants of a kernel");
    run_cmd->add_option("--bench", run.bench, "benchmark name from the bundled corpus");
    run_cmd->add_option("--kernel", run.kernel_path, "kernel file to optimize");
    run_cmd->add_option("--tests", run.tests_dir, "directory of test case JSON files");
    run_cmd->add_option("--heldout", run.heldout_dir, "directory of held-out test cases");
    run_cmd->add_option("--mode", run.mode, "default (exact) or mo (relaxed)")
        ->check(CLI::IsMember({"default", "mo"}));
    run_cmd->add_option("--tolerance", tolerance_flag, "error tolerance for mo mode");
    run_cmd->add_option("--pop", run.pop, "population size (multiple of 4)");
    run_cmd->add_option("--generations", generations_flag, "generation budget");
    run_cmd->add_option("--wallclock", wallclock_flag, "wall-clock budget in seconds");
    run_cmd->add_option("--cross-rate", run.cross_rate, "crossover probability per pair");
    run_cmd->add_option("--mutate-rate", run.mutate_rate, "mutation probability per individual");
    run_cmd->add_option("--init-dist", run.init_dist, "mutations per initial individual");
    run_cmd->add_option("--seed", run.seed, "master seed; the one reproducibility knob");
    run_cmd->add_option("--jobs", run.jobs, "concurrent fitness evaluations");
    run_cmd->add_option("--train-tests", run.train_tests, "generated evolution tests");
    run_cmd->add_option("--heldout-tests", run.heldout_tests, "generated held-out tests");
    run_cmd->add_option("--out", run.out_dir, "output directory");
    run_cmd->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // replay ---------------------------------------------------------------
    cli::ReplayOptions replay;
    double replay_tolerance = -1.0;
    CLI::App* replay_cmd = app.add_subcommand("replay", "Re-apply a recorded patch and evaluate");
    replay_cmd->add_option("--bench", replay.bench, "benchmark the patch was recorded against");
    replay_cmd->add_option("--kernel", replay.kernel_path, "kernel file the patch applies to");
    replay_cmd->add_option("--tests", replay.tests_dir, "directory of test case JSON files");
    replay_cmd->add_option("--patch", replay.patch_path, "patch JSON file")->required();
    replay_cmd->add_option("--mode", replay.mode, "default or mo")
        ->check(CLI::IsMember({"default", "mo"}));
    replay_cmd->add_option("--tolerance", replay_tolerance, "error tolerance for mo mode");
    replay_cmd->add_option("--seed", replay.seed, "seed used by the original run");
    replay_cmd->add_option("--train-tests", replay.train_tests, "test count of the original run");

    // oracle ---------------------------------------------------------------
    cli::OracleOptions oracle;
    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "Generate test cases with oracles from a kernel");
    oracle_cmd->add_option("--bench", oracle.bench, "benchmark whose generator spec to use");
    oracle_cmd->add_option("--kernel", oracle.kernel_path, "kernel file");
    oracle_cmd->add_option("--gen", oracle.gen_path, "generator spec JSON for --kernel");
    oracle_cmd->add_option("--seed", oracle.seed, "generator seed");
    oracle_cmd->add_option("--count", oracle.count, "number of test cases");
    oracle_cmd->add_option("--out", oracle.out_dir, "output directory");

    // list -----------------------------------------------------------------
    CLI::App* list_cmd = app.add_subcommand("list", "List bundled benchmarks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (!config_path.empty())
                apply_config_file(config_path, run, *run_cmd);
            if (run_cmd->get_option("--tolerance")->count())
                run.tolerance = tolerance_flag;
            if (run_cmd->get_option("--generations")->count())
                run.generations = generations_flag;
            if (run_cmd->get_option("--wallclock")->count())
                run.wallclock_seconds = wallclock_flag;
            return cli::cmd_run(run);
        }
        if (replay_cmd->parsed()) {
            if (replay_cmd->get_option("--tolerance")->count())
                replay.tolerance = replay_tolerance;
            return cli::cmd_replay(replay);
        }
        if (oracle_cmd->parsed())
            return cli::cmd_oracle(oracle);
        if (list_cmd->parsed()) {
            for (const auto& name : benchmark_names()) {
                Benchmark b = load_benchmark(name);
                std::cout << name << "  [" << planted_class_name(b.planted_class) << "]  "
                          << b.kernel.instruction_count() << " instructions\n    " << b.notes
                          << "\n";
            }
            return cli::kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    }
    return cli::kExitUsage;
}
