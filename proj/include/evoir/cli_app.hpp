#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace evoir::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1; // bad config, missing files, parse errors
inline constexpr int kExitInitFailure = 2;

struct RunOptions {
    std::string bench;       // registry benchmark name, or
    std::string kernel_path; // path to a kernel file (requires tests_dir)
    std::string tests_dir;   // directory of TestCase JSON files
    std::string heldout_dir; // optional held-out TestCase directory

    std::string mode = "default"; // "default" (exact) or "mo" (relaxed)
    std::optional<double> tolerance;

    int pop = 256;
    std::optional<int> generations; // default 30 when wallclock unset
    std::optional<double> wallclock_seconds;
    double cross_rate = 0.80;
    double mutate_rate = 0.30;
    int init_dist = 3;
    uint64_t seed = 0;
    int jobs = 1;
    int train_tests = 3;   // generated per run for registry benchmarks
    int heldout_tests = 3; // generated with a disjoint stream

    std::string out_dir = "evoir-out";
};

int cmd_run(const RunOptions& opt);

struct ReplayOptions {
    std::string bench;
    std::string kernel_path;
    std::string tests_dir;
    std::string patch_path;
    std::string mode = "default";
    std::optional<double> tolerance;
    uint64_t seed = 0; // regenerates the same evolution tests for a benchmark
    int train_tests = 3;
};

int cmd_replay(const ReplayOptions& opt);

struct OracleOptions {
    std::string bench;
    std::string kernel_path; // external kernel; requires gen_path
    std::string gen_path;    // generator spec JSON
    uint64_t seed = 0;
    int count = 3;
    std::string out_dir = "oracle-out";
};

int cmd_oracle(const OracleOptions& opt);

// Effective tolerance for a mode: "default" pins 0, "mo" defaults to 0.01.
double effective_tolerance(const std::string& mode, std::optional<double> tolerance);

// Derived seeds for the evolution and held-out test suites of a run.
uint64_t train_seed(uint64_t master);
uint64_t heldout_seed(uint64_t master);

} // namespace evoir::cli
