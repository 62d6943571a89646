// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0
//
// pagedevict CLI: runs seeded eviction-policy traces and writes metrics.
//
//   pagedevict run    --policy paged-eviction --budget 256 --decode 512 ...
//   pagedevict sweep  --file sweep.cfg --out-csv sweep.csv
//   pagedevict verify [--seed N]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pagedevict/metrics.hpp"
#include "pagedevict/selfcheck.hpp"
#include "pagedevict/simulator.hpp"

namespace {

using namespace pagedevict;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CliOptions {
    std::string policy = "paged-eviction";
    std::uint64_t budget = 256;
    std::uint32_t page_size = 16;
    std::uint64_t sink_count = 4;
    std::uint64_t prefill = 128;
    std::uint64_t decode = 512;
    std::uint64_t batch = 4;
    std::uint32_t layers = 2;
    std::uint32_t heads = 4;
    std::uint32_t head_dim = 16;
    std::uint32_t d_model = 64;
    std::string mode = "open-loop";
    std::uint64_t seed = 0;
    std::uint32_t reps = 1;
    std::string out_csv;
    std::string out_jsonl;
    bool timings = false;
    bool no_deviation = false;
};

std::uint32_t thread_cap_from_env() {
    if (const char* env = std::getenv("PAGED_EVICT_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) {
            return static_cast<std::uint32_t>(parsed);
        }
    }
    return 0;  // simulator default: available cores
}

void apply_kv_impl(CliOptions& opt, const std::string& key, const std::string& value) {
    if (key == "policy") {
        opt.policy = value;
    } else if (key == "budget") {
        opt.budget = std::stoull(value);
    } else if (key == "page-size") {
        opt.page_size = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "sink-count") {
        opt.sink_count = std::stoull(value);
    } else if (key == "prefill") {
        opt.prefill = std::stoull(value);
    } else if (key == "decode") {
        opt.decode = std::stoull(value);
    } else if (key == "batch") {
        opt.batch = std::stoull(value);
    } else if (key == "layers") {
        opt.layers = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "heads") {
        opt.heads = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "head-dim") {
        opt.head_dim = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "d-model") {
        opt.d_model = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "mode") {
        opt.mode = value;
    } else if (key == "seed") {
        opt.seed = std::stoull(value);
    } else if (key == "reps") {
        opt.reps = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "out-csv") {
        opt.out_csv = value;
    } else if (key == "out-jsonl") {
        opt.out_jsonl = value;
    } else if (key == "timings") {
        opt.timings = value == "true" || value == "1";
    } else if (key == "no-deviation") {
        opt.no_deviation = value == "true" || value == "1";
    } else {
        throw BudgetInvalid("unknown config key '" + key + "'");
    }
}

/// Applies one config-file entry; keys mirror the run flags.
void apply_kv(CliOptions& opt, const std::string& key, const std::string& value) {
    try {
        apply_kv_impl(opt, key, value);
    } catch (const BudgetInvalid&) {
        throw;
    } catch (const std::exception&) {
        throw BudgetInvalid("config value '" + value + "' is invalid for '" + key + "'");
    }
}

std::string trim_ws(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

/// Loads a flat `key = value` config file into `opt` before flag parsing, so
/// explicit flags override file values.
void load_config_file(CliOptions& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw BudgetInvalid("cannot open config file '" + path + "'");
    }
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        apply_kv(opt, trim_ws(line.substr(0, eq)), trim_ws(line.substr(eq + 1)));
    }
}

/// Config files load before CLI11 sees the flags; scan argv for the
/// subcommand's --config value up front.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            return argv[i + 1];
        }
        if (arg.rfind("--config=", 0) == 0) {
            return arg.substr(9);
        }
    }
    return "";
}

void add_run_options(CLI::App* cmd, CliOptions& opt, std::string& config_path) {
    cmd->add_option("--policy", opt.policy,
                    "paged-eviction | streaming-llm | inv-key-l2 | key-diff | full");
    cmd->add_option("--budget", opt.budget, "cache budget C in tokens");
    cmd->add_option("--page-size", opt.page_size, "page size B in tokens");
    cmd->add_option("--sink-count", opt.sink_count, "StreamingLLM attention sinks");
    cmd->add_option("--prefill", opt.prefill, "prompt length in tokens");
    cmd->add_option("--decode", opt.decode, "decode steps");
    cmd->add_option("--batch", opt.batch, "concurrent sequences");
    cmd->add_option("--layers", opt.layers, "transformer layers");
    cmd->add_option("--heads", opt.heads, "attention heads");
    cmd->add_option("--head-dim", opt.head_dim, "dimension per head");
    cmd->add_option("--d-model", opt.d_model, "model embedding width");
    cmd->add_option("--mode", opt.mode, "open-loop | closed-loop");
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--reps", opt.reps, "timing repetitions (first is warmup)");
    cmd->add_option("--out-csv", opt.out_csv, "metrics CSV path");
    cmd->add_option("--out-jsonl", opt.out_jsonl, "per-step JSONL path");
    cmd->add_flag("--timings", opt.timings,
                  "keep wall-clock columns in the CSV (off: zeroed for "
                  "byte-reproducible output)");
    cmd->add_flag("--no-deviation", opt.no_deviation,
                  "skip the FullCache shadow run and deviation column");
    cmd->add_option("--config", config_path,
                    "flat key=value file mirroring these flags; flags override it");
}

RunSpec build_spec(const CliOptions& opt) {
    RunSpec spec;
    auto kind = parse_policy_kind(opt.policy);
    if (!kind) {
        throw BudgetInvalid("unknown policy '" + opt.policy + "'");
    }
    spec.policy.kind = *kind;
    spec.policy.cache_budget = opt.budget;
    spec.policy.page_size = opt.page_size;
    spec.policy.sink_count = opt.sink_count;
    spec.policy.validate();

    spec.trace.prefill_len = opt.prefill;
    spec.trace.decode_len = opt.decode;
    spec.trace.batch = opt.batch;
    spec.trace.layer_count = opt.layers;
    spec.trace.head_count = opt.heads;
    spec.trace.head_dim = opt.head_dim;
    spec.trace.d_model = opt.d_model;
    spec.trace.seed = opt.seed;
    spec.trace.threads = thread_cap_from_env();
    spec.trace.compute_deviation = !opt.no_deviation;
    if (opt.mode == "open-loop") {
        spec.trace.mode = GeneratorMode::OpenLoop;
    } else if (opt.mode == "closed-loop") {
        spec.trace.mode = GeneratorMode::ClosedLoop;
    } else {
        throw BudgetInvalid("mode must be open-loop or closed-loop, got '" + opt.mode + "'");
    }
    spec.trace.validate();
    spec.reps = opt.reps;
    return spec;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << contents;
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

void redact_timings(std::vector<MetricsRecord>& records) {
    for (auto& r : records) {
        r.prefill_wall_ns = 0;
        r.decode_wall_ns = 0;
    }
}

int execute_specs(const std::vector<RunSpec>& specs, const CliOptions& opt) {
    std::vector<StepRecord> steps;
    auto records = run_matrix(specs, opt.out_jsonl.empty() ? nullptr : &steps);

    std::cout << format_summary(summarize(records));
    if (opt.timings) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            std::cout << "run " << i << " wall clock: prefill " << records[i].prefill_wall_ns
                      << " ns, decode " << records[i].decode_wall_ns << " ns\n";
        }
    } else {
        redact_timings(records);
    }
    if (!opt.out_csv.empty()) {
        write_file(opt.out_csv, emit_csv(records));
    }
    if (!opt.out_jsonl.empty()) {
        write_file(opt.out_jsonl, emit_jsonl(steps));
    }
    return 0;
}

/// Sweep files are flat `key = value` lines mirroring the run flags; a value
/// may be a comma-separated list, and the sweep runs the cartesian product
/// of all list-valued keys.
std::vector<CliOptions> parse_sweep_file(const std::string& path, const CliOptions& base) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open sweep file '" + path + "'");
    }
    std::map<std::string, std::vector<std::string>> axes;
    std::vector<std::string> axis_order;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = trim_ws(line.substr(0, eq));
        std::vector<std::string> values;
        std::stringstream ss(line.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim_ws(item);
            if (!item.empty()) {
                values.push_back(item);
            }
        }
        if (key.empty() || values.empty()) {
            throw BudgetInvalid("sweep file entry '" + line + "' is malformed");
        }
        axes[key] = values;
        axis_order.push_back(key);
    }

    std::vector<CliOptions> combos{base};
    for (const auto& key : axis_order) {
        std::vector<CliOptions> expanded;
        for (const auto& combo : combos) {
            for (const auto& value : axes[key]) {
                CliOptions next = combo;
                apply_kv(next, key, value);
                expanded.push_back(std::move(next));
            }
        }
        combos = std::move(expanded);
    }
    return combos;
}

int run_verify(std::uint64_t seed) {
    auto results = run_selfchecks(seed);
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.passed && !r.detail.empty()) {
            std::cout << ": " << r.detail;
        }
        std::cout << '\n';
    }
    std::vector<std::string> failed;
    for (const auto& r : results) {
        if (!r.passed) {
            failed.push_back(r.name);
            all_passed = false;
        }
    }
    if (!all_passed) {
        std::cout << "failed invariants:";
        for (const auto& name : failed) {
            std::cout << ' ' << name;
        }
        std::cout << '\n';
        return kExitRuntime;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paged KV cache eviction harness"};
    app.require_subcommand(1);

    CliOptions run_opt;
    std::string run_config;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one policy/trace combination");
    add_run_options(run_cmd, run_opt, run_config);

    CliOptions sweep_opt;
    std::string sweep_config;
    std::string sweep_file;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "cartesian sweep from a config file");
    add_run_options(sweep_cmd, sweep_opt, sweep_config);
    sweep_cmd->add_option("--file", sweep_file, "sweep definition file")->required();

    std::uint64_t verify_seed = 0;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the built-in oracle suite");
    verify_cmd->add_option("--seed", verify_seed, "RNG seed (changes data, not verdicts)");

    try {
        const std::string config_path = find_config_arg(argc, argv);
        if (!config_path.empty()) {
            load_config_file(run_opt, config_path);
            sweep_opt = run_opt;
        }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return kExitConfig;
    } catch (const BudgetInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    try {
        if (run_cmd->parsed()) {
            return execute_specs({build_spec(run_opt)}, run_opt);
        }
        if (sweep_cmd->parsed()) {
            auto combos = parse_sweep_file(sweep_file, sweep_opt);
            std::vector<RunSpec> specs;
            specs.reserve(combos.size());
            for (const auto& combo : combos) {
                specs.push_back(build_spec(combo));
            }
            return execute_specs(specs, sweep_opt);
        }
        if (verify_cmd->parsed()) {
            return run_verify(verify_seed);
        }
    } catch (const BudgetInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
