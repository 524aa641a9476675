#include "pboel/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

struct Overrides {
    std::vector<std::uint64_t> seeds;
    std::string out_dir, stream_kind, gate, principle;
    double alpha = -1.0;
    std::size_t experts = 0;
    std::size_t length = 0;
    bool log_steps = false;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seeds, "replace the config's seed list");
    cmd->add_option("--out", ov.out_dir, "output directory");
    cmd->add_option("--stream", ov.stream_kind, "stream kind override");
    cmd->add_option("--length", ov.length, "stream length override");
    cmd->add_option("--alpha", ov.alpha, "restart exponent override");
    cmd->add_option("--experts", ov.experts, "ensemble size override");
    cmd->add_option("--gate", ov.gate, "label gate, e.g. full, random:0.2, uncertainty:0.2:0.1");
    cmd->add_option("--principle", ov.principle, "maximum_index or random_sampling");
    cmd->add_flag("--log-steps", ov.log_steps, "write per-step JSONL logs");
}

pboel::RunConfig resolve_config(const std::string& config_path, const Overrides& ov) {
    json j = config_path.empty() ? json::object() : load_json_file(config_path);
    if (!ov.seeds.empty()) j["seeds"] = ov.seeds;
    if (!ov.out_dir.empty()) j["out_dir"] = ov.out_dir;
    if (!ov.stream_kind.empty()) j["stream"]["kind"] = ov.stream_kind;
    if (ov.length > 0) j["stream"]["length"] = ov.length;
    if (ov.alpha >= 0.0) {
        j["alpha"] = ov.alpha;
        j.erase("restart_period");
    }
    if (ov.experts > 0) j["num_experts"] = ov.experts;
    if (!ov.gate.empty()) j["gate"] = ov.gate;
    if (!ov.principle.empty()) j["principle"] = ov.principle;
    if (ov.log_steps) j["log_steps"] = true;
    pboel::RunConfig config = pboel::RunConfig::from_json(j);
    if (config.out_dir.empty()) config.out_dir = pboel::default_out_dir();
    return config;
}

void print_run_summary(const pboel::RunSummary& summary) {
    const auto& a = summary.aggregate;
    std::printf("seeds=%zu accuracy=%.4f±%.4f macro_f1=%.4f ultimate_bound=%.4f±%.4f\n",
                summary.per_seed.size(), a.accuracy_mean, a.accuracy_std, a.macro_f1_mean,
                a.ultimate_bound_mean, a.ultimate_bound_std);
    std::printf("exp4_ultimate_bound=%.4f regret_rexp4=%.4f regret_exp4=%.4f lower_bound=%.4f\n",
                a.exp4_ultimate_bound_mean, a.regret_rexp4, a.regret_exp4, a.lower_bound_mean);
    std::printf("best_base=%.4f drift_events=%.1f\n", a.best_base_accuracy_mean,
                a.drift_events_mean);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(static_cast<std::size_t>(std::stoul(tok)));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PB-OEL: bandit-weighted online ensemble learning with accuracy bounds"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* cmd_run = app.add_subcommand("run", "run one experiment over its seed list");
    cmd_run->add_option("--config", config_path, "JSON config file");
    add_override_flags(cmd_run, ov);

    auto* cmd_sweep = app.add_subcommand("sweep", "alpha x N grid sweep");
    std::string alphas_text = "0.4,0.7,1.0";
    std::string ns_text = "5,10";
    cmd_sweep->add_option("--config", config_path, "JSON config file");
    cmd_sweep->add_option("--alphas", alphas_text, "comma-separated alpha grid");
    cmd_sweep->add_option("--experts-grid", ns_text, "comma-separated ensemble sizes");
    add_override_flags(cmd_sweep, ov);

    auto* cmd_sim = app.add_subcommand("bandit-sim", "standalone policy-vs-bound simulation");
    std::string sim_config;
    std::size_t sim_arms = 3, sim_experts = 10, sim_horizon = 10000, sim_period = 1000;
    std::size_t sim_seed_count = 30;
    std::string sim_out;
    cmd_sim->add_option("--config", sim_config, "JSON spec file");
    cmd_sim->add_option("--arms", sim_arms, "number of arms");
    cmd_sim->add_option("--experts", sim_experts, "number of experts");
    cmd_sim->add_option("--horizon", sim_horizon, "number of rounds");
    cmd_sim->add_option("--restart-period", sim_period, "batch length");
    cmd_sim->add_option("--seeds", sim_seed_count, "number of seeds (1..n)");
    cmd_sim->add_option("--out", sim_out, "output directory");

    auto* cmd_gen = app.add_subcommand("generate", "write a synthetic stream to CSV");
    std::string gen_kind = "sea", gen_out;
    std::size_t gen_length = 20000;
    std::uint64_t gen_seed = 1;
    double gen_noise = 0.0, gen_feature_noise = -1.0, gen_threshold = 8.0;
    std::size_t gen_flip_period = 2000;
    cmd_gen->add_option("--stream", gen_kind, "stream kind");
    cmd_gen->add_option("--length", gen_length, "number of samples");
    cmd_gen->add_option("--seed", gen_seed, "generator seed");
    cmd_gen->add_option("--noise", gen_noise, "class-noise rate");
    cmd_gen->add_option("--feature-noise", gen_feature_noise, "label_flip feature noise sigma");
    cmd_gen->add_option("--threshold", gen_threshold, "sea threshold");
    cmd_gen->add_option("--flip-period", gen_flip_period, "label_flip period");
    cmd_gen->add_option("--out", gen_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_run) {
            const auto config = resolve_config(config_path, ov);
            const auto summary = pboel::run(config);
            fs::create_directories(config.out_dir);
            const std::string path = config.out_dir + "/summary.json";
            pboel::write_summary_json(summary, path);
            print_run_summary(summary);
            std::printf("summary written to %s\n", path.c_str());
        } else if (*cmd_sweep) {
            const auto base = resolve_config(config_path, ov);
            const auto result = pboel::sweep(base, parse_double_list(alphas_text),
                                             parse_size_list(ns_text));
            fs::create_directories(base.out_dir);
            const std::string csv_path = base.out_dir + "/sweep.csv";
            pboel::write_sweep_csv(result, csv_path);
            json cells;
            for (const auto& cell : result.cells) cells.push_back(cell.to_json());
            std::ofstream out(base.out_dir + "/sweep_summaries.json");
            out << json{{"schema_version", pboel::kSchemaVersion}, {"cells", cells}}.dump(2)
                << '\n';
            std::printf("sweep: %zu cells, %zu rows -> %s\n", result.cells.size(),
                        result.rows.size(), csv_path.c_str());
        } else if (*cmd_sim) {
            pboel::BanditSimSpec spec;
            if (!sim_config.empty()) {
                spec = pboel::BanditSimSpec::from_json(load_json_file(sim_config));
            } else {
                spec.num_arms = sim_arms;
                spec.num_experts = sim_experts;
                spec.horizon = sim_horizon;
                spec.restart_period = sim_period;
                for (std::uint64_t s = 1; s <= sim_seed_count; ++s) spec.seeds.push_back(s);
            }
            const auto report = pboel::bandit_sim(spec);
            const std::string dir = sim_out.empty() ? pboel::default_out_dir() : sim_out;
            fs::create_directories(dir);
            std::ofstream out(dir + "/bandit_sim.json");
            out << report.to_json().dump(2) << '\n';
            std::printf("mean per-batch regret %.3f vs bound %.3f -> %s\n",
                        report.mean_batch_regret, report.theoretical_batch_bound,
                        report.within_bound ? "within bound" : "ABOVE BOUND");
        } else if (*cmd_gen) {
            pboel::StreamSpec spec;
            spec.kind = pboel::stream_kind_from_string(gen_kind);
            spec.length = gen_length;
            spec.seed = gen_seed;
            spec.noise_rate = gen_noise;
            spec.sea_threshold = gen_threshold;
            spec.flip_period = gen_flip_period;
            if (gen_feature_noise >= 0.0) spec.feature_noise = gen_feature_noise;
            pboel::write_csv(gen_out, pboel::generate(spec));
            std::printf("wrote %zu samples to %s\n", spec.length, gen_out.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
