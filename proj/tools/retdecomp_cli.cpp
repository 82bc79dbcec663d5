// Command-line front end. Talks to the library only through retdecomp.h.
#include "retdecomp/retdecomp.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

// Bad configuration maps to 2, like a command-line error; anything else is a
// runtime failure.
int report(rd_status st, const char* what)
{
    if (st == RD_OK) return 0;
    std::fprintf(stderr, "retdecomp: %s: %s: %s\n", what, rd_status_name(st), rd_last_error());
    return st == RD_ERR_CONFIG ? 2 : 1;
}

struct ConfigHandle {
    rd_config* ptr = nullptr;
    ~ConfigHandle() { rd_config_free(ptr); }
};

struct CheckpointHandle {
    rd_checkpoint* ptr = nullptr;
    ~CheckpointHandle() { rd_checkpoint_free(ptr); }
};

struct CommonConfig {
    std::string config_path;
    std::string preset = "desk";
    std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, CommonConfig& c)
{
    cmd->add_option("--config", c.config_path, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "preset used when no --config is given (desk, distractor, full)");
    cmd->add_option("--set", c.overrides, "override a key, e.g. --set model.lambda1=0.1")->allow_extra_args(false);
}

int build_config(const CommonConfig& c, ConfigHandle& out)
{
    rd_status st = c.config_path.empty() ? rd_config_preset(c.preset.c_str(), &out.ptr)
                                         : rd_config_load(c.config_path.c_str(), &out.ptr);
    if (int rc = report(st, "config")) return rc;
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "retdecomp: --set expects key=value, got '%s'\n", kv.c_str());
            return 2;
        }
        const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (int rc = report(rd_config_set(out.ptr, key.c_str(), value.c_str()), "config")) return rc;
    }
    return 0;
}

std::string config_value(const rd_config* c, const char* key)
{
    char* v = nullptr;
    if (rd_config_get(c, key, &v) != RD_OK) return {};
    std::string out = v;
    rd_string_free(v);
    return out;
}

void print_record(const rd_metrics* m, void* quiet)
{
    if (*static_cast<bool*>(quiet)) return;
    char r[32] = "nan";
    if (m->pearson_defined) std::snprintf(r, sizeof r, "%.3f", m->pearson_r);
    std::printf("step %ld  return %.3f  l_rew %.4g  l_dyn %.4g  s_zr %.2f  f1_sr %.2f  f1_ss %.2f  r %s\n", m->step,
                m->avg_return, m->l_rew, m->l_dyn, m->s_zr, m->f1_sr, m->f1_ss, r);
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Return decomposition with learned causal structure"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rd_version());

    CommonConfig train_cfg;
    std::string train_out;
    std::uint64_t train_seed = 0;
    std::string train_variant;
    bool quiet = false;
    auto* train = app.add_subcommand("train", "train one run and write metrics, manifest and checkpoint");
    add_config_options(train, train_cfg);
    auto* seed_opt = train->add_option("--seed", train_seed, "run seed");
    train->add_option("--variant", train_variant, "grd, grd_no_cr or uniform_baseline");
    train->add_option("--out", train_out, "output directory (default runs/<config hash>)");
    train->add_flag("--quiet", quiet, "no per-evaluation progress lines");

    std::string ckpt_dir, env_path;
    int rollouts = 10;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint and print JSON");
    eval->add_option("--checkpoint", ckpt_dir, "checkpoint directory")->required();
    eval->add_option("--env", env_path, "env spec JSON, or 'train' for the checkpoint's own env")->required();
    eval->add_option("--rollouts", rollouts, "evaluation rollouts")->check(CLI::PositiveNumber);
    eval->add_option("--seed", eval_seed, "evaluation seed");

    CommonConfig sweep_cfg;
    std::string param, sweep_out = "sweep";
    std::vector<std::string> values;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    auto* sweep = app.add_subcommand("sweep", "train across values of one parameter and tabulate");
    add_config_options(sweep, sweep_cfg);
    sweep->add_option("--param", param, "parameter, e.g. lambda1 or model.lambda1")->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    sweep->add_option("--seeds", seeds, "comma-separated seeds")->delimiter(',');
    sweep->add_option("--out", sweep_out, "output directory");

    std::string viz_ckpt, viz_out, viz_metrics;
    auto* viz = app.add_subcommand("viz", "mask heatmaps and reward comparison plot");
    viz->add_option("--checkpoint", viz_ckpt, "checkpoint directory")->required();
    viz->add_option("--out", viz_out, "output directory")->required();
    viz->add_option("--metrics", viz_metrics, "metrics CSV for the learning curve (default: next to the checkpoint)");

    CommonConfig env_cfg;
    std::string env_out;
    auto* env = app.add_subcommand("env", "write the env spec a config describes");
    add_config_options(env, env_cfg);
    env->add_option("--out", env_out, "output JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (train->parsed()) {
        ConfigHandle cfg;
        if (int rc = build_config(train_cfg, cfg)) return rc;
        if (*seed_opt && report(rd_config_set(cfg.ptr, "run.seed", std::to_string(train_seed).c_str()), "--seed"))
            return 2;
        if (!train_variant.empty() && report(rd_config_set(cfg.ptr, "run.variant", train_variant.c_str()), "--variant"))
            return 2;
        if (train_out.empty()) {
            char* hash = nullptr;
            if (int rc = report(rd_config_hash(cfg.ptr, &hash), "config hash")) return rc;
            train_out = "runs/" + std::string(hash).substr(0, 12);
            rd_string_free(hash);
        }
        std::printf("training %s seed %s -> %s\n", config_value(cfg.ptr, "run.variant").c_str(),
                    config_value(cfg.ptr, "run.seed").c_str(), train_out.c_str());
        if (int rc = report(rd_train(cfg.ptr, train_out.c_str(), print_record, &quiet), "train")) return rc;
        std::printf("wrote %s/metrics.csv, run.json, checkpoint/\n", train_out.c_str());
        return 0;
    }

    if (eval->parsed()) {
        CheckpointHandle ck;
        if (int rc = report(rd_checkpoint_load(ckpt_dir.c_str(), &ck.ptr), "checkpoint")) return rc;
        char* json = nullptr;
        const char* env_arg = env_path == "train" ? nullptr : env_path.c_str();
        if (int rc = report(rd_evaluate(ck.ptr, env_arg, rollouts, eval_seed, &json), "eval")) return rc;
        std::printf("%s\n", json);
        rd_string_free(json);
        return 0;
    }

    if (sweep->parsed()) {
        ConfigHandle cfg;
        if (int rc = build_config(sweep_cfg, cfg)) return rc;
        std::vector<const char*> vals;
        for (const auto& v : values) vals.push_back(v.c_str());
        if (int rc = report(rd_sweep(cfg.ptr, param.c_str(), vals.data(), vals.size(), seeds.data(), seeds.size(),
                                     sweep_out.c_str()),
                            "sweep"))
            return rc;
        std::printf("wrote %s/sweep.csv and %s/sweep_table.md\n", sweep_out.c_str(), sweep_out.c_str());
        return 0;
    }

    if (viz->parsed()) {
        CheckpointHandle ck;
        if (int rc = report(rd_checkpoint_load(viz_ckpt.c_str(), &ck.ptr), "checkpoint")) return rc;
        if (viz_metrics.empty()) {
            const auto guess = std::filesystem::path(viz_ckpt).lexically_normal().parent_path() / "metrics.csv";
            if (std::filesystem::exists(guess)) viz_metrics = guess.string();
        }
        if (int rc = report(rd_render(ck.ptr, viz_out.c_str(), viz_metrics.empty() ? nullptr : viz_metrics.c_str()),
                            "viz"))
            return rc;
        std::printf("wrote figures to %s\n", viz_out.c_str());
        return 0;
    }

    if (env->parsed()) {
        ConfigHandle cfg;
        if (int rc = build_config(env_cfg, cfg)) return rc;
        return report(rd_config_write_env(cfg.ptr, env_out.c_str()), "env");
    }
    return 2;
}
