#include "retdecomp/evalkit.hpp"

#include "retdecomp/env_io.hpp"
#include "retdecomp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <map>
#include <set>

namespace retdecomp {

RunConfig config_from_checkpoint(const Checkpoint& ckpt)
{
    if (!ckpt.meta.contains("config")) throw IoError("checkpoint has no run config");
    RunConfig c;
    for (const auto& [key, value] : ckpt.meta.at("config").items()) c.set(key, value.get<std::string>());
    c.validate();
    return c;
}

EnvSpec env_from_checkpoint(const Checkpoint& ckpt)
{
    if (!ckpt.meta.contains("env")) throw IoError("checkpoint has no env spec");
    return env_spec_from_json(ckpt.meta.at("env"));
}

std::unique_ptr<Trainer> trainer_from_checkpoint(const Checkpoint& ckpt)
{
    auto t = std::make_unique<Trainer>(config_from_checkpoint(ckpt), env_from_checkpoint(ckpt));
    t->restore(ckpt);
    return t;
}

nlohmann::json confusion_json(const Confusion& c)
{
    return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}, {"shd", c.shd()},
            {"tp", c.tp},           {"fp", c.fp},         {"fn", c.fn}};
}

namespace {

nlohmann::json matrix_json(const Tensor& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<std::string> labels(const char* prefix, int n)
{
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace

nlohmann::json probabilities_json(const EdgeProbabilities& p)
{
    return {{"ss", matrix_json(p.ss)}, {"as", matrix_json(p.as)}, {"sr", vector_json(p.sr)}, {"ar", vector_json(p.ar)}};
}

nlohmann::json evaluate_checkpoint(const Checkpoint& ckpt, const EnvSpec& env, int n_rollouts, std::uint64_t seed)
{
    auto trainer = trainer_from_checkpoint(ckpt);
    const EnvSpec& own = trainer->spec();
    if (env.d_s != own.d_s || env.d_a != own.d_a)
        throw ConfigError("eval: env dimensions (" + std::to_string(env.d_s) + ", " + std::to_string(env.d_a) +
                          ") differ from the checkpoint's (" + std::to_string(own.d_s) + ", " +
                          std::to_string(own.d_a) + ")");
    FactoredEnv eval_env(env, seed);
    const Policy policy = trainer->eval_policy();
    const double avg = average_return(eval_env, policy, n_rollouts);
    const auto r = reward_correlation(eval_env, policy, trainer->relabeler(), static_cast<long>(n_rollouts) * env.horizon);
    const MaskSample det = trainer->deterministic_masks();
    const StructureScore score = structure_score(edge_probabilities(trainer->logits()), env);
    const MaskVector keep = trainer->policy_mask();
    nlohmann::json out = {
        {"avg_return", avg},
        {"rollouts", n_rollouts},
        {"pearson_r", r ? nlohmann::json(*r) : nlohmann::json(nullptr)},
        {"s_zr", sparsity_rate(det.sr)},
        {"compact_state", std::vector<int>(keep.data(), keep.data() + keep.size())},
        {"structure",
         {{"reward", confusion_json(score.reward())},
          {"dynamics", confusion_json(score.dynamics())},
          {"ss", confusion_json(score.ss)},
          {"as", confusion_json(score.as)},
          {"sr", confusion_json(score.sr)},
          {"ar", confusion_json(score.ar)}}},
        {"variant", to_string(trainer->config().variant)},
        {"config_hash", trainer->config().hash()},
        {"env_steps", ckpt.meta.value("env_steps", 0L)},
    };
    return out;
}

void render_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& out_dir,
                       const std::optional<std::filesystem::path>& metrics_csv)
{
    auto trainer = trainer_from_checkpoint(ckpt);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
    const EnvSpec& spec = trainer->spec();
    const EdgeProbabilities p = edge_probabilities(trainer->logits());
    emit_heatmap_svg({p.ss, labels("s", spec.d_s), labels("s'", spec.d_s), "s -> s"}, out_dir / "mask_ss.svg");
    emit_heatmap_svg({p.as, labels("a", spec.d_a), labels("s'", spec.d_s), "a -> s"}, out_dir / "mask_as.svg");
    emit_heatmap_svg({Tensor(p.sr.transpose()), {"r"}, labels("s", spec.d_s), "s -> r"}, out_dir / "mask_sr.svg");
    emit_heatmap_svg({Tensor(p.ar.transpose()), {"r"}, labels("a", spec.d_a), "a -> r"}, out_dir / "mask_ar.svg");
    write_text_file(out_dir / "probabilities.json", probabilities_json(p).dump(2) + "\n");

    FactoredEnv env(spec, Rng::stream(trainer->config().seed, "viz").next_u64());
    const Trajectory tr = rollout(env, trainer->eval_policy());
    const std::vector<double> proxy = trainer->relabeler()(tr);
    Series decomposed{"decomposed", {}, proxy};
    Series oracle{"oracle", {}, tr.true_rewards};
    for (std::size_t t = 0; t < tr.length(); ++t) {
        decomposed.x.push_back(static_cast<double>(t + 1));
        oracle.x.push_back(static_cast<double>(t + 1));
    }
    const Series both[] = {decomposed, oracle};
    write_text_file(out_dir / "reward_comparison.svg", line_chart_svg(both, "decomposed vs oracle reward", "t", "reward"));

    if (metrics_csv && std::filesystem::exists(*metrics_csv)) {
        const auto records = read_metrics_csv(*metrics_csv);
        if (!records.empty()) {
            std::vector<double> steps, returns;
            for (const auto& r : records) {
                steps.push_back(static_cast<double>(r.step));
                returns.push_back(r.avg_return);
            }
            emit_learning_curve_svg(steps, returns, out_dir / "learning_curve.svg");
        }
    }
}

std::string resolve_param(const std::string& param)
{
    if (param.find('.') != std::string::npos) return param;
    for (const auto& key : RunConfig::keys())
        if (key.substr(key.find('.') + 1) == param) return key;
    throw ConfigError("unknown sweep parameter '" + param + "'");
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& param, const std::vector<std::string>& values,
                                const std::vector<std::uint64_t>& seeds,
                                const std::optional<std::filesystem::path>& out_dir,
                                const std::function<void(const SweepRow&)>& on_row)
{
    if (values.empty() || seeds.empty()) throw ConfigError("sweep needs at least one value and one seed");
    const std::string key = resolve_param(param);
    std::vector<SweepRow> rows;
    for (const auto& value : values) {
        for (auto seed : seeds) {
            RunConfig c = base;
            c.set(key, value);
            c.seed = seed;
            c.validate();
            std::optional<std::filesystem::path> run_dir;
            if (out_dir) run_dir = *out_dir / (param + "=" + value) / ("seed" + std::to_string(seed));
            for (const auto& r : run_training(c, run_dir)) {
                SweepRow row{value, seed, r.step, r.avg_return, r.s_zr};
                rows.push_back(row);
                if (on_row) on_row(row);
            }
        }
    }
    if (out_dir) {
        write_sweep_csv(*out_dir / "sweep.csv", param, rows);
        write_text_file(*out_dir / "sweep_table.md", sweep_table_markdown(param, rows));
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::string& param, std::span<const SweepRow> rows)
{
    std::string body = param + ",seed,step,avg_return,s_zr\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%llu,%ld,%.17g,%.17g\n", static_cast<unsigned long long>(r.seed), r.step,
                      r.avg_return, r.s_zr);
        body += r.value + buf;
    }
    write_text_file(path, body);
}

std::string sweep_table_markdown(const std::string& param, std::span<const SweepRow> rows)
{
    std::vector<std::string> values;
    std::set<long> steps;
    std::map<std::pair<std::string, long>, std::vector<const SweepRow*>> cells;
    for (const auto& r : rows) {
        if (std::find(values.begin(), values.end(), r.value) == values.end()) values.push_back(r.value);
        steps.insert(r.step);
        cells[{r.value, r.step}].push_back(&r);
    }
    std::string out = "| " + param + " / t |";
    for (long s : steps) out += " " + std::to_string(s) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < steps.size(); ++i) out += "---|";
    out += "\n";
    char buf[96];
    for (const auto& v : values) {
        out += "| " + v + " |";
        for (long s : steps) {
            const auto it = cells.find({v, s});
            if (it == cells.end()) {
                out += " |";
                continue;
            }
            double mean = 0, szr = 0;
            for (const auto* r : it->second) {
                mean += r->avg_return;
                szr += r->s_zr;
            }
            const double n = static_cast<double>(it->second.size());
            mean /= n;
            szr /= n;
            double var = 0;
            for (const auto* r : it->second) var += (r->avg_return - mean) * (r->avg_return - mean);
            const double sd = it->second.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
            std::snprintf(buf, sizeof buf, " %.2f ± %.2f (%.2f) |", mean, sd, szr);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace retdecomp
