#include "support.hpp"

#include "retdecomp/checkpoint.hpp"
#include "retdecomp/config.hpp"
#include "retdecomp/env_io.hpp"
#include "retdecomp/errors.hpp"
#include "retdecomp/evalkit.hpp"
#include "retdecomp/metrics.hpp"
#include "retdecomp/svg.hpp"
#include "retdecomp/trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace retdecomp;
using rdtest::tiny_config;
namespace fs = std::filesystem;

namespace {

std::size_t count_of(const std::string& haystack, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

fs::path scratch_dir(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("retdecomp_evalkit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sparsity rate examples")
{
    MaskVector c(4);
    c << 1, 1, 0, 0;
    CHECK(sparsity_rate(c) == doctest::Approx(0.5));
    CHECK(sparsity_rate(MaskVector::Zero(5)) == 0.0);
    CHECK(sparsity_rate(MaskVector::Ones(3)) == 1.0);
    CHECK_THROWS_AS(sparsity_rate(MaskVector(0)), UsageError);
}

TEST_CASE("sparsity rate of fair coin masks concentrates at one half")
{
    Rng rng(11);
    const int n = 10000;
    MaskVector c(n);
    for (int i = 0; i < n; ++i) c(i) = rng.uniform() < 0.5 ? 1 : 0;
    CHECK(std::abs(sparsity_rate(c) - 0.5) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("confusion on a hand example")
{
    const std::vector<double> p = {0.9, 0.6, 0.4, 0.1};
    const std::vector<int> truth = {1, 0, 1, 0};
    const Confusion c = confusion(p, truth);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    CHECK(c.precision() == doctest::Approx(0.5));
    CHECK(c.recall() == doctest::Approx(0.5));
    CHECK(c.f1() == doctest::Approx(0.5));
    CHECK(c.shd() == 2);
}

TEST_CASE("confusion extremes and symmetry over random instances")
{
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 30);
        std::vector<int> truth(n), complement(n);
        std::vector<double> exact(n), flipped(n), p(n);
        for (int i = 0; i < n; ++i) {
            truth[i] = rng.uniform() < 0.4 ? 1 : 0;
            complement[i] = 1 - truth[i];
            exact[i] = truth[i];
            flipped[i] = 1 - truth[i];
            p[i] = rng.uniform();
        }
        const bool any_positive = std::count(truth.begin(), truth.end(), 1) > 0;
        const Confusion same = confusion(exact, truth);
        CHECK(same.shd() == 0);
        if (any_positive) CHECK(same.f1() == 1.0);

        const Confusion opposite = confusion(flipped, truth);
        CHECK(opposite.shd() == n);
        CHECK(opposite.f1() == 0.0);

        const Confusion base = confusion(p, truth);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);
        std::vector<double> pp(n);
        std::vector<int> tp(n);
        for (int i = 0; i < n; ++i) {
            pp[i] = p[order[i]];
            tp[i] = truth[order[i]];
        }
        const Confusion permuted = confusion(pp, tp);
        CHECK(permuted.tp == base.tp);
        CHECK(permuted.fp == base.fp);
        CHECK(permuted.fn == base.fn);
        CHECK(permuted.tn == base.tn);

        if (base.tp > 0) {
            const double pr = base.precision(), rc = base.recall();
            CHECK(base.f1() == doctest::Approx(2 * pr * rc / (pr + rc)));
        }
        CHECK(base.tp + base.fp + base.fn + base.tn == n);
    }
}

TEST_CASE("structure score splits reward and dynamics edges")
{
    GenerateOptions opts;
    opts.d_s = 3;
    opts.edge_density = 0.5;
    opts.seed = 4;
    const EnvSpec spec = generate_spec(opts);
    EdgeProbabilities p;
    p.ss = spec.mask_ss.cast<double>();
    p.as = spec.mask_as.cast<double>();
    p.sr = spec.mask_sr.cast<double>();
    p.ar = spec.mask_ar.cast<double>();
    const StructureScore exact = structure_score(p, spec);
    CHECK(exact.total().shd() == 0);
    CHECK(exact.reward().tp == spec.mask_sr.sum() + spec.mask_ar.sum());
    CHECK(exact.dynamics().tp == spec.mask_ss.sum() + spec.mask_as.sum());

    p.sr = Vector::Ones(3) - p.sr;
    const StructureScore off = structure_score(p, spec);
    CHECK(off.sr.shd() == 3);
    CHECK(off.dynamics().shd() == 0);
}

TEST_CASE("pearson correlation")
{
    const std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2 * v + 1);
    CHECK(*pearson(x, x) == doctest::Approx(1.0));
    CHECK(*pearson(x, y) == doctest::Approx(1.0));
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    CHECK(*pearson(x, neg) == doctest::Approx(-1.0));
    const std::vector<double> flat(5, 3.0);
    CHECK_FALSE(pearson(x, flat).has_value());
    const std::vector<double> short_y = {1, 2};
    CHECK_THROWS_AS(pearson(x, short_y), UsageError);
}

TEST_CASE("ema smoothing never exceeds the running max")
{
    Rng rng(3);
    std::vector<double> v(200);
    for (auto& x : v) x = rng.normal() * 5;
    const auto s = ema(v, 10);
    REQUIRE(s.size() == v.size());
    double running = -INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) {
        running = std::max(running, v[i]);
        CHECK(s[i] <= running + 1e-12);
    }
    const std::vector<double> flat(20, 1.5);
    for (double x : ema(flat, 10)) CHECK(x == doctest::Approx(1.5));
}

TEST_CASE("heatmap svg cells and colours")
{
    Tensor p(3, 2);
    p << 1.0, 0.0, 0.5, 0.25, 0.75, 1.0;
    const std::string svg = heatmap_svg({p, {"a", "b", "c"}, {"x", "y"}, "demo"});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_of(svg, "class=\"cell\"") == 6);
    CHECK(count_of(svg, "rgb(0,0,0)") == 2);
    CHECK(count_of(svg, "rgb(255,255,255)") == 1);
    CHECK(svg.find("demo") != std::string::npos);
    CHECK(heatmap_svg({p, {}, {}, "demo"}) == heatmap_svg({p, {}, {}, "demo"}));

    Tensor bad = p;
    bad(0, 0) = 1.5;
    CHECK_THROWS_AS(heatmap_svg({bad, {}, {}, ""}), UsageError);
    bad(0, 0) = NAN;
    CHECK_THROWS_AS(heatmap_svg({bad, {}, {}, ""}), UsageError);
    CHECK_THROWS_AS(heatmap_svg({p, {"only one"}, {}, ""}), UsageError);
}

TEST_CASE("learning curve svg")
{
    const std::vector<double> steps = {0, 1, 2, 3};
    const std::vector<double> flat = {2, 2, 2, 2};
    const std::string svg = learning_curve_svg(steps, flat);
    CHECK(count_of(svg, "class=\"series\"") >= 1);
    // A constant series draws every vertex at the same height.
    const auto pos = svg.find("class=\"series\"");
    const auto pts = svg.find("points=\"", pos) + 8;
    std::istringstream in(svg.substr(pts, svg.find('"', pts) - pts));
    std::string xy;
    std::set<std::string> heights;
    while (in >> xy) heights.insert(xy.substr(xy.find(',') + 1));
    CHECK(heights.size() == 1);

    const std::vector<double> one_step = {5};
    const std::vector<double> one_ret = {1};
    CHECK(count_of(learning_curve_svg(one_step, one_ret), "class=\"marker\"") >= 1);
    const std::vector<double> mismatch = {1, 2};
    CHECK_THROWS_AS(learning_curve_svg(steps, mismatch), UsageError);
}

TEST_CASE("config keys, parsing and hashing")
{
    RunConfig c = RunConfig::preset("desk");
    for (const auto& key : RunConfig::keys()) {
        RunConfig d = c;
        d.set(key, c.get(key));
        CHECK(d.to_ini() == c.to_ini());
    }
    CHECK_THROWS_AS(c.set("model.lambda9", "1"), ConfigError);
    CHECK_THROWS_AS(c.set("model.lambda1", "abc"), ConfigError);
    CHECK_THROWS_AS(c.get("nope.nope"), ConfigError);

    const RunConfig back = parse_config(c.to_ini());
    CHECK(back.to_ini() == c.to_ini());
    CHECK(back.hash() == c.hash());
    CHECK(c.hash().size() == 40);

    RunConfig e = c;
    e.set("model.lambda1", "0.5");
    CHECK(e.hash() != c.hash());
    CHECK(e.get("model.lambda1") == "0.5");

    const RunConfig from_preset = parse_config("preset = distractor\n[model]\nlambda1 = 0.2\n");
    CHECK(from_preset.env_preset == "distractor");
    CHECK(from_preset.get("model.lambda1") == "0.2");
    CHECK_THROWS_AS(parse_config("[model]\nlambda1 = \n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::preset("huge"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
    for (const char* name : {"desk", "distractor", "full"}) CHECK_NOTHROW(RunConfig::preset(name).validate());
}

TEST_CASE("sweep parameter names")
{
    CHECK(resolve_param("lambda1") == "model.lambda1");
    CHECK(resolve_param("model.lambda2") == "model.lambda2");
    CHECK_THROWS_AS(resolve_param("lambda99"), ConfigError);
}

TEST_CASE("checkpoint save and load roundtrip")
{
    const fs::path dir = scratch_dir("ckpt");
    Checkpoint ck;
    Rng rng(9);
    ck.tensors.push_back({"w", rdtest::random_tensor(3, 4, rng)});
    ck.tensors.push_back({"b", rdtest::random_tensor(1, 4, rng)});
    ck.meta = {{"hello", "world"}};
    save_checkpoint(dir, ck);
    const Checkpoint back = load_checkpoint(dir);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.get("w") == ck.get("w"));
    CHECK(back.get("b") == ck.get("b"));
    CHECK(back.meta.at("hello") == "world");
    CHECK_THROWS_AS(back.get("missing"), UsageError);
    CHECK_THROWS_AS(load_checkpoint(dir / "absent"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("sweep rows cover values, seeds and evaluations")
{
    const fs::path dir = scratch_dir("sweep");
    const RunConfig base = tiny_config();
    const std::size_t per_run = run_training(base, std::nullopt).size();
    const std::vector<std::string> values = {"0", "0.5"};
    const std::vector<std::uint64_t> seeds = {1, 2};
    int callbacks = 0;
    const auto rows = run_sweep(base, "lambda1", values, seeds, dir, [&](const SweepRow&) { ++callbacks; });
    CHECK(rows.size() == values.size() * seeds.size() * per_run);
    CHECK(callbacks == static_cast<int>(rows.size()));
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "lambda1=0.5" / "seed2" / "metrics.csv"));

    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("lambda1,seed,step,avg_return,s_zr\n", 0) == 0);
    CHECK(count_of(csv, "\n") == rows.size() + 1);

    const std::string md = sweep_table_markdown("lambda1", rows);
    CHECK(md.rfind("| lambda1 / t |", 0) == 0);
    CHECK(count_of(md, "\n") == 2 + values.size());
    CHECK(md == slurp(dir / "sweep_table.md"));
    CHECK_THROWS_AS(run_sweep(base, "lambda1", {}, seeds, std::nullopt), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("evaluate and render a trained checkpoint")
{
    const fs::path dir = scratch_dir("eval");
    const RunConfig c = tiny_config(4);
    run_training(c, dir);
    const Checkpoint ck = load_checkpoint(dir / "checkpoint");
    const EnvSpec env = env_from_checkpoint(ck);
    CHECK(env_spec_to_json(env) == env_spec_to_json(make_env_spec(c)));
    CHECK(config_from_checkpoint(ck).hash() == c.hash());

    const auto j = evaluate_checkpoint(ck, env, 2, 1);
    for (const char* key : {"avg_return", "rollouts", "pearson_r", "s_zr", "compact_state", "structure", "variant",
                            "config_hash", "env_steps"})
        CHECK(j.contains(key));
    CHECK(j["config_hash"] == c.hash());
    CHECK(j["structure"]["reward"].contains("f1"));
    CHECK(evaluate_checkpoint(ck, env, 2, 1).dump() == j.dump());

    GenerateOptions opts;
    opts.d_s = env.d_s + 1;
    opts.d_a = env.d_a;
    const EnvSpec wrong = generate_spec(opts);
    CHECK_THROWS_AS(evaluate_checkpoint(ck, wrong, 2, 1), ConfigError);

    const fs::path viz = dir / "viz";
    render_checkpoint(ck, viz, dir / "metrics.csv");
    for (const char* f : {"mask_ss.svg", "mask_as.svg", "mask_sr.svg", "mask_ar.svg", "learning_curve.svg"})
        CHECK(fs::exists(viz / f));
    CHECK(count_of(slurp(viz / "mask_ss.svg"), "class=\"cell\"") ==
          static_cast<std::size_t>(env.d_s * env.d_s));
    fs::remove_all(dir);
}
