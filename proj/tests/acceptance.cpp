// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero when any selected criterion fails.
//
//   acceptance                 all ten criteria
//   acceptance --only 4,5,6    a subset (the desk runs are shared by 4-6,
//                              the distractor runs by 8-9)
#include "support.hpp"

#include "retdecomp/config.hpp"
#include "retdecomp/errors.hpp"
#include "retdecomp/gen_model.hpp"
#include "retdecomp/gumbel.hpp"
#include "retdecomp/metrics.hpp"
#include "retdecomp/policy.hpp"
#include "retdecomp/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace retdecomp;

namespace {

// Pinned tolerances.
constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-4;
constexpr int kFdInstances = 20;
constexpr double kFdSeconds = 10.0;

constexpr int kCalibrationPairs = 50;
constexpr int kCalibrationDraws = 100000;
constexpr double kCalibrationSe = 3.0;
constexpr double kCalibrationSeconds = 10.0;

constexpr int kCompactCases = 200;
constexpr int kCompactMaxDim = 8;
constexpr double kCompactSeconds = 5.0;

constexpr int kStructureSeeds = 5;
constexpr int kStructureNeeded = 4;
constexpr double kRewardF1 = 0.9;
constexpr double kDynamicsF1 = 0.8;
constexpr double kStructureSecondsPerSeed = 600.0;
constexpr double kPearson = 0.8;
constexpr double kResidualRatio = 0.05;

constexpr int kSweepSeeds = 3;
const std::vector<std::string> kLambda1Values = {"0", "0.05", "0.5"};

constexpr int kPolicySeeds = 5;
constexpr double kBenefitFraction = 0.2;
constexpr int kRandomPolicyEpisodes = 50;
constexpr double kProgressFraction = 0.9;
constexpr int kProgressSmoothing = 4;

struct Line {
    int id;
    bool pass;
    std::string text;
};

std::vector<Line> g_lines;

void emit(int id, bool pass, const std::string& name, const std::string& detail)
{
    char head[96];
    std::snprintf(head, sizeof head, "criterion %2d %s  %s: ", id, pass ? "PASS" : "FAIL", name.c_str());
    const std::string text = head + detail;
    std::printf("%s\n", text.c_str());
    std::fflush(stdout);
    g_lines.push_back({id, pass, text});
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- 1

struct FdFamily {
    std::string name;
    double worst = 0.0;
    long entries = 0;
    int instances = 0;
};

void fd_record(FdFamily& f, const rdtest::GradReport& rep)
{
    f.worst = std::max(f.worst, rep.worst);
    f.entries += rep.entries;
    ++f.instances;
}

void criterion_gradients()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<FdFamily> fam = {{"tensor ops"}, {"mlp"}, {"mdn nll"},      {"reward loss"},   {"dynamics loss"},
                                 {"sparsity"},   {"actor"}, {"critic"}, {"temperature"}, {"gumbel relaxation"}};
    Rng rng(20240601);
    for (int inst = 0; inst < kFdInstances; ++inst) {
        {
            Parameter a("a", rdtest::away_from_zero(3, 4, rng));
            Parameter b("b", rdtest::away_from_zero(3, 4, rng));
            Parameter m("m", rdtest::random_tensor(4, 2, rng));
            Parameter row("row", rdtest::random_tensor(1, 4, rng));
            Parameter col("col", rdtest::random_tensor(3, 1, rng));
            Parameter pos("pos", rdtest::random_tensor(3, 4, rng, 0.5, 2.0));
            auto loss = [&](Tape& t) {
                Var A = t.parameter(a), B = t.parameter(b), M = t.parameter(m);
                Var R = t.parameter(row), C = t.parameter(col), P = t.parameter(pos);
                Var x = ad::add(ad::mul(A, B), ad::div(A, P));
                x = ad::sub(x, ad::scale(ad::neg(B), 0.3));
                x = ad::mul_col(ad::sub_col(ad::add_row(x, R), C), C);
                Var y = ad::matmul(ad::tanh(x), M);
                Var parts[] = {ad::add_scalar(ad::square(y), 0.1), ad::sigmoid(y), ad::exp(ad::scale(y, 0.5)),
                               ad::softplus(y)};
                Var cat = ad::concat_cols(parts);
                Var lg = ad::log(ad::add_scalar(ad::square(ad::slice_cols(cat, 2, 3)), 0.5));
                Var rl = ad::relu(A);
                Var cl = ad::clamp(ad::scale(B, 0.5), -0.6, 0.6);
                return ad::add(ad::add(ad::sum(ad::logsumexp_rows(cat)), ad::mean(ad::sum_cols(lg))),
                               ad::add(ad::sum(ad::mul(rl, rl)), ad::sum(ad::mul(cl, P))));
            };
            fd_record(fam[0], rdtest::check_gradients({&a, &b, &m, &row, &col, &pos}, loss, kFdStep));
        }
        {
            Mlp net("n", {3, 6, 6, 2}, rng);
            const Tensor x = rdtest::random_tensor(5, 3, rng);
            fd_record(fam[1], rdtest::check_gradients(net.parameters(), [&](Tape& t) {
                          return ad::sum(ad::square(net.forward(t, t.constant(x))));
                      }, kFdStep));
            Parameter raw("raw", rdtest::random_tensor(5, kMdnOutputs, rng, -2.0, 2.0));
            const Tensor target = rdtest::random_tensor(5, 1, rng, -2.0, 2.0);
            fd_record(fam[2], rdtest::check_gradients({&raw}, [&](Tape& t) {
                          return ad::mean(ad::mdn_nll(t.parameter(raw), target));
                      }, kFdStep));
        }
        {
            GenerateOptions o;
            o.d_s = 3;
            o.d_a = 2;
            o.horizon = 4;
            o.edge_density = 0.5;
            o.seed = static_cast<std::uint64_t>(inst);
            o.kind = inst % 2 ? DynamicsKind::RandomMlp : DynamicsKind::Linear;
            o.noise_std_state = 0.1;
            FactoredEnv env(generate_spec(o), inst);
            Trajectory ta = rollout(env, uniform_random_policy(2, rng));
            Trajectory tb = rollout(env, uniform_random_policy(2, rng));
            const Trajectory* batch[] = {&ta, &tb};
            MaskLogits logits = MaskLogits::zeros(3, 2);
            for (auto* p : logits.parameters()) p->value = rdtest::random_tensor(p->value.rows(), p->value.cols(), rng, -2, 2);
            const std::uint64_t noise_seed = rng.next_u64();

            RewardNet rnet(3, 2, 6, rng);
            fd_record(fam[3], rdtest::check_gradients(rnet.mlp().parameters(), [&](Tape& t) {
                          Rng noise(noise_seed);
                          return reward_loss(t, batch, rnet, bind_logits(t, logits), 1.0, 0.95, noise);
                      }, kFdStep));

            DynNet dnet(3, 2, 6, true, rng);
            const auto trans = rdtest::transitions_of(ta);
            fd_record(fam[4], rdtest::check_gradients(dnet.mlp().parameters(), [&](Tape& t) {
                          Rng noise(noise_seed);
                          return dynamics_loss(t, trans, dnet, bind_logits(t, logits), 1.0, noise);
                      }, kFdStep));

            const SparsityWeights w{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1),
                                    rng.uniform(0, 1)};
            fd_record(fam[5], rdtest::check_gradients(logits.parameters(), [&](Tape& t) {
                          return sparsity_loss(t, bind_logits(t, logits), 3, w);
                      }, kFdStep));
        }
        {
            Actor actor(3, 2, 8, rng);
            Critic critic(3, 2, 8, true, rng);
            const Tensor states = rdtest::random_tensor(6, 3, rng);
            const Tensor eps = rdtest::random_tensor(6, 2, rng, -1.5, 1.5);
            const double alpha = rng.uniform(0.05, 1.0);
            fd_record(fam[6], rdtest::check_gradients(actor.mlp().parameters(), [&](Tape& t) {
                          auto s = actor.sample(t, states, eps, true);
                          Var q = critic.value_frozen(t, states, s.action);
                          return ad::mean(ad::sub(ad::scale(s.log_prob, alpha), q));
                      }, kFdStep));

            Tensor sa(6, 5);
            sa << states, rdtest::random_tensor(6, 2, rng);
            const Tensor y = rdtest::random_tensor(6, 1, rng, -2, 2);
            fd_record(fam[7], rdtest::check_gradients(critic.parameters(), [&](Tape& t) {
                          Var total = t.constant(Tensor::Zero(1, 1));
                          for (auto& head : critic.heads())
                              total = ad::add(total, ad::mean(ad::square(ad::sub(head.forward(t, t.constant(sa)),
                                                                                 t.constant(y)))));
                          return total;
                      }, kFdStep));

            Temperature temp = Temperature::make(rng.uniform(0.1, 2.0), -2.0);
            const double mean_logp = rng.uniform(-3, 3);
            fd_record(fam[8], rdtest::check_gradients({&temp.log_alpha}, [&](Tape& t) {
                          return ad::scale(ad::exp(t.parameter(temp.log_alpha)), -(mean_logp + temp.target_entropy));
                      }, kFdStep));
        }
        {
            // The straight-through path differentiates the soft relaxation.
            const double l0 = rng.uniform(-3, 3), l1 = rng.uniform(-3, 3);
            const double g0 = -std::log(-std::log(rng.uniform(1e-12, 1.0)));
            const double g1 = -std::log(-std::log(rng.uniform(1e-12, 1.0)));
            const double tau = rng.uniform(0.3, 2.0);
            const auto s = gumbel_softmax_with_noise(l0, l1, g0, g1, tau);
            const double up = gumbel_softmax_with_noise(l0 + kFdStep, l1, g0, g1, tau).soft[0];
            const double down = gumbel_softmax_with_noise(l0 - kFdStep, l1, g0, g1, tau).soft[0];
            fd_record(fam[9], {rdtest::rel_error(s.soft_slope(tau), (up - down) / (2 * kFdStep)), 1});
        }
    }
    const double secs = seconds_since(t0);
    double worst = 0;
    long entries = 0;
    std::string worst_family;
    bool enough = true;
    for (const auto& f : fam) {
        if (f.worst >= worst) {
            worst = f.worst;
            worst_family = f.name;
        }
        entries += f.entries;
        enough = enough && f.instances >= kFdInstances;
    }
    const bool pass = worst < kFdTolerance && enough && secs < kFdSeconds;
    emit(1, pass, "gradient correctness",
         std::to_string(fam.size()) + " op families x " + std::to_string(kFdInstances) + " instances, " +
             std::to_string(entries) + " entries; worst rel err " + fmt("%.2e", worst) + " (" + worst_family +
             ") < " + fmt("%.0e", kFdTolerance) + "; " + fmt("%.2f", secs) + " s < " + fmt("%.0f", kFdSeconds) +
             " s");
}

// ---------------------------------------------------------------- 2

void criterion_calibration()
{
    const auto t0 = std::chrono::steady_clock::now();
    Rng pairs(77);
    Rng draws(78);
    int within = 0;
    double worst_z = 0;
    for (int p = 0; p < kCalibrationPairs; ++p) {
        const double l0 = pairs.uniform(-3, 3), l1 = pairs.uniform(-3, 3);
        const double expected = std::exp(l0) / (std::exp(l0) + std::exp(l1));
        long hits = 0;
        for (int i = 0; i < kCalibrationDraws; ++i) hits += gumbel_softmax(l0, l1, 1.0, draws).hard_index == 0;
        const double freq = static_cast<double>(hits) / kCalibrationDraws;
        const double se = std::sqrt(expected * (1 - expected) / kCalibrationDraws);
        const double z = std::abs(freq - expected) / se;
        worst_z = std::max(worst_z, z);
        if (z <= kCalibrationSe) ++within;
    }
    const double secs = seconds_since(t0);
    const bool pass = within == kCalibrationPairs && secs < kCalibrationSeconds;
    emit(2, pass, "mask-sampling calibration",
         std::to_string(within) + "/" + std::to_string(kCalibrationPairs) + " pairs within " +
             fmt("%.0f", kCalibrationSe) + " SE over " + std::to_string(kCalibrationDraws) + " draws; worst " +
             fmt("%.2f", worst_z) + " SE; " + fmt("%.2f", secs) + " s < " + fmt("%.0f", kCalibrationSeconds) + " s");
}

// ---------------------------------------------------------------- 3

void criterion_compact()
{
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(303);
    int matches = 0;
    for (int c = 0; c < kCompactCases; ++c) {
        const int d = 1 + static_cast<int>(rng.index(kCompactMaxDim));
        const double density = rng.uniform(0.05, 0.6);
        MaskMatrix ss(d, d);
        MaskVector sr(d);
        for (Eigen::Index i = 0; i < ss.size(); ++i) ss.data()[i] = rng.bernoulli(density);
        for (int i = 0; i < d; ++i) sr(i) = rng.bernoulli(density);
        const bool one = compact_representation(ss, sr, Closure::OneStep) == rdtest::compact_oracle(ss, sr, false);
        const bool fix = compact_representation(ss, sr, Closure::FixedPoint) == rdtest::compact_oracle(ss, sr, true);
        if (one && fix) ++matches;
    }
    const double secs = seconds_since(t0);
    emit(3, matches == kCompactCases && secs < kCompactSeconds, "compact-representation oracle",
         std::to_string(matches) + "/" + std::to_string(kCompactCases) +
             " cases exact (one_step and fixed_point), d_s <= " + std::to_string(kCompactMaxDim) + "; " +
             fmt("%.3f", secs) + " s < " + fmt("%.0f", kCompactSeconds) + " s");
}

// ---------------------------------------------------------------- shared runs

struct Run {
    std::vector<MetricsRecord> records;
    double seconds = 0;
};

Run train(const RunConfig& c, const std::string& tag)
{
    const auto t0 = std::chrono::steady_clock::now();
    Run r;
    r.records = run_training(c, std::nullopt);
    r.seconds = seconds_since(t0);
    const auto& last = r.records.back();
    std::printf("  [%s seed %llu] %ld steps  return %.3f  l_rew %.4g  s_zr %.2f  f1 %.2f/%.2f  r %s  %.0f s\n",
                tag.c_str(), static_cast<unsigned long long>(c.seed), last.step, last.avg_return, last.l_rew,
                last.s_zr, last.f1_sr, last.f1_ss, last.pearson_r ? fmt("%.3f", *last.pearson_r).c_str() : "nan",
                r.seconds);
    std::fflush(stdout);
    return r;
}

RunConfig desk_config(std::uint64_t seed)
{
    RunConfig c = RunConfig::preset("desk");
    c.seed = seed;
    return c;
}

RunConfig distractor_config(std::uint64_t seed, Variant v)
{
    RunConfig c = RunConfig::preset("distractor");
    c.seed = seed;
    c.variant = v;
    return c;
}

// ---------------------------------------------------------------- 4 5 6

void criteria_desk(bool want4, bool want5, bool want6)
{
    std::vector<Run> runs;
    for (int s = 0; s < kStructureSeeds; ++s) runs.push_back(train(desk_config(s), "desk"));

    if (want4) {
        int ok = 0;
        double slowest = 0;
        std::string per_seed;
        for (const auto& r : runs) {
            const auto& last = r.records.back();
            const bool good = last.f1_sr >= kRewardF1 && last.f1_ss >= kDynamicsF1;
            ok += good;
            slowest = std::max(slowest, r.seconds);
            per_seed += " " + fmt("%.2f", last.f1_sr) + "/" + fmt("%.2f", last.f1_ss);
        }
        const bool pass = ok >= kStructureNeeded && slowest < kStructureSecondsPerSeed;
        emit(4, pass, "structure recovery",
             "reward F1 >= " + fmt("%.1f", kRewardF1) + " and dynamics F1 >= " + fmt("%.1f", kDynamicsF1) + " in " +
                 std::to_string(ok) + "/" + std::to_string(kStructureSeeds) + " seeds (need " +
                 std::to_string(kStructureNeeded) + "); per seed" + per_seed + "; slowest seed " +
                 fmt("%.0f", slowest) + " s < " + fmt("%.0f", kStructureSecondsPerSeed) + " s");
    }
    if (want5) {
        int ok = 0;
        std::string per_seed;
        for (const auto& r : runs) {
            const auto& p = r.records.back().pearson_r;
            ok += p && *p >= kPearson;
            per_seed += " " + (p ? fmt("%.3f", *p) : std::string("nan"));
        }
        emit(5, ok >= kStructureNeeded, "return decomposition quality",
             "Pearson(r~, r) >= " + fmt("%.1f", kPearson) + " in " + std::to_string(ok) + "/" +
                 std::to_string(kStructureSeeds) + " seeds (need " + std::to_string(kStructureNeeded) +
                 "); per seed" + per_seed);
    }
    if (want6) {
        int ok = 0;
        std::string per_seed;
        for (const auto& r : runs) {
            const RunConfig c = desk_config(0);
            const MetricsRecord* first = nullptr;
            const MetricsRecord* first_trained = nullptr;
            for (const auto& rec : r.records) {
                if (!first && rec.step >= c.warmup) first = &rec;
                if (!first_trained && rec.gradient_steps > 0) first_trained = &rec;
            }
            const double final_loss = r.records.back().l_rew;
            const double ratio = first ? final_loss / first->l_rew : NAN;
            const double trained_ratio = first_trained ? final_loss / first_trained->l_rew : NAN;
            ok += ratio <= kResidualRatio;
            per_seed += " " + fmt("%.1f%%", 100 * ratio) + " (" + fmt("%.1f%%", 100 * trained_ratio) + ")";
        }
        emit(6, ok >= kStructureNeeded, "return-equivalence residual",
             "final L_rew <= " + fmt("%.0f%%", 100 * kResidualRatio) + " of the first post-warmup value in " +
                 std::to_string(ok) + "/" + std::to_string(kStructureSeeds) + " seeds (need " +
                 std::to_string(kStructureNeeded) + "); per seed, vs first trained point in brackets:" + per_seed);
    }
}

// ---------------------------------------------------------------- 7

void criterion_sparsity_trend()
{
    std::vector<double> means;
    std::string detail;
    for (const auto& v : kLambda1Values) {
        double sum = 0;
        for (int s = 0; s < kSweepSeeds; ++s) {
            RunConfig c = desk_config(s);
            c.set("model.lambda1", v);
            sum += train(c, "lambda1=" + v).records.back().s_zr;
        }
        means.push_back(sum / kSweepSeeds);
        detail += " " + v + ":" + fmt("%.3f", means.back());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] <= means[i - 1];
    emit(7, monotone, "sparsity trend",
         "mean final S_zr over " + std::to_string(kSweepSeeds) + " seeds non-increasing in lambda1;" + detail);
}

// ---------------------------------------------------------------- 8 9

// First step at which the smoothed curve covers kProgressFraction of its
// rise from the first evaluation to the last.
long time_to_progress(const std::vector<MetricsRecord>& recs)
{
    std::vector<double> ret;
    for (const auto& r : recs) ret.push_back(r.avg_return);
    const auto sm = ema(ret, kProgressSmoothing);
    const double start = sm.front(), end = sm.back();
    const double bar = start + kProgressFraction * (end - start);
    for (std::size_t i = 0; i < sm.size(); ++i)
        if (end >= start ? sm[i] >= bar : sm[i] <= bar) return recs[i].step;
    return recs.back().step;
}

void criteria_distractor(bool want8, bool want9)
{
    std::vector<double> gains;
    std::vector<long> t_grd, t_nocr;
    std::string detail8, detail9;
    for (int s = 0; s < kPolicySeeds; ++s) {
        const Run grd = train(distractor_config(s, Variant::Grd), "grd");
        if (want8) {
            const Run base = train(distractor_config(s, Variant::UniformBaseline), "uniform_baseline");
            const RunConfig c = distractor_config(s, Variant::Grd);
            FactoredEnv env(make_env_spec(c), 1000 + s);
            Rng rng(2000 + s);
            const double random_return = average_return(env, uniform_random_policy(env.spec().d_a, rng),
                                                        kRandomPolicyEpisodes);
            const double g = grd.records.back().avg_return, b = base.records.back().avg_return;
            // Margin of grd over the baseline in units of the baseline's gain over random.
            gains.push_back((g - b) / std::abs(b - random_return));
            detail8 += " " + fmt("%.1f", g) + "/" + fmt("%.1f", b) + "/" + fmt("%.1f", random_return);
        }
        if (want9) {
            const Run nocr = train(distractor_config(s, Variant::GrdNoCr), "grd_no_cr");
            t_grd.push_back(time_to_progress(grd.records));
            t_nocr.push_back(time_to_progress(nocr.records));
            detail9 += " " + std::to_string(t_grd.back()) + "/" + std::to_string(t_nocr.back());
        }
    }
    if (want8) {
        const double m = median(gains);
        emit(8, m >= kBenefitFraction, "end-to-end policy benefit",
             "median (grd - baseline) / |baseline - random| = " + fmt("%.2f", m) + " >= " +
                 fmt("%.1f", kBenefitFraction) + "; grd/baseline/random returns per seed:" + detail8);
    }
    if (want9) {
        std::vector<double> a(t_grd.begin(), t_grd.end()), b(t_nocr.begin(), t_nocr.end());
        const double mg = median(a), mn = median(b);
        emit(9, mg <= mn, "ablation ordering",
             "median steps to " + fmt("%.0f%%", 100 * kProgressFraction) + " of final return: grd " +
                 fmt("%.0f", mg) + " <= grd_no_cr " + fmt("%.0f", mn) + "; per seed grd/no_cr:" + detail9);
    }
}

// ---------------------------------------------------------------- 10

void criterion_reproducibility()
{
    RunConfig c = desk_config(7);
    c.cycles = 5;  // a few hundred gradient steps past warmup
    const auto root = std::filesystem::temp_directory_path() / "retdecomp_acceptance_repro";
    std::filesystem::remove_all(root);
    run_training(c, root / "a");
    run_training(c, root / "b");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string a = slurp(root / "a" / "metrics.csv"), b = slurp(root / "b" / "metrics.csv");
    const long rows = std::count(a.begin(), a.end(), '\n');
    emit(10, !a.empty() && a == b, "reproducibility",
         "two runs of one (config, seed): metrics.csv " + std::string(a == b ? "byte-identical" : "differs") + " (" +
             std::to_string(a.size()) + " bytes, " + std::to_string(rows) + " lines)");
    std::filesystem::remove_all(root);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    app.add_option("--only", only, "criteria to run, e.g. 4,5,6")->delimiter(',')->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);
    std::set<int> want(only.begin(), only.end());
    if (want.empty())
        for (int i = 1; i <= 10; ++i) want.insert(i);
    auto has = [&](int i) { return want.count(i) > 0; };

    try {
        if (has(1)) criterion_gradients();
        if (has(2)) criterion_calibration();
        if (has(3)) criterion_compact();
        if (has(10)) criterion_reproducibility();
        if (has(4) || has(5) || has(6)) criteria_desk(has(4), has(5), has(6));
        if (has(7)) criterion_sparsity_trend();
        if (has(8) || has(9)) criteria_distractor(has(8), has(9));
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 1;
    }

    std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
    std::printf("\nsummary\n");
    bool all = true;
    for (const auto& l : g_lines) {
        std::printf("%s\n", l.text.c_str());
        all = all && l.pass;
    }
    return all ? 0 : 1;
}
