#include "retdecomp/config.hpp"

#include "retdecomp/env_io.hpp"
#include "retdecomp/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace retdecomp {

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::Grd: return "grd";
    case Variant::GrdNoCr: return "grd_no_cr";
    case Variant::UniformBaseline: return "uniform_baseline";
    }
    return "?";
}

Variant parse_variant(const std::string& s)
{
    if (s == "grd") return Variant::Grd;
    if (s == "grd_no_cr") return Variant::GrdNoCr;
    if (s == "uniform_baseline") return Variant::UniformBaseline;
    throw ConfigError("unknown variant '" + s + "' (expected grd, grd_no_cr or uniform_baseline)");
}

namespace {

std::string fmt(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T out{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last)
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

struct Field {
    std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Member>
Field int_field(Member m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_number<T>(k, v); },
            [m](const RunConfig& c) { return fmt(static_cast<long long>(c.*m)); }};
}

Field double_field(double RunConfig::*m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_number<double>(k, v); },
            [m](const RunConfig& c) { return fmt(c.*m); }};
}

Field string_field(std::string RunConfig::*m)
{
    return {[m](RunConfig& c, const std::string&, const std::string& v) { c.*m = v; },
            [m](const RunConfig& c) { return c.*m; }};
}

Field bool_field(bool RunConfig::*m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_bool(k, v); },
            [m](const RunConfig& c) { return fmt(c.*m); }};
}

Field lambda_field(double SparsityWeights::*m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.lambda.*m = parse_number<double>(k, v); },
            [m](const RunConfig& c) { return fmt(c.lambda.*m); }};
}

Field sac_double(double SacConfig::*m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.sac.*m = parse_number<double>(k, v); },
            [m](const RunConfig& c) { return fmt(c.sac.*m); }};
}

Field sac_bool(bool SacConfig::*m)
{
    return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.sac.*m = parse_bool(k, v); },
            [m](const RunConfig& c) { return fmt(c.sac.*m); }};
}

const std::map<std::string, Field>& fields()
{
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["run.seed"] = int_field<std::uint64_t>(&RunConfig::seed);
        t["run.variant"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.variant = parse_variant(v); },
                            [](const RunConfig& c) { return to_string(c.variant); }};

        t["env.preset"] = string_field(&RunConfig::env_preset);
        t["env.file"] = string_field(&RunConfig::env_file);
        t["env.seed"] = int_field<std::int64_t>(&RunConfig::env_seed);
        t["env.d_s"] = int_field<int>(&RunConfig::env_d_s);
        t["env.d_a"] = int_field<int>(&RunConfig::env_d_a);
        t["env.density"] = double_field(&RunConfig::env_density);
        t["env.dynamics"] = string_field(&RunConfig::env_dynamics);
        t["env.horizon"] = int_field<int>(&RunConfig::env_horizon);
        t["env.observe"] = string_field(&RunConfig::env_observe);
        t["env.observe_k"] = int_field<int>(&RunConfig::env_observe_k);
        t["env.noise"] = double_field(&RunConfig::env_noise);
        t["env.action_cost"] = double_field(&RunConfig::env_action_cost);
        t["env.chain_length"] = int_field<int>(&RunConfig::env_chain_length);

        t["model.hidden"] = int_field<int>(&RunConfig::model_hidden);
        t["model.dyn_dim_embedding"] = bool_field(&RunConfig::dyn_dim_embedding);
        t["model.temperature"] = double_field(&RunConfig::temperature);
        t["model.closure"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                  if (v == "one_step")
                                      c.closure = Closure::OneStep;
                                  else if (v == "fixed_point")
                                      c.closure = Closure::FixedPoint;
                                  else
                                      throw ConfigError("config key '" + k + "': expected one_step or fixed_point");
                              },
                              [](const RunConfig& c) {
                                  return std::string(c.closure == Closure::OneStep ? "one_step" : "fixed_point");
                              }};
        t["model.lambda1"] = lambda_field(&SparsityWeights::state_reward);
        t["model.lambda2"] = lambda_field(&SparsityWeights::action_reward);
        t["model.lambda3"] = lambda_field(&SparsityWeights::state_cross);
        t["model.lambda4"] = lambda_field(&SparsityWeights::state_self);
        t["model.lambda5"] = lambda_field(&SparsityWeights::action_state);
        t["model.lr"] = double_field(&RunConfig::model_lr);
        t["model.mask_lr"] = double_field(&RunConfig::mask_lr);

        t["policy.hidden"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                  c.sac.hidden = parse_number<int>(k, v);
                              },
                              [](const RunConfig& c) { return fmt(static_cast<long long>(c.sac.hidden)); }};
        t["policy.gamma"] = sac_double(&SacConfig::gamma);
        t["policy.polyak"] = sac_double(&SacConfig::polyak);
        t["policy.lr"] = sac_double(&SacConfig::lr);
        t["policy.initial_alpha"] = sac_double(&SacConfig::initial_alpha);
        t["policy.twin_critic"] = sac_bool(&SacConfig::twin_critic);
        t["policy.terminal_at_horizon"] = sac_bool(&SacConfig::terminal_at_horizon);

        t["schedule.epochs"] = int_field<int>(&RunConfig::epochs);
        t["schedule.cycles"] = int_field<int>(&RunConfig::cycles);
        t["schedule.iterations"] = int_field<int>(&RunConfig::iterations);
        t["schedule.steps_per_iteration"] = int_field<int>(&RunConfig::steps_per_iteration);
        t["schedule.update_ratio"] = double_field(&RunConfig::update_ratio);
        t["schedule.train_batches"] = int_field<int>(&RunConfig::train_batches);
        t["schedule.warmup"] = int_field<long>(&RunConfig::warmup);
        t["schedule.buffer_capacity"] = int_field<long>(&RunConfig::buffer_capacity);
        t["schedule.trajectory_batch"] = int_field<int>(&RunConfig::trajectory_batch);
        t["schedule.transition_batch"] = int_field<int>(&RunConfig::transition_batch);
        t["schedule.eval_rollouts"] = int_field<int>(&RunConfig::eval_rollouts);
        return t;
    }();
    return table;
}

const Field& field(const std::string& key)
{
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, key, value); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys()
{
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : fields()) out.push_back(name);
        return out;
    }();
    return k;
}

std::map<std::string, std::string> RunConfig::to_map() const
{
    std::map<std::string, std::string> out;
    for (const auto& [name, f] : fields()) out[name] = f.get(*this);
    return out;
}

std::string RunConfig::to_ini() const
{
    std::ostringstream os;
    std::string section;
    for (const auto& [name, value] : to_map()) {
        const auto dot = name.find('.');
        const std::string sec = name.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) os << '\n';
            os << '[' << sec << "]\n";
            section = sec;
        }
        os << name.substr(dot + 1) << " = " << value << '\n';
    }
    return os.str();
}

std::string RunConfig::hash() const
{
    const std::string body = to_ini();
    const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
        throw NumericError("config hash: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void RunConfig::validate() const
{
    auto positive = [](long v, const char* name) {
        if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(epochs, "schedule.epochs");
    positive(cycles, "schedule.cycles");
    positive(iterations, "schedule.iterations");
    positive(steps_per_iteration, "schedule.steps_per_iteration");
    positive(trajectory_batch, "schedule.trajectory_batch");
    positive(transition_batch, "schedule.transition_batch");
    positive(eval_rollouts, "schedule.eval_rollouts");
    positive(buffer_capacity, "schedule.buffer_capacity");
    positive(model_hidden, "model.hidden");
    positive(sac.hidden, "policy.hidden");
    if (warmup < 0) throw ConfigError("schedule.warmup must be >= 0");
    if (train_batches < 0) throw ConfigError("schedule.train_batches must be >= 0");
    if (!(update_ratio >= 0.0) || !std::isfinite(update_ratio))
        throw ConfigError("schedule.update_ratio must be a finite value >= 0");
    for (double l : {lambda.state_reward, lambda.action_reward, lambda.state_cross, lambda.state_self,
                     lambda.action_state})
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambdas must be finite and >= 0");
    if (!(temperature > 0.0)) throw ConfigError("model.temperature must be positive");
    if (!(model_lr > 0.0) || !(mask_lr > 0.0) || !(sac.lr > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(sac.gamma >= 0.0 && sac.gamma <= 1.0)) throw ConfigError("policy.gamma must lie in [0, 1]");
    if (!(sac.polyak >= 0.0 && sac.polyak <= 1.0)) throw ConfigError("policy.polyak must lie in [0, 1]");
    if (!(sac.initial_alpha > 0.0)) throw ConfigError("policy.initial_alpha must be positive");
    static const char* presets[] = {"generated", "distractor", "chain", "file"};
    if (std::find(std::begin(presets), std::end(presets), env_preset) == std::end(presets))
        throw ConfigError("unknown env.preset '" + env_preset + "'");
    if (env_preset == "file" && env_file.empty()) throw ConfigError("env.preset = file needs env.file");
    parse_dynamics_kind(env_dynamics);
    parse_observe_mode(env_observe);
}

RunConfig RunConfig::preset(const std::string& name)
{
    RunConfig c;
    if (name == "full") {
        c.env_preset = "generated";
        c.env_d_s = 17;
        c.env_d_a = 6;
        c.env_horizon = 1000;
        c.model_hidden = 256;
        c.sac.hidden = 256;
        c.epochs = 3;
        c.cycles = 100;
        c.iterations = 100;
        c.steps_per_iteration = 100;
        c.lambda = {.state_reward = 1e-5, .action_reward = 1e-5, .state_cross = 1e-5, .state_self = 1e-6,
                    .action_state = 1e-5};
        return c;
    }
    if (name != "desk" && name != "distractor")
        throw ConfigError("unknown preset '" + name + "' (expected desk, distractor or full)");
    // Desk scale: 5e4 env steps with one gradient batch per four env steps.
    c.lambda = {.state_reward = 0.05, .action_reward = 0.0, .state_cross = 0.05, .state_self = 0.05,
                .action_state = 0.05};
    c.update_ratio = 0.25;
    if (name == "desk") {
        c.env_seed = 0;
        c.env_action_cost = 0.5;
        c.trajectory_batch = 16;
        return c;
    }
    // Distractors only drop out of the compact state once the reward masks
    // saturate, which takes the faster mask step at this budget.
    c.env_preset = "distractor";
    c.env_horizon = 128;
    c.cycles = 16;
    c.mask_lr = 3e-3;
    return c;
}

RunConfig parse_config(const std::string& text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::string preset = "desk";
    if (auto p = tree.get_optional<std::string>("preset")) preset = *p;
    if (auto p = tree.get_optional<std::string>("run.preset")) preset = *p;
    RunConfig config = RunConfig::preset(preset);
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            if (section != "preset") throw ConfigError("config: key '" + section + "' outside a section");
            continue;
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (full == "run.preset") continue;
            config.set(full, value.data());
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

EnvSpec make_env_spec(const RunConfig& c)
{
    const std::uint64_t seed = c.env_seed < 0 ? c.seed : static_cast<std::uint64_t>(c.env_seed);
    if (c.env_preset == "file") return load_env_spec(c.env_file);
    if (c.env_preset == "distractor") {
        // Fixed structure, noise and cost; only the horizon follows the config.
        EnvSpec spec = distractor_spec(seed);
        spec.horizon = c.env_horizon;
        spec.validate();
        return spec;
    }
    if (c.env_preset == "chain") return chain_spec(c.env_chain_length, c.env_noise);
    GenerateOptions o;
    o.d_s = c.env_d_s;
    o.d_a = c.env_d_a;
    o.edge_density = c.env_density;
    o.kind = parse_dynamics_kind(c.env_dynamics);
    o.seed = seed;
    o.action_cost = c.env_action_cost;
    o.noise_std_state = c.env_noise;
    o.horizon = c.env_horizon;
    o.observe_mode = parse_observe_mode(c.env_observe);
    o.observe_k = c.env_observe_k;
    return generate_spec(o);
}

}  // namespace retdecomp
