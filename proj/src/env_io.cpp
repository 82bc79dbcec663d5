#include "retdecomp/env_io.hpp"

#include "retdecomp/errors.hpp"

#include <fstream>
#include <ostream>

namespace retdecomp {

using nlohmann::json;

namespace {

template <class M>
json matrix_to_json(const M& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class V>
json vector_to_json(const V& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

template <class M>
M matrix_from_json(const json& j, const char* what)
{
    if (!j.is_array()) throw ConfigError(std::string("env spec: ") + what + " must be a matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    M m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError(std::string("env spec: ragged matrix ") + what);
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<typename M::Scalar>();
    }
    return m;
}

template <class V>
V vector_from_json(const json& j, const char* what)
{
    if (!j.is_array()) throw ConfigError(std::string("env spec: ") + what + " must be a list");
    V v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<typename V::Scalar>();
    return v;
}

}  // namespace

json env_spec_to_json(const EnvSpec& s)
{
    json j;
    j["d_s"] = s.d_s;
    j["d_a"] = s.d_a;
    j["mask_ss"] = matrix_to_json(s.mask_ss);
    j["mask_as"] = matrix_to_json(s.mask_as);
    j["mask_sr"] = vector_to_json(s.mask_sr);
    j["mask_ar"] = vector_to_json(s.mask_ar);
    j["dynamics_kind"] = to_string(s.dynamics_kind);
    if (s.dynamics_kind == DynamicsKind::Linear) {
        j["w_ss"] = matrix_to_json(s.w_ss);
        j["w_as"] = matrix_to_json(s.w_as);
        j["bias"] = vector_to_json(s.bias);
    } else {
        json gens = json::array();
        for (const auto& g : s.generators)
            gens.push_back({{"w_in", matrix_to_json(g.w_in)},
                            {"b_in", vector_to_json(g.b_in)},
                            {"w_out", vector_to_json(g.w_out)},
                            {"b_out", g.b_out}});
        j["generators"] = std::move(gens);
    }
    j["w_sr"] = vector_to_json(s.w_sr);
    j["action_cost"] = s.action_cost;
    j["reward_bias"] = s.reward_bias;
    j["noise_std_state"] = s.noise_std_state;
    j["noise_std_reward"] = s.noise_std_reward;
    j["init_state_std"] = s.init_state_std;
    j["horizon"] = s.horizon;
    j["observe_mode"] = to_string(s.observe_mode);
    j["observe_k"] = s.observe_k;
    j["gamma"] = s.gamma;
    return j;
}

EnvSpec env_spec_from_json(const json& j)
{
    try {
        EnvSpec s;
        s.d_s = j.at("d_s").get<int>();
        s.d_a = j.at("d_a").get<int>();
        s.mask_ss = matrix_from_json<MaskMatrix>(j.at("mask_ss"), "mask_ss");
        s.mask_as = matrix_from_json<MaskMatrix>(j.at("mask_as"), "mask_as");
        s.mask_sr = vector_from_json<MaskVector>(j.at("mask_sr"), "mask_sr");
        s.mask_ar = vector_from_json<MaskVector>(j.at("mask_ar"), "mask_ar");
        s.dynamics_kind = parse_dynamics_kind(j.at("dynamics_kind").get<std::string>());
        if (s.dynamics_kind == DynamicsKind::Linear) {
            s.w_ss = matrix_from_json<Tensor>(j.at("w_ss"), "w_ss");
            s.w_as = matrix_from_json<Tensor>(j.at("w_as"), "w_as");
            s.bias = vector_from_json<Vector>(j.at("bias"), "bias");
        } else {
            for (const auto& gj : j.at("generators")) {
                MlpGenerator g;
                g.w_in = matrix_from_json<Tensor>(gj.at("w_in"), "w_in");
                g.b_in = vector_from_json<Vector>(gj.at("b_in"), "b_in");
                g.w_out = vector_from_json<Vector>(gj.at("w_out"), "w_out");
                g.b_out = gj.at("b_out").get<double>();
                s.generators.push_back(std::move(g));
            }
        }
        s.w_sr = vector_from_json<Vector>(j.at("w_sr"), "w_sr");
        s.action_cost = j.at("action_cost").get<double>();
        s.reward_bias = j.value("reward_bias", 0.0);
        s.noise_std_state = j.at("noise_std_state").get<double>();
        s.noise_std_reward = j.at("noise_std_reward").get<double>();
        s.init_state_std = j.value("init_state_std", 1.0);
        s.horizon = j.at("horizon").get<int>();
        s.observe_mode = parse_observe_mode(j.at("observe_mode").get<std::string>());
        s.observe_k = j.value("observe_k", 1);
        s.gamma = j.value("gamma", 1.0);
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("env spec: ") + e.what());
    }
}

void save_env_spec(const EnvSpec& spec, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write env spec to " + path.string());
    out << env_spec_to_json(spec).dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

EnvSpec load_env_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read env spec " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("env spec " + path.string() + ": " + e.what());
    }
    return env_spec_from_json(j);
}

void write_trajectory_jsonl(const Trajectory& traj, std::ostream& out)
{
    for (std::size_t t = 0; t < traj.length(); ++t) {
        json line;
        line["t"] = t + 1;
        line["state"] = vector_to_json(traj.states[t]);
        line["action"] = vector_to_json(traj.actions[t]);
        line["o"] = traj.observed[t];
        line["r"] = traj.true_rewards[t];
        out << line.dump() << '\n';
    }
}

}  // namespace retdecomp
