#include "retdecomp/retdecomp.h"

#include "retdecomp/env_io.hpp"
#include "retdecomp/errors.hpp"
#include "retdecomp/evalkit.hpp"

#include <cmath>
#include <cstring>
#include <string>

using namespace retdecomp;

struct rd_config {
    RunConfig value;
};

struct rd_checkpoint {
    Checkpoint value;
    std::filesystem::path dir;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
rd_status guard(F&& f)
{
    g_last_error.clear();
    try {
        f();
        return RD_OK;
    } catch (const ConfigError& e) {
        g_last_error = e.what();
        return RD_ERR_CONFIG;
    } catch (const UsageError& e) {
        g_last_error = e.what();
        return RD_ERR_USAGE;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return RD_ERR_NUMERIC;
    } catch (const IoError& e) {
        g_last_error = e.what();
        return RD_ERR_IO;
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return RD_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RD_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return RD_ERR_INTERNAL;
    }
}

char* dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* what)
{
    if (!p) throw UsageError(std::string(what) + " must not be NULL");
}

rd_metrics to_c(const MetricsRecord& r)
{
    rd_metrics m{};
    m.step = r.step;
    m.avg_return = r.avg_return;
    m.l_rew = r.l_rew;
    m.l_dyn = r.l_dyn;
    m.l_sp = r.l_sp;
    m.s_zr = r.s_zr;
    m.s_zr_sample = r.s_zr_sample;
    m.f1_sr = r.f1_sr;
    m.f1_ss = r.f1_ss;
    m.pearson_defined = r.pearson_r.has_value();
    m.pearson_r = r.pearson_r.value_or(std::nan(""));
    m.gradient_steps = r.gradient_steps;
    m.wall_seconds = r.wall_seconds;
    return m;
}

}  // namespace

extern "C" {

const char* rd_version(void) { return "0.1.0"; }

const char* rd_last_error(void) { return g_last_error.c_str(); }

const char* rd_status_name(rd_status status)
{
    switch (status) {
    case RD_OK: return "ok";
    case RD_ERR_CONFIG: return "config error";
    case RD_ERR_USAGE: return "usage error";
    case RD_ERR_NUMERIC: return "numeric error";
    case RD_ERR_IO: return "i/o error";
    case RD_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void rd_string_free(char* s) { std::free(s); }

rd_status rd_config_preset(const char* name, rd_config** out)
{
    return guard([&] {
        require(name, "name");
        require(out, "out");
        *out = new rd_config{RunConfig::preset(name)};
    });
}

rd_status rd_config_parse(const char* ini_text, rd_config** out)
{
    return guard([&] {
        require(ini_text, "ini_text");
        require(out, "out");
        *out = new rd_config{parse_config(ini_text)};
    });
}

rd_status rd_config_load(const char* path, rd_config** out)
{
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new rd_config{load_config(path)};
    });
}

rd_status rd_config_set(rd_config* config, const char* key, const char* value)
{
    return guard([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        RunConfig next = config->value;
        next.set(key, value);
        config->value = next;
    });
}

rd_status rd_config_get(const rd_config* config, const char* key, char** value)
{
    return guard([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        *value = dup(config->value.get(key));
    });
}

rd_status rd_config_to_ini(const rd_config* config, char** ini_text)
{
    return guard([&] {
        require(config, "config");
        require(ini_text, "ini_text");
        *ini_text = dup(config->value.to_ini());
    });
}

rd_status rd_config_hash(const rd_config* config, char** hex)
{
    return guard([&] {
        require(config, "config");
        require(hex, "hex");
        *hex = dup(config->value.hash());
    });
}

void rd_config_free(rd_config* config) { delete config; }

rd_status rd_config_write_env(const rd_config* config, const char* path)
{
    return guard([&] {
        require(config, "config");
        require(path, "path");
        config->value.validate();
        save_env_spec(make_env_spec(config->value), path);
    });
}

rd_status rd_train(const rd_config* config, const char* out_dir, rd_metrics_fn on_record, void* user)
{
    return guard([&] {
        require(config, "config");
        std::optional<std::filesystem::path> dir;
        if (out_dir) dir = out_dir;
        std::function<void(const MetricsRecord&)> cb;
        if (on_record) cb = [&](const MetricsRecord& r) {
            const rd_metrics m = to_c(r);
            on_record(&m, user);
        };
        run_training(config->value, dir, cb);
        if (dir) save_env_spec(make_env_spec(config->value), (*dir / "env.json").string());
    });
}

rd_status rd_checkpoint_load(const char* dir, rd_checkpoint** out)
{
    return guard([&] {
        require(dir, "dir");
        require(out, "out");
        *out = new rd_checkpoint{load_checkpoint(dir), dir};
    });
}

void rd_checkpoint_free(rd_checkpoint* ckpt) { delete ckpt; }

rd_status rd_evaluate(const rd_checkpoint* ckpt, const char* env_path, int n_rollouts, uint64_t seed, char** json)
{
    return guard([&] {
        require(ckpt, "checkpoint");
        require(json, "json");
        if (n_rollouts <= 0) throw ConfigError("rollout count must be positive");
        const EnvSpec env = env_path ? load_env_spec(env_path) : env_from_checkpoint(ckpt->value);
        *json = dup(evaluate_checkpoint(ckpt->value, env, n_rollouts, seed).dump(2));
    });
}

rd_status rd_render(const rd_checkpoint* ckpt, const char* out_dir, const char* metrics_csv)
{
    return guard([&] {
        require(ckpt, "checkpoint");
        require(out_dir, "out_dir");
        std::optional<std::filesystem::path> csv;
        if (metrics_csv) csv = metrics_csv;
        render_checkpoint(ckpt->value, out_dir, csv);
    });
}

rd_status rd_sweep(const rd_config* base, const char* param, const char* const* values, size_t n_values,
                   const uint64_t* seeds, size_t n_seeds, const char* out_dir)
{
    return guard([&] {
        require(base, "config");
        require(param, "param");
        require(out_dir, "out_dir");
        if (n_values == 0 || n_seeds == 0) throw ConfigError("sweep needs at least one value and one seed");
        require(values, "values");
        require(seeds, "seeds");
        std::vector<std::string> v(values, values + n_values);
        std::vector<std::uint64_t> s(seeds, seeds + n_seeds);
        run_sweep(base->value, param, v, s, std::filesystem::path(out_dir));
    });
}

}  // extern "C"
