#include "retdecomp/checkpoint.hpp"

#include "retdecomp/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace retdecomp {

namespace {

void put_le(std::ostream& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

const Tensor& Checkpoint::get(const std::string& name) const
{
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw UsageError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory '" + dir.string() + "': " + ec.message());
    std::ofstream bin(dir / "params.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot write '" + (dir / "params.bin").string() + "'");
    nlohmann::json entries = nlohmann::json::array();
    long offset = 0;
    for (const auto& t : ckpt.tensors) {
        for (Eigen::Index i = 0; i < t.value.size(); ++i) put_le(bin, t.value.data()[i]);
        entries.push_back({{"name", t.name}, {"shape", {t.value.rows(), t.value.cols()}}, {"offset", offset}});
        offset += static_cast<long>(t.value.size());
    }
    bin.close();
    if (!bin) throw IoError("short write to '" + (dir / "params.bin").string() + "'");
    nlohmann::json manifest = {{"format", kCheckpointFormat}, {"tensors", entries}, {"meta", ckpt.meta}};
    std::ofstream js(dir / "manifest.json", std::ios::trunc);
    if (!js) throw IoError("cannot write '" + (dir / "manifest.json").string() + "'");
    js << manifest.dump(2) << '\n';
    if (!js) throw IoError("short write to '" + (dir / "manifest.json").string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir)
{
    std::ifstream js(dir / "manifest.json");
    if (!js) throw IoError("cannot open '" + (dir / "manifest.json").string() + "'");
    nlohmann::json manifest;
    try {
        js >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != kCheckpointFormat)
        throw IoError("unsupported checkpoint format in '" + dir.string() + "'");
    std::ifstream bin(dir / "params.bin", std::ios::binary);
    if (!bin) throw IoError("cannot open '" + (dir / "params.bin").string() + "'");
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    Checkpoint out;
    out.meta = manifest.value("meta", nlohmann::json::object());
    try {
        for (const auto& e : manifest.at("tensors")) {
            const auto rows = e.at("shape").at(0).get<long>();
            const auto cols = e.at("shape").at(1).get<long>();
            const auto offset = e.at("offset").get<long>();
            if (rows < 0 || cols < 0 || offset < 0 ||
                static_cast<std::size_t>((offset + rows * cols) * 8) > raw.size())
                throw IoError("checkpoint tensor '" + e.at("name").get<std::string>() + "' runs past params.bin");
            Tensor t(rows, cols);
            for (long i = 0; i < rows * cols; ++i) t.data()[i] = get_le(raw.data() + (offset + i) * 8);
            out.tensors.push_back({e.at("name").get<std::string>(), std::move(t)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
    }
    return out;
}

void restore_parameters(const Checkpoint& ckpt, const ParameterRefs& params)
{
    for (auto* p : params) {
        const Tensor& t = ckpt.get(p->name);
        if (t.rows() != p->value.rows() || t.cols() != p->value.cols())
            throw UsageError("checkpoint tensor '" + p->name + "' has the wrong shape");
        p->value = t;
    }
}

std::vector<NamedTensor> snapshot(const ParameterRefs& params)
{
    std::vector<NamedTensor> out;
    out.reserve(params.size());
    for (const auto* p : params) out.push_back({p->name, p->value});
    return out;
}

}  // namespace retdecomp
