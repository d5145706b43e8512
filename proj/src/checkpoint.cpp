#include "svskit/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace svskit {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(std::string("truncated checkpoint while reading ") + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

Checkpoint snapshot_checkpoint(const nn::ParamStore& params, const nn::AdamW* optimizer,
                               const std::string& stage, std::uint64_t iteration,
                               std::uint64_t seed) {
    Checkpoint ckpt;
    ckpt.stage = stage;
    ckpt.iteration = iteration;
    ckpt.seed = seed;
    for (const std::string& name : params.names()) {
        ckpt.names.push_back(name);
        ckpt.values[name] = params.get(name)->value;
    }
    if (optimizer) {
        ckpt.optimizer_step = optimizer->step_count();
        for (const std::string& name : ckpt.names) {
            auto mi = optimizer->moment1().find(name);
            auto vi = optimizer->moment2().find(name);
            if (mi != optimizer->moment1().end()) ckpt.adam_m[name] = mi->second;
            if (vi != optimizer->moment2().end()) ckpt.adam_v[name] = vi->second;
        }
    }
    return ckpt;
}

void restore_checkpoint(const Checkpoint& ckpt, nn::ParamStore& params, nn::AdamW* optimizer) {
    for (const std::string& name : params.names()) {
        auto it = ckpt.values.find(name);
        if (it == ckpt.values.end()) {
            throw std::runtime_error("checkpoint is missing parameter: " + name);
        }
        nn::VarPtr p = params.get(name);
        if (!same_shape(p->value, it->second)) {
            throw std::runtime_error("checkpoint shape mismatch for " + name + ": stored " +
                                     shape_string(it->second.shape) + ", model needs " +
                                     shape_string(p->value.shape));
        }
        p->value = it->second;
    }
    if (optimizer) {
        optimizer->set_step_count(ckpt.optimizer_step);
        for (const auto& [name, tensor] : ckpt.adam_m) optimizer->moment1()[name] = tensor;
        for (const auto& [name, tensor] : ckpt.adam_v) optimizer->moment2()[name] = tensor;
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json manifest;
    manifest["container"] = "checkpoint";
    manifest["stage"] = ckpt.stage;
    manifest["iteration"] = ckpt.iteration;
    manifest["seed"] = ckpt.seed;
    manifest["optimizer"] = {{"type", "adamw"}, {"step", ckpt.optimizer_step}};

    // Tensor directory in write order: all values, then moments.
    nlohmann::json dir = nlohmann::json::array();
    std::vector<std::pair<std::string, const TensorData*>> records;
    auto list = [&](const char* role, const std::unordered_map<std::string, TensorData>& table) {
        for (const std::string& name : ckpt.names) {
            auto it = table.find(name);
            if (it == table.end()) continue;
            dir.push_back({{"name", name}, {"role", role}, {"shape", it->second.shape}});
            records.emplace_back(name, &it->second);
        }
    };
    list("param", ckpt.values);
    list("adam_m", ckpt.adam_m);
    list("adam_v", ckpt.adam_v);
    manifest["tensors"] = dir;

    const std::string body = manifest.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    for (const auto& [name, tensor] : records) write_tensor(out, *tensor);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("bad magic in checkpoint: " + path);
    }
    const std::uint32_t manifest_len = get_u32(in, "manifest length");
    std::string body(manifest_len, '\0');
    if (!in.read(body.data(), manifest_len)) {
        throw std::runtime_error("truncated checkpoint manifest: " + path);
    }
    nlohmann::json manifest = nlohmann::json::parse(body);
    if (manifest.value("container", "") != "checkpoint") {
        throw std::runtime_error("not a checkpoint container: " + path);
    }

    Checkpoint ckpt;
    ckpt.stage = manifest.value("stage", "");
    ckpt.iteration = manifest.value("iteration", std::uint64_t{0});
    ckpt.seed = manifest.value("seed", std::uint64_t{0});
    if (manifest.contains("optimizer")) {
        ckpt.optimizer_step = manifest["optimizer"].value("step", std::uint64_t{0});
    }
    for (const auto& entry : manifest.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string role = entry.at("role").get<std::string>();
        TensorData t = read_tensor(in, path + ":" + name);
        const auto declared = entry.at("shape").get<std::vector<std::size_t>>();
        if (t.shape != declared) {
            throw std::runtime_error("manifest/payload shape mismatch for " + name + " in " + path);
        }
        if (role == "param") {
            ckpt.names.push_back(name);
            ckpt.values[name] = std::move(t);
        } else if (role == "adam_m") {
            ckpt.adam_m[name] = std::move(t);
        } else if (role == "adam_v") {
            ckpt.adam_v[name] = std::move(t);
        } else {
            throw std::runtime_error("unknown tensor role '" + role + "' in " + path);
        }
    }
    return ckpt;
}

} // namespace svskit
