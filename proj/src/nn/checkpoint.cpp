#include "prsans/nn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "prsans/errors.hpp"

namespace prsans::nn {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'S', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian f32; big-endian hosts need byte swaps");

std::string padding_name(PaddingMode m) {
    return m == PaddingMode::periodic ? "periodic" : "symmetric";
}

PaddingMode padding_from(const std::string& s) {
    if (s == "periodic") return PaddingMode::periodic;
    if (s == "symmetric") return PaddingMode::symmetric;
    throw ConfigError("checkpoint", "unknown padding mode '" + s + "'");
}

}  // namespace

void save_checkpoint(const ResidualDenoiser& net, const std::string& path) {
    net.validate();
    nlohmann::json header;
    header["arch"] = {{"depth", net.arch.depth},
                      {"channels", net.arch.channels},
                      {"kernel_size", net.arch.kernel_size},
                      {"padding", padding_name(net.arch.padding)}};
    header["provenance"] = provenance_name(net.provenance, net.adapted_pairs);
    header["sigma_train"] = net.sigma_train;
    header["seed"] = net.init_seed;
    header["param_count"] = net.param_count();
    const std::string htext = header.dump();

    const auto params = net.flat_params();
    std::vector<float> payload(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) payload[i] = static_cast<float>(params[i]);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(path, "cannot open for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    const std::uint32_t hlen = static_cast<std::uint32_t>(htext.size());
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw FileError(path, "write failed");
}

ResidualDenoiser load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, "cannot open");
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("checkpoint", path + ": bad magic");
    std::uint32_t version = 0, hlen = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || version != kVersion) throw ConfigError("checkpoint", path + ": bad version");
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw ConfigError("checkpoint", path + ": truncated header");

    ResidualDenoiser net;
    std::size_t expect = 0;
    try {
        const auto header = nlohmann::json::parse(htext);
        const auto& arch = header.at("arch");
        net.arch.depth = arch.at("depth").get<int>();
        net.arch.channels = arch.at("channels").get<int>();
        net.arch.kernel_size = arch.at("kernel_size").get<int>();
        net.arch.padding = padding_from(arch.at("padding").get<std::string>());
        net.sigma_train = header.at("sigma_train").get<double>();
        net.init_seed = header.at("seed").get<std::uint64_t>();
        expect = header.at("param_count").get<std::size_t>();

        const std::string prov = header.at("provenance").get<std::string>();
        if (prov == "zero_start") {
            net.provenance = Provenance::zero_start;
        } else if (prov == "pretrained") {
            net.provenance = Provenance::pretrained;
        } else if (prov.rfind("adapted(", 0) == 0 && prov.back() == ')') {
            net.provenance = Provenance::adapted;
            net.adapted_pairs = std::stoi(prov.substr(8, prov.size() - 9));
        } else {
            throw ConfigError("checkpoint", path + ": unknown provenance '" + prov + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("checkpoint", path + ": bad header: " + e.what());
    }

    ResidualDenoiser shaped = ResidualDenoiser::zeros(net.arch);
    shaped.sigma_train = net.sigma_train;
    shaped.init_seed = net.init_seed;
    shaped.provenance = net.provenance;
    shaped.adapted_pairs = net.adapted_pairs;
    if (shaped.param_count() != expect)
        throw ConfigError("checkpoint", path + ": param_count does not match architecture");

    std::vector<float> payload(expect);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!in) throw ConfigError("checkpoint", path + ": truncated payload");
    char extra = 0;
    if (in.read(&extra, 1).gcount() != 0)
        throw ConfigError("checkpoint", path + ": trailing bytes after payload");

    std::vector<double> params(payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i) {
        if (!std::isfinite(payload[i]))
            throw ConfigError("checkpoint", path + ": non-finite parameter");
        params[i] = static_cast<double>(payload[i]);
    }
    shaped.set_flat_params(params);
    return shaped;
}

}  // namespace prsans::nn
