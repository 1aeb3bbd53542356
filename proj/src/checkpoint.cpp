#include "adadrug/config.hpp"
#include "adadrug/error.hpp"
#include "adadrug/train.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace adadrug {

namespace {

constexpr std::array<char, 8> kMagic{'A', 'D', 'A', 'C', 'K', 'P', 'T', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

void put_double(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_double(const char* p) { return std::bit_cast<double>(get_u64(p)); }

Json spec_to_json(const MlpSpec& s) {
    return {{"widths", s.widths}, {"output", activation_name(s.output)}};
}

MlpSpec spec_from_json(const Json& j) {
    MlpSpec s;
    s.widths = j.at("widths").get<std::vector<std::size_t>>();
    s.output = parse_activation(j.at("output").get<std::string>());
    return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model, const TrainConfig& cfg,
                     std::size_t step) {
    Json header;
    header["format_version"] = kCheckpointVersion;
    header["dims"] = {{"genes", model.genes()}, {"latent", model.latent()}};
    header["specs"] = {{"encoder", spec_to_json(model.specs.encoder)},
                       {"decoder", spec_to_json(model.specs.decoder)},
                       {"generator", spec_to_json(model.specs.generator)},
                       {"discriminator", spec_to_json(model.specs.discriminator)},
                       {"predictor", spec_to_json(model.specs.predictor)}};
    header["weighted"] = model.weighted;
    header["seed"] = cfg.seed;
    header["training_step"] = step;
    header["config"] = train_config_to_json(cfg);
    Json blocks = Json::array();
    const auto names = model.parameter_names();
    const auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        blocks.push_back({{"name", names[i]}, {"rows", params[i]->rows()}, {"cols", params[i]->cols()}});
    }
    header["blocks"] = blocks;
    const std::string text = header.dump();

    std::string buf(kMagic.begin(), kMagic.end());
    put_u64(buf, text.size());
    buf += text;
    for (const Matrix* p : params) {
        for (double v : p->values()) put_double(buf, v);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 16 || std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
        throw CheckpointError(path.string() + ": not a checkpoint or unsupported format version");
    }
    const std::uint64_t header_len = get_u64(buf.data() + 8);
    if (header_len > buf.size() - 16) {
        throw CheckpointError(path.string() + ": truncated checkpoint header");
    }
    Json header;
    try {
        header = Json::parse(buf.substr(16, header_len));
    } catch (const nlohmann::json::exception&) {
        throw CheckpointError(path.string() + ": corrupted header, unsupported format version");
    }
    if (!header.contains("format_version") || header["format_version"] != kCheckpointVersion) {
        throw CheckpointError(path.string() + ": unsupported checkpoint format version");
    }

    Checkpoint ck;
    try {
        const Json& s = header.at("specs");
        ck.model.specs = {spec_from_json(s.at("encoder")), spec_from_json(s.at("decoder")),
                          spec_from_json(s.at("generator")), spec_from_json(s.at("discriminator")),
                          spec_from_json(s.at("predictor"))};
        ck.model.specs.validate();
        ck.model.weighted = header.at("weighted").get<bool>();
        ck.step = header.at("training_step").get<std::size_t>();
        ck.config = train_config_from_json(header.at("config"));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(path.string() + ": malformed header: " + e.what());
    } catch (const Error& e) {
        throw CheckpointError(path.string() + ": malformed header: " + e.what());
    }

    // Shapes follow from the specs; init with zeros, then overwrite from the blocks.
    ModelBundle shaped = init_params(ck.model.specs, 0);
    shaped.weighted = ck.model.weighted;
    ck.model = std::move(shaped);

    const Json& blocks = header.at("blocks");
    auto params = ck.model.parameters();
    if (blocks.size() != params.size()) {
        throw CheckpointError(path.string() + ": block count does not match the architecture");
    }
    std::size_t offset = 16 + header_len;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (blocks[i].at("rows").get<std::size_t>() != params[i]->rows() ||
            blocks[i].at("cols").get<std::size_t>() != params[i]->cols()) {
            throw CheckpointError(path.string() + ": block " + std::to_string(i) + " has the wrong shape");
        }
        auto values = params[i]->values();
        if (buf.size() - offset < values.size() * 8) {
            throw CheckpointError(path.string() + ": truncated parameter data");
        }
        for (double& v : values) {
            v = get_double(buf.data() + offset);
            offset += 8;
        }
    }
    if (offset != buf.size()) {
        throw CheckpointError(path.string() + ": trailing bytes after parameter data");
    }
    return ck;
}

}  // namespace adadrug
