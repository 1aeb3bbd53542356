#include "adadrug/config.hpp"

#include "adadrug/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace adadrug {

namespace {

const std::set<std::string>& train_keys() {
    static const std::set<std::string> keys{
        "input_dim",   "latent_dim",          "encoder_hidden", "decoder_hidden", "generator_hidden",
        "discriminator_hidden", "predictor_hidden", "generator_output", "learning_rate", "beta1", "beta2",
        "epsilon",     "batch_size",          "epochs",         "grl_schedule",   "grl_lambda",
        "grl_warmup_fraction", "sampler",     "smote_k",        "mda",            "ind",
        "awg",         "seed",                "holdout_fraction"};
    return keys;
}

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

double get_number(const Json& j, const std::string& ptr) {
    if (!j.is_number()) throw ValidationError(ptr, "expected a number");
    return j.get<double>();
}

std::size_t get_count(const Json& j, const std::string& ptr) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(ptr, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::uint64_t get_seed(const Json& j, const std::string& ptr) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw ValidationError(ptr, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

bool get_bool(const Json& j, const std::string& ptr) {
    if (!j.is_boolean()) throw ValidationError(ptr, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& ptr) {
    if (!j.is_string()) throw ValidationError(ptr, "expected a string");
    return j.get<std::string>();
}

std::vector<std::size_t> get_widths(const Json& j, const std::string& ptr) {
    if (!j.is_array()) throw ValidationError(ptr, "expected an array of layer widths");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = ptr + "/" + std::to_string(i);
        const std::size_t w = get_count(j[i], p);
        if (w == 0) throw ValidationError(p, "layer widths must be positive");
        out.push_back(w);
    }
    return out;
}

void reject_unknown(const Json& j, const std::string& ptr, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw ValidationError(child(ptr, it.key()), "unknown key '" + it.key() + "'");
        }
    }
}

void require_object(const Json& j, const std::string& ptr) {
    if (!j.is_object()) throw ValidationError(ptr.empty() ? "/" : ptr, "expected an object");
}

}  // namespace

Json train_config_to_json(const TrainConfig& c) {
    Json j;
    j["input_dim"] = c.input_dim;
    j["latent_dim"] = c.latent_dim;
    j["encoder_hidden"] = c.encoder_hidden;
    j["decoder_hidden"] = c.decoder_hidden;
    j["generator_hidden"] = c.generator_hidden.empty() ? std::vector<std::size_t>{c.latent_dim} : c.generator_hidden;
    j["discriminator_hidden"] = c.discriminator_hidden;
    j["predictor_hidden"] = c.predictor_hidden;
    j["generator_output"] = activation_name(c.generator_output);
    j["learning_rate"] = c.learning_rate;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["epsilon"] = c.epsilon;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["grl_schedule"] = grl_schedule_name(c.grl_schedule);
    j["grl_lambda"] = c.grl_lambda;
    j["grl_warmup_fraction"] = c.grl_warmup_fraction;
    j["sampler"] = sampler_name(c.sampler);
    j["smote_k"] = c.smote_k;
    j["mda"] = c.flags.mda;
    j["ind"] = c.flags.ind;
    j["awg"] = c.flags.awg;
    j["seed"] = c.seed;
    j["holdout_fraction"] = c.holdout_fraction;
    return j;
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    auto has = [&](const char* k) { return j.contains(k); };
    auto at = [&](const char* k) -> const Json& { return j.at(k); };
    auto ptr = [](const char* k) { return std::string("/") + k; };
    if (has("input_dim")) c.input_dim = get_count(at("input_dim"), ptr("input_dim"));
    if (has("latent_dim")) c.latent_dim = get_count(at("latent_dim"), ptr("latent_dim"));
    if (has("encoder_hidden")) c.encoder_hidden = get_widths(at("encoder_hidden"), ptr("encoder_hidden"));
    if (has("decoder_hidden")) c.decoder_hidden = get_widths(at("decoder_hidden"), ptr("decoder_hidden"));
    if (has("generator_hidden")) c.generator_hidden = get_widths(at("generator_hidden"), ptr("generator_hidden"));
    if (has("discriminator_hidden"))
        c.discriminator_hidden = get_widths(at("discriminator_hidden"), ptr("discriminator_hidden"));
    if (has("predictor_hidden")) c.predictor_hidden = get_widths(at("predictor_hidden"), ptr("predictor_hidden"));
    if (has("generator_output")) {
        try {
            c.generator_output = parse_activation(get_string(at("generator_output"), ptr("generator_output")));
        } catch (const Error& e) {
            throw ValidationError("/generator_output", e.what());
        }
    }
    if (has("learning_rate")) c.learning_rate = get_number(at("learning_rate"), ptr("learning_rate"));
    if (has("beta1")) c.beta1 = get_number(at("beta1"), ptr("beta1"));
    if (has("beta2")) c.beta2 = get_number(at("beta2"), ptr("beta2"));
    if (has("epsilon")) c.epsilon = get_number(at("epsilon"), ptr("epsilon"));
    if (has("batch_size")) c.batch_size = get_count(at("batch_size"), ptr("batch_size"));
    if (has("epochs")) c.epochs = get_count(at("epochs"), ptr("epochs"));
    if (has("grl_schedule")) {
        try {
            c.grl_schedule = parse_grl_schedule(get_string(at("grl_schedule"), ptr("grl_schedule")));
        } catch (const ContractError& e) {
            throw ValidationError("/grl_schedule", e.what());
        }
    }
    if (has("grl_lambda")) c.grl_lambda = get_number(at("grl_lambda"), ptr("grl_lambda"));
    if (has("grl_warmup_fraction"))
        c.grl_warmup_fraction = get_number(at("grl_warmup_fraction"), ptr("grl_warmup_fraction"));
    if (has("sampler")) {
        try {
            c.sampler = parse_sampler(get_string(at("sampler"), ptr("sampler")));
        } catch (const ContractError& e) {
            throw ValidationError("/sampler", e.what());
        }
    }
    if (has("smote_k")) c.smote_k = get_count(at("smote_k"), ptr("smote_k"));
    if (has("mda")) c.flags.mda = get_bool(at("mda"), ptr("mda"));
    if (has("ind")) c.flags.ind = get_bool(at("ind"), ptr("ind"));
    if (has("awg")) c.flags.awg = get_bool(at("awg"), ptr("awg"));
    if (has("seed")) c.seed = get_seed(at("seed"), ptr("seed"));
    if (has("holdout_fraction")) c.holdout_fraction = get_number(at("holdout_fraction"), ptr("holdout_fraction"));
    if (c.generator_hidden.empty()) c.generator_hidden = {c.latent_dim};
    c.validate();
    return c;
}

RunConfig parse_config(const Json& j) {
    require_object(j, "");
    std::set<std::string> allowed = train_keys();
    allowed.insert({"format_version", "sources", "target", "gene_selection", "max_zero_frac", "reference_samples",
                    "output_dir"});
    reject_unknown(j, "", allowed);

    if (!j.contains("format_version")) {
        throw ValidationError("/format_version", "required field missing");
    }
    RunConfig c;
    if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kConfigVersion) {
        throw ValidationError("/format_version", "unsupported version (expected " + std::to_string(kConfigVersion) + ")");
    }
    c.train = train_config_from_json(j);

    if (j.contains("sources")) {
        const Json& s = j["sources"];
        if (!s.is_array()) throw ValidationError("/sources", "expected an array");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto p = "/sources/" + std::to_string(i);
            require_object(s[i], p);
            reject_unknown(s[i], p, {"expression", "labels"});
            if (!s[i].contains("expression")) throw ValidationError(p + "/expression", "required field missing");
            if (!s[i].contains("labels")) throw ValidationError(p + "/labels", "required field missing");
            c.sources.push_back({get_string(s[i]["expression"], p + "/expression"),
                                 get_string(s[i]["labels"], p + "/labels")});
        }
    }
    if (j.contains("target")) {
        const Json& t = j["target"];
        require_object(t, "/target");
        reject_unknown(t, "/target", {"expression", "labels"});
        if (t.contains("expression")) c.target_expression = get_string(t["expression"], "/target/expression");
        if (t.contains("labels")) c.target_labels = get_string(t["labels"], "/target/labels");
    }
    if (j.contains("gene_selection")) {
        const Json& g = j["gene_selection"];
        require_object(g, "/gene_selection");
        reject_unknown(g, "/gene_selection", {"method", "n_top", "file", "lfc_min", "p_max"});
        if (g.contains("method")) {
            c.genes.method = get_string(g["method"], "/gene_selection/method");
            if (c.genes.method != "none" && c.genes.method != "hvg" && c.genes.method != "deg" &&
                c.genes.method != "file") {
                throw ValidationError("/gene_selection/method", "must be one of none, hvg, deg, file");
            }
        }
        if (g.contains("n_top")) {
            c.genes.n_top = get_count(g["n_top"], "/gene_selection/n_top");
            if (c.genes.n_top == 0) throw ValidationError("/gene_selection/n_top", "must be at least 1");
        }
        if (g.contains("file")) c.genes.file = get_string(g["file"], "/gene_selection/file");
        if (g.contains("lfc_min")) c.genes.lfc_min = get_number(g["lfc_min"], "/gene_selection/lfc_min");
        if (g.contains("p_max")) c.genes.p_max = get_number(g["p_max"], "/gene_selection/p_max");
        if (c.genes.method == "file" && c.genes.file.empty()) {
            throw ValidationError("/gene_selection/file", "required when method is 'file'");
        }
    }
    if (j.contains("max_zero_frac") && !j["max_zero_frac"].is_null()) {
        const double f = get_number(j["max_zero_frac"], "/max_zero_frac");
        if (f < 0.0 || f > 1.0) throw ValidationError("/max_zero_frac", "must lie in [0, 1]");
        c.max_zero_frac = f;
    }
    if (j.contains("reference_samples")) c.reference_samples = get_count(j["reference_samples"], "/reference_samples");
    if (j.contains("output_dir")) c.output_dir = get_string(j["output_dir"], "/output_dir");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("/", "cannot open config " + path.string());
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("/", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

Json config_to_json(const RunConfig& c) {
    Json j;
    j["format_version"] = c.format_version;
    const Json train = train_config_to_json(c.train);
    for (const auto& [k, v] : train.items()) j[k] = v;
    j["sources"] = Json::array();
    for (const auto& s : c.sources) {
        j["sources"].push_back({{"expression", s.expression.string()}, {"labels", s.labels.string()}});
    }
    j["target"] = {{"expression", c.target_expression.string()}};
    if (!c.target_labels.empty()) j["target"]["labels"] = c.target_labels.string();
    j["gene_selection"] = {{"method", c.genes.method},
                           {"n_top", c.genes.n_top},
                           {"file", c.genes.file.string()},
                           {"lfc_min", c.genes.lfc_min},
                           {"p_max", c.genes.p_max}};
    j["max_zero_frac"] = c.max_zero_frac ? Json(*c.max_zero_frac) : Json(nullptr);
    j["reference_samples"] = c.reference_samples;
    j["output_dir"] = c.output_dir.string();
    return j;
}

void write_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << config_to_json(cfg).dump(2) << '\n';
}

std::string config_hash(const Json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace adadrug
