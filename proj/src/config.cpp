#include "semsteg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "semsteg/errors.hpp"

namespace semsteg {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("bad value for '") + key + "'");
        }
    }
}

}  // namespace

void DatasetConfig::validate() const {
    if (source != "synthetic" && source != "directory")
        throw ConfigError("dataset.source must be 'synthetic' or 'directory'");
    if (source == "directory" && dir.empty())
        throw ConfigError("dataset.dir required when source is 'directory'");
    if (size < 1) throw ConfigError("dataset.size must be >= 1");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    check_keys(j, {"codec", "stego", "channel", "adversary", "dataset", "seeds", "output_dir"},
               "config");

    if (j.contains("codec")) {
        const auto& c = j.at("codec");
        check_keys(c,
                   {"channels", "height", "width", "feat_channels", "feat_height", "feat_width",
                    "train_snr_db", "epochs", "lr", "batch"},
                   "codec");
        get_if(c, "channels", cfg.codec.C);
        get_if(c, "height", cfg.codec.H);
        get_if(c, "width", cfg.codec.W);
        get_if(c, "feat_channels", cfg.codec.c);
        get_if(c, "feat_height", cfg.codec.h);
        get_if(c, "feat_width", cfg.codec.w);
        get_if(c, "train_snr_db", cfg.codec.train_snr_db);
        get_if(c, "epochs", cfg.codec.epochs);
        get_if(c, "lr", cfg.codec.lr);
        get_if(c, "batch", cfg.codec.batch);
    }

    if (j.contains("stego")) {
        const auto& s = j.at("stego");
        check_keys(s,
                   {"variant", "strategy", "lambda_conceal", "lambda_reveal", "lambda_privacy",
                    "lambda_adv", "n_blocks", "width", "disc_width", "dwt_preprocess", "epochs",
                    "lr", "batch"},
                   "stego");
        if (s.contains("variant")) cfg.stego.variant = stego_variant_from_string(s.at("variant"));
        if (s.contains("strategy"))
            cfg.stego.strategy = stego_strategy_from_string(s.at("strategy"));
        get_if(s, "lambda_conceal", cfg.stego.weights.conceal);
        get_if(s, "lambda_reveal", cfg.stego.weights.reveal);
        get_if(s, "lambda_privacy", cfg.stego.weights.privacy);
        get_if(s, "lambda_adv", cfg.stego.weights.adv);
        get_if(s, "n_blocks", cfg.stego.n_blocks);
        get_if(s, "width", cfg.stego.width);
        get_if(s, "disc_width", cfg.stego.disc_width);
        get_if(s, "dwt_preprocess", cfg.stego.dwt_preprocess);
        get_if(s, "epochs", cfg.stego.epochs);
        get_if(s, "lr", cfg.stego.lr);
        get_if(s, "batch", cfg.stego.batch);
    }

    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        check_keys(c, {"kind", "snr_db", "eve_snr_db", "equalize"}, "channel");
        if (c.contains("kind")) cfg.channel.kind = channel_kind_from_string(c.at("kind"));
        get_if(c, "snr_db", cfg.channel.snr_db);
        bool has_eve = c.contains("eve_snr_db");
        get_if(c, "eve_snr_db", cfg.channel.eve_snr_db);
        if (!has_eve) cfg.channel.eve_snr_db = cfg.channel.snr_db;
        get_if(c, "equalize", cfg.channel.equalize);
    }

    if (j.contains("adversary")) {
        const auto& a = j.at("adversary");
        check_keys(a,
                   {"attacker_seed", "attacker_size", "surrogate_epochs", "steganalyzer_epochs",
                    "steganalyzer_size", "observe_pre_channel"},
                   "adversary");
        get_if(a, "attacker_seed", cfg.adversary.attacker_seed);
        get_if(a, "attacker_size", cfg.adversary.attacker_size);
        get_if(a, "surrogate_epochs", cfg.adversary.surrogate_epochs);
        get_if(a, "steganalyzer_epochs", cfg.adversary.steganalyzer_epochs);
        get_if(a, "steganalyzer_size", cfg.adversary.steganalyzer_size);
        get_if(a, "observe_pre_channel", cfg.adversary.observe_pre_channel);
    }

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        check_keys(d, {"source", "size", "seed", "dir"}, "dataset");
        get_if(d, "source", cfg.dataset.source);
        get_if(d, "size", cfg.dataset.size);
        get_if(d, "seed", cfg.dataset.seed);
        get_if(d, "dir", cfg.dataset.dir);
    }

    get_if(j, "seeds", cfg.seeds);
    get_if(j, "output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    ExperimentConfig cfg = from_json(j);
    if (const char* env = std::getenv("SEMSTEG_SEED")) {
        try {
            cfg.seeds = {std::stoull(env)};
        } catch (...) {
            throw ConfigError("SEMSTEG_SEED is not a valid integer");
        }
    }
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {
        {"codec",
         {{"channels", codec.C},
          {"height", codec.H},
          {"width", codec.W},
          {"feat_channels", codec.c},
          {"feat_height", codec.h},
          {"feat_width", codec.w},
          {"train_snr_db", codec.train_snr_db},
          {"epochs", codec.epochs},
          {"lr", codec.lr},
          {"batch", codec.batch}}},
        {"stego",
         {{"variant", to_string(stego.variant)},
          {"strategy", to_string(stego.strategy)},
          {"lambda_conceal", stego.weights.conceal},
          {"lambda_reveal", stego.weights.reveal},
          {"lambda_privacy", stego.weights.privacy},
          {"lambda_adv", stego.weights.adv},
          {"n_blocks", stego.n_blocks},
          {"width", stego.width},
          {"disc_width", stego.disc_width},
          {"dwt_preprocess", stego.dwt_preprocess},
          {"epochs", stego.epochs},
          {"lr", stego.lr},
          {"batch", stego.batch}}},
        {"channel",
         {{"kind", to_string(channel.kind)},
          {"snr_db", channel.snr_db},
          {"eve_snr_db", channel.eve_snr_db},
          {"equalize", channel.equalize}}},
        {"adversary",
         {{"attacker_seed", adversary.attacker_seed},
          {"attacker_size", adversary.attacker_size},
          {"surrogate_epochs", adversary.surrogate_epochs},
          {"steganalyzer_epochs", adversary.steganalyzer_epochs},
          {"steganalyzer_size", adversary.steganalyzer_size},
          {"observe_pre_channel", adversary.observe_pre_channel}}},
        {"dataset",
         {{"source", dataset.source},
          {"size", dataset.size},
          {"seed", dataset.seed},
          {"dir", dataset.dir}}},
        {"seeds", seeds},
        {"output_dir", output_dir}};
}

void ExperimentConfig::validate() const {
    codec.validate();
    stego.validate();
    dataset.validate();
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (!std::isfinite(channel.snr_db) || !std::isfinite(channel.eve_snr_db))
        throw ConfigError("channel SNR must be finite");
}

}  // namespace semsteg
