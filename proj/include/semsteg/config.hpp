#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semsteg/adversary.hpp"
#include "semsteg/channel.hpp"
#include "semsteg/codec.hpp"
#include "semsteg/stego.hpp"

#include "json.hpp"

namespace semsteg {

struct DatasetConfig {
    std::string source = "synthetic";  // synthetic | directory
    int size = 200;
    std::uint64_t seed = 7;
    std::string dir;  // when source == directory

    void validate() const;
};

struct AdversaryConfig {
    std::uint64_t attacker_seed = 99;
    int attacker_size = 96;
    int surrogate_epochs = 40;
    int steganalyzer_epochs = 30;
    int steganalyzer_size = 96;
    bool observe_pre_channel = false;  // ablation: tap before the channel
};

// Whole-experiment configuration. Parsing is strict: unknown keys anywhere in
// the JSON are rejected, every field has a default (see docs/config.md).
struct ExperimentConfig {
    CodecConfig codec;
    StegoConfig stego;
    ChannelConfig channel;
    AdversaryConfig adversary;
    DatasetConfig dataset;
    std::vector<std::uint64_t> seeds = {42};
    std::string output_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    // Reads a config file; SEMSTEG_SEED in the environment overrides `seeds`.
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;

    void validate() const;
};

}  // namespace semsteg
