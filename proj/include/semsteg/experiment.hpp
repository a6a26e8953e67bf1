#pragma once

#include <string>
#include <vector>

#include "semsteg/config.hpp"

namespace semsteg {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "semsteg 0.1.0";

struct SeedMetrics {
    std::uint64_t seed = 0;
    // legitimate receiver
    double cover_psnr = 0, cover_ssim = 0;
    double secret_psnr = 0, secret_ssim = 0;
    // eavesdropper (naive decode of the eavesdropper tap)
    double eve_cover_psnr = 0, eve_secret_psnr = 0;
    // detectability
    double steganalyzer_auc = 0;
    // bookkeeping
    long params_codec = 0, params_stego = 0, params_generator = 0, params_discriminators = 0;
    double codec_train_seconds = 0, stego_train_seconds = 0;
    int codec_epochs = 0, stego_epochs = 0;
    long codec_steps = 0, stego_steps = 0;
    long cost_proxy = 0;  // optimizer steps weighted by parameters updated
    double secret_rate_ratio = 0;  // secret channels / transmitted channels
    double codec_noiseless_psnr = 0;  // decode(encode(x)) regression value
    long deep_fades = 0;
    double max_power_dev = 0;
    std::uint64_t dataset_checksum = 0;

    nlohmann::json to_json() const;
};

struct MetricsReport {
    nlohmann::json config_echo;
    std::vector<SeedMetrics> per_seed;
    SeedMetrics aggregate;  // medians over seeds (seed field = 0)

    nlohmann::json to_json() const;
};

// Training images for a config: synthetic generation or a NetPBM directory;
// always 2*dataset.size images (train half plus cover/secret pair half).
std::vector<Tensor> load_dataset(const ExperimentConfig& cfg);

// Full Fig-1 pipeline for one config: per seed, train codec and stego, then
// evaluate on a held-out synthetic test set of 64 pairs; writes report.json
// and sample reconstructions under cfg.output_dir.
MetricsReport run_experiment(const ExperimentConfig& cfg);

struct Table2Report {
    nlohmann::json config_echo;
    std::vector<MetricsReport> variants;  // cnn, gan, inn order
    bool params_ordering = false;          // cnn < inn < gan
    bool secret_psnr_ordering = false;     // inn highest (median)
    bool auc_ordering = false;             // gan lowest (median)
    bool cost_ordering = false;            // cnn lowest (median cost proxy)
    bool budgets_matched = false;          // identical training-sample sequences

    bool all_pass() const {
        return params_ordering && secret_psnr_ordering && auc_ordering && cost_ordering;
    }
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// Runs all three variants under matched budgets (cnn/two-stage, gan/adversarial,
// inn/two-stage) and emits table2.json + table2.csv under cfg.output_dir.
Table2Report compare(const ExperimentConfig& cfg);

// report.json(s) in a directory -> one CSV (numeric fields at 12 significant
// digits); format "json" merges them into one array.
std::string collect_reports(const std::string& dir, const std::string& format);

double median(std::vector<double> values);

// Held-out evaluation of already-trained models (fills the quality, adversary
// and audit fields of SeedMetrics; training bookkeeping is left untouched).
SeedMetrics evaluate_models(const ExperimentConfig& cfg, CodecModel& codec, StegoModel& stego,
                            std::uint64_t seed, const std::string& samples_dir);

// Checkpoint bundles: codec-only or codec+stego, with the experiment config
// echoed in the header.
void save_model_bundle(const ExperimentConfig& cfg, CodecModel& codec, StegoModel* stego,
                       const std::string& path);

struct ModelBundle {
    ExperimentConfig cfg;
    CodecModel codec;
    StegoModel stego;
    bool has_stego = false;
};

// `expected` guards against loading a checkpoint whose shapes conflict with
// the evaluation config; pass nullptr to accept whatever the file declares.
ModelBundle load_model_bundle(const std::string& path, const ExperimentConfig* expected = nullptr);

}  // namespace semsteg
