#pragma once

#include <vector>

#include "semsteg/channel.hpp"
#include "semsteg/layers.hpp"
#include "semsteg/optim.hpp"

namespace semsteg {

struct CodecConfig {
    int C = 1, H = 32, W = 32;   // image
    int c = 8, h = 8, w = 8;     // latent
    double train_snr_db = 10.0;
    int epochs = 30;
    double lr = 2e-3;
    int batch = 16;

    void validate() const;
    std::vector<int> image_shape() const { return {C, H, W}; }
    std::vector<int> feature_shape() const { return {c, h, w}; }
};

// Semantic encoder/decoder pair. Encoder compresses an image to
// power-normalized channel symbols; decoder maps (possibly noisy) symbols back
// to an image through a sigmoid output.
struct CodecModel {
    CodecConfig cfg;
    Conv2d e1, e2, e3;
    ConvT2d d1, d2, d3;

    CodecModel() = default;
    CodecModel(const CodecConfig& config, Rng& rng);

    Tape::Var encode(Tape& t, Tape::Var image) const;
    Tape::Var decode(Tape& t, Tape::Var features) const;

    // value-only convenience paths
    Tensor encode(const Tensor& image) const;
    Tensor decode(const Tensor& features) const;

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> encoder_parameters();
    std::vector<Parameter*> decoder_parameters();
};

// Unit-mean-square scaling; rejects all-zero input.
Tensor power_normalize(const Tensor& features);

struct TrainResult {
    std::vector<double> loss_history;  // mean loss per epoch
    long steps = 0;
};

// Trains through an AWGN noise layer at cfg.train_snr_db, minimizing per-pixel
// MSE. Deterministic for a fixed rng seed.
TrainResult train_codec(CodecModel& model, const std::vector<Tensor>& dataset,
                        Rng& rng);

CodecModel make_trained_codec(const CodecConfig& cfg, const std::vector<Tensor>& dataset,
                              Rng& rng, TrainResult* result = nullptr);

}  // namespace semsteg
