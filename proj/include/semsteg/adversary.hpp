#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "semsteg/stego.hpp"

namespace semsteg {

enum class AttackerMode { glass_box, closed_box };

// Query-only access to the legitimate encoder (image -> features).
using EncodeOracle = std::function<Tensor(const Tensor&)>;

// What the attacker is allowed to see. Closed-box attackers get only the
// oracle and their own data; they never hold model parameters.
struct AttackerKnowledge {
    AttackerMode mode = AttackerMode::closed_box;
    const CodecModel* codec = nullptr;          // glass-box only
    EncodeOracle oracle;                        // closed-box only
    std::vector<Tensor> attacker_dataset;       // closed-box only

    static AttackerKnowledge glass_box(const CodecModel& codec);
    static AttackerKnowledge closed_box(EncodeOracle oracle, std::vector<Tensor> dataset);
};

// Eavesdropper applies the stolen legitimate decoder to intercepted features.
Tensor naive_decode(const Tensor& intercepted, const AttackerKnowledge& knowledge);

// Model-inversion surrogate: a decoder-shaped net trained on (oracle(x), x).
struct SurrogateDecoder {
    CodecConfig cfg;
    ConvT2d d1, d2, d3;

    SurrogateDecoder() = default;
    SurrogateDecoder(const CodecConfig& config, Rng& rng);

    Tape::Var decode(Tape& t, Tape::Var features);
    Tensor decode(const Tensor& features) const;
    std::vector<Parameter*> parameters();
};

struct InversionConfig {
    int epochs = 40;
    double lr = 2e-3;
    int batch = 16;
};

SurrogateDecoder train_inversion_attacker(const AttackerKnowledge& knowledge,
                                          const CodecConfig& feature_cfg, Rng& rng,
                                          InversionConfig cfg = {},
                                          std::vector<double>* loss_history = nullptr);

// Stego-vs-cover detector over received features. Same classifier shape as
// the training-time feature discriminator, but always trained fresh against a
// frozen stego model.
struct Steganalyzer {
    FeatureDisc net;

    Steganalyzer() = default;
    Steganalyzer(int c, int h, int w, int width, Rng& rng) : net("steganalyzer", c, h, w, width, rng) {}

    double score(const Tensor& features) const;  // probability of "stego"
    std::vector<Parameter*> parameters();
};

struct SteganalyzerConfig {
    int epochs = 30;
    double lr = 2e-3;
    int batch = 16;
    int width = 16;
};

struct SteganalyzerResult {
    Steganalyzer model;
    double test_auc = 0.0;
};

// BCE training, labels 1 = stego, 0 = cover; seeded 80/20 train/test split.
SteganalyzerResult train_steganalyzer(const std::vector<Tensor>& cover_features,
                                      const std::vector<Tensor>& stego_features, Rng& rng,
                                      SteganalyzerConfig cfg = {});

// Mann-Whitney AUC: fraction of (pos, neg) pairs with pos > neg, ties 0.5.
double auc(const std::vector<double>& scores_positive, const std::vector<double>& scores_negative);

}  // namespace semsteg
