#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "semsteg/codec.hpp"

namespace semsteg {

enum class StegoVariant { cnn, gan, inn };
enum class StegoStrategy { two_stage, joint, adversarial };

StegoVariant stego_variant_from_string(const std::string& s);
StegoStrategy stego_strategy_from_string(const std::string& s);
std::string to_string(StegoVariant v);
std::string to_string(StegoStrategy s);

struct StegoLossWeights {
    double conceal = 1.0;
    double reveal = 1.0;
    double privacy = 0.25;
    double adv = 0.3;

    void validate() const;
};

struct StegoConfig {
    StegoVariant variant = StegoVariant::inn;
    StegoStrategy strategy = StegoStrategy::two_stage;
    StegoLossWeights weights;
    int n_blocks = 3;
    int width = 16;
    int disc_width = 24;
    bool dwt_preprocess = false;
    int epochs = 25;
    double lr = 1e-3;
    int batch = 16;

    void validate() const;
};

// c-channel -> c-channel conv stack; the final layer starts at zero so the
// surrounding coupling/residual structure is the identity at init.
struct ConvSubnet {
    Conv2d c1, c2;

    ConvSubnet() = default;
    ConvSubnet(const std::string& name, int c, int width, Rng& rng)
        : c1(name + ".c1", c, width, 3, 1, 1, rng),
          c2(name + ".c2", width, c, 3, 1, 1, rng, /*zero_init=*/true) {}

    Tape::Var apply(Tape& t, Tape::Var x) { return c2.apply(t, t.leaky_relu(c1.apply(t, x), 0.2)); }
    void collect(std::vector<Parameter*>& out) {
        out.push_back(&c1.w); out.push_back(&c1.b); out.push_back(&c2.w); out.push_back(&c2.b);
    }
};

// Feature-space classifier: c-channel input -> probability the sample is a
// cover (real) transmission.
struct FeatureDisc {
    Conv2d c1, c2;
    Dense head;

    FeatureDisc() = default;
    FeatureDisc(const std::string& name, int c, int h, int w, int width, Rng& rng);

    Tape::Var apply(Tape& t, Tape::Var x);
    void collect(std::vector<Parameter*>& out);
};

// Image-space classifier over decoded reconstructions.
struct ImageDisc {
    Conv2d c1, c2, c3;
    Dense head;

    ImageDisc() = default;
    ImageDisc(const std::string& name, int C, int H, int W, int width, Rng& rng);

    Tape::Var apply(Tape& t, Tape::Var x);
    void collect(std::vector<Parameter*>& out);
};

struct CnnStego {
    Conv2d em1, em2, em3;  // embed: 2c -> c, residual from cover, final zero-init
    Conv2d ex1, ex2, ex3;  // extract: c -> 2c

    CnnStego() = default;
    CnnStego(int c, int width, Rng& rng);

    Tape::Var embed_prenorm(Tape& t, Tape::Var cover_feat, Tape::Var secret_feat);
    std::pair<Tape::Var, Tape::Var> extract(Tape& t, Tape::Var noisy_stego, int c);
    void collect(std::vector<Parameter*>& out);
};

struct GanStego {
    CnnStego gen;       // generator = embed/extract pair
    FeatureDisc disc_feat;
    ImageDisc disc_img;

    GanStego() = default;
    GanStego(int c, int h, int w, int C, int H, int W, int width, int disc_width, Rng& rng);

    void collect(std::vector<Parameter*>& out);          // everything
    void collect_generator(std::vector<Parameter*>& out);
    void collect_discriminators(std::vector<Parameter*>& out);
};

struct CouplingBlock {
    ConvSubnet phi, psi;
};

// Additive coupling stack over the 2c-channel state (cover || secret).
// Forward: p1' = p1 + phi(p2); p2' = p2 + psi(p1'). Inverse is exact
// subtraction in reverse block order with the same parameters.
struct InnStego {
    std::vector<CouplingBlock> blocks;

    InnStego() = default;
    InnStego(int c, int width, int n_blocks, Rng& rng);

    std::pair<Tape::Var, Tape::Var> forward(Tape& t, Tape::Var cover_feat, Tape::Var secret_feat);
    std::pair<Tape::Var, Tape::Var> inverse(Tape& t, Tape::Var stego, Tape::Var aux);
    void collect(std::vector<Parameter*>& out);
};

// A trained embed/extract pair plus everything needed to run it.
struct StegoModel {
    StegoConfig cfg;
    CodecConfig codec_cfg;
    std::unique_ptr<CnnStego> cnn;
    std::unique_ptr<GanStego> gan;
    std::unique_ptr<InnStego> inn;
    std::unique_ptr<FeatureDisc> aux_disc;  // adversarial strategy on cnn/inn variants

    StegoModel() = default;
    StegoModel(const StegoConfig& scfg, const CodecConfig& ccfg, Rng& rng);
    StegoModel(StegoModel&&) = default;
    StegoModel& operator=(StegoModel&&) = default;

    // tape-level pipeline pieces (used by training)
    std::pair<Tape::Var, Tape::Var> embed_prenorm(Tape& t, Tape::Var cover_feat,
                                                  Tape::Var secret_feat);  // (stego_pre, aux or -1)
    std::pair<Tape::Var, Tape::Var> extract(Tape& t, Tape::Var noisy_stego, Tape::Var aux_sample);

    // value-only API
    Tensor embed(const Tensor& cover_feat, const Tensor& secret_feat) const;  // power-normalized
    std::pair<Tensor, Tensor> extract_features(const Tensor& noisy_stego, Rng& aux_rng) const;

    std::vector<Parameter*> parameters();               // all, incl. discriminators
    std::vector<Parameter*> generator_parameters();     // embed/extract path only
    std::vector<Parameter*> discriminator_parameters();
};

// inn_forward / inn_inverse at tensor level (stego returned both raw and
// power-normalized; aux is never transmitted).
struct InnForwardResult {
    Tensor stego;          // power-normalized
    Tensor stego_prenorm;
    Tensor aux;
};
InnForwardResult inn_forward(InnStego& model, const Tensor& cover_feat, const Tensor& secret_feat);
std::pair<Tensor, Tensor> inn_inverse(InnStego& model, const Tensor& received_stego,
                                      const Tensor& aux_sample);

// Non-saturating GAN losses over per-sample scores in (0,1).
std::pair<double, double> adversarial_losses(const std::vector<double>& d_scores_real,
                                             const std::vector<double>& d_scores_fake);

double stego_loss(const Tensor& cover_img, const Tensor& secret_img, const Tensor& cover_rec_img,
                  const Tensor& secret_rec_img, const Tensor& eve_img,
                  const StegoLossWeights& weights, double adv_term);

// Orthonormal single-level Haar transform; bands each (C, H/2, W/2).
struct HaarBands {
    Tensor ll, lh, hl, hh;
};
HaarBands haar_dwt(const Tensor& image);
Tensor inverse_haar_dwt(const HaarBands& bands);

struct HighfreqResult {
    Tensor image;      // detail-only content rescaled into [0,1]
    double ll_mean;    // mean of the dropped low-frequency band (reporting only)
};
HighfreqResult highfreq_preprocess(const Tensor& secret);

struct StegoTrainResult {
    std::vector<double> loss_history;  // per-epoch mean generator-path loss
    long steps = 0;
    long cost_proxy = 0;  // sum over optimizer steps of parameters updated
};

// Trains the stego model (and the codec too, under the joint strategy).
// `adversarial` freezes the codec and alternates one discriminator step per
// generator step.
StegoModel train_stego(const StegoConfig& scfg, CodecModel& codec,
                       const std::vector<std::pair<Tensor, Tensor>>& pairs,
                       const ChannelConfig& channel_cfg, Rng& rng,
                       StegoTrainResult* result = nullptr);

}  // namespace semsteg
