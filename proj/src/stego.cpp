#include "semsteg/stego.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semsteg/errors.hpp"

namespace semsteg {

StegoVariant stego_variant_from_string(const std::string& s) {
    if (s == "cnn") return StegoVariant::cnn;
    if (s == "gan") return StegoVariant::gan;
    if (s == "inn") return StegoVariant::inn;
    throw ConfigError("unknown stego variant '" + s + "'");
}

StegoStrategy stego_strategy_from_string(const std::string& s) {
    if (s == "two-stage") return StegoStrategy::two_stage;
    if (s == "joint") return StegoStrategy::joint;
    if (s == "adversarial") return StegoStrategy::adversarial;
    throw ConfigError("unknown stego strategy '" + s + "'");
}

std::string to_string(StegoVariant v) {
    switch (v) {
        case StegoVariant::cnn: return "cnn";
        case StegoVariant::gan: return "gan";
        default: return "inn";
    }
}

std::string to_string(StegoStrategy s) {
    switch (s) {
        case StegoStrategy::two_stage: return "two-stage";
        case StegoStrategy::joint: return "joint";
        default: return "adversarial";
    }
}

void StegoLossWeights::validate() const {
    if (conceal < 0.0 || reveal < 0.0 || privacy < 0.0 || adv < 0.0)
        throw ConfigError("stego loss weights must be non-negative");
    if (conceal == 0.0 && reveal == 0.0 && privacy == 0.0 && adv == 0.0)
        throw ConfigError("at least one stego loss weight must be positive");
}

void StegoConfig::validate() const {
    weights.validate();
    if (n_blocks < 1) throw ConfigError("stego: n_blocks must be >= 1");
    if (width < 1 || disc_width < 1) throw ConfigError("stego: widths must be >= 1");
    if (epochs < 0 || batch < 1 || lr <= 0.0) throw ConfigError("stego: bad training hyperparameters");
}

// ---------------------------------------------------------------------------
// discriminators

namespace {
// output extent of a k3/s2/p1 conv stage
int half_extent(int x) { return (x + 1) / 2; }
}  // namespace

FeatureDisc::FeatureDisc(const std::string& name, int c, int h, int w, int width, Rng& rng)
    : c1(name + ".c1", c, width, 3, 2, 1, rng),
      c2(name + ".c2", width, width, 3, 2, 1, rng),
      head(name + ".head", width * half_extent(half_extent(h)) * half_extent(half_extent(w)), 1,
           rng) {}

Tape::Var FeatureDisc::apply(Tape& t, Tape::Var x) {
    Tape::Var y = t.leaky_relu(c1.apply(t, x), 0.2);
    y = t.leaky_relu(c2.apply(t, y), 0.2);
    return t.sigmoid(head.apply(t, t.flatten(y)));
}

void FeatureDisc::collect(std::vector<Parameter*>& out) {
    out.push_back(&c1.w); out.push_back(&c1.b);
    out.push_back(&c2.w); out.push_back(&c2.b);
    out.push_back(&head.w); out.push_back(&head.b);
}

ImageDisc::ImageDisc(const std::string& name, int C, int H, int W, int width, Rng& rng)
    : c1(name + ".c1", C, width, 3, 2, 1, rng),
      c2(name + ".c2", width, width, 3, 2, 1, rng),
      c3(name + ".c3", width, width, 3, 2, 1, rng),
      head(name + ".head",
           width * half_extent(half_extent(half_extent(H))) *
               half_extent(half_extent(half_extent(W))),
           1, rng) {}

Tape::Var ImageDisc::apply(Tape& t, Tape::Var x) {
    Tape::Var y = t.leaky_relu(c1.apply(t, x), 0.2);
    y = t.leaky_relu(c2.apply(t, y), 0.2);
    y = t.leaky_relu(c3.apply(t, y), 0.2);
    return t.sigmoid(head.apply(t, t.flatten(y)));
}

void ImageDisc::collect(std::vector<Parameter*>& out) {
    out.push_back(&c1.w); out.push_back(&c1.b);
    out.push_back(&c2.w); out.push_back(&c2.b);
    out.push_back(&c3.w); out.push_back(&c3.b);
    out.push_back(&head.w); out.push_back(&head.b);
}

// ---------------------------------------------------------------------------
// CNN variant

CnnStego::CnnStego(int c, int width, Rng& rng)
    : em1("stego.embed.c1", 2 * c, width, 3, 1, 1, rng),
      em2("stego.embed.c2", width, width, 3, 1, 1, rng),
      em3("stego.embed.c3", width, c, 3, 1, 1, rng, /*zero_init=*/true),
      ex1("stego.extract.c1", c, width, 3, 1, 1, rng),
      ex2("stego.extract.c2", width, width, 3, 1, 1, rng),
      ex3("stego.extract.c3", width, 2 * c, 3, 1, 1, rng) {}

Tape::Var CnnStego::embed_prenorm(Tape& t, Tape::Var cover_feat, Tape::Var secret_feat) {
    Tape::Var x = t.concat_channels(cover_feat, secret_feat);
    x = t.leaky_relu(em1.apply(t, x), 0.2);
    x = t.leaky_relu(em2.apply(t, x), 0.2);
    x = em3.apply(t, x);
    return t.add(cover_feat, x);
}

std::pair<Tape::Var, Tape::Var> CnnStego::extract(Tape& t, Tape::Var noisy_stego, int c) {
    Tape::Var x = t.leaky_relu(ex1.apply(t, noisy_stego), 0.2);
    x = t.leaky_relu(ex2.apply(t, x), 0.2);
    x = ex3.apply(t, x);
    return t.split_channels(x, c);
}

void CnnStego::collect(std::vector<Parameter*>& out) {
    for (Conv2d* l : {&em1, &em2, &em3, &ex1, &ex2, &ex3}) {
        out.push_back(&l->w);
        out.push_back(&l->b);
    }
}

// ---------------------------------------------------------------------------
// GAN variant

GanStego::GanStego(int c, int h, int w, int C, int H, int W, int width, int disc_width, Rng& rng)
    : gen(c, width, rng),
      disc_feat("stego.disc1", c, h, w, disc_width, rng),
      disc_img("stego.disc2", C, H, W, disc_width, rng) {}

void GanStego::collect(std::vector<Parameter*>& out) {
    collect_generator(out);
    collect_discriminators(out);
}

void GanStego::collect_generator(std::vector<Parameter*>& out) { gen.collect(out); }

void GanStego::collect_discriminators(std::vector<Parameter*>& out) {
    disc_feat.collect(out);
    disc_img.collect(out);
}

// ---------------------------------------------------------------------------
// INN variant

InnStego::InnStego(int c, int width, int n_blocks, Rng& rng) {
    blocks.reserve(static_cast<std::size_t>(n_blocks));
    for (int i = 0; i < n_blocks; ++i) {
        CouplingBlock b;
        b.phi = ConvSubnet("stego.inn.b" + std::to_string(i) + ".phi", c, width, rng);
        b.psi = ConvSubnet("stego.inn.b" + std::to_string(i) + ".psi", c, width, rng);
        blocks.push_back(std::move(b));
    }
}

std::pair<Tape::Var, Tape::Var> InnStego::forward(Tape& t, Tape::Var cover_feat,
                                                  Tape::Var secret_feat) {
    if (t.val(cover_feat).shape != t.val(secret_feat).shape)
        throw ShapeError("inn_forward: cover/secret feature shapes differ");
    Tape::Var p1 = cover_feat, p2 = secret_feat;
    for (auto& b : blocks) {
        p1 = t.add(p1, b.phi.apply(t, p2));
        p2 = t.add(p2, b.psi.apply(t, p1));
    }
    return {p1, p2};
}

std::pair<Tape::Var, Tape::Var> InnStego::inverse(Tape& t, Tape::Var stego, Tape::Var aux) {
    if (t.val(stego).shape != t.val(aux).shape)
        throw ShapeError("inn_inverse: stego/aux shapes differ");
    Tape::Var p1 = stego, p2 = aux;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        p2 = t.sub(p2, it->psi.apply(t, p1));
        p1 = t.sub(p1, it->phi.apply(t, p2));
    }
    return {p1, p2};
}

void InnStego::collect(std::vector<Parameter*>& out) {
    for (auto& b : blocks) {
        b.phi.collect(out);
        b.psi.collect(out);
    }
}

InnForwardResult inn_forward(InnStego& model, const Tensor& cover_feat, const Tensor& secret_feat) {
    Tape t;
    auto [p1, p2] = model.forward(t, t.input(cover_feat), t.input(secret_feat));
    InnForwardResult r;
    r.stego_prenorm = t.val(p1);
    r.aux = t.val(p2);
    r.stego = power_normalize(r.stego_prenorm);
    return r;
}

std::pair<Tensor, Tensor> inn_inverse(InnStego& model, const Tensor& received_stego,
                                      const Tensor& aux_sample) {
    Tape t;
    auto [p1, p2] = model.inverse(t, t.input(received_stego), t.input(aux_sample));
    return {t.val(p1), t.val(p2)};
}

// ---------------------------------------------------------------------------
// StegoModel

StegoModel::StegoModel(const StegoConfig& scfg, const CodecConfig& ccfg, Rng& rng)
    : cfg(scfg), codec_cfg(ccfg) {
    cfg.validate();
    switch (cfg.variant) {
        case StegoVariant::cnn:
            cnn = std::make_unique<CnnStego>(ccfg.c, cfg.width, rng);
            break;
        case StegoVariant::gan:
            gan = std::make_unique<GanStego>(ccfg.c, ccfg.h, ccfg.w, ccfg.C, ccfg.H, ccfg.W,
                                             cfg.width, cfg.disc_width, rng);
            break;
        case StegoVariant::inn:
            inn = std::make_unique<InnStego>(ccfg.c, cfg.width, cfg.n_blocks, rng);
            break;
    }
    if (cfg.strategy == StegoStrategy::adversarial && cfg.variant != StegoVariant::gan)
        aux_disc = std::make_unique<FeatureDisc>("stego.disc1", ccfg.c, ccfg.h, ccfg.w,
                                                 cfg.disc_width, rng);
}

std::pair<Tape::Var, Tape::Var> StegoModel::embed_prenorm(Tape& t, Tape::Var cover_feat,
                                                          Tape::Var secret_feat) {
    if (t.val(cover_feat).shape != codec_cfg.feature_shape())
        throw ConfigError("embed: feature shape mismatch");
    if (cfg.variant == StegoVariant::inn) return inn->forward(t, cover_feat, secret_feat);
    CnnStego& net = cfg.variant == StegoVariant::cnn ? *cnn : gan->gen;
    return {net.embed_prenorm(t, cover_feat, secret_feat), -1};
}

std::pair<Tape::Var, Tape::Var> StegoModel::extract(Tape& t, Tape::Var noisy_stego,
                                                    Tape::Var aux_sample) {
    if (t.val(noisy_stego).shape != codec_cfg.feature_shape())
        throw ConfigError("extract: feature shape mismatch");
    if (cfg.variant == StegoVariant::inn) return inn->inverse(t, noisy_stego, aux_sample);
    CnnStego& net = cfg.variant == StegoVariant::cnn ? *cnn : gan->gen;
    return net.extract(t, noisy_stego, codec_cfg.c);
}

Tensor StegoModel::embed(const Tensor& cover_feat, const Tensor& secret_feat) const {
    Tape t;
    auto* self = const_cast<StegoModel*>(this);
    auto [pre, aux] = self->embed_prenorm(t, t.input(cover_feat), t.input(secret_feat));
    (void)aux;
    return power_normalize(t.val(pre));
}

std::pair<Tensor, Tensor> StegoModel::extract_features(const Tensor& noisy_stego,
                                                       Rng& aux_rng) const {
    Tape t;
    auto* self = const_cast<StegoModel*>(this);
    Tape::Var aux = -1;
    if (cfg.variant == StegoVariant::inn)
        aux = t.input(aux_rng.gauss_tensor(codec_cfg.feature_shape()));
    auto [c, s] = self->extract(t, t.input(noisy_stego), aux);
    return {t.val(c), t.val(s)};
}

std::vector<Parameter*> StegoModel::parameters() {
    auto out = generator_parameters();
    auto d = discriminator_parameters();
    out.insert(out.end(), d.begin(), d.end());
    return out;
}

std::vector<Parameter*> StegoModel::generator_parameters() {
    std::vector<Parameter*> out;
    if (cnn) cnn->collect(out);
    if (gan) gan->collect_generator(out);
    if (inn) inn->collect(out);
    return out;
}

std::vector<Parameter*> StegoModel::discriminator_parameters() {
    std::vector<Parameter*> out;
    if (gan) gan->collect_discriminators(out);
    if (aux_disc) aux_disc->collect(out);
    return out;
}

// ---------------------------------------------------------------------------
// losses

std::pair<double, double> adversarial_losses(const std::vector<double>& d_scores_real,
                                             const std::vector<double>& d_scores_fake) {
    if (d_scores_real.empty() || d_scores_fake.empty())
        throw ConfigError("adversarial_losses: empty score list");
    auto clamp = [](double v) { return std::clamp(v, 1e-7, 1.0 - 1e-7); };
    double lr = 0.0;
    for (double d : d_scores_real) lr -= std::log(clamp(d));
    lr /= static_cast<double>(d_scores_real.size());
    double lf = 0.0, lg = 0.0;
    for (double d : d_scores_fake) {
        lf -= std::log(1.0 - clamp(d));
        lg -= std::log(clamp(d));
    }
    lf /= static_cast<double>(d_scores_fake.size());
    lg /= static_cast<double>(d_scores_fake.size());
    return {lr + lf, lg};
}

double stego_loss(const Tensor& cover_img, const Tensor& secret_img, const Tensor& cover_rec_img,
                  const Tensor& secret_rec_img, const Tensor& eve_img,
                  const StegoLossWeights& weights, double adv_term) {
    weights.validate();
    if (!std::isfinite(adv_term)) throw ConfigError("stego_loss: adv_term must be finite");
    auto mse = [](const Tensor& a, const Tensor& b) {
        if (!a.same_shape(b)) throw ShapeError("stego_loss: image shape mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            double d = a.data[i] - b.data[i];
            acc += d * d;
        }
        return acc / static_cast<double>(a.data.size());
    };
    return weights.conceal * mse(cover_rec_img, cover_img) +
           weights.reveal * mse(secret_rec_img, secret_img) +
           weights.privacy * mse(eve_img, cover_img) + weights.adv * adv_term;
}

// ---------------------------------------------------------------------------
// Haar DWT

HaarBands haar_dwt(const Tensor& image) {
    if (image.shape.size() != 3) throw ShapeError("haar_dwt expects (C,H,W)");
    int C = image.shape[0], H = image.shape[1], W = image.shape[2];
    if (H % 2 != 0 || W % 2 != 0) throw ShapeError("haar_dwt: H and W must be even");
    int Hh = H / 2, Wh = W / 2;
    HaarBands out{Tensor::zeros({C, Hh, Wh}), Tensor::zeros({C, Hh, Wh}),
                  Tensor::zeros({C, Hh, Wh}), Tensor::zeros({C, Hh, Wh})};
    for (int ch = 0; ch < C; ++ch) {
        const double* src = &image.data[static_cast<std::size_t>(ch) * H * W];
        std::size_t base = static_cast<std::size_t>(ch) * Hh * Wh;
        for (int y = 0; y < Hh; ++y) {
            for (int x = 0; x < Wh; ++x) {
                double a = src[(2 * y) * W + 2 * x];
                double b = src[(2 * y) * W + 2 * x + 1];
                double c2 = src[(2 * y + 1) * W + 2 * x];
                double d = src[(2 * y + 1) * W + 2 * x + 1];
                std::size_t i = base + static_cast<std::size_t>(y) * Wh + x;
                out.ll.data[i] = (a + b + c2 + d) / 2.0;
                out.lh.data[i] = (a - b + c2 - d) / 2.0;
                out.hl.data[i] = (a + b - c2 - d) / 2.0;
                out.hh.data[i] = (a - b - c2 + d) / 2.0;
            }
        }
    }
    return out;
}

Tensor inverse_haar_dwt(const HaarBands& bands) {
    const Tensor& ll = bands.ll;
    if (ll.shape.size() != 3) throw ShapeError("inverse_haar_dwt expects (C,H/2,W/2) bands");
    if (!ll.same_shape(bands.lh) || !ll.same_shape(bands.hl) || !ll.same_shape(bands.hh))
        throw ShapeError("inverse_haar_dwt: band shapes differ");
    int C = ll.shape[0], Hh = ll.shape[1], Wh = ll.shape[2];
    int H = 2 * Hh, W = 2 * Wh;
    Tensor out = Tensor::zeros({C, H, W});
    for (int ch = 0; ch < C; ++ch) {
        double* dst = &out.data[static_cast<std::size_t>(ch) * H * W];
        std::size_t base = static_cast<std::size_t>(ch) * Hh * Wh;
        for (int y = 0; y < Hh; ++y) {
            for (int x = 0; x < Wh; ++x) {
                std::size_t i = base + static_cast<std::size_t>(y) * Wh + x;
                double s = bands.ll.data[i], dlh = bands.lh.data[i];
                double dhl = bands.hl.data[i], dhh = bands.hh.data[i];
                dst[(2 * y) * W + 2 * x] = (s + dlh + dhl + dhh) / 2.0;
                dst[(2 * y) * W + 2 * x + 1] = (s - dlh + dhl - dhh) / 2.0;
                dst[(2 * y + 1) * W + 2 * x] = (s + dlh - dhl - dhh) / 2.0;
                dst[(2 * y + 1) * W + 2 * x + 1] = (s - dlh - dhl + dhh) / 2.0;
            }
        }
    }
    return out;
}

HighfreqResult highfreq_preprocess(const Tensor& secret) {
    HaarBands bands = haar_dwt(secret);
    double ll_mean = 0.0;
    for (double v : bands.ll.data) ll_mean += v;
    ll_mean /= static_cast<double>(bands.ll.data.size());
    std::fill(bands.ll.data.begin(), bands.ll.data.end(), 0.0);
    Tensor detail = inverse_haar_dwt(bands);
    double lo = detail.data[0], hi = detail.data[0];
    for (double v : detail.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-300) {
        std::fill(detail.data.begin(), detail.data.end(), 0.5);
    } else {
        for (auto& v : detail.data) v = (v - lo) / (hi - lo);
    }
    return {std::move(detail), ll_mean};
}

// ---------------------------------------------------------------------------
// training

namespace {

struct GraphRefs {
    Tape::Var loss = -1;
    Tape::Var stego = -1;        // normalized, pre-channel
    Tape::Var noisy_stego = -1;  // legit realization
};

// Full generator-path graph for one (cover, secret) pair. The channel rngs
// are consumed in a fixed order so runs are reproducible.
GraphRefs build_pipeline(Tape& t, StegoModel& model, CodecModel& codec, const Tensor& cover_img,
                         const Tensor& secret_img, const ChannelConfig& ch, Rng& ch_rng,
                         Rng& aux_rng, bool with_adv, ChannelStats* stats) {
    const StegoLossWeights& wts = model.cfg.weights;
    Tape::Var cover = t.input(cover_img);
    Tape::Var secret = t.input(secret_img);
    Tape::Var cover_feat = codec.encode(t, cover);
    Tape::Var secret_feat = codec.encode(t, secret);
    auto [stego_pre, aux] = model.embed_prenorm(t, cover_feat, secret_feat);
    Tape::Var stego = t.power_normalize(stego_pre);
    Tape::Var noisy = apply_channel(t, stego, ch.kind, ch.snr_db, ch.equalize, ch_rng, stats);
    Tape::Var eve_rx = apply_channel(t, stego, ch.kind, ch.eve_snr_db, ch.equalize, ch_rng, stats);

    Tape::Var aux_sample = -1;
    if (model.cfg.variant == StegoVariant::inn)
        aux_sample = t.input(aux_rng.gauss_tensor(model.codec_cfg.feature_shape()));
    auto [cov_f, sec_f] = model.extract(t, noisy, aux_sample);
    Tape::Var cover_rec = codec.decode(t, cov_f);
    Tape::Var secret_rec = codec.decode(t, sec_f);
    Tape::Var eve_img = codec.decode(t, eve_rx);

    std::vector<std::pair<double, Tape::Var>> terms;
    terms.push_back({wts.conceal, t.mse(cover_rec, cover)});
    terms.push_back({wts.reveal, t.mse(secret_rec, secret)});
    terms.push_back({wts.privacy, t.mse(eve_img, cover)});

    if (model.cfg.variant == StegoVariant::inn && aux >= 0) {
        // keep the discarded half close to the receiver's N(0,1) sample
        Tape::Var m = t.mean(aux);
        Tape::Var v = t.variance(aux);
        Tape::Var vm1 = t.add_const(v, Tensor({1}, {-1.0}));
        terms.push_back({0.1, t.mul(m, m)});
        terms.push_back({0.1, t.mul(vm1, vm1)});
    }

    if (with_adv) {
        // non-saturating generator term: drive D(stego path) toward 1
        FeatureDisc* d1 = model.gan ? &model.gan->disc_feat : model.aux_disc.get();
        Tape::Var s1 = d1->apply(t, noisy);
        terms.push_back({wts.adv, t.scale(t.log_clamped(s1), -1.0)});
        if (model.gan) {
            Tape::Var recon = codec.decode(t, noisy);
            Tape::Var s2 = model.gan->disc_img.apply(t, recon);
            terms.push_back({wts.adv, t.scale(t.log_clamped(s2), -1.0)});
        }
    }

    GraphRefs refs;
    refs.loss = t.wsum(terms);
    refs.stego = stego;
    refs.noisy_stego = noisy;
    return refs;
}

}  // namespace

StegoModel train_stego(const StegoConfig& scfg, CodecModel& codec,
                       const std::vector<std::pair<Tensor, Tensor>>& pairs,
                       const ChannelConfig& channel_cfg, Rng& rng, StegoTrainResult* result) {
    scfg.validate();
    if (pairs.empty()) throw ConfigError("train_stego: empty dataset");

    Rng init_rng = rng.derive(0);
    Rng ch_rng = rng.derive(1);
    Rng shuffle_rng = rng.derive(2);
    Rng aux_rng = rng.derive(3);
    Rng dstep_rng = rng.derive(4);

    StegoModel model(scfg, codec.cfg, init_rng);

    bool adversarial = scfg.strategy == StegoStrategy::adversarial;
    bool joint = scfg.strategy == StegoStrategy::joint;

    // Preprocess secrets once when the high-frequency strategy is on.
    std::vector<std::pair<Tensor, Tensor>> data = pairs;
    if (scfg.dwt_preprocess)
        for (auto& [cover, secret] : data) secret = highfreq_preprocess(secret).image;

    std::vector<Parameter*> gen_params = model.generator_parameters();
    if (joint) {
        auto cp = codec.parameters();
        gen_params.insert(gen_params.end(), cp.begin(), cp.end());
    }
    std::vector<Parameter*> disc_params = model.discriminator_parameters();
    std::vector<Parameter*> all_params = model.parameters();
    {
        auto cp = codec.parameters();
        all_params.insert(all_params.end(), cp.begin(), cp.end());
    }

    Adam gen_opt(AdamConfig{scfg.lr});
    Adam disc_opt(AdamConfig{scfg.lr});

    StegoTrainResult res;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < scfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t idx = 0;
        while (idx < data.size()) {
            std::size_t bsz = std::min<std::size_t>(scfg.batch, data.size() - idx);

            // generator step
            Adam::zero_grad(all_params);
            double batch_loss = 0.0;
            for (std::size_t bi = 0; bi < bsz; ++bi) {
                const auto& [cover, secret] = data[order[idx + bi]];
                Tape t;
                GraphRefs refs = build_pipeline(t, model, codec, cover, secret, channel_cfg,
                                                ch_rng, aux_rng, adversarial, nullptr);
                batch_loss += t.val(refs.loss).data[0];
                t.backward(refs.loss);
            }
            if (!std::isfinite(batch_loss))
                throw DivergedError("train_stego: non-finite loss at epoch " + std::to_string(epoch));
            for (auto* p : gen_params)
                for (auto& gv : p->grad.data) gv /= static_cast<double>(bsz);
            gen_opt.step(gen_params);
            res.steps += 1;
            res.cost_proxy += param_count(gen_params);
            epoch_loss += batch_loss;

            // discriminator step (one per generator step)
            if (adversarial) {
                Adam::zero_grad(all_params);
                for (std::size_t bi = 0; bi < bsz; ++bi) {
                    const auto& [cover, secret] = data[order[idx + bi]];
                    // detached transmissions, both observed post-channel
                    Tensor cover_feat = codec.encode(cover);
                    Tensor secret_feat = codec.encode(secret);
                    Tensor stego = model.embed(cover_feat, secret_feat);
                    Tensor rx_cover, rx_stego;
                    if (channel_cfg.kind == ChannelKind::awgn) {
                        rx_cover = awgn(cover_feat, channel_cfg.snr_db, dstep_rng);
                        rx_stego = awgn(stego, channel_cfg.snr_db, dstep_rng);
                    } else {
                        rx_cover = rayleigh(cover_feat, channel_cfg.snr_db, channel_cfg.equalize,
                                            dstep_rng).first;
                        rx_stego = rayleigh(stego, channel_cfg.snr_db, channel_cfg.equalize,
                                            dstep_rng).first;
                    }
                    Tape t;
                    FeatureDisc* d1 = model.gan ? &model.gan->disc_feat : model.aux_disc.get();
                    Tape::Var d_real = d1->apply(t, t.input(rx_cover));
                    Tape::Var d_fake = d1->apply(t, t.input(rx_stego));
                    std::vector<std::pair<double, Tape::Var>> dt;
                    dt.push_back({-1.0, t.log_clamped(d_real)});
                    dt.push_back({-1.0, t.log_clamped(t.add_const(t.scale(d_fake, -1.0),
                                                                  Tensor({1}, {1.0})))});
                    if (model.gan) {
                        Tensor img_real = codec.decode(rx_cover);
                        Tensor img_fake = codec.decode(rx_stego);
                        Tape::Var r2 = model.gan->disc_img.apply(t, t.input(img_real));
                        Tape::Var f2 = model.gan->disc_img.apply(t, t.input(img_fake));
                        dt.push_back({-1.0, t.log_clamped(r2)});
                        dt.push_back({-1.0, t.log_clamped(t.add_const(t.scale(f2, -1.0),
                                                                      Tensor({1}, {1.0})))});
                    }
                    Tape::Var dloss = t.wsum(dt);
                    t.backward(dloss);
                }
                for (auto* p : disc_params)
                    for (auto& gv : p->grad.data) gv /= static_cast<double>(bsz);
                disc_opt.step(disc_params);
                res.steps += 1;
                res.cost_proxy += param_count(disc_params);
            }
            idx += bsz;
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss))
            throw DivergedError("train_stego: non-finite epoch loss at epoch " + std::to_string(epoch));
        res.loss_history.push_back(epoch_loss);
    }

    if (result) *result = res;
    return model;
}

}  // namespace semsteg
