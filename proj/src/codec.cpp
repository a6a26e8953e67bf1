#include "semsteg/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semsteg/errors.hpp"

namespace semsteg {

void CodecConfig::validate() const {
    if (C != 1 && C != 3) throw ConfigError("codec: image channels must be 1 or 3");
    if (H <= 0 || W <= 0 || c <= 0 || h <= 0 || w <= 0) throw ConfigError("codec: non-positive dims");
    if (H % 4 != 0 || W % 4 != 0) throw ConfigError("codec: H and W must be divisible by 4");
    if (h != H / 4 || w != W / 4)
        throw ConfigError("codec: latent spatial dims must be H/4 x W/4 (two stride-2 stages)");
    if (epochs < 1 || batch < 1 || lr <= 0.0) throw ConfigError("codec: bad training hyperparameters");
}

CodecModel::CodecModel(const CodecConfig& config, Rng& rng) : cfg(config) {
    cfg.validate();
    e1 = Conv2d("codec.e1", cfg.C, 16, 3, 2, 1, rng);
    e2 = Conv2d("codec.e2", 16, 32, 3, 2, 1, rng);
    e3 = Conv2d("codec.e3", 32, cfg.c, 3, 1, 1, rng);
    d1 = ConvT2d("codec.d1", cfg.c, 32, 3, 1, 1, rng);
    d2 = ConvT2d("codec.d2", 32, 16, 4, 2, 1, rng);
    d3 = ConvT2d("codec.d3", 16, cfg.C, 4, 2, 1, rng);
}

Tape::Var CodecModel::encode(Tape& t, Tape::Var image) const {
    if (t.val(image).shape != cfg.image_shape())
        throw ShapeError("encode: image shape " + shape_str(t.val(image).shape) +
                          " does not match codec config " + shape_str(cfg.image_shape()));
    auto* self = const_cast<CodecModel*>(this);
    Tape::Var x = self->e1.apply(t, image);
    x = t.leaky_relu(x, 0.2);
    x = self->e2.apply(t, x);
    x = t.leaky_relu(x, 0.2);
    x = self->e3.apply(t, x);
    return t.power_normalize(x);
}

Tape::Var CodecModel::decode(Tape& t, Tape::Var features) const {
    if (t.val(features).shape != cfg.feature_shape())
        throw ShapeError("decode: feature shape " + shape_str(t.val(features).shape) +
                          " does not match codec config " + shape_str(cfg.feature_shape()));
    auto* self = const_cast<CodecModel*>(this);
    Tape::Var x = self->d1.apply(t, features);
    x = t.leaky_relu(x, 0.2);
    x = self->d2.apply(t, x);
    x = t.leaky_relu(x, 0.2);
    x = self->d3.apply(t, x);
    return t.sigmoid(x);
}

Tensor CodecModel::encode(const Tensor& image) const {
    Tape t;
    return t.val(encode(t, t.input(image)));
}

Tensor CodecModel::decode(const Tensor& features) const {
    Tape t;
    return t.val(decode(t, t.input(features)));
}

std::vector<Parameter*> CodecModel::parameters() {
    auto enc = encoder_parameters();
    auto dec = decoder_parameters();
    enc.insert(enc.end(), dec.begin(), dec.end());
    return enc;
}

std::vector<Parameter*> CodecModel::encoder_parameters() {
    return {&e1.w, &e1.b, &e2.w, &e2.b, &e3.w, &e3.b};
}

std::vector<Parameter*> CodecModel::decoder_parameters() {
    return {&d1.w, &d1.b, &d2.w, &d2.b, &d3.w, &d3.b};
}

Tensor power_normalize(const Tensor& features) {
    double ms = features.mean_square();
    if (ms < 1e-300) throw DegenerateSignalError("power_normalize on all-zero tensor");
    double s = std::sqrt(ms);
    Tensor y = features;
    for (auto& v : y.data) v /= s;
    return y;
}

TrainResult train_codec(CodecModel& model, const std::vector<Tensor>& dataset, Rng& rng) {
    if (dataset.empty()) throw ConfigError("train_codec: empty dataset");
    for (const auto& img : dataset)
        if (img.shape != model.cfg.image_shape())
            throw ShapeError("train_codec: dataset image shape mismatch");

    auto params = model.parameters();
    Adam opt(AdamConfig{model.cfg.lr});
    Rng noise_rng = rng.derive(1);
    Rng shuffle_rng = rng.derive(2);

    TrainResult result;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < model.cfg.epochs; ++epoch) {
        // Fisher-Yates with the seeded stream
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t idx = 0;
        while (idx < order.size()) {
            std::size_t bsz = std::min<std::size_t>(model.cfg.batch, order.size() - idx);
            Adam::zero_grad(params);
            double batch_loss = 0.0;
            for (std::size_t bi = 0; bi < bsz; ++bi) {
                const Tensor& img = dataset[order[idx + bi]];
                Tape t;
                Tape::Var x = t.input(img);
                Tape::Var feat = model.encode(t, x);
                Tape::Var noisy =
                    apply_channel(t, feat, ChannelKind::awgn, model.cfg.train_snr_db, true, noise_rng);
                Tape::Var rec = model.decode(t, noisy);
                Tape::Var loss = t.mse(rec, x);
                batch_loss += t.val(loss).data[0];
                t.backward(loss);
            }
            for (auto* p : params)
                for (auto& gv : p->grad.data) gv /= static_cast<double>(bsz);
            if (!std::isfinite(batch_loss))
                throw DivergedError("train_codec: non-finite loss at epoch " + std::to_string(epoch));
            opt.step(params);
            result.steps += 1;
            epoch_loss += batch_loss;
            idx += bsz;
        }
        epoch_loss /= static_cast<double>(dataset.size());
        if (!std::isfinite(epoch_loss))
            throw DivergedError("train_codec: non-finite epoch loss at epoch " + std::to_string(epoch));
        result.loss_history.push_back(epoch_loss);
    }
    return result;
}

CodecModel make_trained_codec(const CodecConfig& cfg, const std::vector<Tensor>& dataset, Rng& rng,
                              TrainResult* result) {
    Rng init_rng = rng.derive(0);
    CodecModel model(cfg, init_rng);
    TrainResult r = train_codec(model, dataset, rng);
    if (result) *result = r;
    return model;
}

}  // namespace semsteg
