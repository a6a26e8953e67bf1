#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "semsteg/codec.hpp"
#include "semsteg/dataset.hpp"
#include "semsteg/metrics.hpp"

using namespace semsteg;

TEST_CASE("config validation") {
    CodecConfig ok;
    CHECK_NOTHROW(ok.validate());

    CodecConfig bad = ok;
    bad.H = 30;  // not divisible by 4
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.h = 4;  // latent grid must be H/4
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.lr = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("power_normalize: unit mean square, zero input rejected") {
    Tensor x({4}, {1.0, 2.0, 3.0, 4.0});
    Tensor y = power_normalize(x);
    CHECK(y.mean_square() == doctest::Approx(1.0).epsilon(1e-12));
    // hand case: ms = 30/4 = 7.5, scale = 1/sqrt(7.5)
    CHECK(y.data[0] == doctest::Approx(1.0 / std::sqrt(7.5)).epsilon(1e-12));
    CHECK_THROWS_AS(power_normalize(Tensor::zeros({4})), DegenerateSignalError);
}

TEST_CASE("encode emits power-normalized features of the configured shape") {
    Rng rng(1);
    CodecConfig cfg;
    CodecModel m(cfg, rng);
    Rng data(2);
    Tensor img = data.gauss_tensor(cfg.image_shape());
    for (auto& v : img.data) v = 0.5 + 0.1 * v;
    Tensor f = m.encode(img);
    CHECK(f.shape == cfg.feature_shape());
    CHECK(f.mean_square() == doctest::Approx(1.0).epsilon(1e-9));

    Tensor rec = m.decode(f);
    CHECK(rec.shape == cfg.image_shape());
    for (double v : rec.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("encode/decode reject wrong shapes") {
    Rng rng(3);
    CodecConfig cfg;
    CodecModel m(cfg, rng);
    CHECK_THROWS_AS(m.encode(Tensor::zeros({1, 16, 16})), ShapeError);
    CHECK_THROWS_AS(m.decode(Tensor::zeros({4, 8, 8})), ShapeError);
}

TEST_CASE("bandwidth ratio is 0.5 at defaults") {
    CodecConfig cfg;
    double ratio = static_cast<double>(Tensor::count(cfg.feature_shape())) /
                   static_cast<double>(Tensor::count(cfg.image_shape()));
    CHECK(ratio == doctest::Approx(0.5));
}

TEST_CASE("training reduces the loss and is deterministic") {
    CodecConfig cfg;
    cfg.epochs = 8;
    auto data = synth_dataset(77, 48, cfg.image_shape());

    Rng r1(5);
    Rng i1 = r1.derive(0);
    CodecModel m1(cfg, i1);
    TrainResult t1 = train_codec(m1, data, r1);

    CHECK(t1.loss_history.size() == 8);
    CHECK(t1.steps == 8 * (48 / cfg.batch));
    // averaged over the back half vs front half to tolerate noise jitter
    double early = (t1.loss_history[0] + t1.loss_history[1]) / 2;
    double late = (t1.loss_history[6] + t1.loss_history[7]) / 2;
    CHECK(late < early);

    Rng r2(5);
    Rng i2 = r2.derive(0);
    CodecModel m2(cfg, i2);
    TrainResult t2 = train_codec(m2, data, r2);
    CHECK(t1.loss_history == t2.loss_history);  // bit-identical
    for (std::size_t i = 0; i < m1.e1.w.value.data.size(); ++i)
        CHECK(m1.e1.w.value.data[i] == m2.e1.w.value.data[i]);
}

TEST_CASE("trained codec beats an untrained one on held-out data") {
    CodecConfig cfg;
    cfg.epochs = 12;
    auto train = synth_dataset(88, 96, cfg.image_shape());
    auto test = synth_dataset(880000, 16, cfg.image_shape());

    Rng rng(6);
    Rng fresh_rng = rng.derive(0);
    CodecModel fresh(cfg, fresh_rng);
    CodecModel trained = make_trained_codec(cfg, train, rng);

    auto mean_psnr = [&](const CodecModel& m) {
        double acc = 0;
        for (const auto& img : test) acc += psnr(m.decode(m.encode(img)), img);
        return acc / static_cast<double>(test.size());
    };
    double p_fresh = mean_psnr(fresh);
    double p_trained = mean_psnr(trained);
    CHECK(p_trained > p_fresh + 3.0);
    CHECK(p_trained > 18.0);  // noiseless regression floor at this budget
}
