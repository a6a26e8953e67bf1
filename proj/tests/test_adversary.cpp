#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "semsteg/adversary.hpp"
#include "semsteg/dataset.hpp"
#include "semsteg/metrics.hpp"

using namespace semsteg;

namespace {

// brute-force pair-counting oracle for the Mann-Whitney statistic
double auc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
    double wins = 0;
    for (double p : pos)
        for (double n : neg) {
            if (p > n) wins += 1.0;
            else if (p == n) wins += 0.5;
        }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

TEST_CASE("auc hand cases") {
    CHECK(auc({0.7}, {0.3, 0.8}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(auc({0.9, 0.8}, {0.1, 0.2}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(auc({0.1, 0.2}, {0.9, 0.8}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(auc({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));  // all ties
    CHECK(auc({0.5}, {0.5, 0.4}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(auc({}, {0.5}), UsageError);
    CHECK_THROWS_AS(auc({0.5}, {}), UsageError);
}

TEST_CASE("auc equals brute-force pair counting on 1000 random score sets") {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        int n1 = 1 + static_cast<int>(rng.next_u64() % 20);
        int n2 = 1 + static_cast<int>(rng.next_u64() % 20);
        std::vector<double> pos(n1), neg(n2);
        // quantized scores force plenty of ties
        for (auto& v : pos) v = std::floor(rng.uniform() * 8.0) / 8.0;
        for (auto& v : neg) v = std::floor(rng.uniform() * 8.0) / 8.0;
        CHECK(std::abs(auc(pos, neg) - auc_oracle(pos, neg)) < 1e-12);
    }
}

TEST_CASE("knowledge separation is interface-enforced") {
    Rng rng(18);
    CodecConfig cfg;
    CodecModel codec(cfg, rng);

    AttackerKnowledge gb = AttackerKnowledge::glass_box(codec);
    CHECK(gb.mode == AttackerMode::glass_box);
    CHECK(gb.codec == &codec);
    CHECK(gb.attacker_dataset.empty());

    auto data = synth_dataset(19, 4, cfg.image_shape());
    AttackerKnowledge cb = AttackerKnowledge::closed_box(
        [&codec](const Tensor& img) { return codec.encode(img); }, data);
    CHECK(cb.mode == AttackerMode::closed_box);
    CHECK(cb.codec == nullptr);  // no parameter access, only the oracle

    // naive decode needs the stolen decoder: closed-box attackers cannot do it
    Tensor f = codec.encode(data[0]);
    CHECK_NOTHROW(naive_decode(f, gb));
    CHECK_THROWS_AS(naive_decode(f, cb), KnowledgeError);
}

TEST_CASE("naive decode equals the legitimate decoder on the same features") {
    Rng rng(20);
    CodecConfig cfg;
    CodecModel codec(cfg, rng);
    AttackerKnowledge gb = AttackerKnowledge::glass_box(codec);
    Tensor img = synth_dataset(21, 1, cfg.image_shape())[0];
    Tensor f = codec.encode(img);
    Tensor a = naive_decode(f, gb);
    Tensor b = codec.decode(f);
    CHECK(a.data == b.data);
}

TEST_CASE("steganalyzer separates a clearly separable toy problem") {
    // covers ~ N(0,1) features, stegos ~ N(0.6,1): AUC should be high
    Rng data(22);
    std::vector<Tensor> cover, stego;
    for (int i = 0; i < 80; ++i) {
        cover.push_back(data.gauss_tensor({8, 8, 8}));
        Tensor s = data.gauss_tensor({8, 8, 8});
        for (auto& v : s.data) v += 0.6;
        stego.push_back(s);
    }
    Rng rng(23);
    SteganalyzerConfig cfg;
    cfg.epochs = 12;
    SteganalyzerResult r = train_steganalyzer(cover, stego, rng, cfg);
    CHECK(r.test_auc > 0.95);
}

TEST_CASE("steganalyzer stays near chance on identically distributed classes") {
    Rng data(24);
    std::vector<Tensor> a, b;
    for (int i = 0; i < 80; ++i) {
        a.push_back(data.gauss_tensor({8, 8, 8}));
        b.push_back(data.gauss_tensor({8, 8, 8}));
    }
    Rng rng(25);
    SteganalyzerConfig cfg;
    cfg.epochs = 12;
    SteganalyzerResult r = train_steganalyzer(a, b, rng, cfg);
    CHECK(r.test_auc > 0.25);
    CHECK(r.test_auc < 0.75);
}

TEST_CASE("steganalyzer training requires both classes") {
    Rng rng(26);
    std::vector<Tensor> some = {rng.gauss_tensor({8, 8, 8})};
    CHECK_THROWS_AS(train_steganalyzer({}, some, rng), UsageError);
    CHECK_THROWS_AS(train_steganalyzer(some, {}, rng), UsageError);
}

TEST_CASE("inversion attacker learns to invert an untrained encoder poorly but finitely") {
    // smoke-level: training runs, loss decreases, output is a valid image
    Rng rng(27);
    CodecConfig cfg;
    CodecModel codec(cfg, rng);
    auto data = synth_dataset(28, 32, cfg.image_shape());
    auto knowledge = AttackerKnowledge::closed_box(
        [&codec](const Tensor& img) { return codec.encode(img); }, data);
    InversionConfig icfg;
    icfg.epochs = 6;
    std::vector<double> history;
    Rng arng(29);
    SurrogateDecoder s = train_inversion_attacker(knowledge, cfg, arng, icfg, &history);
    CHECK(history.size() == 6);
    CHECK(history.back() < history.front());
    Tensor out = s.decode(codec.encode(data[0]));
    CHECK(out.shape == cfg.image_shape());
    CHECK(out.all_finite());
}

TEST_CASE("inversion attacker needs the closed-box oracle and data") {
    Rng rng(30);
    CodecConfig cfg;
    CodecModel codec(cfg, rng);
    AttackerKnowledge gb = AttackerKnowledge::glass_box(codec);
    Rng arng(31);
    CHECK_THROWS_AS(train_inversion_attacker(gb, cfg, arng), KnowledgeError);

    AttackerKnowledge empty = AttackerKnowledge::closed_box(
        [&codec](const Tensor& img) { return codec.encode(img); }, {});
    CHECK_THROWS_AS(train_inversion_attacker(empty, cfg, arng), UsageError);
}

TEST_CASE("inversion attacker recovers a trained codec's images on its own data") {
    // the closed-box threat from the article: with enough oracle queries, a
    // surrogate decoder reconstructs unprotected transmissions
    CodecConfig cfg;
    cfg.epochs = 10;
    auto train = synth_dataset(32, 64, cfg.image_shape());
    Rng crng(33);
    CodecModel codec = make_trained_codec(cfg, train, crng);

    auto attacker_data = synth_dataset(34, 48, cfg.image_shape());
    auto knowledge = AttackerKnowledge::closed_box(
        [&codec](const Tensor& img) { return codec.encode(img); }, attacker_data);
    InversionConfig icfg;
    icfg.epochs = 15;
    Rng arng(35);
    SurrogateDecoder s = train_inversion_attacker(knowledge, cfg, arng, icfg);

    auto held_out = synth_dataset(36, 8, cfg.image_shape());
    double acc = 0;
    for (const auto& img : held_out) acc += psnr(s.decode(codec.encode(img)), img);
    CHECK(acc / 8.0 > 14.0);  // regression floor at this small budget
}
