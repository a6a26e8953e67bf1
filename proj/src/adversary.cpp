#include "semsteg/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semsteg/errors.hpp"

namespace semsteg {

AttackerKnowledge AttackerKnowledge::glass_box(const CodecModel& codec) {
    AttackerKnowledge k;
    k.mode = AttackerMode::glass_box;
    k.codec = &codec;
    return k;
}

AttackerKnowledge AttackerKnowledge::closed_box(EncodeOracle oracle, std::vector<Tensor> dataset) {
    AttackerKnowledge k;
    k.mode = AttackerMode::closed_box;
    k.oracle = std::move(oracle);
    k.attacker_dataset = std::move(dataset);
    return k;
}

Tensor naive_decode(const Tensor& intercepted, const AttackerKnowledge& knowledge) {
    if (knowledge.mode != AttackerMode::glass_box)
        throw KnowledgeError("naive_decode requires glass-box access to the decoder");
    return knowledge.codec->decode(intercepted);
}

SurrogateDecoder::SurrogateDecoder(const CodecConfig& config, Rng& rng) : cfg(config) {
    d1 = ConvT2d("surrogate.d1", cfg.c, 16, 3, 1, 1, rng);
    d2 = ConvT2d("surrogate.d2", 16, 16, 4, 2, 1, rng);
    d3 = ConvT2d("surrogate.d3", 16, cfg.C, 4, 2, 1, rng);
}

Tape::Var SurrogateDecoder::decode(Tape& t, Tape::Var features) {
    Tape::Var x = t.leaky_relu(d1.apply(t, features), 0.2);
    x = t.leaky_relu(d2.apply(t, x), 0.2);
    return t.sigmoid(d3.apply(t, x));
}

Tensor SurrogateDecoder::decode(const Tensor& features) const {
    Tape t;
    return t.val(const_cast<SurrogateDecoder*>(this)->decode(t, t.input(features)));
}

std::vector<Parameter*> SurrogateDecoder::parameters() {
    return {&d1.w, &d1.b, &d2.w, &d2.b, &d3.w, &d3.b};
}

SurrogateDecoder train_inversion_attacker(const AttackerKnowledge& knowledge,
                                          const CodecConfig& feature_cfg, Rng& rng,
                                          InversionConfig cfg, std::vector<double>* loss_history) {
    if (knowledge.mode != AttackerMode::closed_box)
        throw KnowledgeError("model inversion models a closed-box attacker");
    if (knowledge.attacker_dataset.empty())
        throw UsageError("train_inversion_attacker: empty attacker dataset");

    // query phase: build (feature, image) pairs through the oracle
    std::vector<std::pair<Tensor, Tensor>> pairs;
    pairs.reserve(knowledge.attacker_dataset.size());
    for (const auto& img : knowledge.attacker_dataset)
        pairs.push_back({knowledge.oracle(img), img});

    Rng init_rng = rng.derive(0);
    Rng shuffle_rng = rng.derive(1);
    SurrogateDecoder surrogate(feature_cfg, init_rng);
    auto params = surrogate.parameters();
    Adam opt(AdamConfig{cfg.lr});

    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t idx = 0;
        while (idx < order.size()) {
            std::size_t bsz = std::min<std::size_t>(cfg.batch, order.size() - idx);
            Adam::zero_grad(params);
            for (std::size_t bi = 0; bi < bsz; ++bi) {
                const auto& [feat, img] = pairs[order[idx + bi]];
                Tape t;
                Tape::Var rec = surrogate.decode(t, t.input(feat));
                Tape::Var loss = t.mse(rec, t.input(img));
                epoch_loss += t.val(loss).data[0];
                t.backward(loss);
            }
            for (auto* p : params)
                for (auto& gv : p->grad.data) gv /= static_cast<double>(bsz);
            opt.step(params);
            idx += bsz;
        }
        epoch_loss /= static_cast<double>(pairs.size());
        if (!std::isfinite(epoch_loss))
            throw DivergedError("train_inversion_attacker: non-finite loss at epoch " +
                                std::to_string(epoch));
        if (loss_history) loss_history->push_back(epoch_loss);
    }
    return surrogate;
}

double Steganalyzer::score(const Tensor& features) const {
    Tape t;
    return t.val(const_cast<Steganalyzer*>(this)->net.apply(t, t.input(features))).data[0];
}

std::vector<Parameter*> Steganalyzer::parameters() {
    std::vector<Parameter*> out;
    net.collect(out);
    return out;
}

SteganalyzerResult train_steganalyzer(const std::vector<Tensor>& cover_features,
                                      const std::vector<Tensor>& stego_features, Rng& rng,
                                      SteganalyzerConfig cfg) {
    if (cover_features.empty() || stego_features.empty())
        throw UsageError("train_steganalyzer: both classes must be nonempty");
    const auto& shape = cover_features[0].shape;
    for (const auto& f : cover_features)
        if (f.shape != shape) throw ShapeError("train_steganalyzer: inconsistent feature shapes");
    for (const auto& f : stego_features)
        if (f.shape != shape) throw ShapeError("train_steganalyzer: inconsistent feature shapes");
    std::size_t a = cover_features.size(), b = stego_features.size();
    if (a > 10 * b || b > 10 * a)
        throw ConfigError("train_steganalyzer: class imbalance exceeds 10:1");
    if (shape.size() != 3) throw ShapeError("train_steganalyzer: features must be (c,h,w)");

    struct Sample {
        const Tensor* feat;
        double label;  // 1 = stego, 0 = cover
    };
    std::vector<Sample> samples;
    samples.reserve(a + b);
    for (const auto& f : cover_features) samples.push_back({&f, 0.0});
    for (const auto& f : stego_features) samples.push_back({&f, 1.0});

    Rng split_rng = rng.derive(0);
    Rng init_rng = rng.derive(1);
    Rng shuffle_rng = rng.derive(2);

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(split_rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i % 5 == 4 ? test_idx : train_idx).push_back(order[i]);
    if (train_idx.empty() || test_idx.empty())
        throw ConfigError("train_steganalyzer: too few samples for a train/test split");

    SteganalyzerResult out;
    out.model = Steganalyzer(shape[0], shape[1], shape[2], cfg.width, init_rng);
    auto params = out.model.parameters();
    Adam opt(AdamConfig{cfg.lr});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train_idx.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
            std::swap(train_idx[i - 1], train_idx[j]);
        }
        std::size_t idx = 0;
        double epoch_loss = 0.0;
        while (idx < train_idx.size()) {
            std::size_t bsz = std::min<std::size_t>(cfg.batch, train_idx.size() - idx);
            Adam::zero_grad(params);
            for (std::size_t bi = 0; bi < bsz; ++bi) {
                const Sample& s = samples[train_idx[idx + bi]];
                Tape t;
                Tape::Var p = out.model.net.apply(t, t.input(*s.feat));
                // BCE: -y log p - (1-y) log(1-p)
                Tape::Var one_minus = t.add_const(t.scale(p, -1.0), Tensor({1}, {1.0}));
                Tape::Var loss = t.wsum({{-s.label, t.log_clamped(p)},
                                         {-(1.0 - s.label), t.log_clamped(one_minus)}});
                epoch_loss += t.val(loss).data[0];
                t.backward(loss);
            }
            for (auto* p : params)
                for (auto& gv : p->grad.data) gv /= static_cast<double>(bsz);
            opt.step(params);
            idx += bsz;
        }
        if (!std::isfinite(epoch_loss))
            throw DivergedError("train_steganalyzer: non-finite loss at epoch " +
                                std::to_string(epoch));
    }

    std::vector<double> pos, neg;
    for (std::size_t i : test_idx) {
        double sc = out.model.score(*samples[i].feat);
        (samples[i].label > 0.5 ? pos : neg).push_back(sc);
    }
    if (pos.empty() || neg.empty())
        throw ConfigError("train_steganalyzer: test split lost a class");
    out.test_auc = auc(pos, neg);
    return out;
}

double auc(const std::vector<double>& scores_positive, const std::vector<double>& scores_negative) {
    if (scores_positive.empty() || scores_negative.empty())
        throw UsageError("auc: empty score list");
    // rank-based: sort the pooled scores, sum positive ranks (midranks on ties)
    struct Entry {
        double score;
        bool pos;
    };
    std::vector<Entry> all;
    all.reserve(scores_positive.size() + scores_negative.size());
    for (double s : scores_positive) all.push_back({s, true});
    for (double s : scores_negative) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (all[k].pos) rank_sum_pos += midrank;
        i = j;
    }
    double n1 = static_cast<double>(scores_positive.size());
    double n2 = static_cast<double>(scores_negative.size());
    double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n2);
}

}  // namespace semsteg
