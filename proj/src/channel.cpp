#include "semsteg/channel.hpp"

#include <cmath>

#include "semsteg/errors.hpp"

namespace semsteg {

namespace {

void check_power(const Tensor& x, ChannelStats* stats) {
    double dev = std::abs(x.mean_square() - 1.0);
    if (stats) {
        stats->transmissions += 1;
        if (dev > stats->max_power_dev) stats->max_power_dev = dev;
    }
    if (dev > 1e-3)
        throw ContractError("channel input not power-normalized (|mean square - 1| = " +
                            std::to_string(dev) + ")");
}

double draw_fade(Rng& rng, ChannelStats* stats) {
    double g1 = rng.gauss(), g2 = rng.gauss();
    double h = std::sqrt((g1 * g1 + g2 * g2) / 2.0);
    if (h < 1e-6 && stats) stats->deep_fades += 1;
    return h;
}

}  // namespace

ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "awgn") return ChannelKind::awgn;
    if (s == "rayleigh") return ChannelKind::rayleigh;
    throw ConfigError("unknown channel kind '" + s + "'");
}

std::string to_string(ChannelKind k) {
    return k == ChannelKind::awgn ? "awgn" : "rayleigh";
}

double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

Tensor awgn(const Tensor& x, double snr_db, Rng& rng, ChannelStats* stats) {
    check_power(x, stats);
    double sigma = std::sqrt(noise_variance(snr_db));
    Tensor y = x;
    for (auto& v : y.data) v += sigma * rng.gauss();
    return y;
}

std::pair<Tensor, double> rayleigh(const Tensor& x, double snr_db, bool equalize, Rng& rng,
                                   ChannelStats* stats) {
    check_power(x, stats);
    double h = draw_fade(rng, stats);
    double sigma = std::sqrt(noise_variance(snr_db));
    Tensor y = x;
    for (auto& v : y.data) v = h * v + sigma * rng.gauss();
    if (equalize) {
        double inv = 1.0 / (h < 1e-6 ? 1e-6 : h);
        for (auto& v : y.data) v *= inv;
    }
    return {y, h};
}

std::pair<Tensor, Tensor> tap(const Tensor& x, const ChannelConfig& cfg, Rng& rng,
                              ChannelStats* stats) {
    if (cfg.kind == ChannelKind::awgn)
        return {awgn(x, cfg.snr_db, rng, stats), awgn(x, cfg.eve_snr_db, rng, stats)};
    auto legit = rayleigh(x, cfg.snr_db, cfg.equalize, rng, stats);
    auto eve = rayleigh(x, cfg.eve_snr_db, cfg.equalize, rng, stats);
    return {legit.first, eve.first};
}

Tape::Var apply_channel(Tape& t, Tape::Var x, ChannelKind kind, double snr_db, bool equalize,
                        Rng& rng, ChannelStats* stats) {
    check_power(t.val(x), stats);
    double sigma = std::sqrt(noise_variance(snr_db));
    if (kind == ChannelKind::awgn) {
        Tensor n = Tensor::zeros(t.val(x).shape);
        for (auto& v : n.data) v = sigma * rng.gauss();
        return t.add_const(x, n);
    }
    double h = draw_fade(rng, stats);
    Tensor n = Tensor::zeros(t.val(x).shape);
    for (auto& v : n.data) v = sigma * rng.gauss();
    Tape::Var y = t.add_const(t.scale(x, h), n);
    if (equalize) y = t.scale(y, 1.0 / (h < 1e-6 ? 1e-6 : h));
    return y;
}

}  // namespace semsteg
