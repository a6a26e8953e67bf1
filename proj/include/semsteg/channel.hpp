#pragma once

#include <string>
#include <utility>

#include "semsteg/autodiff.hpp"
#include "semsteg/rng.hpp"
#include "semsteg/tensor.hpp"

namespace semsteg {

enum class ChannelKind { awgn, rayleigh };

struct ChannelConfig {
    ChannelKind kind = ChannelKind::awgn;
    double snr_db = 10.0;
    double eve_snr_db = 10.0;
    bool equalize = true;  // rayleigh only, perfect CSI
};

// Running audit of everything the channel saw: power-contract deviations and
// deep fades. Optional everywhere.
struct ChannelStats {
    long transmissions = 0;
    double max_power_dev = 0.0;
    long deep_fades = 0;
};

ChannelKind channel_kind_from_string(const std::string& s);
std::string to_string(ChannelKind k);

double noise_variance(double snr_db);

// y = x + n, n ~ N(0, 10^(-snr_db/10)). Input must be power-normalized.
Tensor awgn(const Tensor& x, double snr_db, Rng& rng, ChannelStats* stats = nullptr);

// Slow flat fading: scalar gain h = |CN(0,1)| per transmission, E[h^2] = 1.
std::pair<Tensor, double> rayleigh(const Tensor& x, double snr_db, bool equalize, Rng& rng,
                                   ChannelStats* stats = nullptr);

// Two independent realizations of the same transmission: legitimate receiver
// at snr_db, eavesdropper at eve_snr_db.
std::pair<Tensor, Tensor> tap(const Tensor& x, const ChannelConfig& cfg, Rng& rng,
                              ChannelStats* stats = nullptr);

// Training-time noise layer. Noise and fade are constants of the realization:
// gradients pass straight through the additive term and scale through
// equalization. Same rng draw order as the tensor-level functions.
Tape::Var apply_channel(Tape& t, Tape::Var x, ChannelKind kind, double snr_db, bool equalize,
                        Rng& rng, ChannelStats* stats = nullptr);

}  // namespace semsteg
