#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "semsteg/autodiff.hpp"
#include "semsteg/rng.hpp"

namespace semsteg {

// Xavier/Glorot uniform init from the model's seeded rng; biases start at zero.
inline void glorot_init(Tensor& t, int fan_in, int fan_out, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.data) v = rng.uniform(-limit, limit);
}

struct Conv2d {
    Parameter w, b;
    int stride = 1, pad = 0;

    Conv2d() = default;
    Conv2d(const std::string& name, int cin, int cout, int k, int stride_, int pad_, Rng& rng,
           bool zero_init = false)
        : w(name + ".w", Tensor::zeros({cout, cin, k, k})),
          b(name + ".b", Tensor::zeros({cout})),
          stride(stride_),
          pad(pad_) {
        if (!zero_init) glorot_init(w.value, cin * k * k, cout * k * k, rng);
    }

    Tape::Var apply(Tape& t, Tape::Var x) {
        return t.conv2d(x, t.param(w), t.param(b), stride, pad);
    }

    std::vector<Parameter*> parameters() { return {&w, &b}; }
};

struct ConvT2d {
    Parameter w, b;
    int stride = 1, pad = 0, out_pad = 0;

    ConvT2d() = default;
    ConvT2d(const std::string& name, int cin, int cout, int k, int stride_, int pad_, Rng& rng,
            int out_pad_ = 0, bool zero_init = false)
        : w(name + ".w", Tensor::zeros({cin, cout, k, k})),
          b(name + ".b", Tensor::zeros({cout})),
          stride(stride_),
          pad(pad_),
          out_pad(out_pad_) {
        if (!zero_init) glorot_init(w.value, cin * k * k, cout * k * k, rng);
    }

    Tape::Var apply(Tape& t, Tape::Var x) {
        return t.conv2d_transpose(x, t.param(w), t.param(b), stride, pad, out_pad);
    }

    std::vector<Parameter*> parameters() { return {&w, &b}; }
};

struct Dense {
    Parameter w, b;

    Dense() = default;
    Dense(const std::string& name, int in, int out, Rng& rng, bool zero_init = false)
        : w(name + ".w", Tensor::zeros({out, in})), b(name + ".b", Tensor::zeros({out})) {
        if (!zero_init) glorot_init(w.value, in, out, rng);
    }

    Tape::Var apply(Tape& t, Tape::Var x) { return t.dense(x, t.param(w), t.param(b)); }

    std::vector<Parameter*> parameters() { return {&w, &b}; }
};

inline std::int64_t param_count(const std::vector<Parameter*>& ps) {
    std::int64_t n = 0;
    for (const auto* p : ps) n += p->value.size();
    return n;
}

}  // namespace semsteg
