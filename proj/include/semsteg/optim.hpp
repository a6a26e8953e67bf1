#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "semsteg/autodiff.hpp"
#include "semsteg/errors.hpp"

namespace semsteg {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment state is keyed per parameter; a step with
// a non-finite gradient aborts without touching the parameter.
class Adam {
  public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.lr <= 0.0) throw ConfigError("adam: lr must be > 0");
        if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
            throw ConfigError("adam: betas must be in [0,1)");
    }

    void step(const std::vector<Parameter*>& params) {
        for (auto* p : params)
            if (!p->grad.all_finite())
                throw DivergedError("non-finite gradient in parameter '" + p->name + "'");
        for (auto* p : params) {
            State& st = state_[p];
            if (st.m.data.empty()) {
                st.m = Tensor::zeros(p->value.shape);
                st.v = Tensor::zeros(p->value.shape);
            }
            st.t += 1;
            double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(st.t));
            double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(st.t));
            for (std::size_t i = 0; i < p->value.data.size(); ++i) {
                double gr = p->grad.data[i];
                st.m.data[i] = cfg_.beta1 * st.m.data[i] + (1.0 - cfg_.beta1) * gr;
                st.v.data[i] = cfg_.beta2 * st.v.data[i] + (1.0 - cfg_.beta2) * gr * gr;
                double mhat = st.m.data[i] / bc1;
                double vhat = st.v.data[i] / bc2;
                p->value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    static void zero_grad(const std::vector<Parameter*>& params) {
        for (auto* p : params) p->zero_grad();
    }

  private:
    struct State {
        Tensor m, v;
        long t = 0;
    };
    AdamConfig cfg_;
    std::unordered_map<Parameter*, State> state_;
};

}  // namespace semsteg
