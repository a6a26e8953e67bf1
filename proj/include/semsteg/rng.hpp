#pragma once

#include <cmath>
#include <cstdint>

#include "semsteg/tensor.hpp"

namespace semsteg {

// Counter-based seeded generator: output i depends only on (seed, i), so the
// stream is reproducible for a fixed seed regardless of how state was reached.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), ctr_(0) {}

    std::uint64_t next_u64() { return mix(seed_, ctr_++); }

    // [0,1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the paired draw is cached so no entropy is wasted.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Tensor gauss_tensor(const std::vector<int>& shape) {
        Tensor t = Tensor::zeros(shape);
        for (auto& v : t.data) v = gauss();
        return t;
    }

    // Independent stream for a worker/sub-task.
    Rng derive(std::uint64_t worker_index) const {
        return Rng(mix(seed_ ^ 0x9e3779b97f4a7c15ull, worker_index));
    }

    std::uint64_t seed() const { return seed_; }

  private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t ctr) {
        // splitmix64 finalizer over a seed/counter combination
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (ctr + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t ctr_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace semsteg
