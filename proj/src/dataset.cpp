#include "semsteg/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "semsteg/errors.hpp"

namespace semsteg {

namespace {

void add_gradient(Tensor& img, Rng& rng) {
    int C = img.shape[0], H = img.shape[1], W = img.shape[2];
    double gx = rng.uniform(-1.0, 1.0), gy = rng.uniform(-1.0, 1.0);
    double off = rng.uniform();
    for (int c = 0; c < C; ++c) {
        double amp = rng.uniform(0.3, 1.0);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                img.data[(static_cast<std::size_t>(c) * H + y) * W + x] +=
                    amp * (off + gx * x / W + gy * y / H);
    }
}

void add_rect(Tensor& img, Rng& rng) {
    int C = img.shape[0], H = img.shape[1], W = img.shape[2];
    int x0 = static_cast<int>(rng.uniform() * W * 0.8);
    int y0 = static_cast<int>(rng.uniform() * H * 0.8);
    int rw = 2 + static_cast<int>(rng.uniform() * W * 0.5);
    int rh = 2 + static_cast<int>(rng.uniform() * H * 0.5);
    for (int c = 0; c < C; ++c) {
        double v = rng.uniform(-0.8, 0.8);
        for (int y = y0; y < std::min(H, y0 + rh); ++y)
            for (int x = x0; x < std::min(W, x0 + rw); ++x)
                img.data[(static_cast<std::size_t>(c) * H + y) * W + x] += v;
    }
}

void add_circle(Tensor& img, Rng& rng) {
    int C = img.shape[0], H = img.shape[1], W = img.shape[2];
    double cx = rng.uniform() * W, cy = rng.uniform() * H;
    double r = (0.1 + 0.3 * rng.uniform()) * std::min(H, W);
    for (int c = 0; c < C; ++c) {
        double v = rng.uniform(-0.8, 0.8);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                    img.data[(static_cast<std::size_t>(c) * H + y) * W + x] += v;
    }
}

void add_sinusoid(Tensor& img, Rng& rng) {
    int C = img.shape[0], H = img.shape[1], W = img.shape[2];
    // band-limited: at most 4 cycles across the image
    double fx = rng.uniform(0.5, 4.0) / W, fy = rng.uniform(0.5, 4.0) / H;
    double ph = rng.uniform(0.0, 6.283185307179586);
    for (int c = 0; c < C; ++c) {
        double amp = rng.uniform(0.1, 0.4);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                img.data[(static_cast<std::size_t>(c) * H + y) * W + x] +=
                    amp * std::sin(6.283185307179586 * (fx * x + fy * y) + ph);
    }
}

void rescale_01(Tensor& img) {
    double lo = img.data[0], hi = img.data[0];
    for (double v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) {
        std::fill(img.data.begin(), img.data.end(), 0.5);
        return;
    }
    for (auto& v : img.data) v = (v - lo) / (hi - lo);
}

}  // namespace

std::vector<Tensor> synth_dataset(std::uint64_t seed, int n, const std::vector<int>& shape) {
    if (n < 1) throw ConfigError("synth_dataset: n must be >= 1");
    if (shape.size() != 3) throw ConfigError("synth_dataset: shape must be (C,H,W)");
    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(n));
    Rng base(seed);
    for (int i = 0; i < n; ++i) {
        Rng rng = base.derive(static_cast<std::uint64_t>(i));
        Tensor img = Tensor::zeros(shape);
        add_gradient(img, rng);
        int n_shapes = 1 + static_cast<int>(rng.uniform() * 3.0);
        for (int s = 0; s < n_shapes; ++s) {
            double pick = rng.uniform();
            if (pick < 0.5)
                add_rect(img, rng);
            else
                add_circle(img, rng);
        }
        add_sinusoid(img, rng);
        rescale_01(img);
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<std::pair<Tensor, Tensor>> synth_pairs(std::uint64_t seed, int n,
                                                   const std::vector<int>& shape) {
    auto imgs = synth_dataset(seed, 2 * n, shape);
    std::vector<std::pair<Tensor, Tensor>> pairs;
    pairs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pairs.push_back({std::move(imgs[i]), std::move(imgs[i + n])});
    return pairs;
}

}  // namespace semsteg
