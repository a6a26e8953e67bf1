#include "semsteg/metrics.hpp"

#include <cmath>

namespace semsteg {

double mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    double m = mse(a, b);
    if (m < 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(peak * peak / m));
}

double ssim(const Tensor& a, const Tensor& b, double peak) {
    if (!a.same_shape(b)) throw ShapeError("ssim: shape mismatch");
    if (a.shape.size() != 3) throw ShapeError("ssim expects (C,H,W)");
    int C = a.shape[0], H = a.shape[1], W = a.shape[2];
    if (H < 8 || W < 8) throw ShapeError("ssim: image must be at least 8x8");
    const int win = 8, stride = 4;
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);

    double total = 0.0;
    long windows = 0;
    for (int ch = 0; ch < C; ++ch) {
        const double* pa = &a.data[static_cast<std::size_t>(ch) * H * W];
        const double* pb = &b.data[static_cast<std::size_t>(ch) * H * W];
        for (int y = 0; y + win <= H; y += stride) {
            for (int x = 0; x + win <= W; x += stride) {
                double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                for (int dy = 0; dy < win; ++dy) {
                    for (int dx = 0; dx < win; ++dx) {
                        double va = pa[(y + dy) * W + x + dx];
                        double vb = pb[(y + dy) * W + x + dx];
                        sa += va;
                        sb += vb;
                        saa += va * va;
                        sbb += vb * vb;
                        sab += va * vb;
                    }
                }
                double n = win * win;
                double mua = sa / n, mub = sb / n;
                double vara = saa / n - mua * mua;
                double varb = sbb / n - mub * mub;
                double cov = sab / n - mua * mub;
                double val = ((2 * mua * mub + c1) * (2 * cov + c2)) /
                             ((mua * mua + mub * mub + c1) * (vara + varb + c2));
                total += val;
                windows += 1;
            }
        }
    }
    return total / static_cast<double>(windows);
}

}  // namespace semsteg
