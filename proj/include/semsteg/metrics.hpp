#pragma once

#include "semsteg/tensor.hpp"

namespace semsteg {

// 10*log10(peak^2/MSE), capped at 100 dB so reports stay finite.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// 8x8 uniform window, stride 4, C1=(0.01*peak)^2, C2=(0.03*peak)^2, averaged
// over windows and channels.
double ssim(const Tensor& a, const Tensor& b, double peak = 1.0);

double mse(const Tensor& a, const Tensor& b);

}  // namespace semsteg
