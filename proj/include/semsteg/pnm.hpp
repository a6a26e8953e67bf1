#pragma once

#include <string>

#include "semsteg/tensor.hpp"

namespace semsteg {

// Binary NetPBM, P5 (grayscale) or P6 (RGB), maxval 255 only.
// Load maps p -> p/255; save maps v -> round(255*v) clamped to [0,255].
Tensor load_pnm(const std::string& path);
void save_pnm(const Tensor& image, const std::string& path);

}  // namespace semsteg
