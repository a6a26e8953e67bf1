#pragma once

#include <string>
#include <vector>

#include "semsteg/autodiff.hpp"
#include "semsteg/errors.hpp"

#include "json.hpp"

namespace semsteg {

// "SSCKPT1" container: text header listing (name, shape, offset) per tensor
// plus a config echo, followed by raw little-endian float64 payload in header
// order. Round-trips are bit-exact.

struct MagicMismatchError : FormatError {
    explicit MagicMismatchError(const std::string& m) : FormatError("magic mismatch: " + m) {}
};
struct TruncatedCheckpointError : FormatError {
    explicit TruncatedCheckpointError(const std::string& m) : FormatError("truncated checkpoint: " + m) {}
};
struct ShapeConflictError : ShapeError {
    explicit ShapeConflictError(const std::string& m) : ShapeError("checkpoint shape conflict: " + m) {}
};

void save_checkpoint(const std::vector<Parameter*>& params, const nlohmann::json& config_echo,
                     const std::string& path);

// Loads into an already-constructed model: every parameter must be present in
// the file with a matching shape.
nlohmann::json load_checkpoint(const std::vector<Parameter*>& params, const std::string& path);

// Reads just the config echo (to reconstruct the model before loading).
nlohmann::json peek_checkpoint_config(const std::string& path);

}  // namespace semsteg
