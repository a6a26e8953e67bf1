#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "semsteg/tensor.hpp"

namespace semsteg {

// A trainable weight. Gradients accumulate into `grad` across tape backward
// passes until the optimizer consumes and clears them.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape)) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Dynamic reverse-mode tape. Each op records a closure that scatters the
// output gradient back to its inputs. One tape per forward pass.
class Tape {
  public:
    using Var = int;

    Var input(Tensor v);             // constant leaf (no gradient requested)
    Var param(Parameter& p);         // trainable leaf; backward() adds into p.grad

    const Tensor& val(Var v) const { return nodes_[check(v)].value; }
    const Tensor& grad_of(Var v) const { return nodes_[check(v)].grad; }

    // layers
    Var conv2d(Var x, Var w, Var b, int stride, int pad);
    Var conv2d_transpose(Var x, Var w, Var b, int stride, int pad, int out_pad = 0);
    Var dense(Var x, Var w, Var b);
    Var leaky_relu(Var x, double alpha);
    Var sigmoid(Var x);
    Var tanh(Var x);
    Var concat_channels(Var a, Var b);
    std::pair<Var, Var> split_channels(Var x, int c);
    Var flatten(Var x);

    // arithmetic
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);           // elementwise
    Var scale(Var a, double s);
    Var add_const(Var a, const Tensor& t);   // straight-through additive term
    Var wsum(const std::vector<std::pair<double, Var>>& terms);

    // reductions / normalizers
    Var power_normalize(Var x);      // x / sqrt(mean(x^2))
    Var mse(Var a, Var b);           // scalar
    Var mean(Var x);                 // scalar
    Var variance(Var x);             // scalar, biased
    Var sum(Var x);                  // scalar
    Var log_clamped(Var x, double lo = 1e-7, double hi = 1.0 - 1e-7);

    void backward(Var loss);

    std::size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> back;  // null for leaves
        Parameter* param = nullptr;
    };

    int check(Var v) const {
        if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size())
            throw UsageError("invalid tape variable (no recorded forward for it)");
        return v;
    }

    Var push(Tensor value, std::function<void(Tape&)> back, Parameter* p = nullptr);
    Tensor& g(Var v) { return nodes_[static_cast<std::size_t>(v)].grad; }

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace semsteg
