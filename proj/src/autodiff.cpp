#include "semsteg/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace semsteg {

namespace {

int out_extent(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

Tape::Var Tape::push(Tensor value, std::function<void(Tape&)> back, Parameter* p) {
    Node n;
    n.grad = Tensor::zeros(value.shape);
    n.value = std::move(value);
    n.back = std::move(back);
    n.param = p;
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
}

Tape::Var Tape::input(Tensor v) { return push(std::move(v), nullptr); }

Tape::Var Tape::param(Parameter& p) { return push(p.value, nullptr, &p); }

Tape::Var Tape::conv2d(Var x, Var w, Var b, int stride, int pad) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    if (xv.shape.size() != 3 || wv.shape.size() != 4)
        throw ShapeError("conv2d expects input (C,H,W) and kernel (Cout,Cin,k,k)");
    int cin = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
    int cout = wv.shape[0], k = wv.shape[2];
    if (wv.shape[1] != cin)
        throw ShapeError("conv2d: kernel Cin " + std::to_string(wv.shape[1]) +
                         " does not match input channels " + std::to_string(cin));
    if (wv.shape[3] != k) throw ShapeError("conv2d: kernel must be square");
    if (bv.shape != std::vector<int>{cout}) throw ShapeError("conv2d: bias shape");
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
    if (k > H + 2 * pad || k > W + 2 * pad) throw ShapeError("conv2d: kernel larger than padded input");

    int Ho = out_extent(H, k, stride, pad), Wo = out_extent(W, k, stride, pad);
    Tensor y = Tensor::zeros({cout, Ho, Wo});
    // direct cross-correlation, no kernel flip
    for (int co = 0; co < cout; ++co) {
        for (int oy = 0; oy < Ho; ++oy) {
            for (int ox = 0; ox < Wo; ++ox) {
                double acc = bv.data[co];
                int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                for (int ci = 0; ci < cin; ++ci) {
                    const double* xp = &xv.data[(static_cast<std::size_t>(ci) * H) * W];
                    const double* wp = &wv.data[((static_cast<std::size_t>(co) * cin + ci) * k) * k];
                    for (int ky = 0; ky < k; ++ky) {
                        int iy = iy0 + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int ix = ix0 + kx;
                            if (ix < 0 || ix >= W) continue;
                            acc += xp[iy * W + ix] * wp[ky * k + kx];
                        }
                    }
                }
                y.data[(static_cast<std::size_t>(co) * Ho + oy) * Wo + ox] = acc;
            }
        }
    }
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, w, b, stride, pad, cin, cout, H, W, k, Ho, Wo](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        const Tensor& wv = t.val(w);
        Tensor& gx = t.g(x);
        Tensor& gw = t.g(w);
        Tensor& gb = t.g(b);
        for (int co = 0; co < cout; ++co) {
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    double gyv = gy.data[(static_cast<std::size_t>(co) * Ho + oy) * Wo + ox];
                    if (gyv == 0.0) continue;
                    gb.data[co] += gyv;
                    int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                    for (int ci = 0; ci < cin; ++ci) {
                        const double* xp = &xv.data[(static_cast<std::size_t>(ci) * H) * W];
                        const double* wp = &wv.data[((static_cast<std::size_t>(co) * cin + ci) * k) * k];
                        double* gxp = &gx.data[(static_cast<std::size_t>(ci) * H) * W];
                        double* gwp = &gw.data[((static_cast<std::size_t>(co) * cin + ci) * k) * k];
                        for (int ky = 0; ky < k; ++ky) {
                            int iy = iy0 + ky;
                            if (iy < 0 || iy >= H) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                int ix = ix0 + kx;
                                if (ix < 0 || ix >= W) continue;
                                gxp[iy * W + ix] += gyv * wp[ky * k + kx];
                                gwp[ky * k + kx] += gyv * xp[iy * W + ix];
                            }
                        }
                    }
                }
            }
        }
    };
    return o;
}

Tape::Var Tape::conv2d_transpose(Var x, Var w, Var b, int stride, int pad, int out_pad) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    if (xv.shape.size() != 3 || wv.shape.size() != 4)
        throw ShapeError("conv2d_transpose expects input (C,H,W) and kernel (Cin,Cout,k,k)");
    int cin = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
    int cout = wv.shape[1], k = wv.shape[2];
    if (wv.shape[0] != cin) throw ShapeError("conv2d_transpose: kernel Cin mismatch");
    if (wv.shape[3] != k) throw ShapeError("conv2d_transpose: kernel must be square");
    if (bv.shape != std::vector<int>{cout}) throw ShapeError("conv2d_transpose: bias shape");
    int Ho = (H - 1) * stride - 2 * pad + k + out_pad;
    int Wo = (W - 1) * stride - 2 * pad + k + out_pad;
    if (Ho <= 0 || Wo <= 0) throw ShapeError("conv2d_transpose: non-positive output extent");

    Tensor y = Tensor::zeros({cout, Ho, Wo});
    for (int co = 0; co < cout; ++co)
        for (std::size_t i = 0; i < static_cast<std::size_t>(Ho) * Wo; ++i)
            y.data[static_cast<std::size_t>(co) * Ho * Wo + i] = bv.data[co];
    for (int ci = 0; ci < cin; ++ci) {
        const double* xp = &xv.data[(static_cast<std::size_t>(ci) * H) * W];
        for (int iy = 0; iy < H; ++iy) {
            for (int ix = 0; ix < W; ++ix) {
                double xval = xp[iy * W + ix];
                if (xval == 0.0) continue;
                int oy0 = iy * stride - pad, ox0 = ix * stride - pad;
                for (int co = 0; co < cout; ++co) {
                    const double* wp = &wv.data[((static_cast<std::size_t>(ci) * cout + co) * k) * k];
                    double* yp = &y.data[(static_cast<std::size_t>(co) * Ho) * Wo];
                    for (int ky = 0; ky < k; ++ky) {
                        int oy = oy0 + ky;
                        if (oy < 0 || oy >= Ho) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int ox = ox0 + kx;
                            if (ox < 0 || ox >= Wo) continue;
                            yp[oy * Wo + ox] += xval * wp[ky * k + kx];
                        }
                    }
                }
            }
        }
    }
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, w, b, stride, pad, cin, cout, H, W, k, Ho, Wo](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        const Tensor& wv = t.val(w);
        Tensor& gx = t.g(x);
        Tensor& gw = t.g(w);
        Tensor& gb = t.g(b);
        for (int co = 0; co < cout; ++co) {
            const double* gyp = &gy.data[(static_cast<std::size_t>(co) * Ho) * Wo];
            double acc = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(Ho) * Wo; ++i) acc += gyp[i];
            gb.data[co] += acc;
        }
        for (int ci = 0; ci < cin; ++ci) {
            const double* xp = &xv.data[(static_cast<std::size_t>(ci) * H) * W];
            double* gxp = &gx.data[(static_cast<std::size_t>(ci) * H) * W];
            for (int iy = 0; iy < H; ++iy) {
                for (int ix = 0; ix < W; ++ix) {
                    int oy0 = iy * stride - pad, ox0 = ix * stride - pad;
                    double xval = xp[iy * W + ix];
                    double gxacc = 0.0;
                    for (int co = 0; co < cout; ++co) {
                        const double* wp = &wv.data[((static_cast<std::size_t>(ci) * cout + co) * k) * k];
                        double* gwp = &gw.data[((static_cast<std::size_t>(ci) * cout + co) * k) * k];
                        const double* gyp = &gy.data[(static_cast<std::size_t>(co) * Ho) * Wo];
                        for (int ky = 0; ky < k; ++ky) {
                            int oy = oy0 + ky;
                            if (oy < 0 || oy >= Ho) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                int ox = ox0 + kx;
                                if (ox < 0 || ox >= Wo) continue;
                                double gyv = gyp[oy * Wo + ox];
                                gxacc += gyv * wp[ky * k + kx];
                                gwp[ky * k + kx] += gyv * xval;
                            }
                        }
                    }
                    gxp[iy * W + ix] += gxacc;
                }
            }
        }
    };
    return o;
}

Tape::Var Tape::dense(Var x, Var w, Var b) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    if (xv.shape.size() != 1) throw ShapeError("dense expects a flat input");
    if (wv.shape.size() != 2 || wv.shape[1] != xv.shape[0])
        throw ShapeError("dense: weight (M,N) does not match input length");
    int M = wv.shape[0], N = wv.shape[1];
    if (bv.shape != std::vector<int>{M}) throw ShapeError("dense: bias shape");
    Tensor y = Tensor::zeros({M});
    for (int m = 0; m < M; ++m) {
        double acc = bv.data[m];
        const double* wp = &wv.data[static_cast<std::size_t>(m) * N];
        for (int n = 0; n < N; ++n) acc += wp[n] * xv.data[n];
        y.data[m] = acc;
    }
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, w, b, M, N](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        const Tensor& wv = t.val(w);
        Tensor& gx = t.g(x);
        Tensor& gw = t.g(w);
        Tensor& gb = t.g(b);
        for (int m = 0; m < M; ++m) {
            double gyv = gy.data[m];
            gb.data[m] += gyv;
            const double* wp = &wv.data[static_cast<std::size_t>(m) * N];
            double* gwp = &gw.data[static_cast<std::size_t>(m) * N];
            for (int n = 0; n < N; ++n) {
                gx.data[n] += gyv * wp[n];
                gwp[n] += gyv * xv.data[n];
            }
        }
    };
    return o;
}

Tape::Var Tape::leaky_relu(Var x, double alpha) {
    const Tensor& xv = val(x);
    Tensor y = xv;
    for (auto& v : y.data) v = v >= 0.0 ? v : alpha * v;
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, alpha](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += gy.data[i] * (xv.data[i] >= 0.0 ? 1.0 : alpha);
    };
    return o;
}

Tape::Var Tape::sigmoid(Var x) {
    Tensor y = val(x);
    for (auto& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& yv = t.val(o);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += gy.data[i] * yv.data[i] * (1.0 - yv.data[i]);
    };
    return o;
}

Tape::Var Tape::tanh(Var x) {
    Tensor y = val(x);
    for (auto& v : y.data) v = std::tanh(v);
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& yv = t.val(o);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += gy.data[i] * (1.0 - yv.data[i] * yv.data[i]);
    };
    return o;
}

Tape::Var Tape::concat_channels(Var a, Var b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (av.shape.size() != 3 || bv.shape.size() != 3 || av.shape[1] != bv.shape[1] ||
        av.shape[2] != bv.shape[2])
        throw ShapeError("concat_channels: inputs must be (C,H,W) with matching H,W");
    Tensor y = Tensor::zeros({av.shape[0] + bv.shape[0], av.shape[1], av.shape[2]});
    std::copy(av.data.begin(), av.data.end(), y.data.begin());
    std::copy(bv.data.begin(), bv.data.end(), y.data.begin() + av.data.size());
    Var o = push(std::move(y), nullptr);
    std::size_t na = av.data.size();
    nodes_[static_cast<std::size_t>(o)].back = [o, a, b, na](Tape& t) {
        const Tensor& gy = t.g(o);
        Tensor& ga = t.g(a);
        Tensor& gb = t.g(b);
        for (std::size_t i = 0; i < na; ++i) ga.data[i] += gy.data[i];
        for (std::size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += gy.data[na + i];
    };
    return o;
}

std::pair<Tape::Var, Tape::Var> Tape::split_channels(Var x, int c) {
    const Tensor& xv = val(x);
    if (xv.shape.size() != 3) throw ShapeError("split_channels expects (C,H,W)");
    int C = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
    if (c <= 0 || c >= C) throw ShapeError("split_channels: split point out of range");
    std::size_t na = static_cast<std::size_t>(c) * H * W;
    Tensor ya({c, H, W}, std::vector<double>(xv.data.begin(), xv.data.begin() + na));
    Tensor yb({C - c, H, W}, std::vector<double>(xv.data.begin() + na, xv.data.end()));
    Var oa = push(std::move(ya), nullptr);
    nodes_[static_cast<std::size_t>(oa)].back = [oa, x](Tape& t) {
        const Tensor& gy = t.g(oa);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gy.data.size(); ++i) gx.data[i] += gy.data[i];
    };
    Var ob = push(std::move(yb), nullptr);
    nodes_[static_cast<std::size_t>(ob)].back = [ob, x, na](Tape& t) {
        const Tensor& gy = t.g(ob);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gy.data.size(); ++i) gx.data[na + i] += gy.data[i];
    };
    return {oa, ob};
}

Tape::Var Tape::flatten(Var x) {
    const Tensor& xv = val(x);
    Tensor y({static_cast<int>(xv.data.size())}, xv.data);
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x](Tape& t) {
        const Tensor& gy = t.g(o);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += gy.data[i];
    };
    return o;
}

Tape::Var Tape::add(Var a, Var b) { return wsum({{1.0, a}, {1.0, b}}); }
Tape::Var Tape::sub(Var a, Var b) { return wsum({{1.0, a}, {-1.0, b}}); }

Tape::Var Tape::mul(Var a, Var b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (!av.same_shape(bv)) throw ShapeError("mul: shape mismatch");
    Tensor y = av;
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= bv.data[i];
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, a, b](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& av = t.val(a);
        const Tensor& bv = t.val(b);
        Tensor& ga = t.g(a);
        Tensor& gb = t.g(b);
        for (std::size_t i = 0; i < gy.data.size(); ++i) {
            ga.data[i] += gy.data[i] * bv.data[i];
            gb.data[i] += gy.data[i] * av.data[i];
        }
    };
    return o;
}

Tape::Var Tape::scale(Var a, double s) { return wsum({{s, a}}); }

Tape::Var Tape::add_const(Var a, const Tensor& t) {
    const Tensor& av = val(a);
    if (!av.same_shape(t)) throw ShapeError("add_const: shape mismatch");
    Tensor y = av;
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += t.data[i];
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, a](Tape& t2) {
        const Tensor& gy = t2.g(o);
        Tensor& ga = t2.g(a);
        for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += gy.data[i];
    };
    return o;
}

Tape::Var Tape::wsum(const std::vector<std::pair<double, Var>>& terms) {
    if (terms.empty()) throw UsageError("wsum: no terms");
    Tensor y = Tensor::zeros(val(terms[0].second).shape);
    for (const auto& [coef, v] : terms) {
        const Tensor& tv = val(v);
        if (!tv.same_shape(y)) throw ShapeError("wsum: shape mismatch");
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += coef * tv.data[i];
    }
    Var o = push(std::move(y), nullptr);
    auto terms_copy = terms;
    nodes_[static_cast<std::size_t>(o)].back = [o, terms_copy](Tape& t) {
        const Tensor& gy = t.g(o);
        for (const auto& [coef, v] : terms_copy) {
            Tensor& gv = t.g(v);
            for (std::size_t i = 0; i < gv.data.size(); ++i) gv.data[i] += coef * gy.data[i];
        }
    };
    return o;
}

Tape::Var Tape::power_normalize(Var x) {
    const Tensor& xv = val(x);
    double ms = xv.mean_square();
    if (ms < 1e-300) throw DegenerateSignalError("power_normalize on all-zero tensor");
    double s = std::sqrt(ms);
    Tensor y = xv;
    for (auto& v : y.data) v /= s;
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, s](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        Tensor& gx = t.g(x);
        double n = static_cast<double>(xv.data.size());
        double dot = 0.0;
        for (std::size_t i = 0; i < gy.data.size(); ++i) dot += gy.data[i] * xv.data[i];
        double s3 = s * s * s;
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += gy.data[i] / s - xv.data[i] * dot / (n * s3);
    };
    return o;
}

Tape::Var Tape::mse(Var a, Var b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    if (!av.same_shape(bv)) throw ShapeError("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < av.data.size(); ++i) {
        double d = av.data[i] - bv.data[i];
        acc += d * d;
    }
    double n = static_cast<double>(av.data.size());
    Var o = push(Tensor({1}, {acc / n}), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, a, b, n](Tape& t) {
        double gy = t.g(o).data[0];
        const Tensor& av = t.val(a);
        const Tensor& bv = t.val(b);
        Tensor& ga = t.g(a);
        Tensor& gb = t.g(b);
        for (std::size_t i = 0; i < av.data.size(); ++i) {
            double d = 2.0 * (av.data[i] - bv.data[i]) / n * gy;
            ga.data[i] += d;
            gb.data[i] -= d;
        }
    };
    return o;
}

Tape::Var Tape::mean(Var x) {
    const Tensor& xv = val(x);
    double n = static_cast<double>(xv.data.size());
    double acc = 0.0;
    for (double v : xv.data) acc += v;
    Var o = push(Tensor({1}, {acc / n}), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, n](Tape& t) {
        double gy = t.g(o).data[0];
        Tensor& gx = t.g(x);
        for (auto& v : gx.data) v += gy / n;
    };
    return o;
}

Tape::Var Tape::variance(Var x) {
    const Tensor& xv = val(x);
    double n = static_cast<double>(xv.data.size());
    double mu = 0.0;
    for (double v : xv.data) mu += v;
    mu /= n;
    double acc = 0.0;
    for (double v : xv.data) acc += (v - mu) * (v - mu);
    Var o = push(Tensor({1}, {acc / n}), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, n, mu](Tape& t) {
        double gy = t.g(o).data[0];
        const Tensor& xv = t.val(x);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            gx.data[i] += gy * 2.0 * (xv.data[i] - mu) / n;
    };
    return o;
}

Tape::Var Tape::sum(Var x) {
    const Tensor& xv = val(x);
    double acc = 0.0;
    for (double v : xv.data) acc += v;
    Var o = push(Tensor({1}, {acc}), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x](Tape& t) {
        double gy = t.g(o).data[0];
        Tensor& gx = t.g(x);
        for (auto& v : gx.data) v += gy;
    };
    return o;
}

Tape::Var Tape::log_clamped(Var x, double lo, double hi) {
    const Tensor& xv = val(x);
    Tensor y = xv;
    for (auto& v : y.data) v = std::log(std::clamp(v, lo, hi));
    Var o = push(std::move(y), nullptr);
    nodes_[static_cast<std::size_t>(o)].back = [o, x, lo, hi](Tape& t) {
        const Tensor& gy = t.g(o);
        const Tensor& xv = t.val(x);
        Tensor& gx = t.g(x);
        for (std::size_t i = 0; i < gx.data.size(); ++i) {
            double v = xv.data[i];
            if (v > lo && v < hi) gx.data[i] += gy.data[i] / v;
        }
    };
    return o;
}

void Tape::backward(Var loss) {
    int l = check(loss);
    if (nodes_[static_cast<std::size_t>(l)].value.size() != 1)
        throw UsageError("backward requires a scalar loss");
    g(loss).data[0] = 1.0;
    for (int i = l; i >= 0; --i) {
        auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.back) n.back(*this);
    }
    for (auto& n : nodes_) {
        if (n.param) {
            for (std::size_t i = 0; i < n.grad.data.size(); ++i)
                n.param->grad.data[i] += n.grad.data[i];
        }
    }
    ran_backward_ = true;
}

}  // namespace semsteg
