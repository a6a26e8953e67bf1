#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "semsteg/autodiff.hpp"
#include "semsteg/layers.hpp"
#include "semsteg/optim.hpp"
#include "semsteg/rng.hpp"

using namespace semsteg;

namespace {

// central finite differences against the tape gradient, over every parameter
// element; returns the max relative error (relative to max(|fd|, 1e-6))
double fd_check(std::vector<Parameter*> params,
                const std::function<double(Tape&)>& loss_fwd,
                const std::function<Tape::Var(Tape&)>& loss_var) {
    Tape t;
    Tape::Var l = loss_var(t);
    t.backward(l);

    const double eps = 1e-5;
    double worst = 0.0;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.data.size(); ++i) {
            double saved = p->value.data[i];
            p->value.data[i] = saved + eps;
            Tape tp;
            double fp = loss_fwd(tp);
            p->value.data[i] = saved - eps;
            Tape tm;
            double fm = loss_fwd(tm);
            p->value.data[i] = saved;
            double fd = (fp - fm) / (2.0 * eps);
            double ad = p->grad.data[i];
            double rel = std::abs(ad - fd) / std::max(std::abs(fd), 1e-6);
            worst = std::max(worst, rel);
        }
        p->zero_grad();
    }
    return worst;
}

// keeps inputs away from leaky_relu kinks so finite differences are valid
Tensor smooth_gauss(Rng& rng, const std::vector<int>& shape) {
    Tensor t = rng.gauss_tensor(shape);
    for (auto& v : t.data)
        if (std::abs(v) < 0.05) v = (v < 0 ? -0.05 : 0.05);
    return t;
}

}  // namespace

TEST_CASE("hand-computed conv2d forward") {
    // 1x3x3 input, single 2x2 kernel of ones, stride 1, no pad:
    // each output = sum of the 2x2 window
    Parameter w("w", Tensor({1, 1, 2, 2}, {1, 1, 1, 1}));
    Parameter b("b", Tensor({1}, {0.5}));
    Tape t;
    Tape::Var x = t.input(Tensor({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    Tape::Var y = t.conv2d(x, t.param(w), t.param(b), 1, 0);
    require_shape(t.val(y), {1, 2, 2}, "conv out");
    CHECK(t.val(y).data[0] == doctest::Approx(1 + 2 + 4 + 5 + 0.5));
    CHECK(t.val(y).data[1] == doctest::Approx(2 + 3 + 5 + 6 + 0.5));
    CHECK(t.val(y).data[2] == doctest::Approx(4 + 5 + 7 + 8 + 0.5));
    CHECK(t.val(y).data[3] == doctest::Approx(5 + 6 + 8 + 9 + 0.5));
}

TEST_CASE("conv2d stride/pad output shapes") {
    Rng rng(3);
    Parameter w("w", rng.gauss_tensor({4, 2, 3, 3}));
    Parameter b("b", Tensor::zeros({4}));
    Tape t;
    Tape::Var x = t.input(rng.gauss_tensor({2, 8, 8}));
    CHECK(t.val(t.conv2d(x, t.param(w), t.param(b), 1, 1)).shape == std::vector<int>{4, 8, 8});
    CHECK(t.val(t.conv2d(x, t.param(w), t.param(b), 2, 1)).shape == std::vector<int>{4, 4, 4});
}

TEST_CASE("conv2d_transpose inverts conv2d's shape map") {
    Rng rng(4);
    Parameter w("w", rng.gauss_tensor({2, 3, 4, 4}));
    Parameter b("b", Tensor::zeros({3}));
    Tape t;
    Tape::Var x = t.input(rng.gauss_tensor({2, 4, 4}));
    // k=4, s=2, p=1: 4 -> 8
    CHECK(t.val(t.conv2d_transpose(x, t.param(w), t.param(b), 2, 1)).shape ==
          std::vector<int>{3, 8, 8});
}

TEST_CASE("hand-computed conv2d_transpose") {
    // 1x1 input value 2, kernel 2x2 {1,2,3,4}, stride 1, pad 0 -> 2x2 scaled kernel
    Parameter w("w", Tensor({1, 1, 2, 2}, {1, 2, 3, 4}));
    Parameter b("b", Tensor({1}, {0}));
    Tape t;
    Tape::Var x = t.input(Tensor({1, 1, 1}, {2}));
    Tape::Var y = t.conv2d_transpose(x, t.param(w), t.param(b), 1, 0);
    require_shape(t.val(y), {1, 2, 2}, "tconv out");
    CHECK(t.val(y).data == std::vector<double>{2, 4, 6, 8});
}

TEST_CASE("finite-difference oracle for every layer type, 10 seeds") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Tensor xin = rng.gauss_tensor({2, 4, 4});
        Parameter cw("cw", rng.gauss_tensor({3, 2, 3, 3}));
        Parameter cb("cb", rng.gauss_tensor({3}));
        Parameter tw("tw", rng.gauss_tensor({2, 3, 4, 4}));
        Parameter tb("tb", rng.gauss_tensor({3}));
        Parameter dw("dw", rng.gauss_tensor({3, 32}));
        Parameter db("db", rng.gauss_tensor({3}));
        Tensor z344 = Tensor::zeros({3, 4, 4});
        Tensor z388 = Tensor::zeros({3, 8, 8});
        Tensor z3 = Tensor::zeros({3});

        // each op exercised with FD at its own (kink-free) operating point;
        // kinked ops (leaky_relu, log_clamped) work on conv/sigmoid outputs
        // whose values sit away from the kink with overwhelming probability
        struct Case {
            const char* name;
            std::vector<Parameter*> params;
            std::function<Tape::Var(Tape&)> build;
        };
        std::vector<Case> cases = {
            {"conv2d", {&cw, &cb}, [&](Tape& t) {
                 return t.mse(t.conv2d(t.input(xin), t.param(cw), t.param(cb), 1, 1),
                              t.input(z344));
             }},
            {"conv2d_s2", {&cw, &cb}, [&](Tape& t) {
                 return t.mse(t.conv2d(t.input(xin), t.param(cw), t.param(cb), 2, 1),
                              t.input(Tensor::zeros({3, 2, 2})));
             }},
            {"conv2d_transpose", {&tw, &tb}, [&](Tape& t) {
                 return t.mse(t.conv2d_transpose(t.input(xin), t.param(tw), t.param(tb), 2, 1),
                              t.input(z388));
             }},
            {"dense_flatten", {&dw, &db}, [&](Tape& t) {
                 return t.mse(t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db)),
                              t.input(z3));
             }},
            {"sigmoid", {&dw, &db}, [&](Tape& t) {
                 return t.mse(t.sigmoid(t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db))),
                              t.input(z3));
             }},
            {"tanh", {&dw, &db}, [&](Tape& t) {
                 return t.mse(t.tanh(t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db))),
                              t.input(z3));
             }},
            {"leaky_relu", {&cw, &cb}, [&](Tape& t) {
                 return t.mse(
                     t.leaky_relu(t.conv2d(t.input(xin), t.param(cw), t.param(cb), 1, 1), 0.2),
                     t.input(z344));
             }},
            {"power_normalize", {&cw, &cb}, [&](Tape& t) {
                 return t.mse(
                     t.power_normalize(t.conv2d(t.input(xin), t.param(cw), t.param(cb), 1, 1)),
                     t.input(z344));
             }},
            {"concat_split", {&cw, &cb}, [&](Tape& t) {
                 Tape::Var c = t.conv2d(t.input(xin), t.param(cw), t.param(cb), 1, 1);
                 auto [a, b] = t.split_channels(c, 1);
                 return t.mse(t.concat_channels(b, a), t.input(z344));
             }},
            {"variance", {&dw, &db}, [&](Tape& t) {
                 return t.variance(t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db)));
             }},
            {"mean_mul", {&dw, &db}, [&](Tape& t) {
                 Tape::Var d = t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db));
                 return t.mean(t.mul(d, d));
             }},
            {"log_clamped", {&dw, &db}, [&](Tape& t) {
                 return t.sum(t.log_clamped(
                     t.sigmoid(t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db)))));
             }},
            {"arith_wsum", {&dw, &db}, [&](Tape& t) {
                 Tape::Var d = t.dense(t.flatten(t.input(xin)), t.param(dw), t.param(db));
                 Tape::Var a = t.scale(t.sum(d), 0.1);
                 Tape::Var b = t.mean(t.add(d, d));
                 Tape::Var c = t.sum(t.sub(d, t.input(z3)));
                 Tape::Var m = t.sum(t.mul(d, d));
                 return t.wsum({{0.5, a}, {0.25, t.add(b, m)}, {0.1, c}});
             }},
            {"add_const", {&cw, &cb}, [&](Tape& t) {
                 Tape::Var c = t.conv2d(t.input(xin), t.param(cw), t.param(cb), 1, 1);
                 return t.mse(t.add_const(c, Tensor::full({3, 4, 4}, 0.3)), t.input(z344));
             }},
        };
        for (auto& c : cases) {
            auto fwd = [&](Tape& t) { return t.val(c.build(t)).data[0]; };
            double worst = fd_check(c.params, fwd, c.build);
            CHECK_MESSAGE(worst < 1e-3, c.name, " seed ", seed, " max rel err ", worst);
        }
    }
}

TEST_CASE("finite-difference oracle on a deep smooth composite") {
    // full-graph splice: conv -> pnorm -> tconv -> tanh -> dense -> losses,
    // checks that gradients compose across op boundaries
    for (std::uint64_t seed = 100; seed < 103; ++seed) {
        Rng rng(seed);
        Tensor xin = rng.gauss_tensor({2, 4, 4});
        Tensor target = rng.gauss_tensor({3});
        Parameter cw("cw", rng.gauss_tensor({4, 2, 3, 3}));
        Parameter cb("cb", rng.gauss_tensor({4}));
        Parameter tw("tw", rng.gauss_tensor({2, 2, 4, 4}));
        Parameter tb("tb", rng.gauss_tensor({2}));
        Parameter dw("dw", smooth_gauss(rng, {3, 2 * 8 * 8}));
        Parameter db("db", smooth_gauss(rng, {3}));
        auto build = [&](Tape& t) {
            Tape::Var x = t.input(xin);
            Tape::Var c = t.conv2d(x, t.param(cw), t.param(cb), 1, 1);  // 4x4x4
            auto [a, b] = t.split_channels(c, 2);
            Tape::Var p = t.power_normalize(t.concat_channels(b, a));
            auto [p1, p2] = t.split_channels(p, 2);
            Tape::Var u = t.conv2d_transpose(p1, t.param(tw), t.param(tb), 2, 1);  // 2x8x8
            Tape::Var s = t.tanh(u);
            Tape::Var d = t.dense(t.flatten(s), t.param(dw), t.param(db));
            Tape::Var e = t.mse(t.sigmoid(d), t.input(target));
            Tape::Var v = t.variance(t.flatten(p2));
            return t.wsum({{1.0, e}, {0.3, v}});
        };
        auto fwd = [&](Tape& t) { return t.val(build(t)).data[0]; };
        double worst = fd_check({&cw, &cb, &tw, &tb, &dw, &db}, fwd, build);
        CHECK_MESSAGE(worst < 1e-3, "seed ", seed, " max rel err ", worst);
    }
}

TEST_CASE("backward adds into grads across tapes until zeroed") {
    Parameter w("w", Tensor({1, 1}, {2.0}));
    Parameter b("b", Tensor({1}, {0.0}));
    for (int pass = 0; pass < 2; ++pass) {
        Tape t;
        Tape::Var y = t.dense(t.input(Tensor({1}, {3.0})), t.param(w), t.param(b));
        t.backward(t.sum(y));
    }
    CHECK(w.grad.data[0] == doctest::Approx(6.0));  // 3 + 3
    w.zero_grad();
    CHECK(w.grad.data[0] == 0.0);
}

TEST_CASE("disjoint parameter groups get zero grads") {
    Rng rng(11);
    Parameter used("u", rng.gauss_tensor({2, 2}));
    Parameter ub("ub", Tensor::zeros({2}));
    Parameter unused("x", rng.gauss_tensor({2, 2}));
    Tape t;
    Tape::Var y = t.dense(t.input(rng.gauss_tensor({2})), t.param(used), t.param(ub));
    t.param(unused);  // on the tape but not in the loss
    t.backward(t.sum(y));
    for (double g : unused.grad.data) CHECK(g == 0.0);
    bool any = false;
    for (double g : used.grad.data) any = any || g != 0.0;
    CHECK(any);
}

TEST_CASE("backward requires a scalar") {
    Tape t;
    Tape::Var x = t.input(Tensor({3}, {1, 2, 3}));
    CHECK_THROWS_AS(t.backward(x), UsageError);
    CHECK_THROWS_AS(t.val(99), UsageError);
}

TEST_CASE("power_normalize yields unit mean square and correct gradient") {
    Rng rng(13);
    Parameter w("w", smooth_gauss(rng, {4, 4}));
    Parameter b("b", smooth_gauss(rng, {4}));
    Tensor xin = smooth_gauss(rng, {4});
    auto build = [&](Tape& t) {
        Tape::Var y = t.dense(t.input(xin), t.param(w), t.param(b));
        Tape::Var p = t.power_normalize(y);
        CHECK(t.val(p).mean_square() == doctest::Approx(1.0).epsilon(1e-12));
        return t.mse(p, t.input(Tensor({4}, {0.5, -0.5, 0.5, -0.5})));
    };
    auto fwd = [&](Tape& t) { return build(t); };
    auto val = [&](Tape& t) { return t.val(build(t)).data[0]; };
    CHECK(fd_check({&w, &b}, val, fwd) < 1e-3);
}

TEST_CASE("adam hand case") {
    // theta=0, g=1, defaults: mhat=1, vhat=1 => step = -lr/(1+eps) ~ -0.001
    Parameter p("p", Tensor({1}, {0.0}));
    p.grad.data[0] = 1.0;
    Adam opt;
    opt.step({&p});
    CHECK(p.value.data[0] == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-9));
}

TEST_CASE("adam converges on a quadratic") {
    Parameter p("p", Tensor({1}, {5.0}));
    Adam opt(AdamConfig{.lr = 0.1});
    for (int i = 0; i < 500; ++i) {
        Tape t;
        Tape::Var x = t.param(p);
        t.backward(t.mse(x, t.input(Tensor({1}, {2.0}))));
        opt.step({&p});
        Adam::zero_grad({&p});
    }
    CHECK(p.value.data[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("adam rejects non-finite gradients") {
    Parameter p("p", Tensor({1}, {1.0}));
    p.grad.data[0] = std::nan("");
    Adam opt;
    CHECK_THROWS_AS(opt.step({&p}), DivergedError);
    CHECK(p.value.data[0] == 1.0);  // untouched
}

TEST_CASE("glorot init respects the fan limit") {
    Rng rng(21);
    Tensor t = Tensor::zeros({16, 8, 3, 3});
    glorot_init(t, 8 * 9, 16 * 9, rng);
    double limit = std::sqrt(6.0 / (8 * 9 + 16 * 9));
    for (double v : t.data) CHECK(std::abs(v) <= limit);
    double ms = t.mean_square();
    CHECK(ms == doctest::Approx(limit * limit / 3.0).epsilon(0.15));
}
