#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mardpg/gradcheck.hpp"
#include "mardpg/nn.hpp"
#include "mardpg/optim.hpp"
#include "oracles.hpp"

using namespace mardpg;

namespace {

Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    Vec v(n);
    for (double& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("mlp_forward: zero network maps everything to zero") {
    Mlp net = make_mlp({4, 3, 2}, {Act::relu, Act::relu});
    std::mt19937_64 rng(7);
    const Vec y = mlp_forward(net, random_vec(4, rng, 10.0));
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("mlp_forward: zero-weight softmax layer is uniform") {
    Mlp net = make_mlp({7, 7}, {Act::softmax});
    std::mt19937_64 rng(11);
    const Vec y = mlp_forward(net, random_vec(7, rng, 5.0));
    for (double v : y) CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("mlp_forward: hand-evaluated 2-layer net") {
    // 2 -> 2 relu -> 1 linear, x = (1, -1).
    // z1 = (1*1 + (-2)(-1) + 0.5, 0.5*1 + 0.25*(-1) - 0.25) = (3.5, 0)
    // relu -> (3.5, 0); y = 2*3.5 - 1*0 + 0.25 = 7.25. All values are exact
    // in binary, so the comparison is tight.
    Mlp net = make_mlp({2, 2, 1}, {Act::relu, Act::linear});
    net.layers[0].w(0, 0) = 1.0;
    net.layers[0].w(0, 1) = -2.0;
    net.layers[0].w(1, 0) = 0.5;
    net.layers[0].w(1, 1) = 0.25;
    net.layers[0].b = {0.5, -0.25};
    net.layers[1].w(0, 0) = 2.0;
    net.layers[1].w(0, 1) = -1.0;
    net.layers[1].b = {0.25};
    const Vec y = mlp_forward(net, {1.0, -1.0});
    CHECK(y[0] == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("mlp_forward: dimension mismatch names the layer") {
    Mlp net = make_mlp({4, 3, 2}, {Act::relu, Act::linear});
    CHECK_THROWS_WITH_AS(mlp_forward(net, Vec(5, 0.0)),
                         doctest::Contains("layer 0"), std::invalid_argument);
}

TEST_CASE("mlp_backward: affine layer derivatives") {
    // y = Wx + b, dL/dy = 1  =>  dW = x^T, db = 1, dx = W^T.
    Mlp net = make_mlp({3, 1}, {Act::linear});
    net.layers[0].w(0, 0) = 2.0;
    net.layers[0].w(0, 1) = -1.0;
    net.layers[0].w(0, 2) = 0.5;
    net.layers[0].b = {0.25};
    const Vec x = {1.0, 2.0, -3.0};
    MlpTape tape;
    mlp_forward(net, x, &tape);
    MlpGrads grads = make_grads(net);
    const Vec dx = mlp_backward(net, tape, {1.0}, grads);
    for (int c = 0; c < 3; ++c) {
        CHECK(grads.layers[0].dw(0, c) == doctest::Approx(x[c]).epsilon(1e-14));
        CHECK(dx[c] == doctest::Approx(net.layers[0].w(0, c)).epsilon(1e-14));
    }
    CHECK(grads.layers[0].db[0] == doctest::Approx(1.0));
    CHECK(grads.count == 1);
}

TEST_CASE("mlp_backward: random nets match finite differences") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        Mlp net = make_mlp({5, 8, 6, 3}, {Act::relu, Act::relu, Act::softmax});
        init_glorot(net, rng);
        Vec x = random_vec(5, rng);
        const Vec probe = random_vec(3, rng);

        MlpTape tape;
        mlp_forward(net, x, &tape);
        MlpGrads grads = make_grads(net);
        const Vec dx = mlp_backward(net, tape, probe, grads);

        auto loss = [&]() { return dot(mlp_forward(net, x), probe); };
        const auto report =
            grad_check(loss, views_of(net, "net"), views_of(grads, "net"), 1e-5);
        CHECK(report.max_rel_err < 1e-4);

        // Input gradient against the same oracle.
        const Vec fd_dx = oracle::fd_grad(loss, x.data(), x.size());
        CHECK(oracle::max_rel_err(dx, fd_dx) < 1e-4);
    }
}

TEST_CASE("mlp_backward: softmax with one-hot cotangent matches finite differences") {
    std::mt19937_64 rng(42);
    Mlp net = make_mlp({4, 4}, {Act::softmax});
    init_glorot(net, rng);
    Vec x = random_vec(4, rng);
    const int k = 2;
    Vec onehot(4, 0.0);
    onehot[k] = 1.0;

    MlpTape tape;
    mlp_forward(net, x, &tape);
    MlpGrads grads = make_grads(net);
    mlp_backward(net, tape, onehot, grads);

    auto loss = [&]() { return mlp_forward(net, x)[k]; };
    const auto report = grad_check(loss, views_of(net, "sm"), views_of(grads, "sm"));
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("softmax: strictly positive, sums to one, stable for huge logits") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec z = random_vec(7, rng, trial % 2 == 0 ? 1.0 : 1e3);
        const Vec y = softmax(z);
        double sum = 0.0;
        for (double v : y) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("forward passes stay finite for |x| <= 1e3") {
    std::mt19937_64 rng(5);
    Mlp net = make_mlp({6, 32, 32, 4}, {Act::relu, Act::relu, Act::softmax});
    init_glorot(net, rng);
    LstmParams cell = make_lstm(6, 4);
    init_glorot(cell, rng);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec x = random_vec(6, rng, 1e3);
        CHECK(all_finite(mlp_forward(net, x)));
        Vec h(4, 0.0), c(4, 0.0);
        lstm_cell_forward(cell, h, c, x, h, c);
        CHECK(all_finite(h));
        CHECK(all_finite(c));
    }
}

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

TEST_CASE("lstm forward: zero parameters") {
    LstmParams p = make_lstm(3, 2);
    Vec h, c;

    SUBCASE("zero state gives zero outputs") {
        lstm_cell_forward(p, Vec(2, 0.0), Vec(2, 0.0), {0.3, -0.8, 2.0}, h, c);
        for (double v : h) CHECK(v == 0.0);
        for (double v : c) CHECK(v == 0.0);
    }

    SUBCASE("gates sit at 0.5: c = v/2, h = tanh(v/2)/2") {
        const Vec v = {0.8, -1.2};
        lstm_cell_forward(p, Vec(2, 0.0), v, {0.0, 0.0, 0.0}, h, c);
        for (int k = 0; k < 2; ++k) {
            CHECK(c[k] == doctest::Approx(0.5 * v[k]).epsilon(1e-14));
            CHECK(h[k] == doctest::Approx(0.5 * std::tanh(0.5 * v[k])).epsilon(1e-14));
        }
    }
}

TEST_CASE("lstm forward: matches the scalar-loop oracle to 12 decimals") {
    std::mt19937_64 rng(99);
    const int input = 5, hidden = 3;
    LstmParams p = make_lstm(input, hidden);
    init_glorot(p, rng);

    oracle::ScalarLstmWeights w;
    auto to_rows = [&](const Matrix& m) {
        std::vector<std::vector<double>> rows(m.rows);
        for (int r = 0; r < m.rows; ++r) {
            rows[r].assign(m.data.begin() + static_cast<long>(r) * m.cols,
                           m.data.begin() + static_cast<long>(r + 1) * m.cols);
        }
        return rows;
    };
    w.wi = to_rows(p.wi);
    w.wf = to_rows(p.wf);
    w.wg = to_rows(p.wg);
    w.wo = to_rows(p.wo);
    w.bi = p.bi;
    w.bf = p.bf;
    w.bg = p.bg;
    w.bo = p.bo;

    Vec h(hidden, 0.0), c(hidden, 0.0);
    std::vector<double> oh(hidden, 0.0), oc(hidden, 0.0);
    for (int step = 0; step < 5; ++step) {
        const Vec x = random_vec(input, rng);
        lstm_cell_forward(p, h, c, x, h, c);
        std::vector<double> nh, nc;
        oracle::scalar_lstm_step(w, oh, oc, x, nh, nc);
        oh = nh;
        oc = nc;
        for (int k = 0; k < hidden; ++k) {
            CHECK(h[k] == doctest::Approx(oh[k]).epsilon(1e-12));
            CHECK(c[k] == doctest::Approx(oc[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("lstm backward: hand value at the zero point") {
    // Zero params, zero state, dL/dh = 1, dL/dc = 0:
    // dc_total = o * (1 - tanh(c)^2) = 0.5, dc_prev = dc_total * f = 0.25.
    LstmParams p = make_lstm(2, 3);
    LstmTape tape;
    Vec h, c;
    lstm_cell_forward(p, Vec(3, 0.0), Vec(3, 0.0), {0.0, 0.0}, h, c, &tape);
    LstmGrads grads = make_grads(p);
    const LstmBack back = lstm_cell_backward(p, tape, Vec(3, 1.0), Vec(3, 0.0), grads);
    for (double v : back.dc_prev) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("lstm backward: zero cotangent gives all-zero outputs") {
    std::mt19937_64 rng(13);
    LstmParams p = make_lstm(4, 3);
    init_glorot(p, rng);
    LstmTape tape;
    Vec h, c;
    lstm_cell_forward(p, random_vec(3, rng), random_vec(3, rng), random_vec(4, rng), h, c, &tape);
    LstmGrads grads = make_grads(p);
    const LstmBack back = lstm_cell_backward(p, tape, Vec(3, 0.0), Vec(3, 0.0), grads);
    for (double v : back.dx) CHECK(v == 0.0);
    for (double v : back.dh_prev) CHECK(v == 0.0);
    for (double v : back.dc_prev) CHECK(v == 0.0);
    for (const double v : grads.dwi.data) CHECK(v == 0.0);
}

TEST_CASE("lstm backward: all gradient blocks match finite differences") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed * 31);
        const int input = 4, hidden = 3;
        LstmParams p = make_lstm(input, hidden);
        init_glorot(p, rng);
        Vec h_prev = random_vec(hidden, rng);
        Vec c_prev = random_vec(hidden, rng);
        Vec x = random_vec(input, rng);
        const Vec probe_h = random_vec(hidden, rng);
        const Vec probe_c = random_vec(hidden, rng);

        auto loss = [&]() {
            Vec h, c;
            lstm_cell_forward(p, h_prev, c_prev, x, h, c);
            return dot(h, probe_h) + dot(c, probe_c);
        };

        LstmTape tape;
        Vec h, c;
        lstm_cell_forward(p, h_prev, c_prev, x, h, c, &tape);
        LstmGrads grads = make_grads(p);
        const LstmBack back = lstm_cell_backward(p, tape, probe_h, probe_c, grads);

        const auto report = grad_check(loss, views_of(p, "cell"), views_of(grads, "cell"));
        CHECK(report.max_rel_err < 1e-4);

        CHECK(oracle::max_rel_err(back.dx, oracle::fd_grad(loss, x.data(), x.size())) < 1e-4);
        CHECK(oracle::max_rel_err(back.dh_prev,
                                  oracle::fd_grad(loss, h_prev.data(), h_prev.size())) < 1e-4);
        CHECK(oracle::max_rel_err(back.dc_prev,
                                  oracle::fd_grad(loss, c_prev.data(), c_prev.size())) < 1e-4);
    }
}

// ---------------------------------------------------------------------------
// RMSProp
// ---------------------------------------------------------------------------

TEST_CASE("rmsprop: zero gradient leaves parameters unchanged") {
    Mlp net = make_mlp({2, 2}, {Act::linear});
    std::mt19937_64 rng(1);
    init_glorot(net, rng);
    const Vec before = net.layers[0].w.data;
    MlpGrads grads = make_grads(net);
    RmsProp opt{0.1};
    for (int k = 0; k < 5; ++k) opt.step(views_of(net, "n"), views_of(grads, "n"));
    CHECK(net.layers[0].w.data == before);
}

TEST_CASE("rmsprop: single-step hand arithmetic") {
    // param 1.0, g = 1, decay 0.9, lr 0.1: acc = 0.1,
    // param = 1 - 0.1/sqrt(0.1 + 1e-8) ~= 0.683772.
    double param = 1.0;
    double grad = 1.0;
    ParamViews pv{{"p", &param, 1, 1}};
    ParamViews gv{{"p", &grad, 1, 1}};
    RmsProp opt{0.1, 0.9, 1e-8};
    opt.step(pv, gv);
    const double expected = 1.0 - 0.1 / std::sqrt(0.1 + 1e-8);
    CHECK(param == doctest::Approx(expected).epsilon(1e-14));
    CHECK(param == doctest::Approx(0.683772).epsilon(1e-5));
    CHECK(opt.ms[0][0] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("rmsprop: update opposes the gradient of a minimized loss") {
    // L = (p-3)^2 from p=0: every step must increase p toward 3.
    double param = 0.0;
    RmsProp opt{0.05};
    ParamViews pv{{"p", &param, 1, 1}};
    for (int k = 0; k < 200 && std::abs(param - 3.0) > 1e-9; ++k) {
        double g = 2.0 * (param - 3.0);
        ParamViews gv{{"p", &g, 1, 1}};
        const double before = param;
        opt.step(pv, gv);
        CHECK(param > before);
    }
    CHECK(param > 1.0);
}

TEST_CASE("rmsprop: identical runs are bit-identical") {
    auto run = [] {
        std::mt19937_64 rng(77);
        Mlp net = make_mlp({3, 4, 2}, {Act::relu, Act::linear});
        init_glorot(net, rng);
        RmsProp opt{0.01};
        for (int k = 0; k < 50; ++k) {
            Vec x = random_vec(3, rng);
            MlpTape tape;
            const Vec y = mlp_forward(net, x, &tape);
            MlpGrads grads = make_grads(net);
            mlp_backward(net, tape, y, grads);  // dL/dy = y, i.e. L = ||y||^2/2
            opt.step(views_of(net, "n"), views_of(grads, "n"));
        }
        return net;
    };
    const Mlp a = run();
    const Mlp b = run();
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].w.data == b.layers[l].w.data);
        CHECK(a.layers[l].b == b.layers[l].b);
    }
}

TEST_CASE("rmsprop: non-finite gradient rejects the whole step") {
    Mlp net = make_mlp({2, 2}, {Act::linear});
    std::mt19937_64 rng(9);
    init_glorot(net, rng);
    const Vec before = net.layers[0].w.data;
    MlpGrads grads = make_grads(net);
    grads.layers[0].dw(1, 1) = std::numeric_limits<double>::quiet_NaN();
    RmsProp opt{0.1};
    CHECK_THROWS_WITH_AS(opt.step(views_of(net, "n"), views_of(grads, "n")),
                         doctest::Contains("index 3"), std::runtime_error);
    CHECK(net.layers[0].w.data == before);
    CHECK(opt.ms.empty());
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

TEST_CASE("init: same seed twice gives identical parameters") {
    Mlp a = make_mlp({62, 32, 32, 7}, {Act::relu, Act::relu, Act::softmax});
    Mlp b = make_mlp({62, 32, 32, 7}, {Act::relu, Act::relu, Act::softmax});
    std::mt19937_64 r1(123), r2(123);
    init_glorot(a, r1);
    init_glorot(b, r2);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].w.data == b.layers[l].w.data);
    }
}

TEST_CASE("init: glorot bound and zero biases") {
    Mlp net = make_mlp({62, 32}, {Act::linear});
    std::mt19937_64 rng(4);
    init_glorot(net, rng);
    const double bound = std::sqrt(6.0 / 94.0);
    CHECK(bound == doctest::Approx(0.2526).epsilon(1e-3));
    for (double v : net.layers[0].w.data) {
        CHECK(std::abs(v) <= bound);
    }
    for (double v : net.layers[0].b) CHECK(v == 0.0);
}

TEST_CASE("init: zero-sized dims are rejected") {
    CHECK_THROWS_AS(make_mlp({4, 0, 2}, {Act::relu, Act::linear}), std::invalid_argument);
    CHECK_THROWS_AS(make_lstm(0, 3), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// grad_check itself
// ---------------------------------------------------------------------------

TEST_CASE("grad_check: quadratic loss is exact to round-off scale") {
    // L = ||Wx||^2 / 2 with benign fixed values, so no gradient entry is tiny.
    Mlp net = make_mlp({3, 2}, {Act::linear});
    net.layers[0].w(0, 0) = 0.7;
    net.layers[0].w(0, 1) = -0.4;
    net.layers[0].w(0, 2) = 0.9;
    net.layers[0].w(1, 0) = -0.6;
    net.layers[0].w(1, 1) = 0.8;
    net.layers[0].w(1, 2) = 0.3;
    net.layers[0].b = {0.2, -0.1};
    const Vec x = {0.5, -0.3, 0.8};

    MlpTape tape;
    const Vec y = mlp_forward(net, x, &tape);
    MlpGrads grads = make_grads(net);
    mlp_backward(net, tape, y, grads);

    auto loss = [&]() {
        const Vec out = mlp_forward(net, x);
        return 0.5 * dot(out, out);
    };
    const auto report = grad_check(loss, views_of(net, "q"), views_of(grads, "q"));
    CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check: a sign-flipped backward is caught") {
    std::mt19937_64 rng(21);
    Mlp net = make_mlp({3, 4, 1}, {Act::relu, Act::linear});
    init_glorot(net, rng);
    Vec x = random_vec(3, rng);
    MlpTape tape;
    mlp_forward(net, x, &tape);
    MlpGrads grads = make_grads(net);
    mlp_backward(net, tape, {1.0}, grads);
    grads.scale(-1.0);  // the deliberate corruption
    auto loss = [&]() { return mlp_forward(net, x)[0]; };
    const auto report = grad_check(loss, views_of(net, "bad"), views_of(grads, "bad"));
    CHECK(report.max_rel_err > 0.1);
    CHECK_FALSE(report.pass(1e-4));
}

TEST_CASE("grad_check: reports per-block errors") {
    std::mt19937_64 rng(2);
    Mlp net = make_mlp({2, 3, 1}, {Act::relu, Act::linear});
    init_glorot(net, rng);
    Vec x = random_vec(2, rng);
    MlpTape tape;
    mlp_forward(net, x, &tape);
    MlpGrads grads = make_grads(net);
    mlp_backward(net, tape, {1.0}, grads);
    auto loss = [&]() { return mlp_forward(net, x)[0]; };
    const auto report = grad_check(loss, views_of(net, "net"), views_of(grads, "net"));
    REQUIRE(report.blocks.size() == 4);
    CHECK(report.blocks[0].name == "net.l0.w");
    CHECK(report.blocks[3].name == "net.l1.b");
}
