#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "irony/rng.hpp"
#include "irony/tensor.hpp"

using irony::Pcg32;
using irony::Tape;
using irony::Tensor;

TEST_CASE("matmul matches hand computation") {
    Tape<double> tape;
    auto a = tape.constant({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = tape.constant({3, 2}, {7, 8, 9, 10, 11, 12});
    auto c = tape.matmul(a, b);
    CHECK(tape.value(c) == std::vector<double>{58, 64, 139, 154});

    auto v = tape.constant({3}, {1, 0, -1});
    auto mv = tape.matmul(a, v);  // [2,3] x [3] -> [2]
    CHECK(tape.value(mv) == std::vector<double>{1 - 3, 4 - 6});

    auto vm = tape.matmul(tape.constant({2}, {1, 1}), a);  // [2] x [2,3] -> [3]
    CHECK(tape.value(vm) == std::vector<double>{5, 7, 9});
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
    Tape<double> tape;
    auto a = tape.constant({2, 3}, std::vector<double>(6, 0.0));
    auto b = tape.constant({2, 2}, std::vector<double>(4, 0.0));
    try {
        tape.matmul(a, b);
        FAIL("expected shape error");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CAPTURE(msg);
        CHECK(msg.find("[2x3]") != std::string::npos);
        CHECK(msg.find("[2x2]") != std::string::npos);
    }
}

TEST_CASE("elementwise op values") {
    Tape<double> tape;
    auto z = tape.constant({3}, {0.0, 0.0, 0.0});
    CHECK(tape.value(tape.tanh_(z)) == std::vector<double>{0, 0, 0});
    auto s = tape.value(tape.sigmoid_(z));
    for (double v : s) CHECK(v == Catch::Approx(0.5));

    auto x = tape.constant({2}, {3.0, 4.0});
    auto y = tape.constant({2}, {10.0, 100.0});
    CHECK(tape.value(tape.add(x, y)) == std::vector<double>{13, 104});
    CHECK(tape.value(tape.sub(y, x)) == std::vector<double>{7, 96});
    CHECK(tape.value(tape.mul(x, y)) == std::vector<double>{30, 400});
    CHECK(tape.value(tape.scale(x, -2.0)) == std::vector<double>{-6, -8});
}

TEST_CASE("size-1 operand broadcasts elementwise") {
    Tape<double> tape;
    auto x = tape.constant({3}, {1.0, 2.0, 3.0});
    auto b = tape.scalar(10.0);
    CHECK(tape.value(tape.add(x, b)) == std::vector<double>{11, 12, 13});
    CHECK(tape.value(tape.mul(x, b)) == std::vector<double>{10, 20, 30});
}

TEST_CASE("softmax of uniform logits is uniform") {
    Tape<double> tape;
    auto p = tape.value(tape.softmax(tape.constant({3}, {0, 0, 0})));
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 3));
}

TEST_CASE("softmax stays on the simplex at extreme logits") {
    Pcg32 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.bounded(6);
        std::vector<double> logits(n);
        for (auto& v : logits) v = (rng.uniform() * 2 - 1) * 1e4;
        Tape<double> tape;
        auto p = tape.value(tape.softmax(tape.constant({n}, logits)));
        double sum = 0;
        for (double v : p) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("2-D softmax normalizes the requested axis") {
    Tape<double> tape;
    auto m = tape.constant({2, 3}, {1, 2, 3, 3, 2, 1});
    auto rows = tape.value(tape.softmax(m, 1));
    CHECK(rows[0] + rows[1] + rows[2] == Catch::Approx(1.0));
    CHECK(rows[3] + rows[4] + rows[5] == Catch::Approx(1.0));
    CHECK(rows[0] == Catch::Approx(rows[5]));

    auto cols = tape.value(tape.softmax(m, 0));
    for (int j = 0; j < 3; ++j) CHECK(cols[j] + cols[3 + j] == Catch::Approx(1.0));
}

TEST_CASE("product rule gradients") {
    Tensor<double> x({2}, {2.0, 5.0}, true);
    Tensor<double> y({2}, {3.0, 7.0}, true);
    Tape<double> tape;
    auto loss = tape.sum(tape.mul(tape.leaf(x), tape.leaf(y)));
    tape.backward(loss);
    CHECK(x.grad == std::vector<double>{3.0, 7.0});
    CHECK(y.grad == std::vector<double>{2.0, 5.0});
}

TEST_CASE("cross-entropy gradient is p minus the one-hot target") {
    Tensor<double> logits({4}, {0, 0, 0, 0}, true);
    Tape<double> tape;
    auto p = tape.softmax(tape.leaf(logits));
    auto loss = tape.scale(tape.log_(tape.slice(p, 0, {1})), -1.0);
    tape.backward(tape.sum(loss));
    CHECK(logits.grad[0] == Catch::Approx(-0.75));
    CHECK(logits.grad[1] == Catch::Approx(0.25));
    CHECK(logits.grad[2] == Catch::Approx(0.25));
    CHECK(logits.grad[3] == Catch::Approx(0.25));
}

TEST_CASE("backward accumulates into existing leaf gradients") {
    Tensor<double> x({2}, {1.0, 2.0}, true);
    for (int pass = 0; pass < 2; ++pass) {
        Tape<double> tape;
        tape.backward(tape.sum(tape.leaf(x)));
    }
    CHECK(x.grad == std::vector<double>{2.0, 2.0});
}

TEST_CASE("backward requires a scalar loss") {
    Tensor<double> x({2}, {1.0, 2.0}, true);
    Tape<double> tape;
    auto v = tape.leaf(x);
    CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);
}

TEST_CASE("quadratic gradient check is near machine precision") {
    Tensor<double> x({4}, {0.3, -1.2, 0.8, 2.0}, true);
    auto run = [&]() {
        x.zero_grad();
        Tape<double> tape;
        auto v = tape.leaf(x);
        auto loss = tape.sum(tape.mul(v, v));
        double out = tape.value_scalar(loss);  // read before backward clears the tape
        tape.backward(loss);
        return out;
    };
    double err = irony::grad_check<double>(run, {&x}, 1e-6);
    CHECK(err < 1e-8);
}

TEST_CASE("composed graph passes finite-difference checks") {
    Pcg32 rng(42);
    Tensor<double> w({3, 3}, true);
    Tensor<double> x({3}, true);
    w.fill_uniform(rng, -0.8, 0.8);
    x.fill_uniform(rng, -0.8, 0.8);
    auto run = [&]() {
        w.zero_grad();
        x.zero_grad();
        Tape<double> tape;
        auto h = tape.tanh_(tape.matmul(tape.leaf(w), tape.leaf(x)));
        auto p = tape.softmax(h);
        auto loss = tape.scale(tape.log_(tape.slice(p, 1, {1})), -1.0);
        auto l = tape.sum(loss);
        double out = tape.value_scalar(l);  // read before backward clears the tape
        tape.backward(l);
        return out;
    };
    CHECK(irony::grad_check<double>(run, {&w, &x}, 1e-5) < 1e-4);
}

TEST_CASE("depth-four sigmoid chain passes finite-difference checks") {
    Pcg32 rng(9);
    std::vector<Tensor<double>> ws;
    for (int i = 0; i < 4; ++i) {
        ws.emplace_back(std::vector<std::size_t>{4, 4}, true);
        ws.back().fill_uniform(rng, -0.9, 0.9);
    }
    Tensor<double> x({4}, true);
    x.fill_uniform(rng, -0.9, 0.9);
    auto run = [&]() {
        for (auto& w : ws) w.zero_grad();
        x.zero_grad();
        Tape<double> tape;
        auto h = tape.leaf(x);
        for (auto& w : ws) h = tape.sigmoid_(tape.matmul(tape.leaf(w), h));
        auto l = tape.sum(h);
        double out = tape.value_scalar(l);  // read before backward clears the tape
        tape.backward(l);
        return out;
    };
    std::vector<Tensor<double>*> params = {&x};
    for (auto& w : ws) params.push_back(&w);
    CHECK(irony::grad_check<double>(run, params, 1e-5) < 1e-4);
}

TEST_CASE("slice row concat and stack backward are consistent") {
    Pcg32 rng(5);
    Tensor<double> m({3, 4}, true);
    m.fill_uniform(rng, -1.0, 1.0);
    Tensor<double> v({4}, true);
    v.fill_uniform(rng, -1.0, 1.0);
    auto run = [&]() {
        m.zero_grad();
        v.zero_grad();
        Tape<double> tape;
        auto lm = tape.leaf(m);
        auto r0 = tape.row(lm, 0);
        auto r2 = tape.row(lm, 2);
        auto joined = tape.concat({r0, r2, tape.leaf(v)});  // [12]
        auto stacked = tape.stack_rows({r0, tape.leaf(v)});  // [2,4]
        auto part = tape.slice(joined, 2, {6});
        auto l = tape.add(tape.sum(tape.tanh_(part)), tape.mean(stacked));
        auto total = tape.sum(l);
        double out = tape.value_scalar(total);  // read before backward clears the tape
        tape.backward(total);
        return out;
    };
    CHECK(irony::grad_check<double>(run, {&m, &v}, 1e-6) < 1e-7);
}

TEST_CASE("concat along matrix axes") {
    Tape<double> tape;
    auto a = tape.constant({2, 2}, {1, 2, 3, 4});
    auto b = tape.constant({2, 2}, {5, 6, 7, 8});
    auto v0 = tape.concat({a, b}, 0);
    CHECK(tape.shape(v0) == std::vector<std::size_t>{4, 2});
    CHECK(tape.value(v0) == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    auto v1 = tape.concat({a, b}, 1);
    CHECK(tape.shape(v1) == std::vector<std::size_t>{2, 4});
    CHECK(tape.value(v1) == std::vector<double>{1, 2, 5, 6, 3, 4, 7, 8});
}

TEST_CASE("reshape preserves data and routes gradients through") {
    Tensor<double> m({2, 3}, {1, 2, 3, 4, 5, 6}, true);
    Tape<double> tape;
    auto r = tape.reshape(tape.leaf(m), {3, 2});
    CHECK(tape.value(r) == std::vector<double>{1, 2, 3, 4, 5, 6});
    tape.backward(tape.sum(r));
    CHECK(m.grad == std::vector<double>(6, 1.0));
    Tape<double> t2;
    CHECK_THROWS_AS(t2.reshape(t2.constant({2, 3}, {1, 2, 3, 4, 5, 6}), {4, 2}),
                    std::invalid_argument);
}

TEST_CASE("embedding lookup gathers rows and scatters gradients") {
    Tensor<double> table({4, 3}, {0, 1, 2, 10, 11, 12, 20, 21, 22, 30, 31, 32}, true);
    Tape<double> tape;
    auto e = tape.embed(table, {2, 0, 2});
    CHECK(tape.shape(e) == std::vector<std::size_t>{3, 3});
    CHECK(tape.value(e) == std::vector<double>{20, 21, 22, 0, 1, 2, 20, 21, 22});
    tape.backward(tape.sum(e));
    CHECK(table.grad == std::vector<double>{1, 1, 1, 0, 0, 0, 2, 2, 2, 0, 0, 0});

    Tape<double> t2;
    CHECK_THROWS_AS(t2.embed(table, {4}), std::invalid_argument);
    CHECK_THROWS_AS(t2.embed(table, {-1}), std::invalid_argument);
}

TEST_CASE("log clamps away from zero without blowing up") {
    Tape<double> tape;
    auto v = tape.value(tape.log_(tape.constant({2}, {0.0, 1.0})));
    CHECK(std::isfinite(v[0]));
    CHECK(v[0] == Catch::Approx(std::log(1e-12)));
    CHECK(v[1] == Catch::Approx(0.0));
}

TEST_CASE("mean is sum over count") {
    Tensor<double> x({4}, {1, 2, 3, 6}, true);
    Tape<double> tape;
    auto m = tape.mean(tape.leaf(x));
    CHECK(tape.value_scalar(m) == Catch::Approx(3.0));
    tape.backward(m);
    for (double g : x.grad) CHECK(g == Catch::Approx(0.25));
}

TEST_CASE("gradients of a linear combination are the coefficients") {
    Tensor<double> x({3}, {1, 1, 1}, true);
    Tape<double> tape;
    auto lx = tape.leaf(x);
    auto loss = tape.add(tape.scale(tape.sum(lx), 2.0),
                         tape.scale(tape.sum(tape.mul(lx, lx)), 0.5));
    tape.backward(tape.sum(loss));
    // d/dx (2*sum(x) + 0.5*sum(x^2)) = 2 + x
    for (double g : x.grad) CHECK(g == Catch::Approx(3.0));
}

TEST_CASE("float and double tensors interconvert") {
    Tensor<float> f({2, 2}, {1.5f, -2.25f, 0.125f, 4.0f});
    auto d = f.template cast<double>();
    CHECK(d.shape == f.shape);
    CHECK(d.data == std::vector<double>{1.5, -2.25, 0.125, 4.0});
}
