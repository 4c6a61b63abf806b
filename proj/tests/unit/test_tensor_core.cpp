// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "core/autodiff.hpp"
#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/gradcheck.hpp"
#include "core/masking.hpp"
#include "core/parallel.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace gcl;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    return Tensor({r, c}, fixture::random_vector(r * c, rng));
}

oracle::Matrix to_rows(const Tensor& t) {
    oracle::Matrix m(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
    return m;
}

}  // namespace

TEST_SUITE("tensor_core") {

TEST_CASE("matmul identity and orthogonal pick") {
    const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
    const Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
    CHECK(ad::matmul(eye, a) == a);
    const Tensor pick = ad::matmul(Tensor::matrix(1, 2, {1, 0}), Tensor::matrix(2, 1, {0, 5}));
    CHECK(pick.shape() == Shape{1, 1});
    CHECK(pick[0] == 0.0);
}

TEST_CASE("matmul matches the triple loop") {
    Rng rng = make_rng(11, "matmul");
    for (int rep = 0; rep < 20; ++rep) {
        const Tensor a = random_matrix(3, 4, rng);
        const Tensor b = random_matrix(4, 2, rng);
        const auto expected = oracle::matmul(to_rows(a), to_rows(b));
        const Tensor c = ad::matmul(a, b);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(c.at(i, j) - expected[i][j]) <= 1e-12);
    }
}

TEST_CASE("linear with many output columns matches the triple loop") {
    // Exercises the blocked and remainder column paths of the kernel.
    Rng rng = make_rng(5, "linear");
    ad::Tape tape(false);
    const Tensor x = random_matrix(3, 7, rng);
    const Tensor w = random_matrix(11, 7, rng);
    const Tensor y = ad::linear(tape.constant(x), tape.constant(w)).value();
    oracle::Matrix wt(7, std::vector<double>(11));
    for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 7; ++j) wt[j][i] = w.at(i, j);
    const auto expected = oracle::matmul(to_rows(x), wt);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 11; ++j) CHECK(std::abs(y.at(i, j) - expected[i][j]) <= 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
    try {
        (void)ad::matmul(Tensor({2, 3}), Tensor({2, 3}));
        FAIL("expected a dimension error");
    } catch (const DimensionError& e) {
        const std::string what = e.what();
        CHECK(what.find("[2x3]") != std::string::npos);
    }
}

TEST_CASE("relu, layer norm and token concatenation") {
    ad::Tape tape(false);
    const Tensor r = ad::relu(tape.constant(Tensor::vector({-2, 3}))).value();
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 3.0);

    const Tensor ln = ad::layer_norm(tape.constant(Tensor::filled({1, 6}, 4.2))).value();
    for (double v : ln.values()) CHECK(std::abs(v) <= 1e-2);

    Rng rng = make_rng(3, "ln");
    const Tensor x = random_matrix(2, 5, rng);
    const Tensor y = ad::layer_norm(tape.constant(x)).value();
    for (std::size_t i = 0; i < 2; ++i) {
        const auto expected = oracle::layer_norm_row(std::vector<double>(x.values().begin() + i * 5, x.values().begin() + i * 5 + 5),
                                                     ad::kLayerNormEps);
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(y.at(i, j) - expected[j]) <= 1e-12);
    }

    const Tensor a = random_matrix(4, 8, rng);
    const Tensor b = random_matrix(16, 8, rng);
    const Tensor c = ad::concat_tokens(tape.constant(a), tape.constant(b)).value();
    REQUIRE(c.shape() == Shape{20, 8});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(c.at(i, j) == a.at(i, j));
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(c.at(4 + i, j) == b.at(i, j));

    CHECK_THROWS_AS(ad::add(tape.constant(Tensor({2, 2})), tape.constant(Tensor({2, 3}))), DimensionError);
}

TEST_CASE("masked cross-entropy") {
    ad::Tape tape(false);
    const MaskVector full = MaskVector::full(2);
    CHECK(ad::masked_softmax_cross_entropy(tape.constant(Tensor::vector({0, 0})), 0, full).value()[0] ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const MaskVector m{{1, 0, 1}, MaskPolicy::batch};
    const double masked = ad::masked_softmax_cross_entropy(tape.constant(Tensor::vector({5, -3, 0})), 0, m).value()[0];
    const double two = ad::cross_entropy(tape.constant(Tensor::vector({5, 0})), 0).value()[0];
    CHECK(std::abs(masked - two) <= 1e-15);

    Rng rng = make_rng(9, "ce");
    const std::vector<int> keep{1, 1, 1, 0, 0, 0};
    const MaskVector m6{{1, 1, 1, 0, 0, 0}, MaskPolicy::batch};
    for (int rep = 0; rep < 50; ++rep) {
        const auto logits = fixture::random_vector(6, rng, 3.0);
        const std::size_t label = uniform_index(rng, 3);
        const double got = ad::masked_softmax_cross_entropy(tape.constant(Tensor({6}, logits)), label, m6).value()[0];
        CHECK(std::abs(got - oracle::masked_ce(logits, label, keep)) <= 1e-12);
    }

    CHECK_THROWS_AS(ad::masked_softmax_cross_entropy(tape.constant(Tensor::vector({1, 2, 3})), 1, m), MaskedLabelError);
}

TEST_CASE("masked logits receive an exactly zero gradient") {
    Rng rng = make_rng(2, "maskgrad");
    ParameterStore store;
    store.add("z", Tensor({6}, fixture::random_vector(6, rng)), true);
    const MaskVector m{{0, 1, 1, 0, 1, 0}, MaskPolicy::batch};
    ad::Tape tape;
    ad::Var loss = ad::masked_softmax_cross_entropy(tape.parameter(store, "z"), 4, m);
    const GradVector g = tape.backward(loss);
    for (std::size_t j : {0u, 3u, 5u}) CHECK(g[j] == 0.0);
    CHECK(g[4] < 0.0);
}

TEST_CASE("backward on the half squared norm") {
    ParameterStore store;
    store.add("theta", Tensor::vector({3, 4}), true);
    store.add("frozen", Tensor::vector({1, 1, 1}), false);
    ad::Tape tape;
    ad::Var th = tape.parameter(store, "theta");
    ad::Var fr = tape.parameter(store, "frozen");
    ad::Var sq = ad::reshape(ad::matmul(ad::reshape(th, {1, 2}), ad::reshape(th, {2, 1})), {1});
    ad::Var loss = ad::add(ad::scale(sq, 0.5), ad::scale(ad::reshape(ad::mean_pool(ad::reshape(fr, {3, 1})), {1}), 0.0));
    const GradVector g = tape.backward(loss);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 3.0);
    CHECK(g[1] == 4.0);
    CHECK(g.l2_norm() == 5.0);

    const GradVector again = tape.backward(loss);
    CHECK(std::vector<double>(again.values().begin(), again.values().end()) ==
          std::vector<double>(g.values().begin(), g.values().end()));
}

TEST_CASE("disconnected loss yields zeros and a warning") {
    ParameterStore store;
    store.add("theta", Tensor::vector({1, 2}), true);
    ad::Tape tape;
    (void)tape.parameter(store, "theta");
    ad::Var c = ad::mean_pool(tape.constant(Tensor({2, 1}, {1, 2})));
    diag::WarningCapture warnings;
    const GradVector g = tape.backward(c);
    CHECK(g.size() == 2);
    CHECK(g.l2_norm() == 0.0);
    CHECK(warnings.count() == 1);
}

TEST_CASE("finite differences on a quadratic") {
    ParameterStore store;
    Rng rng = make_rng(4, "quad");
    store.add("theta", Tensor({5}, fixture::random_vector(5, rng)), true);
    const LossFn quad = [](const ParameterStore& p, GradVector* g) {
        const auto& t = p.get("theta");
        double l = 0.0;
        std::vector<double> grad(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            l += 0.5 * (i + 1.0) * t[i] * t[i];
            grad[i] = (i + 1.0) * t[i];
        }
        if (g) *g = GradVector(grad);
        return l;
    };
    const auto before = store.flatten();
    CHECK(finite_diff_check(quad, store) <= 1e-9);
    CHECK(store.flatten() == before);

    ParameterStore empty;
    CHECK(finite_diff_check(quad, empty) == 0.0);

    const LossFn bad = [](const ParameterStore&, GradVector* g) {
        if (g) *g = GradVector(std::vector<double>(5, 0.0));
        return std::nan("");
    };
    CHECK_THROWS_AS(finite_diff_check(bad, store), OracleError);
}

TEST_CASE("finite differences on a random two-layer net") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng = make_rng(seed, "mlp");
        ParameterStore store;
        store.add("w1", Tensor({4, 3}, fixture::random_vector(12, rng)), true);
        store.add("b1", Tensor({4}, fixture::random_vector(4, rng)), true);
        store.add("w2", Tensor({3, 4}, fixture::random_vector(12, rng)), true);
        const Tensor x({2, 3}, fixture::random_vector(6, rng));
        const LossFn loss = [&](const ParameterStore& p, GradVector* g) {
            ad::Tape tape(g != nullptr);
            ad::Var h = ad::relu(ad::linear(tape.constant(x), tape.parameter(p, "w1"), tape.parameter(p, "b1")));
            ad::Var out = ad::linear(h, tape.parameter(p, "w2"));
            ad::Var l = ad::cross_entropy(ad::mean_pool(out), 1);
            if (g) *g = tape.backward(l);
            return l.value()[0];
        };
        CHECK(finite_diff_check(loss, store) <= 1e-6);
    }
}

TEST_CASE("finite differences through the prompted model and masked loss") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto m = fixture::prompted_model(seed, 6, 2, seed % 2 == 1);
        Rng rng = make_rng(seed, "batch");
        const Batch batch = fixture::random_batch(3, m.config.input_dim, 6, rng);
        const MaskVector mask = masking::mask_from_labels(std::vector<std::size_t>{batch[0].label, batch[1].label, batch[2].label, 5}, 6);
        const LossFn loss = [&](const ParameterStore& p, GradVector* g) {
            return batch_loss(p, m.config, batch, &mask, g);
        };
        CHECK(finite_diff_check(loss, m.store) <= 1e-4);
    }
}

TEST_CASE("flatten and unflatten round-trip exactly") {
    auto m = fixture::prompted_model(7);
    const auto flat = m.store.flatten();
    const auto fp = m.store.fingerprint(false);
    std::vector<double> other(flat.size(), 0.25);
    m.store.unflatten(other);
    CHECK(m.store.fingerprint(false) != fp);
    m.store.unflatten(flat);
    CHECK(m.store.fingerprint(false) == fp);
    CHECK_THROWS_AS(m.store.unflatten(std::vector<double>(flat.size() + 1)), DimensionError);
}

TEST_CASE("batch loss and gradient do not depend on the thread count") {
    auto m = fixture::prompted_model(3);
    Rng rng = make_rng(3, "threads");
    const Batch batch = fixture::random_batch(9, m.config.input_dim, 6, rng);
    set_num_threads(1);
    GradVector g1;
    const double l1 = batch_loss(m.store, m.config, batch, nullptr, &g1);
    set_num_threads(4);
    GradVector g4;
    const double l4 = batch_loss(m.store, m.config, batch, nullptr, &g4);
    set_num_threads(1);
    CHECK(l1 == l4);
    CHECK(std::vector<double>(g1.values().begin(), g1.values().end()) ==
          std::vector<double>(g4.values().begin(), g4.values().end()));
}

}  // TEST_SUITE
