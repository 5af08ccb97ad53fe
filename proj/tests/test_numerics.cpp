// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "gazegan/adam.hpp"
#include "gazegan/error.hpp"
#include "gazegan/kernels.hpp"
#include "gazegan/ops.hpp"
#include "gazegan/rng.hpp"
#include "support.hpp"

using namespace gaze;
using nn::Tensor;
using nn::TensorPtr;

TEST_CASE("tensor basics") {
  auto t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t->size() == 6);
  CHECK(t->dim(0) == 2);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
  CHECK_THROWS_AS(t->item(), ContractError);
  CHECK(Tensor::scalar(4.5)->item() == 4.5);
}

TEST_CASE("conv1d hand-computed values") {
  auto input = Tensor::from({1, 3}, {1, 2, 3});
  auto kernel = Tensor::from({1, 1, 2}, {1, 1});
  auto bias = Tensor::zeros({1});
  auto out = nn::conv1d(nullptr, input, kernel, bias, 1, 0);
  REQUIRE(out->shape == std::vector<int64_t>{1, 2});
  CHECK(out->data[0] == 3.0);
  CHECK(out->data[1] == 5.0);

  // identity 1x1x1 kernel
  auto five = Tensor::from({1, 1}, {5});
  auto ident = Tensor::from({1, 1, 1}, {1});
  CHECK(nn::conv1d(nullptr, five, ident, bias, 1, 0)->data[0] == 5.0);

  // stride 2
  auto input4 = Tensor::from({1, 4}, {1, 2, 3, 4});
  auto strided = nn::conv1d(nullptr, input4, kernel, bias, 2, 0);
  REQUIRE(strided->shape == std::vector<int64_t>{1, 2});
  CHECK(strided->data[0] == 3.0);
  CHECK(strided->data[1] == 7.0);
}

TEST_CASE("conv1d shape errors") {
  auto input = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  auto kernel = Tensor::from({1, 1, 2}, {1, 1});  // expects C_in == 1
  auto bias = Tensor::zeros({1});
  CHECK_THROWS_AS(nn::conv1d(nullptr, input, kernel, bias, 1, 0), ShapeError);

  auto shorty = Tensor::from({1, 1}, {1});
  auto wide = Tensor::from({1, 1, 3}, {1, 1, 1});
  CHECK_THROWS_AS(nn::conv1d(nullptr, shorty, wide, bias, 1, 0), ShapeError);
}

TEST_CASE("conv1d_transpose hand-computed values") {
  auto one = Tensor::from({1, 1}, {1});
  auto kernel = Tensor::from({1, 1, 2}, {1, 1});
  auto bias = Tensor::zeros({1});
  auto out = nn::conv1d_transpose(nullptr, one, kernel, bias, 1, 0);
  REQUIRE(out->shape == std::vector<int64_t>{1, 2});
  CHECK(out->data[0] == 1.0);
  CHECK(out->data[1] == 1.0);

  // stride-2 scatter
  auto two = Tensor::from({1, 2}, {1, 1});
  auto ident = Tensor::from({1, 1, 1}, {1});
  auto scattered = nn::conv1d_transpose(nullptr, two, ident, bias, 2, 0);
  REQUIRE(scattered->shape == std::vector<int64_t>{1, 3});
  CHECK(scattered->data[0] == 1.0);
  CHECK(scattered->data[1] == 0.0);
  CHECK(scattered->data[2] == 1.0);

  // non-positive output length
  CHECK_THROWS_AS(nn::conv1d_transpose(nullptr, one, ident, bias, 1, 2), ShapeError);
}

TEST_CASE("conv adjoint identity on random shapes") {
  nn::Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int64_t c_in = 1 + rng.below(4);
    const int64_t c_out = 1 + rng.below(4);
    const int64_t k = 1 + rng.below(3);
    const int64_t stride = 1 + rng.below(2);
    const int64_t pad = rng.below(2);
    // pick t so the conv geometry divides evenly and the adjoint pair is exact
    int64_t t = k + stride * (1 + rng.below(6)) - 2 * pad;
    if (t < k) t = k;
    const int64_t t_out = nn::conv_out_len(t, k, stride, pad);
    if (t_out < 1 || (t + 2 * pad - k) % stride != 0) continue;

    auto a = testsupport::random_tensor({c_in, t}, rng, false);
    auto b = testsupport::random_tensor({c_out, t_out}, rng, false);
    auto w = testsupport::random_tensor({c_out, c_in, k}, rng, false);
    auto zero_out = Tensor::zeros({c_out});
    auto zero_in = Tensor::zeros({c_in});

    auto conv_a = nn::conv1d(nullptr, a, w, zero_out, stride, pad);
    auto tconv_b = nn::conv1d_transpose(nullptr, b, w, zero_in, stride, pad);

    double lhs = 0.0, rhs = 0.0;
    for (int64_t i = 0; i < conv_a->size(); ++i)
      lhs += conv_a->data[static_cast<size_t>(i)] * b->data[static_cast<size_t>(i)];
    for (int64_t i = 0; i < a->size(); ++i)
      rhs += a->data[static_cast<size_t>(i)] * tconv_b->data[static_cast<size_t>(i)];
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("dense hand-computed values") {
  auto x = Tensor::from({2}, {1, 2});
  auto eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  auto zero2 = Tensor::zeros({2});
  auto out = nn::dense(nullptr, x, eye, zero2);
  CHECK(out->data == std::vector<double>{1, 2});

  auto w = Tensor::from({1, 2}, {2, 3});
  auto b1 = Tensor::from({1}, {1});
  CHECK(nn::dense(nullptr, Tensor::from({2}, {1, 1}), w, b1)->data[0] == 6.0);

  auto b5 = Tensor::from({1}, {5});
  CHECK(nn::dense(nullptr, Tensor::from({2}, {0, 0}), w, b5)->data[0] == 5.0);

  CHECK_THROWS_AS(nn::dense(nullptr, Tensor::from({3}, {1, 1, 1}), w, b1), ShapeError);
}

TEST_CASE("embedding lookup") {
  auto table = Tensor::from({2, 2}, {1, 2, 3, 4});
  auto row = nn::embedding_lookup(nullptr, table, 1);
  CHECK(row->data == std::vector<double>{3, 4});
  CHECK(nn::embedding_lookup(nullptr, table, 0)->data == std::vector<double>{1, 2});
  CHECK_THROWS_AS(nn::embedding_lookup(nullptr, table, 2), IndexError);
  CHECK_THROWS_AS(nn::embedding_lookup(nullptr, table, -1), IndexError);

  // gradient lands only in the selected row
  table->requires_grad = true;
  nn::Tape tape;
  auto loss = nn::sum_all(&tape, nn::embedding_lookup(&tape, table, 1));
  tape.backward(loss);
  CHECK(table->grad == std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("activation values and codomains") {
  auto zero = Tensor::scalar(0.0);
  CHECK(nn::sigmoid(nullptr, zero)->item() == 0.5);
  CHECK(nn::tanh_act(nullptr, zero)->item() == 0.0);
  CHECK(nn::leaky_relu(nullptr, Tensor::scalar(-1.0), 0.2)->item() == doctest::Approx(-0.2));
  CHECK(nn::leaky_relu(nullptr, Tensor::scalar(3.0), 0.2)->item() == 3.0);

  for (double x : {-1e6, -800.0, -40.0, 40.0, 800.0, 1e6}) {
    const double s = nn::sigmoid(nullptr, Tensor::scalar(x))->item();
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    const double t = nn::tanh_act(nullptr, Tensor::scalar(x))->item();
    CHECK(t > -1.0);
    CHECK(t < 1.0);
  }
}

TEST_CASE("bce loss values") {
  const double ln2 = std::log(2.0);
  auto half = Tensor::scalar(0.5);
  auto one = Tensor::scalar(1.0);
  CHECK(nn::bce_loss(nullptr, half, one)->item() == doctest::Approx(ln2).epsilon(1e-12));

  auto preds = Tensor::from({2}, {0.5, 0.5});
  auto targets = Tensor::from({2}, {1, 0});
  CHECK(nn::bce_loss(nullptr, preds, targets)->item() == doctest::Approx(ln2).epsilon(1e-12));

  CHECK(nn::bce_loss(nullptr, half, Tensor::scalar(0.5))->item() ==
        doctest::Approx(ln2).epsilon(1e-12));

  CHECK_THROWS_AS(nn::bce_loss(nullptr, preds, one), ShapeError);

  // clamping keeps the loss finite at the codomain edges
  CHECK(std::isfinite(nn::bce_loss(nullptr, Tensor::scalar(0.0), one)->item()));
  CHECK(std::isfinite(nn::bce_loss(nullptr, Tensor::scalar(1.0), Tensor::scalar(0.0))->item()));
}

TEST_CASE("backward basics") {
  nn::Rng rng(3);
  auto x = testsupport::random_tensor({3, 4}, rng, true);
  nn::Tape tape;
  auto loss = nn::sum_all(&tape, x);
  tape.backward(loss);
  for (double g : x->grad) CHECK(g == 1.0);

  // loss must be scalar
  nn::Tape tape2;
  auto y = nn::affine(&tape2, x, 2.0, 0.0);
  CHECK_THROWS_AS(tape2.backward(y), ContractError);
}

TEST_CASE("backward chain rule: bce(sigmoid(w), 1) at w=0") {
  auto w = Tensor::from({1}, {0.0}, true);
  nn::Tape tape;
  auto loss = nn::bce_loss(&tape, nn::sigmoid(&tape, w), Tensor::scalar(1.0));
  tape.backward(loss);
  CHECK(w->grad[0] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("adam oracle") {
  auto p = Tensor::from({1}, {1.0}, true);
  p->ensure_grad();
  nn::AdamState state(1, 1e-4);

  p->grad[0] = 1.0;
  nn::adam_step(*p, state);
  const double expected1 = 1.0 - 1e-4 * 1.0 / (1.0 + 1e-8);
  CHECK(std::abs(p->data[0] - expected1) < 1e-9);
  CHECK(state.t == 1);

  p->grad[0] = 1.0;
  nn::adam_step(*p, state);
  CHECK(std::abs(p->data[0] - (expected1 - 1e-4 / (1.0 + 1e-8))) < 1e-9);
  CHECK(p->data[0] == doctest::Approx(0.99980).epsilon(1e-7));

  // zero gradient leaves the parameter in place
  auto q = Tensor::from({1}, {2.5}, true);
  q->ensure_grad();
  nn::AdamState qs(1, 1e-2);
  for (int i = 0; i < 5; ++i) {
    q->grad[0] = 0.0;
    nn::adam_step(*q, qs);
  }
  CHECK(q->data[0] == 2.5);

  auto r = Tensor::from({1}, {1.0}, true);
  nn::AdamState rs(1, 1e-2);
  CHECK_THROWS_AS(nn::adam_step(*r, rs), ContractError);
}

TEST_CASE("forward determinism is bit-exact") {
  nn::Rng rng(21);
  auto input = testsupport::random_tensor({2, 3, 40}, rng, false);
  auto w = testsupport::random_tensor({5, 3, 4}, rng, false);
  auto b = testsupport::random_tensor({5}, rng, false);
  auto first = nn::conv1d(nullptr, input, w, b, 2, 1);
  auto second = nn::conv1d(nullptr, input, w, b, 2, 1);
  CHECK(std::memcmp(first->data.data(), second->data.data(),
                    first->data.size() * sizeof(double)) == 0);
}

TEST_CASE("serial and parallel kernels agree bit-exactly") {
  nn::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int64_t b_count = 1 + rng.below(5);
    const int64_t c_in = 1 + rng.below(6);
    const int64_t c_out = 1 + rng.below(6);
    const int64_t k = 1 + rng.below(4);
    const int64_t stride = 1 + rng.below(2);
    const int64_t pad = rng.below(2);
    const int64_t t = k + rng.below(40);
    const int64_t t_out = nn::conv_out_len(t, k, stride, pad);
    if (t_out < 1) continue;

    auto in = testsupport::random_tensor({b_count, c_in, t}, rng, false);
    auto w = testsupport::random_tensor({c_out, c_in, k}, rng, false);
    auto gout = testsupport::random_tensor({b_count, c_out, t_out}, rng, false);

    std::vector<double> out_s(static_cast<size_t>(b_count * c_out * t_out), 0.0);
    std::vector<double> out_p = out_s;
    nn::serial::xcorr_acc(in->data.data(), w->data.data(), out_s.data(), b_count, c_in, t,
                          c_out, k, stride, pad, t_out);
    nn::par::xcorr_acc(in->data.data(), w->data.data(), out_p.data(), b_count, c_in, t,
                       c_out, k, stride, pad, t_out);
    CHECK(out_s == out_p);

    std::vector<double> gin_s(static_cast<size_t>(b_count * c_in * t), 0.0);
    std::vector<double> gin_p = gin_s;
    nn::serial::xcorr_adjoint_acc(gout->data.data(), w->data.data(), gin_s.data(), b_count,
                                  c_in, t, c_out, k, stride, pad, t_out);
    nn::par::xcorr_adjoint_acc(gout->data.data(), w->data.data(), gin_p.data(), b_count,
                               c_in, t, c_out, k, stride, pad, t_out);
    CHECK(gin_s == gin_p);

    std::vector<double> gw_s(static_cast<size_t>(c_out * c_in * k), 0.0);
    std::vector<double> gw_p = gw_s;
    nn::serial::xcorr_weight_acc(in->data.data(), gout->data.data(), gw_s.data(), b_count,
                                 c_in, t, c_out, k, stride, pad, t_out);
    nn::par::xcorr_weight_acc(in->data.data(), gout->data.data(), gw_p.data(), b_count,
                              c_in, t, c_out, k, stride, pad, t_out);
    CHECK(gw_s == gw_p);

    const int64_t n_in = 1 + rng.below(50), m_out = 1 + rng.below(50);
    auto x = testsupport::random_tensor({b_count, n_in}, rng, false);
    auto wm = testsupport::random_tensor({m_out, n_in}, rng, false);
    auto g = testsupport::random_tensor({b_count, m_out}, rng, false);
    std::vector<double> mv_s(static_cast<size_t>(b_count * m_out), 0.0), mv_p = mv_s;
    nn::serial::matvec_acc(x->data.data(), wm->data.data(), mv_s.data(), b_count, n_in, m_out);
    nn::par::matvec_acc(x->data.data(), wm->data.data(), mv_p.data(), b_count, n_in, m_out);
    CHECK(mv_s == mv_p);

    std::vector<double> gw2_s(static_cast<size_t>(m_out * n_in), 0.0), gw2_p = gw2_s;
    std::vector<double> gb_s(static_cast<size_t>(m_out), 0.0), gb_p = gb_s;
    nn::serial::matvec_weight_acc(x->data.data(), g->data.data(), gw2_s.data(), gb_s.data(),
                                  b_count, n_in, m_out);
    nn::par::matvec_weight_acc(x->data.data(), g->data.data(), gw2_p.data(), gb_p.data(),
                               b_count, n_in, m_out);
    CHECK(gw2_s == gw2_p);
    CHECK(gb_s == gb_p);
  }
}

TEST_CASE("softmax rows normalize") {
  nn::Rng rng(5);
  auto logits = testsupport::random_tensor({4, 7}, rng, false, 3.0);
  auto probs = nn::softmax_probs(logits);
  for (int64_t b = 0; b < 4; ++b) {
    double sum = 0.0;
    for (int64_t k = 0; k < 7; ++k) sum += probs->data[static_cast<size_t>(b * 7 + k)];
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("concat and slice round-trip") {
  auto a = Tensor::from({2, 2, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  auto b = Tensor::from({2, 1, 3}, {-1, -2, -3, -4, -5, -6});
  auto cat = nn::concat(nullptr, a, b, 1);
  REQUIRE(cat->shape == std::vector<int64_t>{2, 3, 3});
  auto back_a = nn::slice_axis(nullptr, cat, 1, 0, 2);
  auto back_b = nn::slice_axis(nullptr, cat, 1, 2, 3);
  CHECK(back_a->data == a->data);
  CHECK(back_b->data == b->data);
  CHECK_THROWS_AS(nn::concat(nullptr, a, Tensor::from({2, 1, 2}, {1, 2, 3, 4}), 1), ShapeError);
  CHECK_THROWS_AS(nn::slice_axis(nullptr, a, 1, 2, 2), ShapeError);
}
