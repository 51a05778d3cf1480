#include <functional>

#include "doctest.h"
#include "tcsf/nn.hpp"

using namespace tcsf;
using nn::Matrix;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * uniform_open(rng) - 1.0;
  return m;
}

// Max relative error between analytic gradient and central differences of
// `loss` with respect to the entries of `x`.
double gradient_error(Matrix& x, const Matrix& analytic, const std::function<double()>& loss) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    const double h = 1e-6;
    x.data()[i] = keep + h;
    const double up = loss();
    x.data()[i] = keep - h;
    const double down = loss();
    x.data()[i] = keep;
    const double fd = (up - down) / (2 * h);
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(fd - a) / std::max(1.0, std::abs(fd) + std::abs(a)));
  }
  return worst;
}

}  // namespace

TEST_CASE("causal taps exclude the centre for the first layer") {
  const auto a = nn::causal_taps(2, 2, false);
  CHECK(a.size() == 12);
  for (const auto& t : a) CHECK((t.dy < 0 || (t.dy == 0 && t.dx < 0)));
  const auto b = nn::causal_taps(1, 1, true);
  CHECK(b.size() == 5);
  CHECK(nn::centered_taps(1, 1).size() == 9);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(7);
  nn::Conv2d conv("c", 3, 4, nn::centered_taps(1, 1));
  conv.init(rng);
  conv.bias.value = random_matrix(rng, 1, 4);
  const nn::GridShape shape{4, 5};
  Matrix x = random_matrix(rng, shape.size(), 3);
  const Matrix r = random_matrix(rng, shape.size(), 4);
  const auto loss = [&] { return conv.forward(x, shape).cwiseProduct(r).sum(); };
  conv.forward(x, shape);
  nn::zero_grads(conv.params());
  const Matrix dx = conv.backward(r);
  CHECK(gradient_error(x, dx, loss) < 1e-7);
  const Matrix dw = conv.weight.grad;
  CHECK(gradient_error(conv.weight.value, dw, loss) < 1e-7);
}

TEST_CASE("conv2d forward_at matches the full forward") {
  Rng rng(8);
  nn::Conv2d conv("c", 2, 3, nn::causal_taps(2, 2, false));
  conv.init(rng);
  const nn::GridShape shape{3, 6};
  const Matrix x = random_matrix(rng, shape.size(), 2);
  const Matrix full = conv.forward(x, shape);
  nn::RowVector row(3);
  for (int p = 0; p < shape.size(); ++p) {
    conv.forward_at(x, shape, p, row);
    CHECK((row - full.row(p)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("masked convolution equals a full kernel with masked weights zeroed") {
  Rng rng(9);
  const auto causal = nn::causal_taps(1, 1, true);
  nn::Conv2d masked("m", 2, 2, causal);
  masked.init(rng);
  const auto all = nn::centered_taps(1, 1);
  nn::Conv2d full("f", 2, 2, all);
  full.weight.value.setZero();
  for (std::size_t t = 0; t < all.size(); ++t) {
    for (std::size_t u = 0; u < causal.size(); ++u) {
      if (causal[u].dy == all[t].dy && causal[u].dx == all[t].dx) {
        full.weight.value.middleRows(static_cast<Eigen::Index>(t) * 2, 2) =
            masked.weight.value.middleRows(static_cast<Eigen::Index>(u) * 2, 2);
      }
    }
  }
  const nn::GridShape shape{4, 4};
  const Matrix x = random_matrix(rng, shape.size(), 2);
  // Equal up to GEMM summation order.
  CHECK((masked.forward(x, shape) - full.forward(x, shape)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linear, elu and maxpool gradients match finite differences") {
  Rng rng(10);
  nn::Linear lin("l", 3, 2);
  lin.init(rng);
  Matrix x = random_matrix(rng, 5, 3);
  const Matrix r = random_matrix(rng, 5, 2);
  const auto loss = [&] { return lin.forward(x).cwiseProduct(r).sum(); };
  lin.forward(x);
  nn::zero_grads(lin.params());
  const Matrix dx = lin.backward(r);
  CHECK(gradient_error(x, dx, loss) < 1e-7);
  CHECK(gradient_error(lin.weight.value, Matrix(lin.weight.grad), loss) < 1e-7);

  nn::Elu elu;
  Matrix y = random_matrix(rng, 4, 3);
  const Matrix ry = random_matrix(rng, 4, 3);
  elu.forward(y);
  const Matrix dy = elu.backward(ry);
  CHECK(gradient_error(y, dy, [&] { return elu.forward(y).cwiseProduct(ry).sum(); }) < 1e-7);

  nn::MaxPool2 pool;
  const nn::GridShape shape{5, 4};
  Matrix p = random_matrix(rng, shape.size(), 2);
  const Matrix out = pool.forward(p, shape);
  CHECK(out.rows() == 4);
  CHECK(pool.out_shape().height == 2);
  const Matrix rp = random_matrix(rng, out.rows(), 2);
  const Matrix dp = pool.backward(rp);
  CHECK(gradient_error(p, dp, [&] { return pool.forward(p, shape).cwiseProduct(rp).sum(); }) < 1e-7);
}

TEST_CASE("causal self-attention gradients and incremental evaluation") {
  Rng rng(11);
  nn::CausalSelfAttention attn("a", 4, 2);
  attn.init(rng, 1.0);
  Matrix h = random_matrix(rng, 7, 4);
  const Matrix r = random_matrix(rng, 7, 4);
  const auto loss = [&] { return attn.forward(h).cwiseProduct(r).sum(); };
  const Matrix full = attn.forward(h);
  nn::zero_grads(attn.params());
  const Matrix dh = attn.backward(r);
  CHECK(gradient_error(h, dh, loss) < 1e-7);
  CHECK(gradient_error(attn.wq.value, Matrix(attn.wq.grad), loss) < 1e-7);
  CHECK(gradient_error(attn.wk.value, Matrix(attn.wk.grad), loss) < 1e-7);
  CHECK(gradient_error(attn.wv.value, Matrix(attn.wv.grad), loss) < 1e-7);
  CHECK(gradient_error(attn.wo.value, Matrix(attn.wo.grad), loss) < 1e-7);

  Matrix keys = Matrix::Zero(7, 4), values = Matrix::Zero(7, 4);
  nn::RowVector row(4);
  for (int p = 0; p < 7; ++p) {
    attn.forward_at(h, p, keys, values, row);
    CHECK((row - full.row(p)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Output at row 2 ignores rows after it.
  Matrix h2 = h;
  h2.row(5).setConstant(3.0);
  CHECK((attn.forward(h2).topRows(5) - full.topRows(5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam minimises a quadratic") {
  nn::Param p("p", 1, 2);
  p.value << 3.0, -2.0;
  nn::Adam adam({0.1});
  for (int i = 0; i < 500; ++i) {
    p.grad = 2.0 * p.value;
    adam.step({&p});
  }
  CHECK(p.value.cwiseAbs().maxCoeff() < 1e-2);
  CHECK(adam.steps() == 500);
}
