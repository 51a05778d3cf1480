#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "tcsf/common.hpp"
#include "tcsf/structsim.hpp"

using namespace tcsf;

namespace {

StructSimArchitecture small_arch() {
  StructSimArchitecture a;
  a.blocks = 1;
  a.channels = 8;
  a.heads = 2;
  a.components = 2;
  return a;
}

LogitWindow random_window(Rng& rng, int rows) {
  LogitWindow w;
  w.rows = rows;
  w.z.resize(static_cast<Eigen::Index>(rows) * kRadialBins, kQuadrants);
  for (Eigen::Index i = 0; i < w.z.size(); ++i) w.z.data()[i] = standard_normal(rng);
  return w;
}

LogisticMixture random_mixture(Rng& rng, int k) {
  std::vector<double> raw(3 * k);
  for (int i = 0; i < k; ++i) {
    raw[i] = 2.0 * standard_normal(rng);
    raw[k + i] = 3.0 * standard_normal(rng);
    raw[2 * k + i] = standard_normal(rng);
  }
  return constrain_mixture(raw.data(), k);
}

// Smooth temperature field with AR(1) rows, for quick training checks.
std::vector<StructuralTrajectory> toy_windows(Rng& rng, int n) {
  std::vector<StructuralTrajectory> out;
  for (int i = 0; i < n; ++i) {
    StructuralTrajectory w(13, 6, make_time(2020, 1, 1, 0));
    for (int k = 0; k < kRadialBins; ++k) {
      for (int q = 0; q < kQuadrants; ++q) {
        const double m = -60.0 + 0.5 * k;
        double x = m + 3.0 * standard_normal(rng);
        for (int r = 0; r < w.rows(); ++r) {
          w.at(r, k, q) = x;
          x = m + 0.7 * (x - m) + 2.0 * standard_normal(rng);
        }
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

TEST_CASE("logit scaling round trip and closed forms") {
  const ScalingSpec s{-80.0, 20.0, 5.0};
  CHECK(s.to_logit(-30.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.to_logit(-80.0 + 0.9 * 100.0) == doctest::Approx(std::log(9.0)).epsilon(1e-12));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double t = -79.9 + 99.8 * uniform_open(rng);
    CHECK(std::abs(s.from_logit(s.to_logit(t)) - t) <= 1e-9);
  }
  for (double z : {-1e6, -800.0, -40.0, 0.0, 40.0, 800.0, 1e6}) {
    const double t = s.from_logit(z);
    CHECK(t > s.t_min);
    CHECK(t < s.t_max);
  }
  CHECK_THROWS_AS(s.to_logit(20.0), Error);
  CHECK_THROWS_WITH(s.to_logit(25.5), doctest::Contains("25.5"));
  const auto fit = ScalingSpec::fit(-70.0, 10.0, 5.0);
  CHECK(fit.t_min == -75.0);
  CHECK(fit.t_max == 15.0);
}

TEST_CASE("mixture density closed forms and normalisation") {
  const LogisticMixture one{{1.0}, {0.0}, {1.0}};
  CHECK(mol_logpdf(0.0, one) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(std::isfinite(mol_logpdf(50.0, one)));
  CHECK(mol_logpdf(50.0, one) == doctest::Approx(-50.0 - 2.0 * std::log1p(std::exp(-50.0))).epsilon(1e-12));
  CHECK(mixture_free_parameters(3) == 32);

  const LogisticMixture bad{{1.0}, {0.0}, {0.0}};
  CHECK_THROWS_AS(mol_logpdf(0.0, bad), Error);

  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const LogisticMixture m = random_mixture(rng, 3);
    // Composite Simpson on [-60, 60] plus the analytic tails beyond.
    const int n = 240000;
    const double a = -60.0, b = 60.0, h = (b - a) / n;
    double s = std::exp(mol_logpdf(a, m)) + std::exp(mol_logpdf(b, m));
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(mol_logpdf(a + i * h, m));
    const double integral = s * h / 3.0 + mol_cdf(a, m) + (1.0 - mol_cdf(b, m));
    CHECK(std::abs(integral - 1.0) < 1e-4);
  }
}

TEST_CASE("mixture sampling edge cases") {
  Rng rng(3);
  const LogisticMixture narrow{{1.0}, {1.5}, {1e-8}};
  for (int i = 0; i < 10000; ++i) CHECK(std::abs(mol_sample(narrow, rng) - 1.5) < 1e-5);
  const LogisticMixture two{{1.0, 0.0}, {-100.0, 100.0}, {1.0, 1.0}};
  for (int i = 0; i < 10000; ++i) CHECK(mol_sample(two, rng) < 0.0);
}

TEST_CASE("mixture nll gradient matches finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 3;
    std::vector<double> raw(3 * k), grad(3 * k);
    for (double& v : raw) v = 2.0 * standard_normal(rng);
    const double z = 3.0 * standard_normal(rng);
    const double f = mixture_nll_and_grad(z, raw.data(), k, grad.data());
    CHECK(f == doctest::Approx(-mol_logpdf(z, constrain_mixture(raw.data(), k))).epsilon(1e-12));
    for (int i = 0; i < 3 * k; ++i) {
      std::vector<double> up = raw, down = raw, g(3 * k);
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (mixture_nll_and_grad(z, up.data(), k, g.data()) -
                         mixture_nll_and_grad(z, down.data(), k, g.data())) / 2e-6;
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("network backward matches finite differences of the window loss") {
  Rng rng(5);
  auto arch = small_arch();
  StructSimNetwork net(arch);
  net.init(rng);
  for (auto* p : net.params()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.2 * standard_normal(rng);
  }
  const LogitWindow w = random_window(rng, 3);
  const int k = arch.components;
  const auto loss = [&](nn::Matrix* grad) {
    const nn::Matrix raw = net.forward(w.z, w.rows);
    double total = 0.0, g[48];
    if (grad) grad->resize(raw.rows(), raw.cols());
    for (Eigen::Index p = 0; p < raw.rows(); ++p) {
      for (int q = 0; q < kQuadrants; ++q) {
        total += mixture_nll_and_grad(w.z(p, q), raw.row(p).data() + q * 3 * k, k, g);
        if (grad) {
          for (int i = 0; i < 3 * k; ++i) (*grad)(p, q * 3 * k + i) = g[i];
        }
      }
    }
    return total;
  };
  nn::Matrix grad;
  loss(&grad);
  nn::zero_grads(net.params());
  net.backward(grad);
  int checked = 0;
  for (auto* p : net.params()) {
    for (int trial = 0; trial < 4; ++trial) {
      const Eigen::Index i = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(p->value.size())));
      const double keep = p->value.data()[i];
      p->value.data()[i] = keep + 1e-5;
      const double up = loss(nullptr);
      p->value.data()[i] = keep - 1e-5;
      const double down = loss(nullptr);
      p->value.data()[i] = keep;
      const double fd = (up - down) / 2e-5;
      CHECK(p->grad.data()[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      ++checked;
    }
  }
  CHECK(checked > 30);
}

TEST_CASE("incremental evaluation equals the full forward pass") {
  Rng rng(6);
  auto arch = small_arch();
  arch.blocks = 2;
  StructSimNetwork net(arch);
  net.init(rng);
  const LogitWindow w = random_window(rng, 19);
  const nn::Matrix full = net.evaluate(w.z, w.rows);
  StructSimNetwork::Stepper st(net, 19);
  st.z = w.z;
  nn::RowVector raw(net.outputs_per_position());
  double worst = 0.0;
  for (int p = 0; p < 19 * kRadialBins; ++p) {
    st.step(p, raw);
    worst = std::max(worst, (raw - full.row(p)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("forward pass is causal in raster order") {
  Rng rng(7);
  auto arch = small_arch();
  StructSimNetwork net(arch);
  net.init(rng);
  const int rows = 4;
  const LogitWindow w = random_window(rng, rows);
  const nn::Matrix base = net.evaluate(w.z, rows);
  for (int trial = 0; trial < 20; ++trial) {
    const int j = static_cast<int>(uniform_index(rng, rows * kRadialBins));
    LogitWindow pert = w;
    pert.z.row(j).array() += 0.5;
    const nn::Matrix out = net.evaluate(pert.z, rows);
    CHECK((out.topRows(j + 1) - base.topRows(j + 1)).cwiseAbs().maxCoeff() == 0.0);
    if (j + 1 < rows * kRadialBins) CHECK((out.row(j + 1) - base.row(j + 1)).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("nll matches brute-force summation and closed forms") {
  Rng rng(8);
  auto arch = small_arch();
  const StructSimModel model = make_structsim_model(arch, {-80.0, 20.0, 5.0}, 11);
  std::vector<LogitWindow> set{random_window(rng, 2), random_window(rng, 3), random_window(rng, 1)};
  double total = 0.0, count = 0.0;
  for (const auto& w : set) {
    const auto mix = forward(model, w);
    for (Eigen::Index p = 0; p < w.z.rows(); ++p) {
      for (int q = 0; q < kQuadrants; ++q) {
        total -= mol_logpdf(w.z(p, q), mix[p][q]);
        count += 1.0;
      }
    }
  }
  CHECK(std::abs(nll(model, set) - total / count) < 1e-9);
  auto doubled = set;
  doubled.insert(doubled.end(), set.begin(), set.end());
  CHECK(nll(model, doubled) == doctest::Approx(nll(model, set)).epsilon(1e-13));
  CHECK_THROWS_AS(nll(model, {}), Error);

  // K=1 head forced to mu = z, s = 1 on a constant window.
  StructSimArchitecture a1 = arch;
  a1.components = 1;
  a1.linear_skip = false;  // head is then the last layer
  StructSimModel m1 = make_structsim_model(a1, {-80.0, 20.0, 5.0}, 3);
  auto ps = m1.network.params();
  auto* head_w = ps[ps.size() - 2];
  auto* head_b = ps.back();
  head_w->value.setZero();
  LogitWindow c;
  c.rows = 1;
  c.z = nn::Matrix::Constant(kRadialBins, kQuadrants, 0.7);
  for (int q = 0; q < kQuadrants; ++q) {
    head_b->value(0, q * 3 + 0) = 0.0;
    head_b->value(0, q * 3 + 1) = 0.7;
    head_b->value(0, q * 3 + 2) = std::log(std::expm1(1.0 - kScaleFloor));
  }
  CHECK(nll(m1, {c}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("training improves held-out nll and is deterministic") {
  Rng rng(9);
  const auto train = toy_windows(rng, 6);
  const auto held = toy_windows(rng, 2);
  auto arch = small_arch();
  StructSimTrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.learning_rate = 5e-3;
  const auto a = train_structsim(train, held, arch, cfg, 42);
  const auto b = train_structsim(train, held, arch, cfg, 42);
  REQUIRE(a.log.size() == 5);
  double best = a.log[0].heldout_nll;
  for (const auto& e : a.log) best = std::min(best, e.heldout_nll);
  CHECK(best < a.log[0].heldout_nll);
  const auto pa = a.network.params();
  const auto pb = b.network.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK((pa[i]->value - pb[i]->value).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.scaling.t_min < -60.0);

  cfg.batch_size = 7;
  CHECK_THROWS_AS(train_structsim(train, held, arch, cfg, 1), Error);
}

TEST_CASE("sliding windows cover consecutive runs only") {
  ProfileSeries s;
  const UtcTime t0 = make_time(2020, 1, 1, 0);
  for (int i = 0; i < 25; ++i) s[t0 + kProfileStep * i] = RadialProfileSet{t0 + kProfileStep * i, {}, {}};
  for (int i = 30; i < 50; ++i) s[t0 + kProfileStep * i] = RadialProfileSet{t0 + kProfileStep * i, {}, {}};
  const auto w = sliding_windows(s, 19);
  CHECK(w.size() == 7 + 2);
  CHECK(w[0].rows() == 19);
  CHECK(w[0].row_time(0) == t0);
}

TEST_CASE("simulation range, determinism and ensembles") {
  Rng rng(10);
  auto arch = small_arch();
  const StructSimModel model = make_structsim_model(arch, {-80.0, 20.0, 5.0}, 5);
  StructuralTrajectory obs(13, 0, make_time(2020, 1, 2, 0));
  for (double& v : obs.data()) v = -50.0 + 5.0 * standard_normal(rng);
  obs.at(0, 0, 0) = 40.0;  // outside the scaling: clamped inward

  SimulationDiagnostics diag;
  Rng r1(1), r2(1), r3(2);
  const auto a = simulate_completion(model, obs, 6, r1, &diag);
  const auto b = simulate_completion(model, obs, 6, r2);
  const auto c = simulate_completion(model, obs, 6, r3);
  CHECK(diag.clamped_values == 1);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.n_simulated() == 6);
  CHECK(a.at(0, 0, 0) == 40.0);
  CHECK(a.row_time(18) == make_time(2020, 1, 2, 12));
  CHECK_THROWS_AS(simulate_completion(model, obs, 0, r1), Error);
  CHECK_THROWS_AS(simulate_completion(model, obs, 7, r1), Error);

  const auto members = ensemble(model, obs, 16, 2, 99);
  CHECK(members.size() == 16);
  for (const auto& m : members) {
    CHECK(m.n_simulated() == 2);
    for (int r = 13; r < 15; ++r) {
      for (int k = 0; k < kRadialBins; ++k) {
        for (int q = 0; q < kQuadrants; ++q) {
          CHECK(m.at(r, k, q) > model.scaling.t_min);
          CHECK(m.at(r, k, q) < model.scaling.t_max);
        }
      }
    }
  }
  Rng r0(derive_seed(99, 0));
  CHECK(ensemble(model, obs, 1, 2, 99).front() == simulate_completion(model, obs, 2, r0));
  const auto mean = mean_trajectory(members);
  for (int i = 0; i < 50; ++i) {
    const std::size_t j = uniform_index(rng, mean.data().size());
    double s = 0.0;
    for (const auto& m : members) s += m.data()[j];
    CHECK(mean.data()[j] == doctest::Approx(s / 16.0).epsilon(1e-14));
  }
}
