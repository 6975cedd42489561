#include "mulink/leakage.hpp"
#include "mulink/precoding.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace mulink;
using namespace mulink::oracle;

namespace {

// Direct sampler of E[V~* A V~], independent of the library's sampler.
struct McResult {
  CMatrix mean;
  double trace_se;
};

McResult sample_outer(const GivensAngles& hat, int l, double eps, double delta, const CMatrix& a, int n, Rng& rng) {
  GivensAngles draw = hat.truncated(l);
  CMatrix sum = CMatrix::Zero(l, l);
  std::vector<double> tr(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int c = 0; c < l; ++c) {
      for (std::size_t i = 0; i < draw.phi[c].size(); ++i)
        draw.phi[c][i] = hat.phi[c][i] + delta * (2.0 * std::uniform_real_distribution<double>()(rng) - 1.0);
      for (std::size_t i = 0; i < draw.psi[c].size(); ++i)
        draw.psi[c][i] = hat.psi[c][i] + eps * (2.0 * std::uniform_real_distribution<double>()(rng) - 1.0);
    }
    const CMatrix v = givens_reconstruct(draw);
    const CMatrix x = v.adjoint() * a * v;
    sum += x;
    tr[static_cast<std::size_t>(s)] = x.trace().real();
  }
  double m = 0.0;
  for (double t : tr) m += t / n;
  double var = 0.0;
  for (double t : tr) var += (t - m) * (t - m) / (n - 1);
  return {sum / n, std::sqrt(var / n)};
}

GivensAngles random_hat(int n, int l, const QuantizerConfig& q, Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_gaussian(n, l, rng));
  const CMatrix v = qr.householderQ() * CMatrix::Identity(n, l);
  return dequantize_angles(quantize_angles(givens_decompose(v), q), q);
}

}  // namespace

TEST_CASE("phase expectation entries match quadrature") {
  Rng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 3;
    const int l = t % n;
    std::vector<double> phi(static_cast<std::size_t>(n - l));
    for (double& p : phi) p = uniform(rng, 0.0, kTwoPi);
    const double delta = uniform(rng, 1e-3, 0.5);
    const CVector d = expected_phase_kron_diagonal(phi, delta, l, n);
    std::vector<cplx> mean(static_cast<std::size_t>(n), 1.0);
    for (int i = l; i < n; ++i) mean[i] = phase_mean(phi[i - l], delta);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cplx want = a == b ? cplx(1.0) : mean[a] * std::conj(mean[b]);
        worst = std::max(worst, std::abs(d(a * n + b) - want));
      }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("rotation kernels match quadrature") {
  Rng rng(2);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 3;
    const int l = t % (n - 1);
    const int m = l + 1 + (t / 3) % (n - l - 1);
    const double psi = uniform(rng, 0.0, kPi / 2);
    const double eps = uniform(rng, 1e-3, 0.4);
    const RotationKernels k = rotation_kernels(psi, eps, l, m, n);
    const RMatrix plain = mean_over([&](double p) { return RMatrix(rotation(p, l, m, n).transpose()); }, psi - eps, psi + eps);
    const RMatrix cosine =
        mean_over([&](double p) { return RMatrix(std::cos(p) * rotation(p, l, m, n).transpose()); }, psi - eps, psi + eps);
    const RMatrix sine =
        mean_over([&](double p) { return RMatrix(std::sin(p) * rotation(p, l, m, n).transpose()); }, psi - eps, psi + eps);
    worst = std::max({worst, (k.plain - plain).cwiseAbs().maxCoeff(), (k.cosine - cosine).cwiseAbs().maxCoeff(),
                      (k.sine - sine).cwiseAbs().maxCoeff()});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("rotation Kronecker expectation matches quadrature of G^T (x) G^H") {
  Rng rng(3);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 2;
    const int l = t % (n - 1);
    const int m = n - 1;
    const double psi = uniform(rng, 0.0, kPi / 2);
    const double eps = uniform(rng, 1e-3, 0.3);
    const RMatrix want = mean_over(
        [&](double p) {
          const RMatrix gt = rotation(p, l, m, n).transpose();
          return RMatrix(kron(gt, gt));
        },
        psi - eps, psi + eps, 1e-12);
    worst = std::max(worst, (expected_rotation_kron(psi, eps, l, m, n) - want).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("zero-width phase bins give the exact Kronecker product") {
  Rng rng(4);
  const int n = 4;
  const int l = 1;
  std::vector<double> phi(3);
  for (double& p : phi) p = uniform(rng, 0.0, kTwoPi);
  CVector dd(n);
  dd << 1.0, std::polar(1.0, phi[0]), std::polar(1.0, phi[1]), std::polar(1.0, phi[2]);
  const CMatrix d = dd.asDiagonal();
  const CMatrix exact = kron(CMatrix(d.transpose()), CMatrix(d.conjugate()));
  CHECK((expected_phase_kron(phi, 1e-9, l, n) - exact).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single-phase entries carry the sinc factor") {
  const std::vector<double> phi{0.3, 1.1, 2.0};
  const double delta = kPi / 64;
  const CVector d = expected_phase_kron_diagonal(phi, delta, 1, 4);
  CHECK(std::abs(d(0 * 4 + 2)) == Catch::Approx(0.999598).epsilon(1e-6));
  CHECK(std::abs(d(0 * 4 + 2)) == Catch::Approx(std::sin(delta) / delta).epsilon(1e-14));
  CHECK(std::abs(d(1 * 4 + 3)) == Catch::Approx(std::pow(std::sin(delta) / delta, 2)).epsilon(1e-14));
  CHECK(d(2 * 4 + 2) == cplx(1.0, 0.0));
}

TEST_CASE("zero phases give a real phase expectation") {
  const std::vector<double> phi(4, 0.0);
  const CVector d = expected_phase_kron_diagonal(phi, 0.1, 0, 4);
  CHECK(d.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-width rotation bins give the exact Kronecker product") {
  const double psi = 0.7;
  const RMatrix gt = rotation(psi, 1, 3, 4).transpose();
  CHECK((expected_rotation_kron(psi, 1e-9, 1, 3, 4) - kron(gt, gt)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rotation kernels at zero angle") {
  for (double eps : {0.01, 0.1, kPi / 64}) {
    const RotationKernels k = rotation_kernels(0.0, eps, 0, 1, 3);
    const double s = std::sin(eps) / eps;
    CHECK(k.plain(0, 0) == Catch::Approx(s).epsilon(1e-14));
    CHECK(k.plain(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(k.plain(2, 2) == 1.0);
    CHECK(k.cosine(0, 0) == Catch::Approx((eps + std::cos(eps) * std::sin(eps)) / (2 * eps)).epsilon(1e-14));
    CHECK(k.cosine(2, 2) == Catch::Approx(s).epsilon(1e-14));
    CHECK(k.sine(0, 0) == Catch::Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("bypass quantizer has no leakage") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<FeedbackReport> reports;
    for (int u = 0; u < 2; ++u) reports.push_back(build_report(u, {random_gaussian(2, 4, rng)}, 2, QuantizerConfig::perfect()));
    const std::vector<int> streams{2, 2};
    const PrecodingSolution sol = design_precoding(reports, streams);
    for (int u = 0; u < 2; ++u) {
      const CMatrix& f = sol.carriers[0].f[1 - u];
      const CMatrix c = expected_outer(reports[u].carriers[0].angles, 2, QuantizerConfig::perfect(), f);
      CHECK(c.norm() < 1e-10);
      Rng r2(t);
      const EmpiricalOuter e = empirical_outer(reports[u].carriers[0].angles, 2, 0.0, 0.0, f * f.adjoint(), 10, r2);
      CHECK(e.mean.norm() < 1e-12);
    }
  }
}

TEST_CASE("leakage is quadratic in the precoder scale") {
  Rng rng(6);
  const QuantizerConfig q{5, 7, false};
  const GivensAngles hat = random_hat(4, 2, q, rng);
  const CMatrix f = random_gaussian(4, 2, rng);
  const cplx alpha(1.5, -0.7);
  const CMatrix c1 = expected_outer(hat, 2, q, f);
  const CMatrix c2 = expected_outer(hat, 2, q, alpha * f);
  CHECK((c2 - std::norm(alpha) * c1).norm() < 1e-12 * c2.norm());
}

TEST_CASE("Kronecker assembly agrees with direct sampling for arbitrary PSD matrices") {
  Rng rng(7);
  for (int t = 0; t < 12; ++t) {
    const int n = 2 + t % 3;
    const int l = 1 + t % n;
    const QuantizerConfig q{2 + t % 3, 3 + t % 3, false};
    const GivensAngles hat = random_hat(n, l, q, rng);
    const CMatrix b = random_gaussian(n, n, rng);
    const CMatrix a = b * b.adjoint();
    const CMatrix c = expected_outer(expected_kron(hat, l, q.epsilon(), q.delta()), a, l);
    const McResult mc = sample_outer(hat, l, q.epsilon(), q.delta(), a, 20'000, rng);
    CHECK(std::abs(c.trace().real() - mc.mean.trace().real()) < 4.0 * mc.trace_se);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("library sampler is self-consistent") {
  Rng rng(8);
  const QuantizerConfig q{4, 6, false};
  const GivensAngles hat = random_hat(4, 2, q, rng);
  const CMatrix f = random_gaussian(4, 2, rng);
  const CMatrix a = f * f.adjoint();
  Rng r1(1);
  Rng r2(2);
  const EmpiricalOuter small = empirical_outer(hat, 2, q.epsilon(), q.delta(), a, 10'000, r1);
  const EmpiricalOuter large = empirical_outer(hat, 2, q.epsilon(), q.delta(), a, 100'000, r2);
  const double se = std::hypot(small.trace_stderr, large.trace_stderr);
  CHECK(std::abs(small.mean.trace().real() - large.mean.trace().real()) < 3.0 * se);
  const CMatrix c = expected_outer(hat, 2, q, f);
  CHECK(std::abs(c.trace().real() - large.mean.trace().real()) < 4.0 * large.trace_stderr);
}

TEST_CASE("average leakage decreases with more bits") {
  Rng rng(9);
  const std::array<QuantizerConfig, 3> qs{QuantizerConfig{4, 6, false}, QuantizerConfig{5, 7, false},
                                          QuantizerConfig{6, 8, false}};
  std::array<double, 3> mean{};
  for (int t = 0; t < 100; ++t) {
    const std::vector<CMatrix> h{random_gaussian(2, 4, rng), random_gaussian(2, 4, rng)};
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<FeedbackReport> reports;
      for (int u = 0; u < 2; ++u) reports.push_back(build_report(u, {h[u]}, 2, qs[k]));
      const std::vector<int> streams{2, 2};
      const PrecodingSolution sol = design_precoding(reports, streams);
      mean[k] += expected_outer(reports[0].carriers[0].angles, 2, qs[k], sol.carriers[0].f[1]).trace().real() / 2;
    }
  }
  CHECK(mean[0] > mean[1]);
  CHECK(mean[1] > mean[2]);
}

TEST_CASE("leakage covariance") {
  Rng rng(10);
  const RVector sigma = RVector::Random(2).cwiseAbs() + RVector::Ones(2);
  const CMatrix g = random_gaussian(2, 2, rng);
  CHECK(leakage_covariance(CMatrix::Zero(2, 2), sigma, g, 3.0).norm() == 0.0);
  const CMatrix b = random_gaussian(2, 2, rng);
  const CMatrix c = b * b.adjoint();
  CHECK((leakage_covariance(c, RVector::Ones(2), CMatrix::Identity(2, 2), 1.0) - c).norm() < 1e-14);
  CMatrix direct = CMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k) direct(i, j) += g(i, a) * sigma(a) * c(a, k) * sigma(k) * std::conj(g(j, k));
  CHECK((leakage_covariance(c, sigma, g, 2.5) - direct / 2.5).norm() < 1e-12 * direct.norm());
  CHECK_THROWS_AS(leakage_covariance(c, sigma, g, 0.0), std::invalid_argument);
}
