#include <cmath>
#include <functional>

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/objective.hpp"
#include "test_support.hpp"

using namespace lowlight;
namespace lt = lowlight::testing;

namespace {

// Direct-formula oracles, written independently of the library.
double oracle_fidelity(const Plane& x, const Plane& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

double oracle_smoothness(const Plane& x) {
  double v = 0.0, h = 0.0;
  for (std::size_t r = 0; r + 1 < x.height(); ++r) {
    for (std::size_t c = 0; c < x.width(); ++c) v += std::pow(x.at(r + 1, c) - x.at(r, c), 2);
  }
  for (std::size_t r = 0; r < x.height(); ++r) {
    for (std::size_t c = 0; c + 1 < x.width(); ++c) h += std::pow(x.at(r, c + 1) - x.at(r, c), 2);
  }
  return std::pow(std::sqrt(v) + std::sqrt(h), 2);
}

double oracle_exposure(const Plane& x, std::size_t side, double level) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t by = 0; by < x.height(); by += side) {
    for (std::size_t bx = 0; bx < x.width(); bx += side) {
      double t = 0.0;
      for (std::size_t y = by; y < by + side; ++y) {
        for (std::size_t c = bx; c < bx + side; ++c) t += x.at(y, c);
      }
      t /= static_cast<double>(side * side);
      s += std::abs(std::sqrt(t) - level);
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

double oracle_sparsity(const Plane& z) {
  double s = 0.0;
  for (double v : z.data()) s += std::abs(v);
  return s / static_cast<double>(z.size());
}

// Central differences of f with respect to every sample of x.
void check_fd(const std::function<double(const Plane&)>& f, const Plane& x, const Plane& grad,
              double tol, double h = 1e-6) {
  Plane p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
    REQUIRE(std::abs(fd - grad[i]) / denom < tol);
  }
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("fidelity") {
    const Plane y = lt::random_plane(5, 5, 1);
    const LossTerm same = fidelity_loss(y, y);
    CHECK(same.value == 0.0);
    for (double g : same.grad.data()) CHECK(g == 0.0);

    Plane shifted = y;
    for (double& v : shifted.data()) v += 0.1;
    CHECK(fidelity_loss(shifted, y).value == doctest::Approx(0.01).epsilon(1e-12));

    const Plane x = lt::random_plane(5, 5, 2);
    const LossTerm t = fidelity_loss(x, y);
    CHECK(t.value == doctest::Approx(oracle_fidelity(x, y)).epsilon(1e-14));
    check_fd([&](const Plane& p) { return oracle_fidelity(p, y); }, x, t.grad, 1e-6);
    CHECK_THROWS_AS(fidelity_loss(x, Plane(5, 4)), ArgumentError);
  }

  TEST_CASE("smoothness") {
    CHECK(smoothness_loss(Plane(4, 4, 0.3)).value == 0.0);
    const Plane two(2, 2, std::vector<double>{0, 1, 0, 1});
    CHECK(smoothness_loss(two).value == doctest::Approx(2.0).epsilon(1e-14));

    for (std::uint64_t seed : {3u, 4u, 5u}) {
      const Plane x = lt::random_plane(4, 4, seed);
      const LossTerm t = smoothness_loss(x);
      CHECK(t.value == doctest::Approx(oracle_smoothness(x)).epsilon(1e-13));
      check_fd(oracle_smoothness, x, t.grad, 1e-5);
    }
    CHECK_THROWS_AS(smoothness_loss(Plane(1, 1, 0.5)), ArgumentError);
    CHECK_THROWS_AS(smoothness_loss(Plane(1, 5, 0.5)), ArgumentError);
  }

  TEST_CASE("smoothness with one flat direction keeps a finite gradient") {
    Plane x(3, 3);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) x.at(r, c) = 0.1 * c;  // no vertical change
    }
    const LossTerm t = smoothness_loss(x);
    for (double g : t.grad.data()) CHECK(std::isfinite(g));
  }

  TEST_CASE("exposure") {
    ExposureSpec spec;
    CHECK(exposure_loss(Plane(32, 32, 0.25), spec).value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(exposure_loss(Plane(32, 32, 1.0), spec).value == doctest::Approx(0.5).epsilon(1e-15));

    const Plane x = lt::random_plane(32, 32, 6, 0.05, 1.0);
    const LossTerm t = exposure_loss(x, spec);
    CHECK(t.value == doctest::Approx(oracle_exposure(x, 16, 0.5)).epsilon(1e-14));
    check_fd([&](const Plane& p) { return oracle_exposure(p, 16, 0.5); }, x, t.grad, 1e-5);

    ExposureSpec small{0.3, 4};
    const Plane x8 = lt::random_plane(8, 12, 7, 0.05, 1.0);
    CHECK(exposure_loss(x8, small).value == doctest::Approx(oracle_exposure(x8, 4, 0.3)).epsilon(1e-14));

    CHECK_THROWS_AS(exposure_loss(Plane(20, 32, 0.5), spec), ArgumentError);
    CHECK_THROWS_AS(exposure_loss(Plane(32, 32, 0.0), spec), DomainError);
    CHECK_THROWS_AS(exposure_loss(x, ExposureSpec{0.0, 16}), ArgumentError);
  }

  TEST_CASE("sparsity") {
    const LossTerm half = sparsity_loss(Plane(3, 3, 0.5));
    CHECK(half.value == doctest::Approx(0.5));
    const LossTerm zero = sparsity_loss(Plane(3, 3, 0.0));
    CHECK(zero.value == 0.0);
    for (double g : zero.grad.data()) CHECK(g == 0.0);
    const Plane z = lt::random_plane(6, 7, 8, -1.0, 2.0);
    const LossTerm t = sparsity_loss(z);
    CHECK(t.value == doctest::Approx(oracle_sparsity(z)).epsilon(1e-14));
    check_fd(oracle_sparsity, z, t.grad, 1e-6);
  }

  TEST_CASE("total loss composition") {
    const Plane y = lt::random_plane(32, 32, 9, 0.05, 0.5);
    const Plane x = lt::random_plane(32, 32, 10, 0.3, 1.0);
    Plane z(32, 32);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = y[i] / x[i];

    const TotalLoss none = total_loss(x, y, z, LossWeights{0, 0, 0, 0}, ExposureSpec{});
    CHECK(none.report.total == 0.0);
    for (double g : none.grad.data()) CHECK(g == 0.0);

    const TotalLoss fid = total_loss(x, y, z, LossWeights{1, 0, 0, 0}, ExposureSpec{});
    CHECK(fid.report.total == fidelity_loss(x, y).value);

    const LossWeights w;
    const TotalLoss t = total_loss(x, y, z, w, ExposureSpec{});
    const double want = w.alpha * oracle_fidelity(x, y) + w.beta * oracle_smoothness(x) +
                        w.gamma * oracle_exposure(x, 16, 0.5) + w.delta * oracle_sparsity(z);
    CHECK(t.report.total == doctest::Approx(want).epsilon(1e-12));
    CHECK(t.report.finite());

    // the gradient sees z = y / x as a function of x
    auto f = [&](const Plane& p) {
      Plane zp(32, 32);
      for (std::size_t i = 0; i < zp.size(); ++i) zp[i] = y[i] / p[i];
      return w.alpha * oracle_fidelity(p, y) + w.beta * oracle_smoothness(p) +
             w.gamma * oracle_exposure(p, 16, 0.5) + w.delta * oracle_sparsity(zp);
    };
    // the objective is O(1e3) here, so a larger step keeps roundoff below truncation
    check_fd(f, x, t.grad, 1e-5, 1e-5);

    CHECK_THROWS_AS(total_loss(x, y, z, LossWeights{-1, 0, 0, 0}, ExposureSpec{}), ArgumentError);
  }
}
