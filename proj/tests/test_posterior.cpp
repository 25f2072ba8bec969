#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fclab/posterior.hpp"

using namespace fclab;

namespace {

Hypothesis whole_space_2d() {
  OracleSet o;
  o.member = [](const Vec&) { return true; };
  o.bounding_box = AxisBox{{-10.0, -10.0}, {10.0, 10.0}};
  return Hypothesis(std::move(o));
}

}  // namespace

TEST_CASE("posterior_halfspace examples") {
  GaussianExperiment exp({0.0, 0.0}, Mat::identity(2));
  const HalfSpace h{{1.0, 0.0}, {0.0, 0.0}};

  const auto at_anchor = posterior_halfspace(exp, {0.0, 0.0}, h);
  CHECK(double(at_anchor.value) == Catch::Approx(0.5).margin(1e-15));
  CHECK(at_anchor.method == PosteriorMethod::closed_form_halfspace);
  CHECK(at_anchor.std_err == 0.0);

  const auto q = posterior_halfspace(exp, {1.959964, 0.0}, h);
  CHECK(double(q.value) == Catch::Approx(0.975).margin(1e-6));

  CHECK_THROWS_AS(posterior_halfspace(exp, {0.0}, h), std::domain_error);
}

TEST_CASE("posterior_halfspace anchored at theta is a uniform pivot") {
  GaussianExperiment exp({0.7, -0.3}, Mat::diagonal({2.0, 0.5}));
  const HalfSpace h{{1.0, 1.0}, exp.theta_star()};
  const std::size_t n = 5000;
  std::vector<double> u;
  u.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    u.push_back(posterior_halfspace(exp, exp.sample_one(SeedSpec{301, i}), h).value);
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ks = std::max({ks, static_cast<double>(i + 1) / n - u[i],
                   u[i] - static_cast<double>(i) / n});
  }
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));  // 99% band
}

TEST_CASE("posterior_ball_complement examples") {
  GaussianExperiment exp({1.0, 0.0}, Mat::identity(2));
  const BallComplement unit_ball{{0.0, 0.0}, 1.0};

  const auto at_center = posterior_ball_complement(exp, {0.0, 0.0}, unit_ball);
  CHECK(double(at_center.value) == Catch::Approx(std::exp(-0.5)).margin(1e-10));
  CHECK(at_center.method == PosteriorMethod::closed_form_ball);

  for (const Vec& x : {Vec{0.3, 0.2}, Vec{1.5, -0.5}, Vec{4.0, 4.0}, Vec{0.0, 0.9}}) {
    CHECK(double(posterior_ball_complement(exp, x, unit_ball).value) > 0.6);
  }

  const auto tiny = posterior_ball_complement(exp, {0.5, 0.5},
                                              BallComplement{{0.0, 0.0}, 1e-6});
  CHECK(double(tiny.value) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("posterior_prob_mc matches closed forms") {
  GaussianExperiment exp({0.0, 0.0}, Mat::identity(2));

  const auto certain =
      posterior_prob_mc(exp, {0.0, 0.0}, whole_space_2d(), 2000, SeedSpec{40, 0});
  CHECK(double(certain.value) == 1.0);
  CHECK(certain.std_err == 0.0);

  const Vec x{0.4, -0.2};
  const HalfSpace hs{{1.0, 2.0}, {0.3, 0.0}};
  const auto mc_hs =
      posterior_prob_mc(exp, x, Hypothesis(hs), 100'000, SeedSpec{41, 0});
  const auto cf_hs = posterior_halfspace(exp, x, hs);
  CHECK(std::fabs(double(mc_hs.value) - double(cf_hs.value)) <= 3.0 * mc_hs.std_err);

  const BallComplement bc{{0.2, 0.1}, 1.3};
  const auto mc_bc =
      posterior_prob_mc(exp, x, Hypothesis(bc), 100'000, SeedSpec{42, 0});
  const auto cf_bc = posterior_ball_complement(exp, x, bc);
  CHECK(std::fabs(double(mc_bc.value) - double(cf_bc.value)) <= 3.0 * mc_bc.std_err);

  CHECK_THROWS_AS(posterior_prob_mc(exp, x, Hypothesis(bc), 10, SeedSpec{43, 0}),
                  std::domain_error);
}

TEST_CASE("posterior_trunc_halfline examples") {
  const auto full = posterior_trunc_halfline(0.3, HalfLineConstrained{0.0, 0.0});
  CHECK(double(full.value) == 1.0);

  const auto half = posterior_trunc_halfline(0.0, HalfLineConstrained{1.0, 0.0});
  CHECK(double(half.value) ==
        Catch::Approx((1.0 - normal_cdf(1.0)) / 0.5).margin(1e-12));
  CHECK(double(half.value) == Catch::Approx(0.317310).margin(1e-6));
  CHECK_FALSE(half.asymptotic_branch);

  const auto far_right = posterior_trunc_halfline(50.0, HalfLineConstrained{1.0, 0.0});
  CHECK(double(far_right.value) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("posterior_trunc_halfline deep truncation branch") {
  // x far below the lower bound: the direct ratio is 0/0
  const auto deep = posterior_trunc_halfline(-50.0, HalfLineConstrained{0.5, 0.0});
  CHECK(deep.asymptotic_branch);
  CHECK(double(deep.value) > 0.0);
  CHECK(double(deep.value) < 1.0);
  // continuity across the branch threshold (b = 38 at x = -38)
  const auto direct = posterior_trunc_halfline(-37.9, HalfLineConstrained{0.2, 0.0});
  const auto asym = posterior_trunc_halfline(-38.1, HalfLineConstrained{0.2, 0.0});
  CHECK_FALSE(direct.asymptotic_branch);
  CHECK(asym.asymptotic_branch);
  CHECK(std::log(double(asym.value)) ==
        Catch::Approx(std::log(double(direct.value))).margin(0.05));
}

TEST_CASE("posterior_weighted") {
  GaussianExperiment exp({0.0, 0.0}, Mat::identity(2));
  const Vec x{0.5, 0.1};
  const Hypothesis h(BallComplement{{0.0, 0.0}, 1.0});

  // flat prior recovers the plain Monte Carlo posterior
  const auto flat = posterior_weighted(exp, x, h, [](const Vec&) { return 1.0; },
                                       100'000, SeedSpec{50, 0});
  const auto mc = posterior_prob_mc(exp, x, h, 100'000, SeedSpec{50, 0});
  CHECK(std::fabs(double(flat.value) - double(mc.value)) <=
        3.0 * (flat.std_err + mc.std_err) + 1e-12);
  CHECK(flat.method == PosteriorMethod::importance_weighted);

  // 1-D: indicator prior on [0, inf) recovers the truncated closed form
  GaussianExperiment line({0.0}, Mat::identity(1));
  const HalfLineConstrained hl{1.0, 0.0};
  const auto is = posterior_weighted(
      line, {0.2}, Hypothesis(hl),
      [](const Vec& t) { return t[0] >= 0.0 ? 1.0 : 0.0; }, 200'000, SeedSpec{51, 0});
  const auto cf = posterior_trunc_halfline(0.2, hl);
  CHECK(std::fabs(double(is.value) - double(cf.value)) <= 3.0 * is.std_err);

  // prior supported inside H forces probability 1
  const auto inside = posterior_weighted(
      exp, x, h, [](const Vec& t) { return norm_sq(t) > 4.0 ? 1.0 : 0.0; },
      100'000, SeedSpec{52, 0});
  CHECK(double(inside.value) == 1.0);

  CHECK_THROWS_AS(posterior_weighted(exp, x, h, [](const Vec&) { return 0.0; },
                                     1000, SeedSpec{53, 0}),
                  std::domain_error);
}

TEST_CASE("complement additivity on shared draws") {
  GaussianExperiment exp({0.0, 0.0}, Mat::identity(2));
  const Vec x{0.7, -0.4};
  OracleSet ball;
  ball.member = [](const Vec& p) { return norm_sq(p) <= 1.0; };
  ball.bounding_box = AxisBox{{-2.0, -2.0}, {2.0, 2.0}};
  OracleSet ball_c;
  ball_c.member = [](const Vec& p) { return norm_sq(p) > 1.0; };
  ball_c.bounding_box = AxisBox{{-2.0, -2.0}, {2.0, 2.0}};
  const auto a = posterior_prob_mc(exp, x, Hypothesis(std::move(ball)), 20'000,
                                   SeedSpec{60, 0});
  const auto b = posterior_prob_mc(exp, x, Hypothesis(std::move(ball_c)), 20'000,
                                   SeedSpec{60, 0});
  CHECK(double(a.value) + double(b.value) == 1.0);
}

TEST_CASE("monotonicity on nested hypotheses with shared draws") {
  GaussianExperiment exp({0.0, 0.0}, Mat::identity(2));
  const Vec x{0.3, 0.3};
  // nested ball complements: larger radius gives the smaller set
  const auto small_set = posterior_prob_mc(exp, x, Hypothesis(BallComplement{{0, 0}, 1.5}),
                                           20'000, SeedSpec{61, 0});
  const auto big_set = posterior_prob_mc(exp, x, Hypothesis(BallComplement{{0, 0}, 0.5}),
                                         20'000, SeedSpec{61, 0});
  CHECK(double(small_set.value) <= double(big_set.value));
  // nested half-spaces
  const auto h1 = posterior_prob_mc(exp, x, Hypothesis(HalfSpace{{1, 0}, {1.0, 0}}),
                                    20'000, SeedSpec{62, 0});
  const auto h2 = posterior_prob_mc(exp, x, Hypothesis(HalfSpace{{1, 0}, {0.0, 0}}),
                                    20'000, SeedSpec{62, 0});
  CHECK(double(h1.value) <= double(h2.value));
}

TEST_CASE("superlevel posterior is bounded below by its supporting half-space") {
  // phi(theta) = ||theta - q||^2 anchored at theta_star
  GaussianExperiment exp({0.5, -0.2}, Mat::identity(2));
  const Vec q{-0.5, 0.4};
  ConvexFunction phi;
  phi.eval = [q](const Vec& t) { return norm_sq(sub(t, q)); };
  phi.subgradient = [q](const Vec& t) { return scale(sub(t, q), 2.0); };
  const Hypothesis h(SuperlevelSet{phi, exp.theta_star()});

  const auto cert = noloco_check(h, exp.theta_star(), 50'000, SeedSpec{63, 0});
  REQUIRE(cert.is_noloco);
  const HalfSpace h_lin{*cert.supporting_vector, exp.theta_star()};

  for (std::size_t rep = 0; rep < 25; ++rep) {
    const Vec x = exp.sample_one(SeedSpec{64, rep});
    const auto mc = posterior_prob_mc(exp, x, h, 20'000, SeedSpec{65, rep});
    const auto lin = posterior_halfspace(exp, x, h_lin);
    CHECK(double(mc.value) >= double(lin.value) - 3.0 * mc.std_err);
  }
}
