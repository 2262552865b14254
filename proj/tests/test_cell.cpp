#include "heartsim/cell.hpp"
#include "heartsim/engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace heartsim;

namespace {

CellState at(Location location, double vx, double vy = 0.0, double vz = 0.0, double theta = 0.0) {
  CellState s;
  s.location = location;
  s.v << vx, vy, vz;
  s.theta = theta;
  return s;
}

}  // namespace

TEST_CASE("preset constants") {
  const auto uoa = cell_params_preset(CellVariant::uoa);
  CHECK(uoa.v_r == 30.0);
  CHECK(uoa.v_t == 44.5);
  CHECK(uoa.v_o == 131.1);
  CHECK(uoa.alpha(1, 3) == 0.0280);
  CHECK(uoa.beta.x() == 0.7772);
  CHECK(uoa.alpha(0, 0) == -0.0087);
  CHECK(uoa.alpha(2, 2) == 6.8265);
  CHECK(uoa.beta.z() == 0.2766);
  CHECK(uoa.f_cap_enabled);
  CHECK(uoa.q3_f_theta_enabled);

  const auto sb = cell_params_preset(CellVariant::stony_brook_2008);
  CHECK_FALSE(sb.f_cap_enabled);
  CHECK_FALSE(sb.q3_f_theta_enabled);
  CHECK(sb.alpha == uoa.alpha);

  const auto ox = cell_params_preset(CellVariant::oxford_vx_only);
  CHECK(ox.vx_only());
  CHECK(ox.alpha.row(1).isZero());
  CHECK(ox.alpha.row(2).isZero());
}

TEST_CASE("variant names round-trip") {
  for (auto v : {CellVariant::uoa, CellVariant::stony_brook_2008, CellVariant::oxford_vx_only})
    CHECK(cell_variant_from_string(to_string(v)) == v);
  CHECK_THROWS(cell_variant_from_string("hodgkin"));
}

TEST_CASE("check_cell_params rejects inconsistent thresholds") {
  auto p = cell_params_preset(CellVariant::uoa);
  CHECK_NOTHROW(check_cell_params(p));
  p.v_t = 20.0;
  CHECK_THROWS_AS(check_cell_params(p), std::invalid_argument);
  p = cell_params_preset(CellVariant::uoa);
  p.f_cap = 0.0;
  CHECK_THROWS_AS(check_cell_params(p), std::invalid_argument);
}

TEST_CASE("f(theta) point values") {
  const auto uoa = cell_params_preset(CellVariant::uoa);
  const auto sb = cell_params_preset(CellVariant::stony_brook_2008);
  CHECK(f_theta(0.0, sb) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(std::abs(f_theta(0.04, uoa) - 4.0395) <= 1e-3);
  CHECK(std::abs(f_theta(0.04, sb) - 4.0395) <= 1e-3);
  CHECK(f_theta(1.0, sb) == doctest::Approx(5.96e26).epsilon(0.01));
  CHECK(f_theta(1.0, uoa) == 4.0395);
  // Independent evaluation of the exponential pair.
  const double theta = 0.023;
  CHECK(f_theta(theta, sb) == doctest::Approx(0.29 * std::exp(62.89 * theta) + 0.70 * std::exp(-10.99 * theta)));
}

TEST_CASE("f(theta) rejects values outside [0, 1]") {
  const auto uoa = cell_params_preset(CellVariant::uoa);
  CHECK_THROWS_AS(f_theta(-0.01, uoa), std::domain_error);
  CHECK_THROWS_AS(f_theta(1.01, uoa), std::domain_error);
  CHECK_THROWS_AS(f_theta(std::nan(""), uoa), std::domain_error);
}

TEST_CASE("capped f(theta) is bounded with a small jump at the cap") {
  const auto uoa = cell_params_preset(CellVariant::uoa);
  double worst = 0.0;
  for (int k = 0; k <= 10000; ++k) worst = std::max(worst, f_theta(k / 10000.0, uoa));
  CHECK(worst <= 4.0395);
  const double below = f_theta(std::nextafter(0.04, 0.0), uoa);
  CHECK(std::abs(f_theta(0.04, uoa) - below) <= 1e-3);
}

TEST_CASE("theta normalises against v_r") {
  const auto p = cell_params_preset(CellVariant::uoa);
  CHECK(compute_theta(0.0, p) == 0.0);
  CHECK(compute_theta(30.0, p) == 1.0);
  CHECK(compute_theta(15.0, p) == 0.5);
  CHECK(compute_theta(45.0, p) == 1.0);
  CHECK(compute_theta(-3.0, p) == 0.0);
}

TEST_CASE("membrane potential composition") {
  auto p = cell_params_preset(CellVariant::uoa);
  CHECK(membrane_potential(at(Location::resting, 0.0), p) == 0.0);
  CHECK(membrane_potential(at(Location::resting, 10.0, 2.0, 1.0), p) == 9.0);
  p.composition.setOnes();
  CHECK(membrane_potential(at(Location::resting, 10.0, 2.0, 1.0), p) == 13.0);
  const auto ox = cell_params_preset(CellVariant::oxford_vx_only);
  CHECK(membrane_potential(at(Location::resting, 10.0, 99.0, 99.0), ox) == 10.0);
}

TEST_CASE("cell flow per location") {
  const auto uoa = cell_params_preset(CellVariant::uoa);
  const auto sb = cell_params_preset(CellVariant::stony_brook_2008);
  CHECK(cell_flow(at(Location::resting, 0.0), 0.0, uoa).isZero());

  SUBCASE("q3 v_x is scaled by f(theta) only in the improved cell") {
    const auto s = at(Location::plateau, 50.0, 20.0, 5.0, 0.04);
    const auto a = cell_flow(s, 0.0, uoa);
    const auto b = cell_flow(s, 0.0, sb);
    CHECK(a.x() / b.x() == doctest::Approx(f_theta(0.04, uoa)));
    CHECK(a.y() == doctest::Approx(b.y()));
    auto s2 = s;
    s2.theta = 0.01;
    CHECK(cell_flow(s2, 0.0, sb).x() == b.x());
    CHECK(a.z() == b.z());
  }

  SUBCASE("q1 adds beta times the input") {
    const auto s = at(Location::stimulated, 1.0, 2.0, 3.0);
    const Eigen::Vector3d expected = uoa.alpha.col(1).cwiseProduct(s.v) + uoa.beta * 10.0;
    CHECK((cell_flow(s, 10.0, uoa) - expected).norm() < 1e-12);
  }

  SUBCASE("q0 and q2 ignore the input") {
    const auto s = at(Location::upstroke, 1.0, 2.0, 3.0);
    CHECK(cell_flow(s, 100.0, uoa) == cell_flow(s, 0.0, uoa));
    CHECK(cell_flow(at(Location::resting, 4.0), 50.0, uoa) == cell_flow(at(Location::resting, 4.0), 0.0, uoa));
  }

  SUBCASE("f_limit bounds the q3 scaling") {
    const auto s = at(Location::plateau, 50.0, 20.0, 5.0, 1.0);
    const auto rate = flow_rates(Location::plateau, 1.0, sb, 10.0);
    CHECK(rate.y() == doctest::Approx(sb.alpha(1, 3) * 10.0));
    CHECK(std::isfinite(cell_flow<double>(s.location, s.v, s.theta, 0.0, sb, 10.0).y()));
  }
}

TEST_CASE("discrete transitions") {
  const auto p = cell_params_preset(CellVariant::uoa);

  SUBCASE("q0 -> q1 on positive input, capturing theta from the exit values") {
    const auto next = cell_discrete_step(at(Location::resting, 3.0), 1.0, p, 5.0);
    CHECK(next.location == Location::stimulated);
    CHECK(next.theta == doctest::Approx(0.1));
  }
  SUBCASE("q0 stays without input") {
    CHECK(cell_discrete_step(at(Location::resting, 3.0), 0.0, p, 5.0).location == Location::resting);
  }
  SUBCASE("q1 -> q2 at threshold sets the overshoot target") {
    const auto next = cell_discrete_step(at(Location::stimulated, 44.5, 0.0, 0.0, 0.25), 10.0, p, 7.0);
    CHECK(next.location == Location::upstroke);
    CHECK(next.overshoot_target == doctest::Approx(131.1 - 80.1 * 0.5));
    CHECK(next.last_q2_entry_ms == 7.0);
  }
  SUBCASE("q1 -> q0 when the input is gone below threshold") {
    CHECK(cell_discrete_step(at(Location::stimulated, 20.0), 0.0, p, 1.0).location == Location::resting);
    CHECK(cell_discrete_step(at(Location::stimulated, 20.0), 5.0, p, 1.0).location == Location::stimulated);
  }
  SUBCASE("q2 -> q3 at the overshoot target") {
    auto s = at(Location::upstroke, 120.0);
    s.overshoot_target = 120.0;
    CHECK(cell_discrete_step(s, 0.0, p, 1.0).location == Location::plateau);
    s.v.x() = 119.0;
    CHECK(cell_discrete_step(s, 0.0, p, 1.0).location == Location::upstroke);
  }
  SUBCASE("q3 -> q0 below v_r records the excursion") {
    auto s = at(Location::plateau, 29.9);
    s.last_q2_entry_ms = 100.0;
    const auto next = cell_discrete_step(s, 0.0, p, 250.0);
    CHECK(next.location == Location::resting);
    CHECK(next.last_q0_entry_ms == 250.0);
    CHECK(next.last_apd_ms == 150.0);
  }
}

TEST_CASE("an isolated cell at rest stays at rest") {
  const auto run = simulate_cell(cell_params_preset(CellVariant::uoa), {}, 200.0, 0.001, 100);
  CHECK(run.upstrokes.empty());
  for (double v : run.potential) CHECK(v == 0.0);
}

TEST_CASE("a stimulated cell fires one action potential") {
  const auto p = cell_params_preset(CellVariant::uoa);
  const auto run = simulate_cell(p, {{10.0, 50.0, 2.0}}, 600.0, 0.0005, 20);
  REQUIRE(run.upstrokes.size() == 1);
  REQUIRE(run.recoveries.size() == 1);
  CHECK(run.upstrokes[0] > 10.0);
  CHECK(run.upstrokes[0] < 12.0);
  const double peak = *std::max_element(run.potential.begin(), run.potential.end());
  CHECK(peak == doctest::Approx(131.1).epsilon(0.01));
}

TEST_CASE("a weak stimulus does not reach threshold") {
  const auto run = simulate_cell(cell_params_preset(CellVariant::uoa), {{10.0, 5.0, 1.0}}, 300.0, 0.0005, 100);
  CHECK(run.upstrokes.empty());
}
