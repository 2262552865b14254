#include "heartsim/delay_line.hpp"
#include "heartsim/path.hpp"

#include <doctest.h>

#include <array>

using namespace heartsim;

namespace {

constexpr double kDt = 0.5;

CellState cell(Location location, double q2_entry = -1.0, double q0_entry = -1.0) {
  CellState c;
  c.location = location;
  c.last_q2_entry_ms = q2_entry;
  c.last_q0_entry_ms = q0_entry;
  return c;
}

struct Driver {
  PathParams params;
  PathState state;
  double now = 0.0;
  int starts_i = 0;
  int starts_j = 0;

  explicit Driver(PathParams p) : params(p), state(p, kDt) {}

  void step(const CellState& i, const CellState& j) {
    now += kDt;
    const auto ev = path_ta_step(state, i, j, params, kDt, now);
    starts_i += ev.start_i;
    starts_j += ev.start_j;
  }
  void run(const CellState& i, const CellState& j, double ms) {
    for (double t = 0.0; t < ms - 1e-9; t += kDt) step(i, j);
  }
};

PathParams with_delta(double delta) {
  PathParams p;
  p.delta_ij = delta;
  p.delta_ji = delta;
  return p;
}

const CellState kRest = cell(Location::resting);

}  // namespace

TEST_CASE("path location names") {
  CHECK(to_string(PathLocation::idle) == "idle");
  CHECK(to_string(PathLocation::annihilate) == "annihilate");
  CHECK(to_string(PathLocation::relay_j) == "relay_j");
}

TEST_CASE("a lone upstroke at i is relayed after the conduction time") {
  Driver d(with_delta(30.0));
  const auto up = cell(Location::upstroke, 0.5);
  d.step(up, kRest);
  CHECK(d.state.ta_location == PathLocation::wait_i);
  d.run(up, kRest, 29.0);
  CHECK(d.starts_i == 0);
  d.run(cell(Location::plateau, 0.5), kRest, 1.0);
  CHECK(d.starts_i == 1);
  CHECK(d.state.ta_location == PathLocation::relay_i);
  CHECK(d.state.relay_active_i_at_j);
  CHECK(d.state.last == Origin::from_i);
}

TEST_CASE("relay returns to idle after the ignore window") {
  auto p = with_delta(10.0);
  p.delta_ignore_j = 5.0;
  Driver d(p);
  d.step(cell(Location::upstroke, 0.5), kRest);
  d.run(cell(Location::plateau, 0.5), kRest, 10.0);
  REQUIRE(d.state.ta_location == PathLocation::relay_i);
  d.run(cell(Location::plateau, 0.5), cell(Location::upstroke, 11.0), 5.0);
  CHECK(d.state.ta_location == PathLocation::idle);
  CHECK(d.starts_j == 0);
}

TEST_CASE("simultaneous upstrokes annihilate") {
  Driver d(with_delta(30.0));
  d.step(cell(Location::upstroke, 0.5), cell(Location::upstroke, 0.5));
  CHECK(d.state.ta_location == PathLocation::annihilate);
  CHECK(d.state.last == Origin::none);
  d.run(cell(Location::plateau), cell(Location::plateau), 100.0);
  CHECK(d.starts_i + d.starts_j == 0);
  CHECK(d.state.ta_location == PathLocation::idle);
}

TEST_CASE("an opposing upstroke during the conduction time annihilates") {
  Driver d(with_delta(30.0));
  d.step(cell(Location::upstroke, 0.5), kRest);
  d.run(cell(Location::plateau, 0.5), kRest, 12.0);
  d.step(cell(Location::plateau, 0.5), cell(Location::upstroke, 13.0));
  CHECK(d.state.ta_location == PathLocation::annihilate);
  CHECK_FALSE(d.state.relay_active_i_at_j);
  CHECK_FALSE(d.state.relay_active_j_at_i);
  d.run(cell(Location::plateau, 0.5), cell(Location::plateau, 13.0), 200.0);
  CHECK(d.starts_i + d.starts_j == 0);
}

TEST_CASE("the mirrored direction works the same way") {
  Driver d(with_delta(20.0));
  d.step(kRest, cell(Location::upstroke, 0.5));
  CHECK(d.state.ta_location == PathLocation::wait_j);
  d.run(kRest, cell(Location::plateau, 0.5), 20.0);
  CHECK(d.starts_j == 1);
  CHECK(d.state.relay_active_j_at_i);
  CHECK(d.state.last == Origin::from_j);
}

TEST_CASE("a blocked direction records a partial propagation") {
  auto p = with_delta(30.0);
  p.block_ji = true;
  Driver d(p);
  d.step(kRest, cell(Location::upstroke, 0.5));
  d.run(kRest, cell(Location::plateau, 0.5), 30.0);
  CHECK(d.starts_j == 1);
  CHECK_FALSE(d.state.relay_active_j_at_i);
  CHECK(d.state.partial_pending);
  CHECK(d.state.partial_origin == Origin::from_j);

  SUBCASE("i is blocked while j has not recovered") {
    d.run(kRest, cell(Location::plateau, 0.5), 10.0);
    d.step(cell(Location::upstroke, d.now), cell(Location::plateau, 0.5));
    CHECK(d.state.ta_location == PathLocation::annihilate);
  }
  SUBCASE("a fixed refractory window expires") {
    d.params.refractory_window_ms = 50.0;
    d.run(kRest, cell(Location::resting, 0.5, 40.0), 40.0);
    const auto up = cell(Location::upstroke, d.now);
    d.step(up, cell(Location::resting, 0.5, 40.0));
    CHECK(d.state.ta_location == PathLocation::wait_i);
  }
}

TEST_CASE("the source of the last propagation cannot be re-entered while refractory") {
  Driver d(with_delta(10.0));
  d.step(cell(Location::upstroke, 0.5), kRest);
  d.run(cell(Location::plateau, 0.5), kRest, 20.0);
  REQUIRE(d.starts_i == 1);
  REQUIRE(d.state.ta_location == PathLocation::idle);
  d.step(cell(Location::plateau, 0.5), cell(Location::upstroke, d.now));
  CHECK(d.state.ta_location == PathLocation::annihilate);
  d.run(cell(Location::plateau, 0.5), cell(Location::plateau, d.now), 50.0);
  CHECK(d.starts_j == 0);
}

TEST_CASE("relay passes the delayed source through") {
  const auto params = cell_params_preset(CellVariant::uoa);
  PathState s(with_delta(10.0), kDt);
  CellState dest;
  dest.v.x() = 3.0;

  CHECK(relay_step(s, true, {100.0, Location::plateau}, dest, params) == 3.0);

  s.relay_active_i_at_j = true;
  s.relay_start_i_ms = 5.0;
  CHECK(relay_step(s, true, {100.0, Location::plateau}, dest, params) == 100.0);
  CHECK(s.relay_active_i_at_j);

  SUBCASE("stops once the destination fires") {
    dest.last_q2_entry_ms = 6.0;
    CHECK(relay_step(s, true, {100.0, Location::plateau}, dest, params) == 3.0);
    CHECK_FALSE(s.relay_active_i_at_j);
    CHECK_FALSE(s.partial_pending);
  }
  SUBCASE("stops as a partial propagation when the source is back at rest") {
    CHECK(relay_step(s, true, {1.0, Location::resting}, dest, params) == 3.0);
    CHECK_FALSE(s.relay_active_i_at_j);
    CHECK(s.partial_pending);
    CHECK(s.partial_origin == Origin::from_i);
  }
}

TEST_CASE("reaction-diffusion coupling") {
  CHECK(coupling_h_k({}, 10.0, 1.0, 1.0) == 0.0);
  const std::array<CouplingTerm, 1> one{{{1.0, 1.0, 100.0}}};
  CHECK(coupling_h_k(one, 0.0, 1.0, 1.0) == 100.0);
  const std::array<CouplingTerm, 2> same{{{1.0, 1.0, 40.0}, {2.0, 0.5, 40.0}}};
  CHECK(coupling_h_k(same, 40.0, 1.0, 1.0) == 0.0);
  const std::array<CouplingTerm, 2> opposite{{{1.0, 1.0, 50.0}, {1.0, 1.0, -50.0}}};
  CHECK(coupling_h_k(opposite, 0.0, 1.0, 1.0) == 0.0);
  const std::array<CouplingTerm, 1> scaled{{{2.0, 3.0, 10.0}}};
  CHECK(coupling_h_k(scaled, 4.0, 0.5, 4.0) == doctest::Approx(2.0 * 3.0 / 2.0 * 6.0));
}

TEST_CASE("delayed-voltage coupling") {
  CHECK(coupling_g_k_oxford({}, 0.0, 0.0) == 0.0);
  const std::array<DelayedGainTerm, 1> one{{{50.0, 1.0}}};
  CHECK(coupling_g_k_oxford(one, 0.0, 0.0) == 50.0);
  const std::array<DelayedGainTerm, 2> two{{{50.0, 0.5}, {10.0, 2.0}}};
  CHECK(coupling_g_k_oxford(two, 20.0, 0.25) == doctest::Approx(25.0 + 20.0 - 5.0));
}

TEST_CASE("delay line") {
  SUBCASE("zero length is the identity") {
    DelayLine<int> d(0);
    CHECK(d.push(7) == 7);
  }
  SUBCASE("constant input comes back unchanged") {
    DelayLine<double> d(5, 2.0);
    for (int k = 0; k < 20; ++k) CHECK(d.push(2.0) == 2.0);
  }
  SUBCASE("a step is delayed by exactly the length") {
    DelayLine<int> d(4);
    std::vector<int> out;
    for (int k = 0; k < 10; ++k) out.push_back(d.push(k >= 3 ? 1 : 0));
    CHECK(out == std::vector<int>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
  }
  SUBCASE("fill resets the contents") {
    DelayLine<int> d(3);
    d.push(5);
    d.fill(9);
    CHECK(d.oldest() == 9);
    CHECK(d.length() == 3);
  }
}

TEST_CASE("delays round to the grid") {
  CHECK(delay_steps(30.0, 0.0005) == 60000);
  CHECK(delay_steps(0.00049, 0.0005) == 1);
  CHECK(delay_steps(0.0, 0.0005) == 0);
  const PathState s(with_delta(10.0), 0.5);
  CHECK(s.delay_buffer_ij.length() == 20);
}
