#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

namespace heartsim {

/// HA locations of the cell model.
enum class Location : std::uint8_t {
  resting = 0,     // q0
  stimulated = 1,  // q1
  upstroke = 2,    // q2
  plateau = 3,     // q3
};

enum class CellVariant : std::uint8_t { uoa, stony_brook_2008, oxford_vx_only };

std::string_view to_string(CellVariant variant);
CellVariant cell_variant_from_string(std::string_view name);

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Rate coefficients: row = variable (x, y, z), column = location (q0..q3), in 1/ms.
using RateTable = Eigen::Matrix<double, 3, 4>;

struct CellParams {
  RateTable alpha = RateTable::Zero();
  Eigen::Vector3d beta = Eigen::Vector3d::Zero();
  /// Sign of each variable in the membrane potential. The default
  /// composes v = v_x - v_y + v_z; an all-ones vector gives the plain sum.
  Eigen::Vector3d composition{1.0, -1.0, 1.0};

  double v_r = 30.0;
  double v_t = 44.5;
  double v_o = 131.1;
  /// Overshoot drop coefficient: upstroke target is v_o - overshoot_drop * sqrt(theta).
  double overshoot_drop = 80.1;

  double f_cap = 4.0395;
  double f_cap_theta = 0.04;
  bool f_cap_enabled = true;
  /// Scale the q3 v_x flow by f(theta) as well as v_y.
  bool q3_f_theta_enabled = true;

  CellVariant variant = CellVariant::uoa;

  [[nodiscard]] bool vx_only() const noexcept { return variant == CellVariant::oxford_vx_only; }
};

/// Throws std::invalid_argument when the threshold ordering or the cap is inconsistent.
void check_cell_params(const CellParams& params);

CellParams cell_params_preset(CellVariant variant);

struct CellState {
  Location location = Location::resting;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // (v_x, v_y, v_z), mV
  double theta = 0.0;
  double overshoot_target = 0.0;
  double last_q2_entry_ms = -1.0;
  double last_q0_entry_ms = -1.0;
  /// Duration of the most recently completed q2 -> q0 excursion, or negative if none.
  double last_apd_ms = -1.0;
};

/// Rate function controlling repolarisation speed in q3.
template <typename Scalar>
Scalar f_theta_uncapped(Scalar theta) {
  using std::exp;
  return Scalar(0.29) * exp(Scalar(62.89) * theta) + Scalar(0.70) * exp(Scalar(-10.99) * theta);
}

/// f(theta) with the optional cap. Throws std::domain_error outside [0, 1].
double f_theta(double theta, const CellParams& params);

/// theta = v / v_r, clamped to [0, 1].
double compute_theta(double v, const CellParams& params);

double membrane_potential(const CellState& state, const CellParams& params);

template <typename Scalar>
Scalar membrane_potential(const Vector3<Scalar>& v, const CellParams& params) {
  if (params.vx_only()) return v.x();
  return params.composition.cast<Scalar>().dot(v);
}

/// Linear rate of each variable's flow in a location: the alpha column, with
/// v_y (and v_x when q3_f_theta_enabled) scaled by f(theta) in q3. A positive
/// f_limit bounds f(theta) so that an explicit integrator stays stable.
Eigen::Vector3d flow_rates(Location location, double theta, const CellParams& params, double f_limit = 0.0);

/// Time derivative of (v_x, v_y, v_z) in the given location: rates * v, plus
/// beta * v_in in q1.
template <typename Scalar>
Vector3<Scalar> cell_flow(Location location, const Vector3<Scalar>& v, Scalar theta, Scalar v_in,
                          const CellParams& params, double f_limit = 0.0);

extern template Vector3<double> cell_flow<double>(Location, const Vector3<double>&, double, double,
                                                  const CellParams&, double);

inline Eigen::Vector3d cell_flow(const CellState& state, double v_in, const CellParams& params) {
  return cell_flow<double>(state.location, state.v, state.theta, v_in, params);
}

/// Applies at most one enabled transition, in the order q0->q1, q1->q0, q1->q2, q2->q3, q3->q0.
CellState cell_discrete_step(const CellState& state, double v_in, const CellParams& params, double now_ms);

}  // namespace heartsim
