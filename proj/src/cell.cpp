#include "heartsim/cell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heartsim {

std::string_view to_string(CellVariant variant) {
  switch (variant) {
    case CellVariant::uoa: return "uoa";
    case CellVariant::stony_brook_2008: return "stony_brook_2008";
    case CellVariant::oxford_vx_only: return "oxford_vx_only";
  }
  return "unknown";
}

CellVariant cell_variant_from_string(std::string_view name) {
  if (name == "uoa") return CellVariant::uoa;
  if (name == "stony_brook_2008" || name == "stony_brook") return CellVariant::stony_brook_2008;
  if (name == "oxford_vx_only" || name == "oxford") return CellVariant::oxford_vx_only;
  throw std::invalid_argument("unknown cell variant: " + std::string(name));
}

void check_cell_params(const CellParams& params) {
  if (!(params.v_r > 0.0 && params.v_t > params.v_r && params.v_o > params.v_t))
    throw std::invalid_argument("cell thresholds must satisfy 0 < v_r < v_t < v_o");
  if (!(params.f_cap > 0.0)) throw std::invalid_argument("f_cap must be positive");
  if (!params.alpha.allFinite() || !params.beta.allFinite())
    throw std::invalid_argument("cell rate coefficients must be finite");
}

CellParams cell_params_preset(CellVariant variant) {
  CellParams p;
  // Columns are locations q0..q3.
  p.alpha << -0.0087, -0.0236, -0.0069, -0.0332,
             -0.1909, -0.0455,  0.0759,  0.0280,
             -0.1904, -0.0129,  6.8265,  0.0020;
  p.beta << 0.7772, 0.0589, 0.2766;
  p.v_r = 30.0;
  p.v_t = 44.5;
  p.v_o = 131.1;
  p.variant = variant;

  switch (variant) {
    case CellVariant::uoa:
      p.f_cap_enabled = true;
      p.q3_f_theta_enabled = true;
      break;
    case CellVariant::stony_brook_2008:
      p.f_cap_enabled = false;
      p.q3_f_theta_enabled = false;
      break;
    case CellVariant::oxford_vx_only:
      // Single-variable cell: the potential is v_x alone and the v_y / v_z
      // flows are dropped. Its rates are fitted to give a step-shaped
      // restitution: the 10% fall happens inside q3 (v_r sits below a tenth
      // of v_o) and a fast q0 decay makes theta, and so f(theta), switch
      // sharply with the diastolic interval.
      p.alpha.row(0) << -40.0, -0.0236, 0.18, -0.0278;
      p.alpha.row(1).setZero();
      p.alpha.row(2).setZero();
      p.beta << 0.7772, 0.0, 0.0;
      p.composition << 1.0, 0.0, 0.0;
      p.v_r = 3.28;
      p.v_t = 10.0;
      p.f_cap_enabled = false;
      p.q3_f_theta_enabled = true;
      break;
  }
  return p;
}

double f_theta(double theta, const CellParams& params) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("f_theta: theta must lie in [0, 1]");
  if (params.f_cap_enabled && theta >= params.f_cap_theta) return params.f_cap;
  return f_theta_uncapped(theta);
}

double compute_theta(double v, const CellParams& params) {
  return std::clamp(v / params.v_r, 0.0, 1.0);
}

double membrane_potential(const CellState& state, const CellParams& params) {
  return membrane_potential<double>(state.v, params);
}

Eigen::Vector3d flow_rates(Location location, double theta, const CellParams& params, double f_limit) {
  Eigen::Vector3d rate = params.alpha.col(static_cast<Eigen::Index>(location));
  if (location != Location::plateau) return rate;
  double f = f_theta(std::clamp(theta, 0.0, 1.0), params);
  if (f_limit > 0.0) f = std::min(f, f_limit);
  if (params.vx_only()) {
    rate.x() *= f;
  } else {
    rate.y() *= f;
    if (params.q3_f_theta_enabled) rate.x() *= f;
  }
  return rate;
}

template <typename Scalar>
Vector3<Scalar> cell_flow(Location location, const Vector3<Scalar>& v, Scalar theta, Scalar v_in,
                          const CellParams& params, double f_limit) {
  const Vector3<Scalar> rate = flow_rates(location, static_cast<double>(theta), params, f_limit).cast<Scalar>();
  if (location == Location::stimulated) return rate.cwiseProduct(v) + params.beta.cast<Scalar>() * v_in;
  return rate.cwiseProduct(v);
}

template Vector3<double> cell_flow<double>(Location, const Vector3<double>&, double, double, const CellParams&,
                                           double);

CellState cell_discrete_step(const CellState& state, double v_in, const CellParams& params, double now_ms) {
  CellState next = state;
  const double v = membrane_potential(state, params);

  switch (state.location) {
    case Location::resting:
      if (v_in > 0.0) {
        next.location = Location::stimulated;
        next.theta = compute_theta(v, params);
      }
      break;
    case Location::stimulated:
      if (v_in <= 0.0 && v < params.v_t) {
        next.location = Location::resting;
      } else if (v >= params.v_t) {
        next.location = Location::upstroke;
        next.overshoot_target = params.v_o - params.overshoot_drop * std::sqrt(state.theta);
        next.last_q2_entry_ms = now_ms;
      }
      break;
    case Location::upstroke:
      if (v >= state.overshoot_target) next.location = Location::plateau;
      break;
    case Location::plateau:
      if (v <= params.v_r) {
        next.location = Location::resting;
        next.last_q0_entry_ms = now_ms;
        if (state.last_q2_entry_ms >= 0.0) next.last_apd_ms = now_ms - state.last_q2_entry_ms;
      }
      break;
  }
  return next;
}

}  // namespace heartsim
