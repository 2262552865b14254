#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heartsim {

enum class Integrator : std::uint8_t { rk4, euler };

std::string_view to_string(Integrator method);
Integrator integrator_from_string(std::string_view name);

class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Advances `state` by one step of size dt with inputs frozen at the step
/// start. `flow` maps a state to its time derivative.
template <typename Derived, typename Flow>
typename Derived::PlainObject integrate_step(const Eigen::MatrixBase<Derived>& state, Flow&& flow, double dt,
                                             Integrator method = Integrator::rk4) {
  using Plain = typename Derived::PlainObject;
  using Scalar = typename Derived::Scalar;
  const Scalar h(dt);
  Plain next;
  if (method == Integrator::euler) {
    next = state + h * flow(Plain(state));
  } else {
    const Plain k1 = flow(Plain(state));
    const Plain k2 = flow(Plain(state + (h / 2) * k1));
    const Plain k3 = flow(Plain(state + (h / 2) * k2));
    const Plain k4 = flow(Plain(state + h * k3));
    next = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  if (!next.allFinite()) throw NonFiniteState("integrate_step produced a non-finite state");
  return next;
}

}  // namespace heartsim
