#pragma once

// The constrained moment-map gradient flow  dF/dt = -P_alpha grad phi(F)
// integrated in the coordinates of the closed spanning set, so the linear
// constraint manifold is enforced exactly and the ODE dimension is
// 4 (#vertices - 1) + 1 instead of 16 #cells.
//
// Along exact solutions  d/dt ||F||^2 = -4 sum_s ||mu_s(F)||^2,  and phi is
// non-increasing; the adaptive controller treats a violation of either law
// as pure discretization error and halves the step.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polysymp/moment_map.hpp"
#include "polysymp/rng.hpp"
#include "polysymp/torus_mesh.hpp"
#include "polysymp/whitney.hpp"

namespace polysymp {

enum class Integrator { Euler, RK4 };

struct FlowConfig {
  Integrator method = Integrator::RK4;
  double h0 = 1e-3;
  bool adaptive = true;
  double max_h = 1e18;
  double min_h = 1e-14;
  int clean_steps_to_double = 10;
  double norm_guard_rel = 1e-13;  // allowed relative increase of ||F||^2
  double phi_guard_rel = 1e-12;   // allowed relative increase of phi

  double mu_tol = 1e-9;   // stop when ||mu(F)|| falls below this
  double tau_min = 1e-6;  // degenerate/generic dichotomy threshold
  double max_time = 1e12;
  long max_steps = 1000000;
  int trace_stride = 1;
};

struct TraceRecord {
  double t, h, norm2, phi, mu2_i, mu2_j, mu2_k, tau;
};

enum class FlowStatus { Converged, MaxSteps, MaxTime, Aborted };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged:
      return "converged";
    case FlowStatus::MaxSteps:
      return "max_steps";
    case FlowStatus::MaxTime:
      return "max_time";
    default:
      return "aborted";
  }
}

struct FlowResult {
  FlowStatus status = FlowStatus::Aborted;
  std::string message;
  long steps = 0;
  long rejected = 0;
  double time = 0.0;
  Eigen::VectorXd coords;
  CellField field;
  double final_mu_norm = 0.0;
  double tau = 0.0;
  std::string classification;  // "generic" or "degenerate"
  std::vector<TraceRecord> trace;
};

/// Right-hand side in basis coordinates: minus the coordinates of the
/// projected gradient.
inline Eigen::VectorXd flow_rhs_coords(const ClosedBasis& basis,
                                       const Eigen::VectorXd& x) {
  CellField f = basis.materialize(x);
  return -basis.coords(grad_phi(f));
}

/// The projected gradient flow field at a constrained F, materialized.
inline CellField flow_rhs(const ClosedBasis& basis, const CellField& f) {
  Eigen::VectorXd y = basis.coords(grad_phi(f));
  return basis.materialize(-y);
}

/// Measured class multiplier <[F], alpha> / <alpha, alpha> (Frobenius).
inline double tau_of_class(const Mat4& cls, const Mat4& alpha) {
  const double aa = frob(alpha, alpha);
  if (aa == 0.0) return 0.0;
  return frob(cls, alpha) / aa;
}

// --- Seeded initial conditions ---------------------------------------------
//
// All random draws come from one splitmix64 stream in a fixed order:
// vertices by id, components 0..3 within a vertex.

/// Coordinates of the constant field alpha (tau = 1, exact part 0).
inline Eigen::VectorXd coords_constant(const ClosedBasis& basis) {
  if (basis.degenerate())
    throw std::invalid_argument("constant initial condition needs alpha != 0");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(basis.dim());
  x[basis.alpha_index()] = 1.0;
  return x;
}

/// Coordinates of the differential of a random potential (uniform in
/// [-1,1) per vertex and component).
inline Eigen::VectorXd coords_random_exact_raw(const ClosedBasis& basis,
                                               std::uint64_t seed) {
  SplitMix64 rng(seed);
  const int nv = basis.mesh().vertex_count();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(basis.dim());
  Vec4 u0;
  for (int v = 0; v < nv; ++v)
    for (int c = 0; c < 4; ++c) {
      const double u = rng.symmetric();
      if (v == 0)
        u0[c] = u;
      else
        x[basis.hat_index(v, c)] = u - u0[c];
    }
  return x;
}

/// Constant alpha plus eps times the differential of a random potential.
inline Eigen::VectorXd coords_perturbed_identity(const ClosedBasis& basis,
                                                 double eps,
                                                 std::uint64_t seed) {
  Eigen::VectorXd x = coords_random_exact_raw(basis, seed) * eps;
  x += coords_constant(basis);
  return x;
}

/// A random exact field normalized to unit G-norm (tau component zero).
inline Eigen::VectorXd coords_random_exact_unit(const ClosedBasis& basis,
                                                std::uint64_t seed) {
  Eigen::VectorXd x = coords_random_exact_raw(basis, seed);
  const double n = std::sqrt(x.dot(basis.gram() * x));
  if (n == 0.0) throw std::runtime_error("random exact field is zero");
  return x / n;
}

/// Coordinates of a field that must already lie in the constrained
/// subspace; rejects fields farther than tol from their projection.
inline Eigen::VectorXd coords_of_constrained_field(const ClosedBasis& basis,
                                                   const CellField& f,
                                                   double tol = 1e-8) {
  Eigen::VectorXd x = basis.coords(f);
  CellField p = basis.materialize(x);
  const double defect = norm_g(p - f);
  if (defect > tol * (1.0 + norm_g(f)))
    throw std::invalid_argument(
        "initial field is not in the constrained subspace (defect " +
        std::to_string(defect) + ")");
  return x;
}

// --- Time stepping ----------------------------------------------------------

struct FlowState {
  Eigen::VectorXd x;
  double t = 0.0;
  double h = 0.0;
  long steps = 0;
  long rejected = 0;
  int clean_steps = 0;
};

struct FlowStepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Monitors {
  double norm2 = 0, phi = 0, mu2_i = 0, mu2_j = 0, mu2_k = 0;
  bool finite = false;
  double mu_norm() const { return std::sqrt(mu2_i + mu2_j + mu2_k); }
};

/// Reusable driver: holds the scratch buffers for the integrator stages and
/// the monitor values of the current state, so one attempted step costs
/// four rhs evaluations plus one monitor pass.
class Stepper {
 public:
  Stepper(const ClosedBasis& basis, const FlowConfig& config,
          const Eigen::VectorXd& x0)
      : basis_(basis), config_(config) {
    state_.x = x0;
    state_.h = config.h0;
    monitors_ = evaluate(state_.x);
    field_ = candidate_field_;
  }

  Stepper(const ClosedBasis& basis, const FlowConfig& config, FlowState state)
      : basis_(basis), config_(config), state_(std::move(state)) {
    monitors_ = evaluate(state_.x);
    field_ = candidate_field_;
  }

  const FlowState& state() const { return state_; }
  const Monitors& monitors() const { return monitors_; }
  const CellField& field() const { return field_; }  // materialized current F

  /// One attempted step with the current step size; applies the acceptance
  /// guards and the halving/doubling schedule.  Throws on step-size
  /// underflow.  Returns true when the step was accepted.
  bool advance() {
    integrate_candidate();
    const Monitors after = evaluate(candidate_);

    bool accept = after.finite;
    if (accept && config_.adaptive) {
      accept =
          after.norm2 <= monitors_.norm2 * (1.0 + config_.norm_guard_rel) &&
          after.phi <=
              monitors_.phi + config_.phi_guard_rel * (1.0 + monitors_.phi);
    }
    if (!accept && !config_.adaptive)
      throw FlowStepError("non-finite state in fixed-step integration");

    if (!accept) {
      ++state_.rejected;
      state_.clean_steps = 0;
      state_.h *= 0.5;
      if (state_.h < config_.min_h)
        throw FlowStepError("step size underflow below " +
                            std::to_string(config_.min_h));
      return false;
    }

    state_.t += state_.h;
    state_.x.swap(candidate_);
    monitors_ = after;
    field_.value.swap(candidate_field_.value);
    ++state_.steps;
    if (config_.adaptive &&
        ++state_.clean_steps >= config_.clean_steps_to_double) {
      state_.clean_steps = 0;
      state_.h = std::min(2.0 * state_.h, config_.max_h);
    }
    return true;
  }

 private:
  void rhs_into(const Eigen::VectorXd& x, Eigen::VectorXd& k) {
    basis_.materialize_into(x, work_f_);
    grad_phi_into(work_f_, work_g_);
    basis_.adjoint_into(work_g_, work_y_);
    k = -basis_.solve_gram(work_y_);
  }

  void integrate_candidate() {
    const double h = state_.h;
    if (config_.method == Integrator::Euler) {
      rhs_into(state_.x, k1_);
      candidate_ = state_.x + h * k1_;
      return;
    }
    rhs_into(state_.x, k1_);
    stage_ = state_.x + (0.5 * h) * k1_;
    rhs_into(stage_, k2_);
    stage_ = state_.x + (0.5 * h) * k2_;
    rhs_into(stage_, k3_);
    stage_ = state_.x + h * k3_;
    rhs_into(stage_, k4_);
    candidate_ = state_.x + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  Monitors evaluate(const Eigen::VectorXd& x) {
    basis_.materialize_into(x, candidate_field_);
    Monitors m;
    m.norm2 = inner_g(candidate_field_, candidate_field_);
    MomentValue mv = mu(candidate_field_);
    auto n = mv.norm2();
    m.mu2_i = n[0];
    m.mu2_j = n[1];
    m.mu2_k = n[2];
    m.phi = 0.5 * (m.mu2_i + m.mu2_j + m.mu2_k);
    m.finite = std::isfinite(m.norm2) && std::isfinite(m.phi);
    return m;
  }

  const ClosedBasis& basis_;
  const FlowConfig& config_;
  FlowState state_;
  Monitors monitors_;
  CellField field_, candidate_field_, work_f_, work_g_;
  Eigen::VectorXd candidate_, stage_, k1_, k2_, k3_, k4_, work_y_;
};

}  // namespace detail

/// One attempted step; the spec-level entry point.  run() uses the
/// buffer-reusing driver internally.
inline bool step(FlowState& state, const ClosedBasis& basis,
                 const FlowConfig& config) {
  detail::Stepper stepper(basis, config, state);
  const bool accepted = stepper.advance();
  state = stepper.state();
  return accepted;
}

/// Integrates the flow from the given coordinates until the moment map norm
/// falls below tolerance or a budget runs out.  Traces are recorded every
/// trace_stride accepted steps, plus the initial and final states.
inline FlowResult run(const ClosedBasis& basis, const Eigen::VectorXd& x0,
                      const FlowConfig& config) {
  FlowResult result;

  detail::Stepper stepper(basis, config, x0);
  if (!stepper.monitors().finite) {
    result.status = FlowStatus::Aborted;
    result.message = "non-finite initial state";
    return result;
  }

  CellField snapshot;
  auto record = [&] {
    const detail::Monitors& m = stepper.monitors();
    const FlowState& s = stepper.state();
    double tau = 0.0;
    if (!basis.degenerate()) {
      basis.materialize_into(s.x, snapshot);
      const Mat4 cls =
          cohomology_class(snapshot, 1e-5 * (1.0 + std::sqrt(m.norm2)));
      tau = tau_of_class(cls, basis.alpha());
    }
    result.trace.push_back(
        {s.t, s.h, m.norm2, m.phi, m.mu2_i, m.mu2_j, m.mu2_k, tau});
  };

  record();
  long since_record = 0;
  while (true) {
    const detail::Monitors& m = stepper.monitors();
    if (m.mu_norm() <= config.mu_tol) {
      result.status = FlowStatus::Converged;
      break;
    }
    if (stepper.state().steps >= config.max_steps) {
      result.status = FlowStatus::MaxSteps;
      result.message = "step budget exhausted before convergence";
      break;
    }
    if (stepper.state().t >= config.max_time) {
      result.status = FlowStatus::MaxTime;
      result.message = "time horizon reached before convergence";
      break;
    }
    bool accepted;
    try {
      accepted = stepper.advance();
    } catch (const FlowStepError& e) {
      result.status = FlowStatus::Aborted;
      result.message = e.what();
      break;
    }
    if (!accepted) continue;
    if (!stepper.monitors().finite) {
      result.status = FlowStatus::Aborted;
      result.message = "non-finite state encountered";
      break;
    }
    if (++since_record >= config.trace_stride) {
      record();
      since_record = 0;
    }
  }

  if (since_record != 0 || result.trace.size() < 2) record();
  result.steps = stepper.state().steps;
  result.rejected = stepper.state().rejected;
  result.time = stepper.state().t;
  result.coords = stepper.state().x;
  result.field = basis.materialize(stepper.state().x);
  result.final_mu_norm = stepper.monitors().mu_norm();
  result.tau = result.trace.back().tau;
  result.classification =
      std::abs(result.tau) <= config.tau_min ? "degenerate" : "generic";
  return result;
}

// --- Renormalized system ----------------------------------------------------
//
// The blown-up flow for the pair (G, tau) with [G] pinned to alpha:
//     dG/dt   = tau^2 ( c(G) G - P_alpha grad phi(G) ),
//     dtau/dt = -tau^3 c(G),
// where c(G) is the multiplier with [P_alpha grad phi(G)] = c(G) alpha.

struct RenormResult {
  std::string verdict;  // stationary | degenerating | max_steps | aborted
  long steps = 0;
  double time = 0.0;
  double tau = 1.0;
  Eigen::VectorXd coords;
  CellField field;
  double max_class_drift = 0.0;  // max over records of ||[G] - alpha||
  std::vector<TraceRecord> trace;
};

/// Multiplier of the projected gradient's class against alpha, measured
/// from the periods of the materialized projection.
inline double class_multiplier(const ClosedBasis& basis,
                               const Eigen::VectorXd& grad_coords) {
  CellField pg = basis.materialize(grad_coords);
  const Mat4 cls = cohomology_class(pg, 1e-5 * (1.0 + grad_coords.norm()));
  return tau_of_class(cls, basis.alpha());
}

inline RenormResult run_renormalized(const ClosedBasis& basis,
                                     const Eigen::VectorXd& y0,
                                     const FlowConfig& config,
                                     double stationary_tol = 1e-10,
                                     double tau_floor = 1e-10) {
  if (basis.degenerate())
    throw std::invalid_argument("renormalized flow needs alpha != 0");

  const int dim = basis.dim();
  Eigen::VectorXd z(dim + 1);  // (G coordinates, tau)
  z.head(dim) = y0;
  z[dim] = 1.0;

  auto rhs = [&](const Eigen::VectorXd& state) {
    const Eigen::VectorXd y = state.head(dim);
    const double tau = state[dim];
    CellField g = basis.materialize(y);
    Eigen::VectorXd w = basis.coords(grad_phi(g));
    const double c = class_multiplier(basis, w);
    Eigen::VectorXd dz(dim + 1);
    dz.head(dim) = tau * tau * (c * y - w);
    dz[dim] = -tau * tau * tau * c;
    return dz;
  };

  RenormResult result;
  result.verdict = "max_steps";
  CellField scratch;

  auto record = [&](double t, double h) {
    const Eigen::VectorXd y = z.head(dim);
    scratch = basis.materialize(y);
    MomentValue mv = mu(scratch);
    auto n = mv.norm2();
    const Mat4 cls = cohomology_class(scratch, 1e-5 * (1.0 + norm_g(scratch)));
    result.max_class_drift = std::max(
        result.max_class_drift,
        (cls - basis.alpha()).lpNorm<Eigen::Infinity>());
    result.trace.push_back({t, h, inner_g(scratch, scratch),
                            0.5 * (n[0] + n[1] + n[2]), n[0], n[1], n[2],
                            z[dim]});
  };

  double t = 0.0;
  const double h = config.h0;
  record(t, h);
  long since_record = 0;
  for (long s = 0; s < config.max_steps && t < config.max_time; ++s) {
    Eigen::VectorXd dz;
    if (config.method == Integrator::Euler) {
      dz = rhs(z);
      z += h * dz;
    } else {
      const Eigen::VectorXd k1 = rhs(z);
      const Eigen::VectorXd k2 = rhs(z + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(z + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(z + h * k3);
      dz = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
      z += h * dz;
    }
    t += h;
    result.steps = s + 1;
    if (!z.allFinite()) {
      result.verdict = "aborted";
      break;
    }
    if (++since_record >= config.trace_stride) {
      record(t, h);
      since_record = 0;
    }
    if (std::abs(z[dim]) < tau_floor) {
      result.verdict = "degenerating";
      break;
    }
    const double speed = std::sqrt(
        dz.head(dim).dot(basis.gram() * dz.head(dim)));
    if (speed <= stationary_tol && std::abs(dz[dim]) <= stationary_tol) {
      result.verdict = "stationary";
      break;
    }
  }
  if (since_record != 0) record(t, h);
  result.time = t;
  result.tau = z[dim];
  result.coords = z.head(dim);
  result.field = basis.materialize(result.coords);
  return result;
}

}  // namespace polysymp
