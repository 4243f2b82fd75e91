#pragma once

#include "mfgn/field_expr.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mfgn {

inline constexpr double kInfValue = std::numeric_limits<double>::infinity();

/// Running-cost Hamiltonian, radial in |p|:
///   power:         H(p) = c |p|^r / r
///   paper_example: H(p) = c (1 + |p|^(r/2))^2
/// Both are even in every coordinate. The conjugate H* is closed-form for
/// the power family and evaluated by a safeguarded radial Newton solve for
/// paper_example.
struct Hamiltonian {
    enum class Family { power, paper_example };
    Family family = Family::power;
    double r = 2.0;
    double c = 1.0;

    static Hamiltonian power(double r, double c) { return {Family::power, r, c}; }
    static Hamiltonian paper_example(double r, double c) { return {Family::paper_example, r, c}; }

    // radial profile h(x) = H(p) with x = |p| >= 0, and derivatives
    double profile(double x) const;
    double profile_d1(double x) const;
    double profile_d2(double x) const;
    /// Slope of the profile at 0+ (nonzero only for paper_example with r = 2,
    /// where the family has a kink at the origin).
    double profile_d1_at_zero() const;

    double eval(const double* p, int dim) const;
    /// Gradient; at p = 0 returns the minimal-norm subgradient (zero).
    void grad(const double* p, int dim, double* out) const;

    /// Radial profile of H*: conj(s) = sup_{x>=0} s x - h(x), s >= 0.
    double conjugate(double s) const;
    /// Maximizer x(s) = (h')^{-1}(s) (0 on the flat region s <= h'(0+)).
    double conjugate_arg(double s) const;

    double conjugate_exponent() const { return r / (r - 1.0); }
    std::string family_name() const;
};

/// H*(p*) for a vector argument.
double H_star(const Hamiltonian& H, const double* pstar, int dim);
/// Lagrangian L(p*) = H*(-p*); equals H*(p*) exactly for these even families.
double L_eval(const Hamiltonian& H, const double* pstar, int dim);

/// Pointwise coupling-family kernels with the spatial weight already
/// evaluated: f(m) = ftilde (a0 + m^(q-1)) for m >= 0.
struct CouplingParams {
    double ftilde = 1.0;
    double q = 2.0;
    double a0 = 1.0;
};
double coupling_f(const CouplingParams& cp, double m);
double coupling_F(const CouplingParams& cp, double m);       // +inf for m < 0
double coupling_Fstar(const CouplingParams& cp, double s);   // 0 for s <= ftilde a0
double coupling_Fstar_deriv(const CouplingParams& cp, double s);

/// Coupling cost family with spatial weight expression.
struct Coupling {
    double q = 2.0;
    double a0 = 1.0;
    FieldExpr ftilde = FieldExpr::constant_expr(1.0);

    CouplingParams at(double t, const double* x, int dim) const {
        return CouplingParams{ftilde.eval(t, x, dim), q, a0};
    }
    double f(double t, const double* x, int dim, double m) const { return coupling_f(at(t, x, dim), m); }
    double F(double t, const double* x, int dim, double m) const { return coupling_F(at(t, x, dim), m); }
    double Fstar(double t, const double* x, int dim, double s) const { return coupling_Fstar(at(t, x, dim), s); }
    double Fstar_deriv(double t, const double* x, int dim, double s) const {
        return coupling_Fstar_deriv(at(t, x, dim), s);
    }
};

/// Perspective kinetic term m L(w/m) with the closure convention at m = 0
/// (0 if w = 0, +inf otherwise). Never divides by zero.
double kinetic_eval(const Hamiltonian& H, double m, const double* w, int dim);

/// Proximal map of the scaled slot energy
///   g(rho, omega) = A [ rho L(omega/rho) + F(rho) ] + B rho
/// i.e. (m, w) = argmin g + (1/(2 tau)) (|rho-m0|^2 + |omega-w0|^2) over
/// rho >= 0. With coupling = nullptr the F term is dropped (the plain
/// kinetic prox has A = 1, B = 0). Solved by a safeguarded Newton on the
/// radial optimality condition; root tolerance 1e-12 absolute.
struct ProxResult {
    double m = 0.0;
    double w[3] = {0, 0, 0};
    int newton_iters = 0;
    bool used_bisection = false;
};
/// Optional warm start carrying the previous root pair; updated in place.
struct ProxWarmStart {
    double rho = -1.0;
    double x = 0.0;
};
ProxResult prox_perspective(const Hamiltonian& H, const CouplingParams* coupling, double A, double B,
                            double tau, double m0, const double* w0, int dim,
                            ProxWarmStart* warm = nullptr);
ProxResult prox_kinetic(const Hamiltonian& H, double m0, const double* w0, int dim, double tau);

/// Sampled Legendre transform: max_i { p x_i - phi_i }. A lower bound of the
/// true conjugate, exact as the sample grid refines. The result is flagged
/// untrusted when the maximizer sits on the sample boundary.
struct LegendreResult {
    double value = 0.0;
    long argmax = -1;
    bool trusted = true;
};
LegendreResult numerical_legendre(const std::vector<double>& xs, const std::vector<double>& phis, double p);

/// One-dimensional convex function with optional closed-form conjugate,
/// used by the conjugate-table tool and the conjugate-calculus tests.
struct ScalarConvexFn {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> phi_star;      // closed form when available
    bool closed_form_conjugate = false;
    double sample_lo = -8.0, sample_hi = 8.0;
    double sample_step = 1e-3;
};

/// The kinked strict-convexity counterexample phi(x) = x^2 (x<1), x^3 (x>=1)
/// whose conjugate is affine on [2,3).
ScalarConvexFn counterexample_fn();
ScalarConvexFn power_fn(double r, double c);
ScalarConvexFn quadratic_fn();

} // namespace mfgn
