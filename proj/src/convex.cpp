#include "mfgn/convex.hpp"

#include "mfgn/errors.hpp"
#include "mfgn/io.hpp"

#include <algorithm>
#include <cmath>

namespace mfgn {

namespace {
double norm2(const double* p, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += p[d] * p[d];
    return std::sqrt(s);
}
// x^e with multiplication fast paths for the exponents the hot loops hit
double rpow(double x, double e) {
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 3.0) return x * x * x;
    if (e == 0.5) return std::sqrt(x);
    if (e == 1.5) {
        double s = std::sqrt(x);
        return s * x;
    }
    if (e == -0.5) return 1.0 / std::sqrt(x);
    return std::pow(x, e);
}
} // namespace

double Hamiltonian::profile(double x) const {
    switch (family) {
        case Family::power:
            return c * rpow(x, r) / r;
        case Family::paper_example: {
            double u = 1.0 + rpow(x, 0.5 * r);
            return c * u * u;
        }
    }
    throw ContractViolation("Hamiltonian: unknown family");
}

double Hamiltonian::profile_d1(double x) const {
    switch (family) {
        case Family::power:
            return c * rpow(x, r - 1.0);
        case Family::paper_example:
            if (x == 0.0) return profile_d1_at_zero();
            return c * r * (1.0 + rpow(x, 0.5 * r)) * rpow(x, 0.5 * r - 1.0);
    }
    throw ContractViolation("Hamiltonian: unknown family");
}

double Hamiltonian::profile_d2(double x) const {
    switch (family) {
        case Family::power:
            return c * (r - 1.0) * rpow(x, r - 2.0);
        case Family::paper_example:
            return c * r *
                   (0.5 * r * rpow(x, r - 2.0) +
                    (0.5 * r - 1.0) * (1.0 + rpow(x, 0.5 * r)) * rpow(x, 0.5 * r - 2.0));
    }
    throw ContractViolation("Hamiltonian: unknown family");
}

double Hamiltonian::profile_d1_at_zero() const {
    switch (family) {
        case Family::power:
            return 0.0; // r > 1
        case Family::paper_example:
            if (r > 2.0) return 0.0;
            if (r == 2.0) return 2.0 * c;
            return kInfValue;
    }
    throw ContractViolation("Hamiltonian: unknown family");
}

double Hamiltonian::eval(const double* p, int dim) const { return profile(norm2(p, dim)); }

void Hamiltonian::grad(const double* p, int dim, double* out) const {
    double n = norm2(p, dim);
    if (n == 0.0) {
        // minimal-norm subgradient at a radial minimum
        for (int d = 0; d < dim; ++d) out[d] = 0.0;
        return;
    }
    double scale = profile_d1(n) / n;
    for (int d = 0; d < dim; ++d) out[d] = scale * p[d];
}

double Hamiltonian::conjugate_arg(double s) const {
    if (s < 0) throw ContractViolation("conjugate_arg: radial argument must be nonnegative");
    if (family == Family::power) return std::pow(s / c, 1.0 / (r - 1.0));

    double s_min = profile_d1_at_zero();
    if (s <= s_min) return 0.0;

    // h'(x) = s, h' strictly increasing past the origin
    double x = std::pow(s / (c * r), 1.0 / (r - 1.0)); // asymptotic initial guess
    if (!(x > 0)) x = 1.0;
    double lo = 0.0, hi = x;
    while (profile_d1(hi) < s) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("conjugate_arg: bracketing failed at s=" + io::format_double(s));
    }
    for (int it = 0; it < 200; ++it) {
        double g = profile_d1(x) - s;
        if (g > 0)
            hi = x;
        else
            lo = x;
        double dg = profile_d2(x);
        double step = (dg > 0 && std::isfinite(dg)) ? g / dg : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    if (hi - lo > 1e-9 * std::max(1.0, hi))
        throw NumericalError("conjugate_arg: Newton and bisection failed to converge at s=" +
                             io::format_double(s));
    return 0.5 * (lo + hi);
}

double Hamiltonian::conjugate(double s) const {
    if (family == Family::power) {
        double rc = conjugate_exponent();
        return std::pow(c, 1.0 - rc) * std::pow(s, rc) / rc;
    }
    double x = conjugate_arg(s);
    return s * x - profile(x);
}

std::string Hamiltonian::family_name() const {
    return family == Family::power ? "power" : "paper_example";
}

double H_star(const Hamiltonian& H, const double* pstar, int dim) { return H.conjugate(norm2(pstar, dim)); }

double L_eval(const Hamiltonian& H, const double* pstar, int dim) {
    double neg[3];
    for (int d = 0; d < dim; ++d) neg[d] = -pstar[d];
    return H_star(H, neg, dim);
}

double coupling_f(const CouplingParams& cp, double m) {
    return cp.ftilde * (cp.a0 + std::pow(std::max(m, 0.0), cp.q - 1.0));
}

double coupling_F(const CouplingParams& cp, double m) {
    if (m < 0) return kInfValue;
    return cp.ftilde * (cp.a0 * m + std::pow(m, cp.q) / cp.q);
}

double coupling_Fstar(const CouplingParams& cp, double s) {
    double f0 = cp.ftilde * cp.a0;
    if (s <= f0) return 0.0;
    double m = std::pow(s / cp.ftilde - cp.a0, 1.0 / (cp.q - 1.0));
    return s * m - coupling_F(cp, m);
}

double coupling_Fstar_deriv(const CouplingParams& cp, double s) {
    double f0 = cp.ftilde * cp.a0;
    if (s <= f0) return 0.0;
    return std::pow(s / cp.ftilde - cp.a0, 1.0 / (cp.q - 1.0));
}

double kinetic_eval(const Hamiltonian& H, double m, const double* w, int dim) {
    if (m < 0) return kInfValue;
    double wn = norm2(w, dim);
    if (m == 0.0) return wn == 0.0 ? 0.0 : kInfValue;
    return m * H.conjugate(wn / m); // L = H*(-.) = H* for even H
}

namespace {

/// Solves tau A x + rho h'(x) = s0 for x >= 0 (x = 0 when the constrained
/// root is nonpositive). The root is bounded above by s0 / (tau A), which
/// gives a safe bisection bracket; x_init warm-starts the Newton sweep.
double solve_x(const Hamiltonian& H, double tauA, double rho, double s0, double x_init, int& iters) {
    if (s0 <= 0.0) return 0.0;
    if (H.family == Hamiltonian::Family::power && H.r == 2.0) return s0 / (tauA + rho * H.c);
    if (rho > 0 && rho * H.profile_d1(0.0) >= s0) return 0.0;
    double lo = 0.0, hi = s0 / tauA;
    double x = (x_init > lo && x_init < hi) ? x_init : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        ++iters;
        double g = tauA * x + rho * H.profile_d1(x) - s0;
        if (g > 0)
            hi = x;
        else
            lo = x;
        double dd = (x > 0) ? H.profile_d2(x) : 0.0;
        double dg = tauA + rho * (std::isfinite(dd) ? dd : 0.0);
        double xn = x - g / dg;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1e-3, std::abs(x))) return xn;
        x = xn;
    }
    return 0.5 * (lo + hi);
}

} // namespace

ProxResult prox_perspective(const Hamiltonian& H, const CouplingParams* coupling, double A, double B,
                            double tau, double m0, const double* w0, int dim, ProxWarmStart* warm) {
    if (!(tau > 0) || !(A >= 0)) throw ContractViolation("prox_perspective: tau must be positive, A nonnegative");
    ProxResult res;
    const double tauA = tau * A;
    const double s0 = norm2(w0, dim);

    auto f_of = [&](double rho) { return coupling ? coupling_f(*coupling, rho) : 0.0; };
    auto fprime_of = [&](double rho) {
        if (!coupling) return 0.0;
        if (coupling->q == 2.0) return coupling->ftilde;
        return coupling->ftilde * (coupling->q - 1.0) * std::pow(std::max(rho, 0.0), coupling->q - 2.0);
    };
    double x_state = warm && warm->rho >= 0 ? warm->x : 0.0;
    auto rootfun = [&](double rho, double& x_out) {
        x_out = solve_x(H, tauA, rho, s0, x_state, res.newton_iters);
        x_state = x_out;
        return A * (f_of(rho) - H.profile(x_out)) + B + (rho - m0) / tau;
    };

    double x = 0.0;
    double at_zero = rootfun(0.0, x);
    if (at_zero >= 0.0) {
        res.m = 0.0;
        if (warm) {
            warm->rho = 0.0;
            warm->x = x;
        }
        return res; // w = 0 by the perspective domain
    }

    double lo = 0.0, hi = std::max({m0, 1.0});
    if (warm && warm->rho > 0) hi = std::max(hi, 2.0 * warm->rho);
    while (rootfun(hi, x) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("prox_perspective: failed to bracket the density root");
    }
    double rho = (warm && warm->rho > lo && warm->rho < hi) ? warm->rho : 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        double rf = rootfun(rho, x);
        if (rf > 0)
            hi = rho;
        else
            lo = rho;
        double dterm = 0.0;
        if (x > 0.0) {
            double h2 = H.profile_d2(x);
            if (std::isfinite(h2)) dterm = A * H.profile_d1(x) * H.profile_d1(x) / (tauA + rho * h2);
        }
        double drf = A * fprime_of(rho) + 1.0 / tau + dterm;
        double rn = (std::isfinite(drf) && drf > 0) ? rho - rf / drf : 0.5 * (lo + hi);
        if (!(rn > lo && rn < hi)) {
            rn = 0.5 * (lo + hi);
            res.used_bisection = true;
        }
        if (std::abs(rn - rho) <= 1e-12 * std::max(1.0, std::abs(rho)) || (hi - lo) <= 1e-13) {
            rho = rn;
            break;
        }
        rho = rn;
    }

    rootfun(rho, x); // refresh x at the final density
    double t = s0 - tauA * x;
    if (t < 0) t = 0;
    res.m = rho;
    if (s0 > 0) {
        double scale = t / s0;
        for (int d = 0; d < dim; ++d) res.w[d] = scale * w0[d];
    }
    if (warm) {
        warm->rho = rho;
        warm->x = x;
    }
    return res;
}

ProxResult prox_kinetic(const Hamiltonian& H, double m0, const double* w0, int dim, double tau) {
    return prox_perspective(H, nullptr, 1.0, 0.0, tau, m0, w0, dim);
}

LegendreResult numerical_legendre(const std::vector<double>& xs, const std::vector<double>& phis, double p) {
    if (xs.size() != phis.size() || xs.empty())
        throw ContractViolation("numerical_legendre: sample arrays empty or mismatched");
    LegendreResult res;
    res.value = -kInfValue;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = p * xs[i] - phis[i];
        if (v > res.value) {
            res.value = v;
            res.argmax = static_cast<long>(i);
        }
    }
    res.trusted = res.argmax > 0 && res.argmax + 1 < static_cast<long>(xs.size());
    return res;
}

ScalarConvexFn counterexample_fn() {
    ScalarConvexFn fn;
    fn.name = "counterexample";
    fn.phi = [](double x) { return x < 1.0 ? x * x : x * x * x; };
    fn.phi_star = [](double p) {
        if (p < 2.0) return p * p / 4.0;
        if (p < 3.0) return p - 1.0;
        return 2.0 * std::sqrt(3.0) / 9.0 * p * std::sqrt(p);
    };
    fn.closed_form_conjugate = true;
    return fn;
}

ScalarConvexFn power_fn(double r, double c) {
    ScalarConvexFn fn;
    fn.name = "power";
    fn.phi = [r, c](double x) { return c * std::pow(std::abs(x), r) / r; };
    double rc = r / (r - 1.0);
    fn.phi_star = [rc, c](double p) { return std::pow(c, 1.0 - rc) * std::pow(std::abs(p), rc) / rc; };
    fn.closed_form_conjugate = true;
    return fn;
}

ScalarConvexFn quadratic_fn() {
    ScalarConvexFn fn;
    fn.name = "quadratic";
    fn.phi = [](double x) { return 0.5 * x * x; };
    fn.phi_star = [](double p) { return 0.5 * p * p; };
    fn.closed_form_conjugate = true;
    return fn;
}

} // namespace mfgn
