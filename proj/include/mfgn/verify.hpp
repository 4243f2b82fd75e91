#pragma once

#include "mfgn/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfgn {

struct ResidualStats {
    double sup = 0.0;
    double l1 = 0.0;    // volume-weighted
    long count = 0;     // points inspected
    long worst_interval = -1;
    long worst_cell = -1;
};

/// Weak-form defect of the Hamilton-Jacobi subsolution inequality against
/// one nonnegative test field (positive defect = violation).
struct WeakFormDefect {
    std::string field_name;
    double defect = 0.0;
};

struct HolderDiagnostic {
    bool computed = false;
    std::string skip_reason;
    double nu = 0.0;
    double C_fit = 0.0;
    double C_ref = 0.0;   // frozen reference; 0 = none
    long violations_at_ref = 0;
    long samples = 0;
};

/// Post-solve certificate suite: every check populated, no silent skips.
struct WeakSolutionReport {
    // (i) distributional subsolution
    ResidualStats subsolution;
    std::vector<WeakFormDefect> weak_form;
    // (ii) equality on the support {m > delta}
    ResidualStats equality_on_support;
    double delta = 1e-3;
    // (iii) continuity equation
    double continuity_residual_sup = 0.0;
    double mass_defect_rel = 0.0;
    // (iv) integrability and the exponent audits
    double item4_integral = 0.0; // sum (1+m) |grad u|^r
    double m_Lq = 0.0;
    double w_Lbeta = 0.0;
    bool exponent_gap_ok = false;
    bool exponent_uniqueness_ok = false;
    // (v) energy identity
    double energy_defect_T = 0.0;
    std::vector<std::pair<int, double>> energy_defects; // (level, defect)
    // drift optimality in both forms: gradient residual (differentiable H)
    // and the pointwise Fenchel-Young gap (valid also at kinks)
    double drift_gradient_sup = 0.0;
    double drift_young_gap_sup = 0.0;
    HolderDiagnostic holder;

    io::KvBlock to_kv() const;
    std::string to_text() const;
};

/// Pointwise and weak-form residuals of -(D_t u) + H(grad u) <= alpha.
ResidualStats check_subsolution(const DiscreteProblem& dp, const CellField& u, const CellField& alpha);
std::vector<WeakFormDefect> check_subsolution_weak(const DiscreteProblem& dp, const CellField& u,
                                                   const CellField& alpha);

/// |xi - f(t,x,m)| restricted to {m > delta}; cells with m <= delta are
/// excluded from the verdict.
ResidualStats check_equality_on_support(const DiscreteProblem& dp, const CellField& u,
                                        const CellField& alpha, const CellField& m, double delta);

/// Signed defect of the energy identity cut at a time level.
double check_energy_identity(const DiscreteProblem& dp, const CellField& u, const CellField& m,
                             const CellVectorField& W, const CellField& alpha, int level);

struct IntegrabilityAudit {
    double item4_integral = 0.0;
    double m_Lq = 0.0;
    double w_Lbeta = 0.0;
    double beta = 0.0;
    bool exponent_gap_ok = false;
    bool exponent_uniqueness_ok = false;
};
IntegrabilityAudit check_integrability_and_exponents(const DiscreteProblem& dp, const CellField& m,
                                                     const CellVectorField& W, const CellField& u);

/// Fits the smallest C with u(s,x) <= u(t,x) + C (t-s)^nu (|alpha|_{q'} + 1)
/// over interior samples; regression guard only. Skipped with a reason when
/// nu <= 0.
HolderDiagnostic check_holder(const DiscreteProblem& dp, const CellField& u, const CellField& alpha,
                              double interior_margin, double C_ref = 0.0);

struct VerifyOptions {
    double delta = 1e-3;
    double interior_margin = 0.1; // fraction of the domain length
    double holder_C_ref = 0.0;
    int energy_samples = 5;
};

WeakSolutionReport verify_solution(const DiscreteProblem& dp, const CellField& m,
                                   const CellVectorField& W, const CellField& u, const CellField& alpha,
                                   const VerifyOptions& opts = {});

/// The fixed battery of nonnegative space-time test fields used by the weak
/// subsolution check (tensor products of polynomial bumps, reproducible from
/// the fixed seed).
std::vector<std::pair<std::string, CellField>> test_field_battery(const Grid& g);

} // namespace mfgn
