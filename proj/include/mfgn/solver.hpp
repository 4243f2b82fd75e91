#pragma once

#include "mfgn/continuity.hpp"
#include "mfgn/convex.hpp"
#include "mfgn/problem.hpp"
#include "mfgn/solver_config.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace mfgn {

/// The discrete convex program pair for one instance on one grid.
///
/// Primal (density side): over m >= 0 (levels 1..K; level 0 pinned to m0)
/// and a collocated flux W (per cell, per interval),
///   M(m, W) = sum_{k,c} dt vol [ m^{k+1} L(W^k / m^{k+1}) + F(t_k+1/2, x, m^{k+1}) ]
///             + sum_c vol psi m^K,
/// subject to the continuity constraint of ContinuityOperator.
///
/// Dual (potential side): over u (levels 0..K, u^K = psi) and alpha,
///   K(u, alpha) = sum_{k,c} dt vol F*(t, x, alpha^k) - sum_c vol u^0 m0
///                 - sum_k dt sum_facets area j u^k(adjacent cell),
/// subject to  -(u^{k+1}-u^k)/dt + H(grad_h u^k) <= alpha^k.
///
/// These are exact finite-dimensional Fenchel duals: M + K >= 0 for every
/// feasible pair, with equality exactly at optimum.
class DiscreteProblem {
public:
    DiscreteProblem(const ProblemSpec& spec, const Grid& grid);

    const Grid& grid() const { return grid_; }
    const ProblemSpec& spec() const { return spec_; }
    const ContinuityOperator& continuity() const { return co_; }
    const std::vector<double>& psi() const { return psi_; }

    CouplingParams coupling_at(int interval, long cell) const {
        return CouplingParams{ftilde_.at(interval, cell), spec_.coupling.q, spec_.coupling.a0};
    }

    /// Primal objective, terminal-trace form. Returns +inf with the first
    /// offending (interval, cell) when the pair leaves the domain (density
    /// below -1e-12, or flux on an empty cell).
    double evaluate_M(const CellField& m, const CellVectorField& W, std::string* infeasible_loc = nullptr) const;
    /// Primal objective in the boundary-data form (flux against grad psi plus
    /// the psi m0 and psi j terms); agrees with evaluate_M on feasible pairs.
    double evaluate_M_boundary_form(const CellField& m, const CellVectorField& W) const;

    /// Dual objective. Sets *feasible to the subsolution + terminal check at
    /// tolerance feas_tol; the value is returned either way.
    double evaluate_K(const CellField& u, const CellField& alpha, bool* feasible = nullptr,
                      double feas_tol = 1e-9) const;

    /// xi^k = -(u^{k+1}-u^k)/dt + H(grad_h u^k), one slot per interval.
    CellField hj_operator(const CellField& u) const;
    /// alpha = max(xi, f(t,x,0)): the truncated running cost, feasible by
    /// construction and never increasing the dual objective.
    CellField alpha_from_u(const CellField& u) const;

    /// Both sides of the energy identity cut at a time level (level = steps
    /// gives the terminal identity). Returns lhs - rhs.
    double energy_identity_defect(const CellField& u, const CellField& m, const CellVectorField& W,
                                  const CellField& alpha, int level) const;

    double boundary_potential_pairing(const CellField& u) const; // sum dt area j u(adj)

private:
    ProblemSpec spec_;
    Grid grid_;
    std::vector<double> psi_;
    CellField ftilde_;
    ContinuityOperator co_;
};

struct GapRecord {
    long iter = 0;
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double residual = 0.0; // relative continuity residual of the raw iterate
};

struct Certificate {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double rel_gap = 0.0;
    double scale = 1.0;
    double cont_residual = 0.0;
    double mass_defect_rel = 0.0;
    double opt_cost_sup = 0.0;   // sup |alpha - f(t,x,m)| on {m > delta}
    double opt_drift_sup = 0.0;  // sup |W + m Hp(grad u)| on {m > delta}
    double energy_defect_T = 0.0;
    double min_density = 0.0;
    double delta_mask = 1e-3;
    bool weak_duality_ok = false;
    bool dual_feasible = false;
    bool converged = false;
    long iterations = 0;
    io::KvBlock to_kv() const;
};

/// Full iteration state; transferable between runs through checkpoints.
struct SolveState {
    std::vector<int> grid_cells;
    int grid_steps = 0;
    Eigen::VectorXd z;
    Eigen::VectorXd zbar;
    Eigen::VectorXd lambda;
    long iter = 0;
    std::vector<GapRecord> history;
};

struct SolveResult {
    SolveState state;
    Certificate certificate;
    CellField m;        // projected, levels 0..K
    CellVectorField w;  // collocated flux, the kinetic variable
    FaceField w_face;   // face flux of record (exact finite-volume flux)
    CellField u;        // levels 0..K with u(T) = psi imposed
    CellField alpha;    // one slot per interval
};

/// Primal-dual solve. The dual iterate of the splitting is the value
/// function: u = -lambda / (dt vol). Deterministic given config and seed.
/// Throws NumericalError when divergence is detected (history attached to
/// the message).
SolveResult solve(const ProblemSpec& spec, const Grid& grid, const SolverConfig& cfg,
                  const SolveState* resume = nullptr, const std::string& checkpoint_path = "");

std::pair<CellField, CellField> extract_potentials(const DiscreteProblem& dp, const SolveState& state);

/// Brute-force verifier: projected subgradient with best-iterate tracking on
/// the identical discrete program. Refuses instances above the unknown cap.
struct OracleOptions {
    long max_unknowns = 10000;
    long iterations = 150000;
    double step0 = 0.05;
};
struct OracleResult {
    double objective = 0.0;
    CellField m;
    CellVectorField w;
    long iterations = 0;
};
OracleResult oracle_solve(const ProblemSpec& spec, const Grid& grid, const OracleOptions& opts = {});

/// Checkpointing: bit-exact round trip of the full SolveState; refuses on
/// version, checksum, config, or grid mismatch.
void save_checkpoint(const std::string& path, const SolveState& state, std::uint64_t config_hash);
SolveState load_checkpoint(const std::string& path, std::uint64_t expected_config_hash,
                           const Grid& expected_grid);

} // namespace mfgn
