#pragma once

#include "mfgn/grid.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace mfgn {

struct MassBalanceRow {
    double t = 0.0;
    double mass = 0.0;
    double expected = 0.0;
    double defect = 0.0;
};

/// Discrete Fokker-Planck constraint with Neumann influx:
///   (m^{k+1} - m^k)/dt + div(W^k) = influx,   m^0 = m0,
/// assembled as a sparse map A over the unknown vector z = (m^1..m^K, W^0..
/// W^{K-1}) with the boundary data folded into the right-hand side b. The
/// divergence is the collocated one (interior faces average the adjacent
/// cell values), so A z - b also equals the face-based residual of the flux
/// emitted by face_flux_from_collocated.
class ContinuityOperator {
public:
    ContinuityOperator(const Grid& g, std::vector<double> m0, BoundaryField j);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& m0() const { return m0_; }
    const BoundaryField& influx() const { return j_; }

    long n_constraints() const { return rows_; }
    long n_unknowns() const { return cols_; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }
    const Eigen::VectorXd& rhs() const { return b_; }

    /// ||A|| in the Euclidean operator norm, estimated once by power
    /// iteration on A A^T and cached.
    double op_norm() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& z) const { return A_ * z; }
    Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& y) const { return A_.transpose() * y; }

    /// Exact Euclidean projection onto the affine set {A z = b}; the Gram
    /// factorization is built on first use and reused.
    void project(Eigen::VectorXd& z) const;

    /// Per-cell, per-interval continuity residual of a staggered pair. The
    /// flux w provides interior faces; boundary faces carry the operator's
    /// own influx data. m must have steps+1 levels with m(0) compared
    /// against the stored m0 through the k = 0 stencil.
    CellField residual(const CellField& m, const FaceField& w) const;

    double mass_at_time(const CellField& m, int level) const;
    std::vector<MassBalanceRow> mass_balance_table(const CellField& m) const;
    std::vector<double> terminal_trace(const CellField& m) const;

    /// Boundary influx rate sum_facets area * j at one interval, and its
    /// cumulative time integral through a given level.
    double influx_rate(int interval) const;
    double cumulative_influx(int level) const;

    // Unknown vector layout.
    long m_index(int level, long cell) const;              // level in 1..K
    long w_index(int interval, long cell, int axis) const; // interval in 0..K-1
    CellField m_from_vec(const Eigen::VectorXd& z) const;  // prepends m0 as level 0
    CellVectorField w_from_vec(const Eigen::VectorXd& z) const;
    Eigen::VectorXd to_vec(const CellField& m, const CellVectorField& W) const;

private:
    Grid grid_;
    std::vector<double> m0_;
    BoundaryField j_;
    long rows_ = 0, cols_ = 0;
    Eigen::SparseMatrix<double> A_;
    Eigen::VectorXd b_;
    std::vector<double> influx_rate_; // per interval
    mutable double op_norm_ = -1.0;
    mutable std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> gram_;
};

} // namespace mfgn
