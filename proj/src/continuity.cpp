#include "mfgn/continuity.hpp"

#include "mfgn/errors.hpp"

#include <cmath>

namespace mfgn {

ContinuityOperator::ContinuityOperator(const Grid& g, std::vector<double> m0, BoundaryField j)
    : grid_(g), m0_(std::move(m0)), j_(std::move(j)) {
    const long C = g.n_cells();
    const int K = g.steps;
    const int N = g.dim();
    if (static_cast<long>(m0_.size()) != C) throw ContractViolation("continuity: m0 size mismatch");
    if (j_.slots != K) throw ContractViolation("continuity: influx needs one slot per time interval");

    rows_ = static_cast<long>(K) * C;
    cols_ = static_cast<long>(K) * C + static_cast<long>(K) * C * N;
    A_.resize(rows_, cols_);
    b_ = Eigen::VectorXd::Zero(rows_);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(rows_) * (2 + 2 * N));
    const double idt = 1.0 / g.dt;

    for (int k = 0; k < K; ++k) {
        for (long c = 0; c < C; ++c) {
            const long row = static_cast<long>(k) * C + c;
            trips.emplace_back(row, m_index(k + 1, c), idt);
            if (k >= 1)
                trips.emplace_back(row, m_index(k, c), -idt);
            else
                b_(row) += m0_[c] * idt;

            auto multi = grid_.cell_multi(c);
            for (int d = 0; d < N; ++d) {
                const double w2h = 1.0 / (2.0 * g.h[d]);
                long hi = grid_.neighbor(c, d, +1);
                long lo = grid_.neighbor(c, d, -1);
                long t_lin = grid_.cell_transverse(d, c);
                if (hi >= 0) {
                    trips.emplace_back(row, w_index(k, c, d), w2h);
                    trips.emplace_back(row, w_index(k, hi, d), w2h);
                } else {
                    b_(row) += j_.at(k, 2 * d + 1, t_lin) / g.h[d];
                }
                if (lo >= 0) {
                    trips.emplace_back(row, w_index(k, c, d), -w2h);
                    trips.emplace_back(row, w_index(k, lo, d), -w2h);
                } else {
                    b_(row) += j_.at(k, 2 * d, t_lin) / g.h[d];
                }
            }
            (void)multi;
        }
    }
    A_.setFromTriplets(trips.begin(), trips.end());
    A_.makeCompressed();

    influx_rate_.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        double rate = 0.0;
        for (int s = 0; s < g.n_sides(); ++s) {
            double area = g.facet_area(s);
            for (long t = 0; t < g.facets_per_side(s); ++t) rate += area * j_.at(k, s, t);
        }
        influx_rate_[k] = rate;
    }
}

long ContinuityOperator::m_index(int level, long cell) const {
    return static_cast<long>(level - 1) * grid_.n_cells() + cell;
}

long ContinuityOperator::w_index(int interval, long cell, int axis) const {
    const long C = grid_.n_cells();
    return static_cast<long>(grid_.steps) * C +
           (static_cast<long>(interval) * C + cell) * grid_.dim() + axis;
}

double ContinuityOperator::op_norm() const {
    if (op_norm_ >= 0) return op_norm_;
    Eigen::VectorXd v(rows_);
    for (long i = 0; i < rows_; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd gv = A_ * (A_.transpose() * v);
        double next = v.dot(gv);
        double n = gv.norm();
        if (n == 0) break;
        v = gv / n;
        if (it > 3 && std::abs(next - lambda) <= 1e-13 * std::max(1.0, next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    op_norm_ = std::sqrt(std::max(lambda, 0.0));
    return op_norm_;
}

void ContinuityOperator::project(Eigen::VectorXd& z) const {
    if (!gram_) {
        Eigen::SparseMatrix<double> G = A_ * Eigen::SparseMatrix<double>(A_.transpose());
        gram_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        gram_->compute(G);
        if (gram_->info() != Eigen::Success)
            throw NumericalError("continuity: Gram factorization failed");
    }
    Eigen::VectorXd r = A_ * z - b_;
    z -= A_.transpose() * gram_->solve(r);
}

CellField ContinuityOperator::residual(const CellField& m, const FaceField& w) const {
    const Grid& g = grid_;
    if (m.slots != g.steps + 1) throw ContractViolation("continuity residual: m needs steps+1 levels");
    if (w.slots != g.steps) throw ContractViolation("continuity residual: w needs one slot per interval");
    CellField out = CellField::zeros(g, g.steps);
    for (int k = 0; k < g.steps; ++k) {
        for (long c = 0; c < g.n_cells(); ++c) {
            auto multi = g.cell_multi(c);
            double div = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                long t_lin = g.cell_transverse(d, c);
                double w_hi = (multi[d] == g.cells[d] - 1)
                                  ? -j_.at(k, 2 * d + 1, t_lin)
                                  : w.at(k, d, g.face_index(d, multi[d] + 1, t_lin));
                double w_lo = (multi[d] == 0) ? j_.at(k, 2 * d, t_lin)
                                              : w.at(k, d, g.face_index(d, multi[d], t_lin));
                div += (w_hi - w_lo) / g.h[d];
            }
            double mprev = (k == 0) ? m0_[c] : m.at(k, c);
            out.at(k, c) = (m.at(k + 1, c) - mprev) / g.dt + div;
        }
    }
    return out;
}

double ContinuityOperator::mass_at_time(const CellField& m, int level) const {
    if (level < 0 || level >= m.slots) throw ContractViolation("mass_at_time: level out of range");
    double acc = 0.0;
    const double* s = m.slice(level);
    for (long c = 0; c < m.cells; ++c) acc += s[c];
    return acc * grid_.cell_volume();
}

double ContinuityOperator::influx_rate(int interval) const { return influx_rate_[interval]; }

double ContinuityOperator::cumulative_influx(int level) const {
    double acc = 0.0;
    for (int k = 0; k < level && k < grid_.steps; ++k) acc += influx_rate_[k] * grid_.dt;
    return acc;
}

std::vector<MassBalanceRow> ContinuityOperator::mass_balance_table(const CellField& m) const {
    std::vector<MassBalanceRow> table;
    double mass0 = mass_at_time(m, 0);
    for (int k = 0; k <= grid_.steps; ++k) {
        MassBalanceRow row;
        row.t = grid_.time_at(k);
        row.mass = mass_at_time(m, k);
        row.expected = mass0 + cumulative_influx(k);
        row.defect = row.mass - row.expected;
        table.push_back(row);
    }
    return table;
}

std::vector<double> ContinuityOperator::terminal_trace(const CellField& m) const {
    const double* s = m.slice(m.slots - 1);
    return std::vector<double>(s, s + m.cells);
}

CellField ContinuityOperator::m_from_vec(const Eigen::VectorXd& z) const {
    CellField m = CellField::zeros(grid_, grid_.steps + 1);
    for (long c = 0; c < m.cells; ++c) m.at(0, c) = m0_[c];
    for (int k = 1; k <= grid_.steps; ++k)
        for (long c = 0; c < m.cells; ++c) m.at(k, c) = z(m_index(k, c));
    return m;
}

CellVectorField ContinuityOperator::w_from_vec(const Eigen::VectorXd& z) const {
    CellVectorField W = CellVectorField::zeros(grid_, grid_.steps);
    for (int k = 0; k < grid_.steps; ++k)
        for (long c = 0; c < W.cells; ++c)
            for (int d = 0; d < W.dim; ++d) W.at(k, c, d) = z(w_index(k, c, d));
    return W;
}

Eigen::VectorXd ContinuityOperator::to_vec(const CellField& m, const CellVectorField& W) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(cols_);
    for (int k = 1; k <= grid_.steps; ++k)
        for (long c = 0; c < m.cells; ++c) z(m_index(k, c)) = m.at(k, c);
    for (int k = 0; k < grid_.steps; ++k)
        for (long c = 0; c < W.cells; ++c)
            for (int d = 0; d < W.dim; ++d) z(w_index(k, c, d)) = W.at(k, c, d);
    return z;
}

} // namespace mfgn
