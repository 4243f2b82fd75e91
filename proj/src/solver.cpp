#include "mfgn/solver.hpp"

#include "mfgn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace mfgn {

namespace {
constexpr double kDensityFloorTol = 1e-12;

/// Clamp convention for evaluating the perspective term on projected pairs:
/// densities in [-1e-12, 0) count as empty, and an empty cell with flux
/// below 1e-12 in magnitude contributes zero.
double clamped_kinetic(const Hamiltonian& H, double m, const double* w, int dim, bool& infeasible) {
    if (m < -kDensityFloorTol) {
        infeasible = true;
        return kInfValue;
    }
    double mm = std::max(m, 0.0);
    if (mm == 0.0) {
        double wn = 0.0;
        for (int d = 0; d < dim; ++d) wn += w[d] * w[d];
        if (std::sqrt(wn) > kDensityFloorTol) {
            infeasible = true;
            return kInfValue;
        }
        return 0.0;
    }
    return kinetic_eval(H, mm, w, dim);
}
} // namespace

DiscreteProblem::DiscreteProblem(const ProblemSpec& spec, const Grid& grid)
    : spec_(spec), grid_(grid), psi_(spec.sample_psi(grid)), ftilde_(spec.sample_ftilde_intervals(grid)),
      co_(grid, spec.sample_m0(grid), spec.sample_j(grid)) {}

double DiscreteProblem::evaluate_M(const CellField& m, const CellVectorField& W,
                                   std::string* infeasible_loc) const {
    const Grid& g = grid_;
    if (m.slots != g.steps + 1 || W.slots != g.steps)
        throw ContractViolation("evaluate_M: m needs steps+1 levels and W one slot per interval");
    const double wt = g.dt * g.cell_volume();
    double acc = 0.0;
    for (int k = 0; k < g.steps; ++k) {
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = m.at(k + 1, c);
            const double* wv = &W.data[(static_cast<std::size_t>(k) * W.cells + c) * W.dim];
            bool infeasible = false;
            double kin = clamped_kinetic(spec_.hamiltonian, mv, wv, W.dim, infeasible);
            if (infeasible) {
                if (infeasible_loc) {
                    std::ostringstream os;
                    os << "interval " << k << " cell " << c;
                    *infeasible_loc = os.str();
                }
                return kInfValue;
            }
            acc += wt * (kin + coupling_F(coupling_at(k, c), std::max(mv, 0.0)));
        }
    }
    for (long c = 0; c < g.n_cells(); ++c) acc += g.cell_volume() * psi_[c] * m.at(g.steps, c);
    return acc;
}

double DiscreteProblem::evaluate_M_boundary_form(const CellField& m, const CellVectorField& W) const {
    const Grid& g = grid_;
    const double wt = g.dt * g.cell_volume();
    CellField psi_field;
    psi_field.cells = g.n_cells();
    psi_field.slots = 1;
    psi_field.data = psi_;
    CellVectorField grad_psi = cell_gradient(g, psi_field);

    double acc = 0.0;
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = m.at(k + 1, c);
            const double* wv = &W.data[(static_cast<std::size_t>(k) * W.cells + c) * W.dim];
            bool infeasible = false;
            double kin = clamped_kinetic(spec_.hamiltonian, mv, wv, W.dim, infeasible);
            if (infeasible) return kInfValue;
            double wdotgpsi = 0.0;
            for (int d = 0; d < W.dim; ++d) wdotgpsi += wv[d] * grad_psi.at(0, c, d);
            acc += wt * (kin + coupling_F(coupling_at(k, c), std::max(mv, 0.0)) + wdotgpsi);
        }
    for (long c = 0; c < g.n_cells(); ++c) acc += g.cell_volume() * psi_[c] * co_.m0()[c];
    for (int k = 0; k < g.steps; ++k)
        for (int s = 0; s < g.n_sides(); ++s) {
            double area = g.facet_area(s);
            for (long f = 0; f < g.facets_per_side(s); ++f)
                acc += g.dt * area * co_.influx().at(k, s, f) * psi_[g.boundary_adjacent_cell(s, f)];
        }
    return acc;
}

CellField DiscreteProblem::hj_operator(const CellField& u) const {
    const Grid& g = grid_;
    if (u.slots != g.steps + 1) throw ContractViolation("hj_operator: u needs steps+1 levels");
    CellVectorField gu = cell_gradient(g, u);
    CellField xi = CellField::zeros(g, g.steps);
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            const double* gv = &gu.data[(static_cast<std::size_t>(k) * gu.cells + c) * gu.dim];
            xi.at(k, c) = -(u.at(k + 1, c) - u.at(k, c)) / g.dt + spec_.hamiltonian.eval(gv, gu.dim);
        }
    return xi;
}

CellField DiscreteProblem::alpha_from_u(const CellField& u) const {
    CellField alpha = hj_operator(u);
    for (int k = 0; k < grid_.steps; ++k)
        for (long c = 0; c < grid_.n_cells(); ++c) {
            auto cp = coupling_at(k, c);
            alpha.at(k, c) = std::max(alpha.at(k, c), cp.ftilde * cp.a0);
        }
    return alpha;
}

double DiscreteProblem::boundary_potential_pairing(const CellField& u) const {
    const Grid& g = grid_;
    double acc = 0.0;
    for (int k = 0; k < g.steps; ++k)
        for (int s = 0; s < g.n_sides(); ++s) {
            double area = g.facet_area(s);
            for (long f = 0; f < g.facets_per_side(s); ++f)
                acc += g.dt * area * co_.influx().at(k, s, f) * u.at(k, g.boundary_adjacent_cell(s, f));
        }
    return acc;
}

double DiscreteProblem::evaluate_K(const CellField& u, const CellField& alpha, bool* feasible,
                                   double feas_tol) const {
    const Grid& g = grid_;
    if (u.slots != g.steps + 1 || alpha.slots != g.steps)
        throw ContractViolation("evaluate_K: u needs steps+1 levels and alpha one slot per interval");
    if (feasible) {
        *feasible = true;
        CellField xi = hj_operator(u);
        double scale = 1.0;
        for (int k = 0; k < g.steps && *feasible; ++k)
            for (long c = 0; c < g.n_cells(); ++c)
                if (xi.at(k, c) - alpha.at(k, c) > feas_tol * scale) {
                    *feasible = false;
                    break;
                }
        for (long c = 0; c < g.n_cells(); ++c)
            if (u.at(g.steps, c) - psi_[c] > feas_tol * scale) *feasible = false;
    }
    const double wt = g.dt * g.cell_volume();
    double acc = 0.0;
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c)
            acc += wt * coupling_Fstar(coupling_at(k, c), alpha.at(k, c));
    for (long c = 0; c < g.n_cells(); ++c) acc -= g.cell_volume() * u.at(0, c) * co_.m0()[c];
    acc -= boundary_potential_pairing(u);
    return acc;
}

double DiscreteProblem::energy_identity_defect(const CellField& u, const CellField& m,
                                               const CellVectorField& W, const CellField& alpha,
                                               int level) const {
    const Grid& g = grid_;
    if (level < 0 || level > g.steps) throw ContractViolation("energy_identity_defect: level out of range");
    const double vol = g.cell_volume();
    double lhs = 0.0;
    for (long c = 0; c < g.n_cells(); ++c) lhs += vol * u.at(0, c) * co_.m0()[c];
    for (int k = 0; k < level; ++k)
        for (int s = 0; s < g.n_sides(); ++s) {
            double area = g.facet_area(s);
            for (long f = 0; f < g.facets_per_side(s); ++f)
                lhs += g.dt * area * co_.influx().at(k, s, f) * u.at(k, g.boundary_adjacent_cell(s, f));
        }
    double rhs = 0.0;
    for (long c = 0; c < g.n_cells(); ++c) rhs += vol * u.at(level, c) * m.at(level, c);
    for (int k = 0; k < level; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = std::max(m.at(k + 1, c), 0.0);
            const double* wv = &W.data[(static_cast<std::size_t>(k) * W.cells + c) * W.dim];
            bool infeasible = false;
            double kin = clamped_kinetic(spec_.hamiltonian, mv, wv, W.dim, infeasible);
            if (infeasible) kin = 0.0;
            rhs += g.dt * vol * (kin + mv * alpha.at(k, c));
        }
    return lhs - rhs;
}

io::KvBlock Certificate::to_kv() const {
    io::KvBlock kv;
    kv.set("primal_value", primal);
    kv.set("dual_value", dual);
    kv.set("duality_gap", gap);
    kv.set("relative_gap", rel_gap);
    kv.set("scale", scale);
    kv.set("continuity_residual", cont_residual);
    kv.set("mass_defect_rel", mass_defect_rel);
    kv.set("optimality_cost_sup", opt_cost_sup);
    kv.set("optimality_drift_sup", opt_drift_sup);
    kv.set("energy_defect_T", energy_defect_T);
    kv.set("min_density", min_density);
    kv.set("delta_mask", delta_mask);
    kv.set("weak_duality_ok", weak_duality_ok);
    kv.set("dual_feasible", dual_feasible);
    kv.set("converged", converged);
    kv.set("iterations", iterations);
    return kv;
}

namespace {

// The splitting runs in the volume-weighted inner product on both spaces, so
// the multiplier is the value function itself: u = -lambda, no unit factors.
CellField u_from_lambda(const DiscreteProblem& dp, const Eigen::VectorXd& lambda) {
    const Grid& g = dp.grid();
    CellField u = CellField::zeros(g, g.steps + 1);
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c)
            u.at(k, c) = -lambda(static_cast<long>(k) * g.n_cells() + c);
    for (long c = 0; c < g.n_cells(); ++c) u.at(g.steps, c) = dp.psi()[c];
    return u;
}

Certificate make_certificate(const DiscreteProblem& dp, const CellField& m, const CellVectorField& W,
                             const CellField& u, const CellField& alpha, double raw_residual,
                             double delta_mask, long iters, bool converged) {
    const Grid& g = dp.grid();
    Certificate cert;
    cert.iterations = iters;
    cert.converged = converged;
    cert.delta_mask = delta_mask;
    cert.primal = dp.evaluate_M(m, W);
    bool feas = false;
    cert.dual = dp.evaluate_K(u, alpha, &feas);
    cert.dual_feasible = feas;
    cert.gap = cert.primal + cert.dual;
    cert.scale = std::max({std::abs(cert.primal), std::abs(cert.dual), 1e-12});
    cert.rel_gap = cert.gap / cert.scale;
    cert.weak_duality_ok = cert.gap >= -1e-8 * cert.scale;
    cert.cont_residual = raw_residual;

    auto table = dp.continuity().mass_balance_table(m);
    double mass_scale = std::max(std::abs(table.front().mass), 1e-12);
    for (const auto& row : table) {
        mass_scale = std::max(mass_scale, std::abs(row.expected));
        cert.mass_defect_rel = std::max(cert.mass_defect_rel, std::abs(row.defect));
    }
    cert.mass_defect_rel /= mass_scale;

    cert.min_density = kInfValue;
    for (int k = 1; k <= g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) cert.min_density = std::min(cert.min_density, m.at(k, c));

    CellVectorField gu = cell_gradient(g, u);
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = m.at(k + 1, c);
            if (mv <= delta_mask) continue;
            auto cp = dp.coupling_at(k, c);
            cert.opt_cost_sup = std::max(cert.opt_cost_sup, std::abs(alpha.at(k, c) - coupling_f(cp, mv)));
            double grad[3] = {0, 0, 0}, hp[3] = {0, 0, 0};
            for (int d = 0; d < g.dim(); ++d) grad[d] = gu.at(k, c, d);
            dp.spec().hamiltonian.grad(grad, g.dim(), hp);
            double dres = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                double rd = W.at(k, c, d) + mv * hp[d];
                dres += rd * rd;
            }
            cert.opt_drift_sup = std::max(cert.opt_drift_sup, std::sqrt(dres));
        }
    cert.energy_defect_T = dp.energy_identity_defect(u, m, W, alpha, g.steps);
    return cert;
}

Eigen::VectorXd stationary_init(const DiscreteProblem& dp) {
    const Grid& g = dp.grid();
    const auto& co = dp.continuity();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(co.n_unknowns());
    for (int k = 1; k <= g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) z(co.m_index(k, c)) = co.m0()[c];
    return z;
}

Eigen::VectorXd lambda_stationary_init(const DiscreteProblem& dp) {
    // u guess: psi + (T - t) f(t, x, m0)
    const Grid& g = dp.grid();
    const auto& co = dp.continuity();
    Eigen::VectorXd lambda(co.n_constraints());
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double uval = dp.psi()[c] + (g.domain.horizon - g.time_at(k)) *
                                            coupling_f(dp.coupling_at(k, c), co.m0()[c]);
            lambda(static_cast<long>(k) * g.n_cells() + c) = -uval;
        }
    return lambda;
}

} // namespace

std::pair<CellField, CellField> extract_potentials(const DiscreteProblem& dp, const SolveState& state) {
    CellField u = u_from_lambda(dp, state.lambda);
    CellField alpha = dp.alpha_from_u(u);
    return {std::move(u), std::move(alpha)};
}

SolveResult solve(const ProblemSpec& spec, const Grid& grid, const SolverConfig& cfg,
                  const SolveState* resume, const std::string& checkpoint_path) {
    DiscreteProblem dp(spec, grid);
    const auto& co = dp.continuity();
    const Grid& g = dp.grid();
    const long C = g.n_cells();
    const int K = g.steps;
    const int N = g.dim();

    const double anorm = co.op_norm();
    const double ratio = cfg.step_ratio > 0 ? cfg.step_ratio : 1.0;
    double tau = cfg.tau > 0 ? cfg.tau : 0.95 * std::sqrt(ratio) / anorm;
    double sigma = cfg.sigma > 0 ? cfg.sigma : 0.95 / (std::sqrt(ratio) * anorm);
    if (tau * sigma * anorm * anorm >= 1.0)
        throw ConfigError("solver: step sizes violate tau*sigma*||A||^2 < 1");
    if (cfg.theta < 0.0 || cfg.theta > 1.0) throw ConfigError("solver: theta must lie in [0,1]");

    SolveState st;
    if (resume) {
        st = *resume;
        if (st.grid_cells != g.cells || st.grid_steps != K)
            throw ContractViolation("solver: resume state shape does not match the grid");
    } else {
        st.grid_cells = g.cells;
        st.grid_steps = K;
        if (cfg.init == SolverConfig::Init::stationary) {
            st.z = stationary_init(dp);
            st.lambda = lambda_stationary_init(dp);
        } else {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> um(0.0, 2.0), uw(-0.5, 0.5);
            st.z = Eigen::VectorXd::Zero(co.n_unknowns());
            for (int k = 1; k <= K; ++k)
                for (long c = 0; c < C; ++c) st.z(co.m_index(k, c)) = um(rng);
            for (int k = 0; k < K; ++k)
                for (long c = 0; c < C; ++c)
                    for (int d = 0; d < N; ++d) st.z(co.w_index(k, c, d)) = uw(rng);
            st.lambda = Eigen::VectorXd::Zero(co.n_constraints());
            for (long i = 0; i < st.lambda.size(); ++i) st.lambda(i) = uw(rng);
        }
        st.zbar = st.z;
        st.iter = 0;
    }

    // weighted-metric formulation: the dt*vol energy weights cancel inside
    // the prox, and the terminal term's linear coefficient becomes psi/dt
    const double bnorm = std::max(1.0, co.rhs().norm());
    const Hamiltonian& H = spec.hamiltonian;

    Eigen::VectorXd z_old = st.z;
    std::vector<ProxWarmStart> warm(static_cast<std::size_t>(K) * C);
    double best_gap_window = kInfValue;
    long window_start = st.iter;
    bool converged = false;

    auto certificate_pass = [&](bool record) -> Certificate {
        Eigen::VectorXd zp = st.z;
        co.project(zp);
        CellField m = co.m_from_vec(zp);
        CellVectorField W = co.w_from_vec(zp);
        CellField u = u_from_lambda(dp, st.lambda);
        CellField alpha = dp.alpha_from_u(u);
        double raw_res = (co.apply(st.z) - co.rhs()).norm() / bnorm;
        Certificate cert = make_certificate(dp, m, W, u, alpha, raw_res, cfg.delta_mask, st.iter, false);
        if (record)
            st.history.push_back({st.iter, cert.primal, cert.dual, cert.gap, raw_res});
        return cert;
    };

    while (st.iter < cfg.max_iters) {
        // dual ascent on the continuity multiplier
        st.lambda += sigma * (co.apply(st.zbar) - co.rhs());

        // primal descent: pointwise prox of the slot energies
        z_old = st.z;
        Eigen::VectorXd v = st.z - tau * co.apply_adjoint(st.lambda);
        for (int k = 0; k < K; ++k) {
            for (long c = 0; c < C; ++c) {
                double m0v = v(co.m_index(k + 1, c));
                double w0v[3] = {0, 0, 0};
                for (int d = 0; d < N; ++d) w0v[d] = v(co.w_index(k, c, d));
                CouplingParams cp = dp.coupling_at(k, c);
                double B = (k == K - 1) ? dp.psi()[c] / g.dt : 0.0;
                ProxResult pr = prox_perspective(H, &cp, 1.0, B, tau, m0v, w0v, N,
                                                 &warm[static_cast<std::size_t>(k) * C + c]);
                st.z(co.m_index(k + 1, c)) = pr.m;
                for (int d = 0; d < N; ++d) st.z(co.w_index(k, c, d)) = pr.w[d];
            }
        }
        st.zbar = st.z + cfg.theta * (st.z - z_old);
        ++st.iter;

        if (cfg.checkpoint_interval > 0 && !checkpoint_path.empty() &&
            st.iter % cfg.checkpoint_interval == 0) {
            save_checkpoint(checkpoint_path, st, 0);
        }

        if (st.iter % cfg.cert_interval == 0 || st.iter == cfg.max_iters) {
            Certificate cert = certificate_pass(true);
            double gap_abs = std::abs(cert.gap);
            if (cert.gap <= cfg.gap_tol_rel * cert.scale && cert.gap >= -1e-8 * cert.scale &&
                st.history.back().residual <= cfg.residual_tol) {
                converged = true;
                break;
            }
            // divergence monitor over a 500-iteration window
            if (gap_abs < best_gap_window) {
                best_gap_window = gap_abs;
                window_start = st.iter;
            } else if (st.iter - window_start > 5000 && gap_abs > 100.0 * best_gap_window &&
                       gap_abs > 1e3 * cert.scale) {
                std::ostringstream os;
                os << "solver: divergence detected at iteration " << st.iter << " (|gap| " << gap_abs
                   << " vs best " << best_gap_window << "); history:";
                for (std::size_t i = st.history.size() > 10 ? st.history.size() - 10 : 0;
                     i < st.history.size(); ++i)
                    os << " [" << st.history[i].iter << "] gap=" << st.history[i].gap;
                throw NumericalError(os.str());
            }
        }
    }

    // final projected pair + certificate
    SolveResult out;
    Eigen::VectorXd zp = st.z;
    co.project(zp);
    out.m = co.m_from_vec(zp);
    out.w = co.w_from_vec(zp);
    out.w_face = face_flux_from_collocated(g, out.w, &co.influx());
    out.u = u_from_lambda(dp, st.lambda);
    out.alpha = dp.alpha_from_u(out.u);
    double raw_res = (co.apply(st.z) - co.rhs()).norm() / bnorm;
    out.certificate =
        make_certificate(dp, out.m, out.w, out.u, out.alpha, raw_res, cfg.delta_mask, st.iter, converged);
    out.certificate.converged = converged;
    out.state = std::move(st);
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

OracleResult oracle_solve(const ProblemSpec& spec_in, const Grid& grid, const OracleOptions& opts) {
    ProblemSpec spec = spec_in;
    validate_spec(spec); // rejects infeasible data before any solve work
    DiscreteProblem dp(spec, grid);
    const auto& co = dp.continuity();
    if (co.n_unknowns() > opts.max_unknowns)
        throw ConfigError("oracle_solve: instance exceeds the unknown cap (" +
                          std::to_string(co.n_unknowns()) + " > " + std::to_string(opts.max_unknowns) + ")");

    const Grid& g = dp.grid();
    const long C = g.n_cells();
    const int K = g.steps;
    const int N = g.dim();
    const double wt = g.dt * g.cell_volume();
    const Hamiltonian& H = spec.hamiltonian;

    Eigen::VectorXd z = stationary_init(dp);
    co.project(z);

    auto eval_at = [&](const Eigen::VectorXd& zz) {
        CellField m = co.m_from_vec(zz);
        CellVectorField W = co.w_from_vec(zz);
        return dp.evaluate_M(m, W);
    };

    Eigen::VectorXd best_z = z;
    double best_obj = eval_at(z);
    const double step_scale = opts.step0 * std::max(1.0, z.norm());

    Eigen::VectorXd grad(co.n_unknowns());
    for (long n = 0; n < opts.iterations; ++n) {
        grad.setZero();
        for (int k = 0; k < K; ++k) {
            for (long c = 0; c < C; ++c) {
                double mv = std::max(z(co.m_index(k + 1, c)), 0.0);
                double wnorm = 0.0;
                for (int d = 0; d < N; ++d) {
                    double wd = z(co.w_index(k, c, d));
                    wnorm += wd * wd;
                }
                wnorm = std::sqrt(wnorm);
                CouplingParams cp = dp.coupling_at(k, c);
                double dm, lw = 0.0;
                if (mv > 0 && wnorm > 0) {
                    double v = wnorm / mv;
                    double x = H.conjugate_arg(v);
                    dm = wt * (-H.profile(x) + coupling_f(cp, mv));
                    lw = x; // radial slope of L
                } else {
                    dm = wt * (-H.profile(0.0) + coupling_f(cp, mv));
                }
                grad(co.m_index(k + 1, c)) += dm;
                if (wnorm > 0)
                    for (int d = 0; d < N; ++d)
                        grad(co.w_index(k, c, d)) += wt * lw * z(co.w_index(k, c, d)) / wnorm;
                if (k == K - 1) grad(co.m_index(K, c)) += g.cell_volume() * dp.psi()[c];
            }
        }
        double gn = grad.norm();
        if (gn == 0) break;
        double gamma = step_scale / std::sqrt(static_cast<double>(n + 1));
        z -= (gamma / gn) * grad;
        // keep the iterate near the domain: clamp densities, restore feasibility
        for (int k = 1; k <= K; ++k)
            for (long c = 0; c < C; ++c) {
                long idx = co.m_index(k, c);
                if (z(idx) < 0) z(idx) = 0;
            }
        co.project(z);
        double obj = eval_at(z);
        if (std::isfinite(obj) && obj < best_obj) {
            best_obj = obj;
            best_z = z;
        }
    }

    OracleResult res;
    res.iterations = opts.iterations;
    res.objective = best_obj;
    res.m = co.m_from_vec(best_z);
    res.w = co.w_from_vec(best_z);
    return res;
}

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kChkMagic = 0x31504b48; // "HKP1"
constexpr std::uint64_t kChkVersion = 1;

void put_vec(std::vector<std::uint8_t>& buf, const Eigen::VectorXd& v) {
    io::put_u64(buf, static_cast<std::uint64_t>(v.size()));
    for (long i = 0; i < v.size(); ++i) io::put_f64(buf, v(i));
}
Eigen::VectorXd get_vec(const std::vector<std::uint8_t>& buf, std::size_t& off) {
    std::uint64_t n = io::get_u64(buf.data() + off);
    off += 8;
    Eigen::VectorXd v(static_cast<long>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
        v(static_cast<long>(i)) = io::get_f64(buf.data() + off);
        off += 8;
    }
    return v;
}
} // namespace

void save_checkpoint(const std::string& path, const SolveState& state, std::uint64_t config_hash) {
    std::vector<std::uint8_t> buf;
    io::put_u64(buf, kChkMagic);
    io::put_u64(buf, kChkVersion);
    io::put_u64(buf, config_hash);
    io::put_u64(buf, state.grid_cells.size());
    for (int c : state.grid_cells) io::put_i64(buf, c);
    io::put_i64(buf, state.grid_steps);
    io::put_i64(buf, state.iter);
    put_vec(buf, state.z);
    put_vec(buf, state.zbar);
    put_vec(buf, state.lambda);
    io::put_u64(buf, state.history.size());
    for (const auto& rec : state.history) {
        io::put_i64(buf, rec.iter);
        io::put_f64(buf, rec.primal);
        io::put_f64(buf, rec.dual);
        io::put_f64(buf, rec.gap);
        io::put_f64(buf, rec.residual);
    }
    io::put_u64(buf, io::fnv1a(buf.data(), buf.size()));
    io::write_bytes(path, buf);
}

SolveState load_checkpoint(const std::string& path, std::uint64_t expected_config_hash,
                           const Grid& expected_grid) {
    auto buf = io::read_bytes(path);
    if (buf.size() < 48) throw ConfigError("checkpoint: truncated file: " + path);
    std::uint64_t stored = io::get_u64(buf.data() + buf.size() - 8);
    if (stored != io::fnv1a(buf.data(), buf.size() - 8))
        throw ConfigError("checkpoint: checksum mismatch: " + path);
    std::size_t off = 0;
    auto take = [&] {
        auto v = io::get_u64(buf.data() + off);
        off += 8;
        return v;
    };
    if (take() != kChkMagic) throw ConfigError("checkpoint: bad magic: " + path);
    if (take() != kChkVersion) throw ConfigError("checkpoint: version mismatch, refusing to load");
    std::uint64_t chash = take();
    if (expected_config_hash != 0 && chash != 0 && chash != expected_config_hash)
        throw ConfigError("checkpoint: config hash mismatch, refusing to load");

    SolveState st;
    std::uint64_t ndims = take();
    for (std::uint64_t i = 0; i < ndims; ++i) st.grid_cells.push_back(static_cast<int>(take()));
    st.grid_steps = static_cast<int>(take());
    st.iter = static_cast<long>(take());
    st.z = get_vec(buf, off);
    st.zbar = get_vec(buf, off);
    st.lambda = get_vec(buf, off);
    std::uint64_t nh = take();
    for (std::uint64_t i = 0; i < nh; ++i) {
        GapRecord rec;
        rec.iter = static_cast<long>(take());
        rec.primal = io::get_f64(buf.data() + off);
        off += 8;
        rec.dual = io::get_f64(buf.data() + off);
        off += 8;
        rec.gap = io::get_f64(buf.data() + off);
        off += 8;
        rec.residual = io::get_f64(buf.data() + off);
        off += 8;
        st.history.push_back(rec);
    }
    if (st.grid_cells != expected_grid.cells || st.grid_steps != expected_grid.steps)
        throw ContractViolation("checkpoint: state shape does not match the target grid");
    return st;
}

} // namespace mfgn
