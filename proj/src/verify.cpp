#include "mfgn/verify.hpp"

#include "mfgn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace mfgn {

ResidualStats check_subsolution(const DiscreteProblem& dp, const CellField& u, const CellField& alpha) {
    const Grid& g = dp.grid();
    CellField xi = dp.hj_operator(u);
    ResidualStats st;
    const double wt = g.dt * g.cell_volume();
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double viol = std::max(xi.at(k, c) - alpha.at(k, c), 0.0);
            st.l1 += wt * viol;
            ++st.count;
            if (viol > st.sup) {
                st.sup = viol;
                st.worst_interval = k;
                st.worst_cell = c;
            }
        }
    return st;
}

std::vector<std::pair<std::string, CellField>> test_field_battery(const Grid& g) {
    std::mt19937_64 rng(20240601ull);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    std::vector<std::pair<std::string, CellField>> battery;
    const int n_fields = 8;
    for (int i = 0; i < n_fields; ++i) {
        // time profile vanishing at t = 0; spatial tensor-product bumps
        double texp = 1.0 + 2.0 * ur(rng);
        std::vector<double> lo(g.dim()), hi(g.dim());
        for (int d = 0; d < g.dim(); ++d) {
            double a = 0.6 * ur(rng);
            double b = a + 0.3 + 0.4 * ur(rng);
            lo[d] = a;
            hi[d] = std::min(b, 1.0);
        }
        CellField phi = CellField::zeros(g, g.steps + 1);
        for (int k = 0; k <= g.steps; ++k) {
            double s = static_cast<double>(k) / g.steps;
            double bt = std::pow(s, texp);
            for (long c = 0; c < g.n_cells(); ++c) {
                auto x = g.cell_center(c);
                double bx = 1.0;
                for (int d = 0; d < g.dim(); ++d) {
                    double y = (x[d] - g.domain.bounds[d][0]) / g.domain.length(d);
                    if (y <= lo[d] || y >= hi[d]) {
                        bx = 0.0;
                        break;
                    }
                    double mid = 0.5 * (hi[d] - lo[d]);
                    double v = (y - lo[d]) * (hi[d] - y) / (mid * mid);
                    bx *= v * v;
                }
                phi.at(k, c) = bt * bx;
            }
        }
        battery.emplace_back("bump" + std::to_string(i), std::move(phi));
    }
    return battery;
}

std::vector<WeakFormDefect> check_subsolution_weak(const DiscreteProblem& dp, const CellField& u,
                                                   const CellField& alpha) {
    const Grid& g = dp.grid();
    const double vol = g.cell_volume();
    CellVectorField gu = cell_gradient(g, u);
    std::vector<WeakFormDefect> out;
    for (auto& [name, phi] : test_field_battery(g)) {
        double lhs = 0.0, rhs = 0.0;
        for (int k = 0; k < g.steps; ++k)
            for (long c = 0; c < g.n_cells(); ++c) {
                double dphi = (phi.at(k + 1, c) - phi.at(k, c)) / g.dt;
                const double* gv = &gu.data[(static_cast<std::size_t>(k) * gu.cells + c) * gu.dim];
                lhs += g.dt * vol *
                       (u.at(k, c) * dphi + dp.spec().hamiltonian.eval(gv, g.dim()) * phi.at(k + 1, c));
                rhs += g.dt * vol * alpha.at(k, c) * phi.at(k + 1, c);
            }
        for (long c = 0; c < g.n_cells(); ++c) rhs += vol * dp.psi()[c] * phi.at(g.steps, c);
        out.push_back({name, lhs - rhs});
    }
    return out;
}

ResidualStats check_equality_on_support(const DiscreteProblem& dp, const CellField& u,
                                        const CellField& alpha, const CellField& m, double delta) {
    const Grid& g = dp.grid();
    CellField xi = dp.hj_operator(u);
    ResidualStats st;
    const double wt = g.dt * g.cell_volume();
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = m.at(k + 1, c);
            if (mv <= delta) continue; // scoped to the support by definition
            double res = std::abs(xi.at(k, c) - coupling_f(dp.coupling_at(k, c), mv));
            st.l1 += wt * res;
            ++st.count;
            if (res > st.sup) {
                st.sup = res;
                st.worst_interval = k;
                st.worst_cell = c;
            }
            (void)alpha;
        }
    return st;
}

double check_energy_identity(const DiscreteProblem& dp, const CellField& u, const CellField& m,
                             const CellVectorField& W, const CellField& alpha, int level) {
    return dp.energy_identity_defect(u, m, W, alpha, level);
}

IntegrabilityAudit check_integrability_and_exponents(const DiscreteProblem& dp, const CellField& m,
                                                     const CellVectorField& W, const CellField& u) {
    const Grid& g = dp.grid();
    const ProblemSpec& spec = dp.spec();
    IntegrabilityAudit audit;
    audit.beta = spec.derived.beta;
    audit.exponent_gap_ok = spec.derived.exponent_gap_ok;
    audit.exponent_uniqueness_ok = spec.derived.exponent_uniqueness_ok;
    CellVectorField gu = cell_gradient(g, u);
    const double wt = g.dt * g.cell_volume();
    double mq = 0.0, wb = 0.0;
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double gn = 0.0, wn = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                gn += gu.at(k, c, d) * gu.at(k, c, d);
                wn += W.at(k, c, d) * W.at(k, c, d);
            }
            gn = std::sqrt(gn);
            wn = std::sqrt(wn);
            double mv = std::max(m.at(k + 1, c), 0.0);
            audit.item4_integral += wt * (1.0 + mv) * std::pow(gn, spec.r());
            mq += wt * std::pow(mv, spec.q());
            wb += wt * std::pow(wn, audit.beta);
        }
    audit.m_Lq = std::pow(mq, 1.0 / spec.q());
    audit.w_Lbeta = std::pow(wb, 1.0 / audit.beta);
    return audit;
}

HolderDiagnostic check_holder(const DiscreteProblem& dp, const CellField& u, const CellField& alpha,
                              double interior_margin, double C_ref) {
    const Grid& g = dp.grid();
    const ProblemSpec& spec = dp.spec();
    HolderDiagnostic diag;
    diag.nu = spec.derived.holder_nu;
    diag.C_ref = C_ref;
    if (diag.nu <= 0.0) {
        diag.skip_reason = "exponent relation r > N(q-1) fails, nu <= 0";
        return diag;
    }
    diag.computed = true;

    // ||alpha||_{q'} over the cylinder
    const double qc = spec.derived.q_conj;
    double an = 0.0;
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c)
            an += g.dt * g.cell_volume() * std::pow(std::abs(alpha.at(k, c)), qc);
    double alpha_norm = std::pow(an, 1.0 / qc) + 1.0;

    for (long c = 0; c < g.n_cells(); ++c) {
        auto x = g.cell_center(c);
        bool interior = true;
        for (int d = 0; d < g.dim(); ++d) {
            double margin = interior_margin * g.domain.length(d);
            if (x[d] - g.domain.bounds[d][0] < margin || g.domain.bounds[d][1] - x[d] < margin)
                interior = false;
        }
        if (!interior) continue;
        for (int ks = 0; ks < g.steps; ++ks)
            for (int kt = ks + 1; kt <= g.steps; ++kt) {
                double dt_pow = std::pow(g.time_at(kt) - g.time_at(ks), diag.nu);
                double need = (u.at(ks, c) - u.at(kt, c)) / (dt_pow * alpha_norm);
                diag.C_fit = std::max(diag.C_fit, need);
                ++diag.samples;
                if (C_ref > 0.0 && need > C_ref * (1.0 + 1e-9)) ++diag.violations_at_ref;
            }
    }
    return diag;
}

WeakSolutionReport verify_solution(const DiscreteProblem& dp, const CellField& m,
                                   const CellVectorField& W, const CellField& u, const CellField& alpha,
                                   const VerifyOptions& opts) {
    const Grid& g = dp.grid();
    WeakSolutionReport rep;
    rep.delta = opts.delta;
    rep.subsolution = check_subsolution(dp, u, alpha);
    rep.weak_form = check_subsolution_weak(dp, u, alpha);
    rep.equality_on_support = check_equality_on_support(dp, u, alpha, m, opts.delta);

    FaceField flux = face_flux_from_collocated(g, W, &dp.continuity().influx());
    CellField res = dp.continuity().residual(m, flux);
    for (double v : res.data) rep.continuity_residual_sup = std::max(rep.continuity_residual_sup, std::abs(v));
    auto table = dp.continuity().mass_balance_table(m);
    double mass_scale = 1e-12;
    for (const auto& row : table) mass_scale = std::max(mass_scale, std::abs(row.expected));
    for (const auto& row : table)
        rep.mass_defect_rel = std::max(rep.mass_defect_rel, std::abs(row.defect) / mass_scale);

    auto audit = check_integrability_and_exponents(dp, m, W, u);
    rep.item4_integral = audit.item4_integral;
    rep.m_Lq = audit.m_Lq;
    rep.w_Lbeta = audit.w_Lbeta;
    rep.exponent_gap_ok = audit.exponent_gap_ok;
    rep.exponent_uniqueness_ok = audit.exponent_uniqueness_ok;

    rep.energy_defect_T = dp.energy_identity_defect(u, m, W, alpha, g.steps);
    for (int i = 1; i <= opts.energy_samples; ++i) {
        int level = std::max(1, std::min(g.steps - 1, i * g.steps / (opts.energy_samples + 1)));
        rep.energy_defects.emplace_back(level, dp.energy_identity_defect(u, m, W, alpha, level));
    }

    // drift optimality in both forms
    CellVectorField gu = cell_gradient(g, u);
    const Hamiltonian& H = dp.spec().hamiltonian;
    for (int k = 0; k < g.steps; ++k)
        for (long c = 0; c < g.n_cells(); ++c) {
            double mv = m.at(k + 1, c);
            if (mv <= opts.delta) continue;
            double grad[3] = {0, 0, 0}, hp[3] = {0, 0, 0};
            for (int d = 0; d < g.dim(); ++d) grad[d] = gu.at(k, c, d);
            H.grad(grad, g.dim(), hp);
            double dres = 0.0, wdotg = 0.0, wn = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                double rd = W.at(k, c, d) + mv * hp[d];
                dres += rd * rd;
                wdotg += W.at(k, c, d) * grad[d];
                wn += W.at(k, c, d) * W.at(k, c, d);
            }
            rep.drift_gradient_sup = std::max(rep.drift_gradient_sup, std::sqrt(dres));
            double w3[3] = {0, 0, 0};
            for (int d = 0; d < g.dim(); ++d) w3[d] = W.at(k, c, d);
            double young = kinetic_eval(H, mv, w3, g.dim()) + mv * H.eval(grad, g.dim()) + wdotg;
            rep.drift_young_gap_sup = std::max(rep.drift_young_gap_sup, young);
        }

    rep.holder = check_holder(dp, u, alpha, opts.interior_margin, opts.holder_C_ref);
    return rep;
}

io::KvBlock WeakSolutionReport::to_kv() const {
    io::KvBlock kv;
    kv.set("subsolution_residual_sup", subsolution.sup);
    kv.set("subsolution_residual_l1", subsolution.l1);
    double wf = 0.0;
    for (const auto& d : weak_form) wf = std::max(wf, d.defect);
    kv.set("weak_form_defect_max", wf);
    kv.set("equality_support_sup", equality_on_support.sup);
    kv.set("equality_support_l1", equality_on_support.l1);
    kv.set("equality_support_delta", delta);
    kv.set("continuity_residual_sup", continuity_residual_sup);
    kv.set("mass_defect_rel", mass_defect_rel);
    kv.set("integrability_item4", item4_integral);
    kv.set("m_Lq", m_Lq);
    kv.set("w_Lbeta", w_Lbeta);
    kv.set("exponent_gap_ok", exponent_gap_ok);
    kv.set("exponent_uniqueness_ok", exponent_uniqueness_ok);
    kv.set("energy_defect_T", energy_defect_T);
    for (const auto& [level, defect] : energy_defects)
        kv.set("energy_defect_level_" + std::to_string(level), defect);
    kv.set("drift_gradient_sup", drift_gradient_sup);
    kv.set("drift_young_gap_sup", drift_young_gap_sup);
    kv.set("holder_computed", holder.computed);
    if (holder.computed) {
        kv.set("holder_nu", holder.nu);
        kv.set("holder_C_fit", holder.C_fit);
        if (holder.C_ref > 0) {
            kv.set("holder_C_ref", holder.C_ref);
            kv.set("holder_violations_at_ref", holder.violations_at_ref);
        }
    } else {
        kv.set("holder_skip_reason", holder.skip_reason);
    }
    return kv;
}

std::string WeakSolutionReport::to_text() const {
    std::ostringstream os;
    os << "weak solution report\n";
    os << "  (i)   subsolution residual: sup " << io::format_double(subsolution.sup) << ", L1 "
       << io::format_double(subsolution.l1) << "\n";
    for (const auto& d : weak_form)
        os << "        weak form vs " << d.field_name << ": defect " << io::format_double(d.defect) << "\n";
    os << "  (ii)  equality on {m > " << io::format_double(delta) << "}: sup "
       << io::format_double(equality_on_support.sup) << " over " << equality_on_support.count
       << " points\n";
    os << "  (iii) continuity residual sup " << io::format_double(continuity_residual_sup)
       << ", mass defect rel " << io::format_double(mass_defect_rel) << "\n";
    os << "  (iv)  (1+m)|grad u|^r integral " << io::format_double(item4_integral) << ", |m|_Lq "
       << io::format_double(m_Lq) << ", |w|_Lbeta " << io::format_double(w_Lbeta) << "\n";
    os << "        exponent audits: r>N(q-1) " << (exponent_gap_ok ? "true" : "false")
       << ", r>Nq/(Nq+q-2) " << (exponent_uniqueness_ok ? "true" : "false") << "\n";
    os << "  (v)   energy defect at T " << io::format_double(energy_defect_T) << "\n";
    for (const auto& [level, defect] : energy_defects)
        os << "        energy defect at level " << level << ": " << io::format_double(defect) << "\n";
    os << "  drift: gradient-form sup " << io::format_double(drift_gradient_sup) << ", Young-gap sup "
       << io::format_double(drift_young_gap_sup) << "\n";
    if (holder.computed) {
        os << "  time-Hoelder: nu " << io::format_double(holder.nu) << ", fitted C "
           << io::format_double(holder.C_fit);
        if (holder.C_ref > 0)
            os << " (ref " << io::format_double(holder.C_ref) << ", violations " << holder.violations_at_ref
               << ")";
        os << "\n";
    } else {
        os << "  time-Hoelder: skipped (" << holder.skip_reason << ")\n";
    }
    return os.str();
}

} // namespace mfgn
