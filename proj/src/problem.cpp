#include "mfgn/problem.hpp"

#include "mfgn/errors.hpp"
#include "mfgn/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using nlohmann::json;

namespace mfgn {

std::vector<double> ProblemSpec::sample_m0(const Grid& g) const {
    std::vector<double> out(g.n_cells());
    for (long c = 0; c < g.n_cells(); ++c) {
        auto x = g.cell_center(c);
        out[c] = m0.eval(0.0, x.data(), g.dim());
    }
    return out;
}

std::vector<double> ProblemSpec::sample_psi(const Grid& g) const {
    std::vector<double> out(g.n_cells());
    for (long c = 0; c < g.n_cells(); ++c) {
        auto x = g.cell_center(c);
        out[c] = psi.eval(domain.horizon, x.data(), g.dim());
    }
    return out;
}

BoundaryField ProblemSpec::sample_j(const Grid& g) const {
    BoundaryField out = BoundaryField::zeros(g, g.steps);
    for (int k = 0; k < g.steps; ++k) {
        double t = g.time_mid(k);
        for (int s = 0; s < g.n_sides(); ++s)
            for (long f = 0; f < g.facets_per_side(s); ++f) {
                auto x = g.facet_center(s, f);
                out.at(k, s, f) = j.eval(t, x.data(), g.dim());
            }
    }
    return out;
}

CellField ProblemSpec::sample_ftilde_intervals(const Grid& g) const {
    CellField out = CellField::zeros(g, g.steps);
    for (int k = 0; k < g.steps; ++k) {
        double t = g.time_mid(k);
        for (long c = 0; c < g.n_cells(); ++c) {
            auto x = g.cell_center(c);
            out.at(k, c) = coupling.ftilde.eval(t, x.data(), g.dim());
        }
    }
    return out;
}

std::string ValidationReport::to_text() const {
    std::string out;
    for (const auto& i : issues) out += std::string(i.fatal ? "error: " : "warning: ") + i.message + "\n";
    return out;
}

namespace {
std::vector<std::vector<double>> sample_points(const RectDomain& dom, int per_axis) {
    std::vector<std::vector<double>> pts;
    long total = 1;
    for (int d = 0; d < dom.dim(); ++d) total *= per_axis;
    for (long i = 0; i < total; ++i) {
        std::vector<double> x(dom.dim());
        long rem = i;
        for (int d = dom.dim() - 1; d >= 0; --d) {
            int idx = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            x[d] = dom.bounds[d][0] + (idx + 0.5) / per_axis * dom.length(d);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}
} // namespace

ValidationReport validate_spec(ProblemSpec& spec, bool collect_only) {
    ValidationReport rep;
    auto fatal = [&](const std::string& m) { rep.issues.push_back({true, m}); };
    auto warn = [&](const std::string& m) { rep.issues.push_back({false, m}); };

    try {
        spec.domain.validate();
    } catch (const ConfigError& e) {
        fatal(e.what());
    }
    const int N = spec.domain.dim();
    const double r = spec.r(), q = spec.q();

    if (!(r > 1.0)) fatal("growth requirement: Hamiltonian exponent must satisfy r > 1");
    if (!(q > 1.0)) fatal("growth requirement: coupling exponent must satisfy q > 1");
    if (!(spec.hamiltonian.c > 0.0)) fatal("Hamiltonian scale c must be positive");
    if (spec.coupling.a0 < 0.0) fatal("coupling zero-order coefficient must be nonnegative");
    if (spec.hamiltonian.family == Hamiltonian::Family::paper_example) {
        if (r < 2.0) fatal("paper_example Hamiltonian requires r >= 2 (convexity of (1+|p|^(r/2))^2)");
        else if (r == 2.0)
            warn("paper_example with r = 2 is not differentiable at p = 0; "
                 "drift optimality is certified by subdifferential distance there");
    }

    if (rep.ok() && r > 1.0 && q > 1.0) {
        // sampled probes: convexity, gradient evenness, growth witnesses
        std::mt19937_64 rng(12345);
        std::uniform_real_distribution<double> up(-10.0, 10.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double growth_hi = 0.0, growth_lo = 0.0;
        bool convex_ok = true, even_ok = true;
        for (int it = 0; it < 500; ++it) {
            std::vector<double> p(N), pp(N), mid(N), flip(N);
            for (int d = 0; d < N; ++d) {
                p[d] = up(rng);
                pp[d] = up(rng);
                mid[d] = 0.5 * (p[d] + pp[d]);
            }
            double Hp = spec.hamiltonian.eval(p.data(), N);
            double Hpp = spec.hamiltonian.eval(pp.data(), N);
            double Hm = spec.hamiltonian.eval(mid.data(), N);
            if (Hm > 0.5 * (Hp + Hpp) + 1e-9 * (1 + std::abs(Hp) + std::abs(Hpp))) convex_ok = false;
            double pn = 0.0;
            for (int d = 0; d < N; ++d) pn += p[d] * p[d];
            pn = std::pow(std::sqrt(pn), r);
            growth_hi = std::max(growth_hi, Hp / (pn + 1.0));
            growth_lo = std::max(growth_lo, pn / (Hp + 1.0));
            flip = p;
            flip[it % N] = -flip[it % N];
            if (spec.hamiltonian.eval(flip.data(), N) != Hp) even_ok = false;
        }
        if (!convex_ok) fatal("convexity requirement: sampled midpoint convexity of H failed");
        if (!even_ok) fatal("evenness requirement: H must be even in each coordinate");
        if (!std::isfinite(growth_hi) || !std::isfinite(growth_lo))
            fatal("growth requirement: H growth witness is unbounded on samples");

        // coupling monotonicity and growth on samples
        auto pts = sample_points(spec.domain, std::min(6, 4));
        bool mono_ok = true, ftilde_ok = true;
        for (const auto& x : pts) {
            for (double tfrac : {0.0, 0.5, 1.0}) {
                double t = tfrac * spec.domain.horizon;
                double ft = spec.coupling.ftilde.eval(t, x.data(), N);
                if (!(ft > 0)) ftilde_ok = false;
                double prev = spec.coupling.f(t, x.data(), N, 0.0);
                for (double m : {0.25, 0.5, 1.0, 2.0, 5.0}) {
                    double fm = spec.coupling.f(t, x.data(), N, m);
                    if (!(fm > prev)) mono_ok = false;
                    prev = fm;
                }
            }
        }
        if (!ftilde_ok) fatal("coupling weight requirement: ftilde must be strictly positive");
        if (!mono_ok) fatal("monotonicity requirement: f must be strictly increasing in m");

        // data positivity
        bool m0_nonneg = true, j_nonneg = true, m0_pos = true, j_pos = true;
        for (const auto& x : pts) {
            double v = spec.m0.eval(0.0, x.data(), N);
            if (v < 0) m0_nonneg = false;
            if (!(v > 0)) m0_pos = false;
        }
        for (int side = 0; side < 2 * N; ++side) {
            int d = side / 2;
            for (const auto& xi : pts) {
                auto x = xi;
                x[d] = spec.domain.bounds[d][side % 2];
                for (double tfrac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                    double v = spec.j.eval(tfrac * spec.domain.horizon, x.data(), N);
                    if (v < 0) j_nonneg = false;
                    if (!(v > 0)) j_pos = false;
                }
            }
        }
        if (!m0_nonneg) fatal("data requirement: m0 must be nonnegative");
        if (!j_nonneg) fatal("data requirement: boundary influx j must be nonnegative");
        spec.derived.strictly_positive_data = m0_pos && j_pos;
        (void)u01;
    }

    // derived exponents and the exponent-relation audits (warnings only:
    // they gate the continuum estimates, not the discrete convex program)
    if (r > 1.0 && q > 1.0) {
        spec.derived.r_conj = r / (r - 1.0);
        spec.derived.q_conj = q / (q - 1.0);
        spec.derived.beta = q * r / (q * r - q + 1.0);
        spec.derived.holder_nu = (r - N * (q - 1.0)) / (N * (q - 1.0) * (r - 1.0) + r * q);
        spec.derived.exponent_gap_ok = r > N * (q - 1.0);
        spec.derived.exponent_uniqueness_ok = r > N * q / (N * q + q - 2.0);
        if (!spec.derived.exponent_gap_ok)
            warn("exponent relation r > N(q-1) fails; the time-Hoelder diagnostic is unavailable");
        if (!spec.derived.exponent_uniqueness_ok)
            warn("exponent relation r > Nq/(Nq+q-2) fails; uniqueness checks are best-effort");
    }

    if (!collect_only && !rep.ok()) {
        for (const auto& i : rep.issues)
            if (i.fatal) throw ConfigError(i.message);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

namespace {
json fieldexpr_to_json(const FieldExpr& e) {
    json out;
    out["kind"] = e.kind_name();
    switch (e.kind) {
        case FieldExpr::Kind::constant:
            out["value"] = e.value;
            break;
        case FieldExpr::Kind::affine:
            out["base"] = e.base;
            out["slope"] = e.slope;
            out["tslope"] = e.tslope;
            break;
        case FieldExpr::Kind::gaussian:
            out["base"] = e.base;
            out["amp"] = e.amp;
            out["center"] = e.center;
            out["width"] = e.width;
            break;
    }
    return out;
}

FieldExpr fieldexpr_from_json(const json& j) {
    FieldExpr e;
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") {
        e.kind = FieldExpr::Kind::constant;
        e.value = j.value("value", 0.0);
    } else if (kind == "affine") {
        e.kind = FieldExpr::Kind::affine;
        e.base = j.value("base", 0.0);
        e.slope = j.value("slope", std::vector<double>{});
        e.tslope = j.value("tslope", 0.0);
    } else if (kind == "gaussian") {
        e.kind = FieldExpr::Kind::gaussian;
        e.base = j.value("base", 0.0);
        e.amp = j.value("amp", 0.0);
        e.center = j.value("center", std::vector<double>{});
        e.width = j.value("width", 1.0);
    } else {
        throw ConfigError("config: unknown field expression kind '" + kind + "'");
    }
    return e;
}
} // namespace

json spec_to_json(const ProblemSpec& spec) {
    json out;
    json dom;
    dom["bounds"] = json::array();
    for (const auto& b : spec.domain.bounds) dom["bounds"].push_back({b[0], b[1]});
    dom["horizon"] = spec.domain.horizon;
    out["domain"] = dom;
    out["hamiltonian"] = {{"family", spec.hamiltonian.family_name()},
                          {"r", spec.hamiltonian.r},
                          {"c", spec.hamiltonian.c}};
    out["coupling"] = {{"q", spec.coupling.q},
                       {"a0", spec.coupling.a0},
                       {"ftilde", fieldexpr_to_json(spec.coupling.ftilde)}};
    out["psi"] = fieldexpr_to_json(spec.psi);
    out["m0"] = fieldexpr_to_json(spec.m0);
    out["j"] = fieldexpr_to_json(spec.j);
    out["delta_mask"] = spec.delta_mask;
    return out;
}

ProblemSpec spec_from_json(const json& j) {
    ProblemSpec spec;
    if (!j.contains("domain")) throw ConfigError("config: missing 'domain'");
    const auto& dom = j.at("domain");
    for (const auto& b : dom.at("bounds"))
        spec.domain.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    spec.domain.horizon = dom.at("horizon").get<double>();

    const auto& ham = j.at("hamiltonian");
    std::string family = ham.value("family", "power");
    double r = ham.at("r").get<double>();
    double c = ham.value("c", 1.0);
    if (family == "power")
        spec.hamiltonian = Hamiltonian::power(r, c);
    else if (family == "paper_example")
        spec.hamiltonian = Hamiltonian::paper_example(r, c);
    else
        throw ConfigError("config: unknown Hamiltonian family '" + family + "'");

    const auto& cpl = j.at("coupling");
    spec.coupling.q = cpl.at("q").get<double>();
    spec.coupling.a0 = cpl.value("a0", 1.0);
    if (cpl.contains("ftilde")) spec.coupling.ftilde = fieldexpr_from_json(cpl.at("ftilde"));

    if (j.contains("psi")) spec.psi = fieldexpr_from_json(j.at("psi"));
    if (j.contains("m0")) spec.m0 = fieldexpr_from_json(j.at("m0"));
    if (j.contains("j")) spec.j = fieldexpr_from_json(j.at("j"));
    spec.delta_mask = j.value("delta_mask", 1e-3);
    return spec;
}

json run_config_to_json(const RunConfig& rc) {
    json out;
    out["problem"] = spec_to_json(rc.spec);
    out["grid"] = {{"cells", rc.grid_cells}, {"steps", rc.grid_steps}};
    json s;
    s["tau"] = rc.solver.tau;
    s["sigma"] = rc.solver.sigma;
    s["step_ratio"] = rc.solver.step_ratio;
    s["theta"] = rc.solver.theta;
    s["max_iters"] = rc.solver.max_iters;
    s["gap_tol_rel"] = rc.solver.gap_tol_rel;
    s["residual_tol"] = rc.solver.residual_tol;
    s["cert_interval"] = rc.solver.cert_interval;
    s["checkpoint_interval"] = rc.solver.checkpoint_interval;
    s["init"] = rc.solver.init == SolverConfig::Init::stationary ? "stationary" : "random";
    s["seed"] = rc.solver.seed;
    s["delta_mask"] = rc.solver.delta_mask;
    out["solver"] = s;
    return out;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig rc;
    rc.spec = spec_from_json(j.at("problem"));
    const auto& g = j.at("grid");
    rc.grid_cells = g.at("cells").get<std::vector<int>>();
    rc.grid_steps = g.at("steps").get<int>();
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        rc.solver.tau = s.value("tau", 0.0);
        rc.solver.sigma = s.value("sigma", 0.0);
        rc.solver.step_ratio = s.value("step_ratio", 4.0);
        rc.solver.theta = s.value("theta", 1.0);
        rc.solver.max_iters = s.value("max_iters", 200000L);
        rc.solver.gap_tol_rel = s.value("gap_tol_rel", 1e-5);
        rc.solver.residual_tol = s.value("residual_tol", 1e-8);
        rc.solver.cert_interval = s.value("cert_interval", 50L);
        rc.solver.checkpoint_interval = s.value("checkpoint_interval", 0L);
        std::string init = s.value("init", "stationary");
        if (init == "stationary")
            rc.solver.init = SolverConfig::Init::stationary;
        else if (init == "random")
            rc.solver.init = SolverConfig::Init::random;
        else
            throw ConfigError("config: unknown solver init '" + init + "'");
        rc.solver.seed = s.value("seed", static_cast<std::uint64_t>(0));
        rc.solver.delta_mask = s.value("delta_mask", rc.spec.delta_mask);
    }
    return rc;
}

RunConfig load_run_config(const std::string& path_or_builtin) {
    if (path_or_builtin.rfind("builtin:", 0) == 0) {
        return builtin_instance(path_or_builtin.substr(8)).config;
    }
    json j;
    try {
        j = json::parse(io::read_text_file(path_or_builtin), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: parse error in " + path_or_builtin + ": " + e.what());
    }
    RunConfig rc = run_config_from_json(j);
    validate_spec(rc.spec);
    return rc;
}

std::uint64_t config_hash(const RunConfig& rc) { return io::fnv1a(run_config_to_json(rc).dump()); }

// ---------------------------------------------------------------------------
// Builtin catalog
// ---------------------------------------------------------------------------

namespace {
Instance make_constant1d() {
    Instance inst;
    inst.name = "constant1d";
    inst.description = "1D box, unit density, no influx, quadratic costs; "
                       "the stationary pair m = 1, u = T - t is exactly optimal";
    inst.version = 1;
    RunConfig& rc = inst.config;
    rc.spec.domain.bounds = {{0.0, 1.0}};
    rc.spec.domain.horizon = 1.0;
    rc.spec.hamiltonian = Hamiltonian::power(2.0, 1.0);
    rc.spec.coupling.q = 2.0;
    rc.spec.coupling.a0 = 0.0; // f(m) = m
    rc.spec.coupling.ftilde = FieldExpr::constant_expr(1.0);
    rc.spec.m0 = FieldExpr::constant_expr(1.0);
    rc.spec.j = FieldExpr::constant_expr(0.0);
    rc.spec.psi = FieldExpr::constant_expr(0.0);
    rc.grid_cells = {32};
    rc.grid_steps = 32;
    rc.solver.max_iters = 300000;
    rc.solver.gap_tol_rel = 1e-8;
    rc.solver.residual_tol = 1e-8;
    rc.solver.cert_interval = 25;
    return inst;
}

Instance make_oracle8x8() {
    Instance inst;
    inst.name = "oracle8x8";
    inst.description = "tiny 1D influx instance sized for the brute-force oracle cross-check";
    inst.version = 1;
    RunConfig& rc = inst.config;
    rc.spec.domain.bounds = {{0.0, 1.0}};
    rc.spec.domain.horizon = 1.0;
    rc.spec.hamiltonian = Hamiltonian::power(2.0, 1.0);
    rc.spec.coupling.q = 2.0;
    rc.spec.coupling.a0 = 1.0; // f = 1 + m
    rc.spec.coupling.ftilde = FieldExpr::constant_expr(1.0);
    rc.spec.m0 = FieldExpr::constant_expr(1.0);
    rc.spec.j = FieldExpr::constant_expr(0.5);
    rc.spec.psi = FieldExpr::constant_expr(0.0);
    rc.grid_cells = {8};
    rc.grid_steps = 8;
    rc.solver.max_iters = 400000;
    rc.solver.gap_tol_rel = 1e-9;
    rc.solver.residual_tol = 1e-9;
    rc.solver.cert_interval = 50;
    return inst;
}

Instance make_influx1d() {
    Instance inst;
    inst.name = "influx1d";
    inst.description = "1D crowd-entry instance: uniform influx at both walls, "
                       "terminal cost bump in the center";
    inst.version = 1;
    RunConfig& rc = inst.config;
    rc.spec.domain.bounds = {{0.0, 1.0}};
    rc.spec.domain.horizon = 1.0;
    rc.spec.hamiltonian = Hamiltonian::power(2.0, 1.0);
    rc.spec.coupling.q = 2.0;
    rc.spec.coupling.a0 = 1.0;
    rc.spec.coupling.ftilde = FieldExpr::constant_expr(1.0);
    rc.spec.m0 = FieldExpr::constant_expr(1.0);
    rc.spec.j = FieldExpr::constant_expr(0.5);
    FieldExpr psi;
    psi.kind = FieldExpr::Kind::gaussian;
    psi.base = 0.0;
    psi.amp = 0.2;
    psi.center = {0.5};
    psi.width = 0.25;
    rc.spec.psi = psi;
    rc.grid_cells = {32};
    rc.grid_steps = 32;
    rc.solver.max_iters = 600000;
    rc.solver.gap_tol_rel = 1e-8;
    rc.solver.residual_tol = 1e-8;
    rc.solver.cert_interval = 100;
    return inst;
}

Instance make_influx2d() {
    Instance inst;
    inst.name = "influx2d";
    inst.description = "2D crowd-entry instance with uniform influx on all four walls";
    inst.version = 1;
    RunConfig& rc = inst.config;
    rc.spec.domain.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    rc.spec.domain.horizon = 0.5;
    rc.spec.hamiltonian = Hamiltonian::power(2.0, 1.0);
    rc.spec.coupling.q = 2.0;
    rc.spec.coupling.a0 = 1.0;
    rc.spec.coupling.ftilde = FieldExpr::constant_expr(1.0);
    rc.spec.m0 = FieldExpr::constant_expr(1.0);
    rc.spec.j = FieldExpr::constant_expr(0.25);
    rc.spec.psi = FieldExpr::constant_expr(0.0);
    rc.grid_cells = {8, 8};
    rc.grid_steps = 8;
    rc.solver.max_iters = 400000;
    rc.solver.gap_tol_rel = 1e-8;
    rc.solver.residual_tol = 1e-8;
    rc.solver.cert_interval = 100;
    return inst;
}

Instance make_paperexample2d() {
    Instance inst;
    inst.name = "paperexample2d";
    inst.description = "2D instance with the non-power Hamiltonian family "
                       "c(1+|p|^(r/2))^2 and coupling ftilde (1 + m^(q-1))";
    inst.version = 1;
    RunConfig& rc = inst.config;
    rc.spec.domain.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    rc.spec.domain.horizon = 0.5;
    // r = 3 keeps the family differentiable and strictly convex; r = 2 has a
    // kink at p = 0 and fails the differentiability requirement.
    rc.spec.hamiltonian = Hamiltonian::paper_example(3.0, 1.0);
    rc.spec.coupling.q = 2.0;
    rc.spec.coupling.a0 = 1.0;
    rc.spec.coupling.ftilde = FieldExpr::constant_expr(1.0);
    rc.spec.m0 = FieldExpr::constant_expr(1.0);
    rc.spec.j = FieldExpr::constant_expr(0.25);
    rc.spec.psi = FieldExpr::constant_expr(0.0);
    rc.grid_cells = {8, 8};
    rc.grid_steps = 8;
    rc.solver.max_iters = 400000;
    rc.solver.gap_tol_rel = 1e-8;
    rc.solver.residual_tol = 1e-8;
    rc.solver.cert_interval = 100;
    rc.solver.step_ratio = 16.0;
    return inst;
}
} // namespace

const std::vector<Instance>& builtin_instances() {
    static const std::vector<Instance> catalog = [] {
        std::vector<Instance> v;
        v.push_back(make_constant1d());
        v.push_back(make_oracle8x8());
        v.push_back(make_influx1d());
        v.push_back(make_influx2d());
        v.push_back(make_paperexample2d());
        for (auto& inst : v) validate_spec(inst.config.spec);
        return v;
    }();
    return catalog;
}

const Instance& builtin_instance(const std::string& name) {
    for (const auto& inst : builtin_instances())
        if (inst.name == name) return inst;
    throw ConfigError("unknown builtin instance '" + name + "'");
}

} // namespace mfgn
