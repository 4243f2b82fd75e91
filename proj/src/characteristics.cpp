#include "mfgn/characteristics.hpp"

#include "mfgn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mfgn {

double AgentEnsemble::mass_at(double t) const {
    long alive = 0;
    for (double b : birth)
        if (b <= t) ++alive;
    return weight * alive;
}

AgentEnsemble seed_agents(const Grid& g, const std::vector<double>& m0, const BoundaryField& j,
                          long n_agents, std::uint64_t seed) {
    if (n_agents < 1) throw ContractViolation("seed_agents: need at least one agent");
    if (static_cast<long>(m0.size()) != g.n_cells()) throw ContractViolation("seed_agents: m0 size mismatch");
    const double vol = g.cell_volume();

    double initial_mass = 0.0;
    for (double v : m0) initial_mass += v * vol;
    double influx_mass = 0.0;
    std::vector<double> inj_weight; // per (interval, side, facet), flattened
    std::vector<std::array<long, 3>> inj_slot;
    for (int k = 0; k < g.steps; ++k)
        for (int s = 0; s < g.n_sides(); ++s) {
            double area = g.facet_area(s);
            for (long f = 0; f < g.facets_per_side(s); ++f) {
                double w = j.at(k, s, f) * area * g.dt;
                if (w > 0) {
                    inj_weight.push_back(w);
                    inj_slot.push_back({k, s, f});
                }
                influx_mass += w;
            }
        }
    double total = initial_mass + influx_mass;
    if (!(total > 0)) throw ConfigError("seed_agents: m0 and j are both zero, nothing to simulate");

    AgentEnsemble ens;
    ens.dim = g.dim();
    ens.n = n_agents;
    ens.seed = seed;
    ens.weight = total / n_agents;
    ens.n_initial = std::lround(n_agents * initial_mass / total);
    ens.n_initial = std::clamp<long>(ens.n_initial, influx_mass > 0 ? 0 : n_agents,
                                     initial_mass > 0 ? n_agents : 0);
    ens.pos.resize(static_cast<std::size_t>(n_agents) * g.dim());
    ens.birth.assign(n_agents, 0.0);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // initial agents: cell by cumulative mass, uniform inside the cell
    std::vector<double> cdf(g.n_cells());
    double acc = 0.0;
    for (long c = 0; c < g.n_cells(); ++c) {
        acc += std::max(m0[c], 0.0) * vol;
        cdf[c] = acc;
    }
    for (long a = 0; a < ens.n_initial; ++a) {
        double r = u01(rng) * acc;
        long cell = std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin();
        cell = std::min(cell, g.n_cells() - 1);
        auto x = g.cell_center(cell);
        for (int d = 0; d < g.dim(); ++d)
            ens.pos[a * g.dim() + d] = x[d] + (u01(rng) - 0.5) * g.h[d];
    }

    // injections: slot by cumulative influx, uniform birth time within the
    // interval, uniform position on the facet
    std::vector<double> icdf(inj_weight.size());
    double iacc = 0.0;
    for (std::size_t i = 0; i < inj_weight.size(); ++i) {
        iacc += inj_weight[i];
        icdf[i] = iacc;
    }
    for (long a = ens.n_initial; a < n_agents; ++a) {
        double r = u01(rng) * iacc;
        std::size_t slot = std::lower_bound(icdf.begin(), icdf.end(), r) - icdf.begin();
        slot = std::min(slot, icdf.size() - 1);
        auto [k, s, f] = inj_slot[slot];
        ens.birth[a] = g.time_at(static_cast<int>(k)) + u01(rng) * g.dt;
        auto x = g.facet_center(static_cast<int>(s), f);
        int d_axis = static_cast<int>(s) / 2;
        for (int d = 0; d < g.dim(); ++d) {
            double v = x[d];
            if (d != d_axis) v += (u01(rng) - 0.5) * g.h[d];
            ens.pos[a * g.dim() + d] = v;
        }
    }
    return ens;
}

namespace {

/// Multilinear interpolation of a cell-centered vector field, with the
/// stencil clamped at the first/last cell centers.
void interp_gradient(const Grid& g, const CellVectorField& gu, int slot, const double* x, double* out) {
    const int N = g.dim();
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int d = 0; d < N; ++d) {
        double s = (x[d] - g.domain.bounds[d][0]) / g.h[d] - 0.5; // cell-center coordinates
        s = std::clamp(s, 0.0, static_cast<double>(g.cells[d] - 1));
        base[d] = std::min(static_cast<int>(s), g.cells[d] - 2 >= 0 ? g.cells[d] - 2 : 0);
        frac[d] = s - base[d];
        if (g.cells[d] == 1) {
            base[d] = 0;
            frac[d] = 0.0;
        }
    }
    for (int d = 0; d < N; ++d) out[d] = 0.0;
    const int corners = 1 << N;
    std::vector<int> multi(N);
    for (int cb = 0; cb < corners; ++cb) {
        double w = 1.0;
        for (int d = 0; d < N; ++d) {
            int bit = (cb >> d) & 1;
            multi[d] = std::min(base[d] + bit, g.cells[d] - 1);
            w *= bit ? frac[d] : 1.0 - frac[d];
        }
        if (w == 0.0) continue;
        long cell = g.cell_index(multi);
        for (int d = 0; d < N; ++d) out[d] += w * gu.at(slot, cell, d);
    }
}

} // namespace

TrajectoryRecord integrate(const Grid& g, const Hamiltonian& H, const CellField& u,
                           const AgentEnsemble& ens, double dt_sub, const std::vector<int>& record_levels,
                           long sample_count) {
    if (u.slots != g.steps + 1) throw ContractViolation("integrate: u needs steps+1 levels");
    if (!(dt_sub > 0) || dt_sub > g.dt + 1e-15)
        throw ContractViolation("integrate: dt_sub must be positive and at most dt");
    CellVectorField gu = cell_gradient(g, u);
    const int N = g.dim();

    TrajectoryRecord rec;
    rec.levels = record_levels;
    rec.positions.resize(record_levels.size());
    rec.alive.assign(record_levels.size(), 0);
    rec.weight = ens.weight;
    rec.sample_count = std::min<long>(sample_count, ens.n);
    rec.sample_paths.assign(static_cast<std::size_t>(rec.sample_count) * (g.steps + 1) * N, 0.0);

    std::vector<double> x(N), xm(N), v(N), grad(N);
    auto drift = [&](int slot, const double* xx, double* vv) {
        interp_gradient(g, gu, slot, xx, grad.data());
        H.grad(grad.data(), N, vv);
        for (int d = 0; d < N; ++d) vv[d] = -vv[d];
    };
    auto confine = [&](double* xx) {
        for (int d = 0; d < N; ++d) {
            double a = g.domain.bounds[d][0], b = g.domain.bounds[d][1];
            if (xx[d] < a || xx[d] > b) {
                xx[d] = xx[d] < a ? 2 * a - xx[d] : 2 * b - xx[d]; // reflect
                xx[d] = std::clamp(xx[d], a, b);                   // then clamp
                ++rec.exit_clamp_events;
            }
        }
    };

    for (long a = 0; a < ens.n; ++a) {
        for (int d = 0; d < N; ++d) x[d] = ens.pos[a * N + d];
        double tb = ens.birth[a];
        bool is_sample = a < rec.sample_count;
        for (int k = 0; k < g.steps; ++k) {
            double t0 = g.time_at(k), t1 = g.time_at(k + 1);
            if (is_sample) {
                // record the position held at this level (birth position before birth)
                for (int d = 0; d < N; ++d)
                    rec.sample_paths[(a * (g.steps + 1) + k) * N + d] = x[d];
            }
            for (std::size_t li = 0; li < record_levels.size(); ++li)
                if (record_levels[li] == k && tb <= t0 + 1e-15) {
                    for (int d = 0; d < N; ++d) rec.positions[li].push_back(x[d]);
                    ++rec.alive[li];
                }
            if (tb >= t1) continue; // not yet born in this interval
            double start = std::max(t0, tb);
            double span = t1 - start;
            int steps_here = std::max(1, static_cast<int>(std::ceil(span / dt_sub - 1e-12)));
            double tau = span / steps_here;
            for (int s = 0; s < steps_here; ++s) {
                drift(k, x.data(), v.data());
                for (int d = 0; d < N; ++d) xm[d] = x[d] + 0.5 * tau * v[d];
                confine(xm.data());
                drift(k, xm.data(), v.data());
                for (int d = 0; d < N; ++d) x[d] += tau * v[d];
                confine(x.data());
                ++rec.agent_steps;
            }
        }
        if (is_sample)
            for (int d = 0; d < N; ++d)
                rec.sample_paths[(a * (g.steps + 1) + g.steps) * N + d] = x[d];
        for (std::size_t li = 0; li < record_levels.size(); ++li)
            if (record_levels[li] == g.steps) {
                for (int d = 0; d < N; ++d) rec.positions[li].push_back(x[d]);
                ++rec.alive[li];
            }
    }
    return rec;
}

std::vector<double> empirical_density(const Grid& g, const TrajectoryRecord& rec, int level_index) {
    const int N = g.dim();
    std::vector<double> density(g.n_cells(), 0.0);
    const auto& pos = rec.positions.at(level_index);
    const long n = rec.alive.at(level_index);
    std::vector<int> multi(N);
    for (long a = 0; a < n; ++a) {
        for (int d = 0; d < N; ++d) {
            double s = (pos[a * N + d] - g.domain.bounds[d][0]) / g.h[d];
            multi[d] = std::clamp(static_cast<int>(s), 0, g.cells[d] - 1);
        }
        density[g.cell_index(multi)] += rec.weight / g.cell_volume();
    }
    return density;
}

std::vector<DensityCompareRow> compare_density(const Grid& g, const TrajectoryRecord& rec,
                                               const CellField& m) {
    std::vector<DensityCompareRow> rows;
    for (std::size_t li = 0; li < rec.levels.size(); ++li) {
        DensityCompareRow row;
        row.level = rec.levels[li];
        auto density = empirical_density(g, rec, static_cast<int>(li));
        double num = 0.0, den = 0.0;
        for (long c = 0; c < g.n_cells(); ++c) {
            num += std::abs(density[c] - m.at(row.level, c)) * g.cell_volume();
            den += std::abs(m.at(row.level, c)) * g.cell_volume();
            row.mass_emp += density[c] * g.cell_volume();
        }
        row.mass_solver = den;
        row.l1_rel = den > 0 ? num / den : num;
        rows.push_back(row);
    }
    return rows;
}

} // namespace mfgn
