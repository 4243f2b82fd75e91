#include "mfgn/grid.hpp"

#include "mfgn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfgn {

double RectDomain::volume() const {
    double v = 1.0;
    for (int d = 0; d < dim(); ++d) v *= length(d);
    return v;
}

void RectDomain::validate() const {
    if (dim() < 1) throw ConfigError("domain: dimension must be at least 1");
    for (int d = 0; d < dim(); ++d)
        if (!(bounds[d][0] < bounds[d][1]))
            throw ConfigError("domain: bounds must satisfy a < b on axis " + std::to_string(d));
    if (!(horizon > 0.0)) throw ConfigError("domain: horizon T must be positive");
}

long Grid::n_cells() const {
    long n = 1;
    for (int c : cells) n *= c;
    return n;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (double hi : h) v *= hi;
    return v;
}

long Grid::cell_index(const std::vector<int>& multi) const {
    long lin = 0;
    for (int d = 0; d < dim(); ++d) lin = lin * cells[d] + multi[d];
    return lin;
}

std::vector<int> Grid::cell_multi(long lin) const {
    std::vector<int> multi(dim());
    for (int d = dim() - 1; d >= 0; --d) {
        multi[d] = static_cast<int>(lin % cells[d]);
        lin /= cells[d];
    }
    return multi;
}

std::vector<double> Grid::cell_center(long lin) const {
    auto multi = cell_multi(lin);
    std::vector<double> x(dim());
    for (int d = 0; d < dim(); ++d) x[d] = domain.bounds[d][0] + (multi[d] + 0.5) * h[d];
    return x;
}

long Grid::neighbor(long lin, int d, int step) const {
    auto multi = cell_multi(lin);
    multi[d] += step;
    if (multi[d] < 0 || multi[d] >= cells[d]) return -1;
    return cell_index(multi);
}

long Grid::transverse_count(int d) const { return n_cells() / cells[d]; }

long Grid::faces_along(int d) const { return static_cast<long>(cells[d] + 1) * transverse_count(d); }

long Grid::n_interior_faces() const {
    long n = 0;
    for (int d = 0; d < dim(); ++d) n += static_cast<long>(cells[d] - 1) * transverse_count(d);
    return n;
}

long Grid::face_index(int d, int g, long t_lin) const { return static_cast<long>(g) * transverse_count(d) + t_lin; }

long Grid::cell_transverse(int d, long cell_lin) const {
    auto multi = cell_multi(cell_lin);
    long t = 0;
    for (int dd = 0; dd < dim(); ++dd) {
        if (dd == d) continue;
        t = t * cells[dd] + multi[dd];
    }
    return t;
}

long Grid::n_boundary_facets() const {
    long n = 0;
    for (int s = 0; s < n_sides(); ++s) n += facets_per_side(s);
    return n;
}

double Grid::facet_area(int side) const {
    int d = side / 2;
    double a = 1.0;
    for (int dd = 0; dd < dim(); ++dd)
        if (dd != d) a *= h[dd];
    return a;
}

long Grid::boundary_adjacent_cell(int side, long t_lin) const {
    int d = side / 2;
    bool hi = (side % 2) != 0;
    std::vector<int> multi(dim());
    long rem = t_lin;
    for (int dd = dim() - 1; dd >= 0; --dd) {
        if (dd == d) continue;
        multi[dd] = static_cast<int>(rem % cells[dd]);
        rem /= cells[dd];
    }
    multi[d] = hi ? cells[d] - 1 : 0;
    return cell_index(multi);
}

std::vector<double> Grid::facet_center(int side, long t_lin) const {
    int d = side / 2;
    bool hi = (side % 2) != 0;
    long adj = boundary_adjacent_cell(side, t_lin);
    auto x = cell_center(adj);
    x[d] = hi ? domain.bounds[d][1] : domain.bounds[d][0];
    return x;
}

Grid build_grid(const RectDomain& domain, const std::vector<int>& cells_per_axis, int time_steps) {
    domain.validate();
    if (static_cast<int>(cells_per_axis.size()) != domain.dim())
        throw ConfigError("grid: cells_per_axis length must match the domain dimension");
    for (int c : cells_per_axis)
        if (c < 1) throw ConfigError("grid: cell counts must be positive");
    if (time_steps < 1) throw ConfigError("grid: time_steps must be positive");

    Grid g;
    g.domain = domain;
    g.cells = cells_per_axis;
    g.steps = time_steps;
    g.h.resize(domain.dim());
    for (int d = 0; d < domain.dim(); ++d) g.h[d] = domain.length(d) / cells_per_axis[d];
    g.dt = domain.horizon / time_steps;
    return g;
}

CellField CellField::zeros(const Grid& g, int slots) {
    CellField f;
    f.cells = g.n_cells();
    f.slots = slots;
    f.data.assign(static_cast<std::size_t>(f.cells) * slots, 0.0);
    return f;
}

CellField CellField::constant(const Grid& g, int slots, double value) {
    CellField f = zeros(g, slots);
    std::fill(f.data.begin(), f.data.end(), value);
    return f;
}

CellVectorField CellVectorField::zeros(const Grid& g, int slots) {
    CellVectorField f;
    f.cells = g.n_cells();
    f.dim = g.dim();
    f.slots = slots;
    f.data.assign(static_cast<std::size_t>(f.cells) * f.dim * slots, 0.0);
    return f;
}

FaceField FaceField::zeros(const Grid& g, int slots) {
    FaceField f;
    f.dim = g.dim();
    f.slots = slots;
    f.faces_per_axis.resize(f.dim);
    f.data.resize(f.dim);
    for (int d = 0; d < f.dim; ++d) {
        f.faces_per_axis[d] = g.faces_along(d);
        f.data[d].assign(static_cast<std::size_t>(f.faces_per_axis[d]) * slots, 0.0);
    }
    return f;
}

BoundaryField BoundaryField::zeros(const Grid& g, int slots) {
    BoundaryField f;
    f.sides = g.n_sides();
    f.slots = slots;
    f.facets_per_side.resize(f.sides);
    f.data.resize(f.sides);
    for (int s = 0; s < f.sides; ++s) {
        f.facets_per_side[s] = g.facets_per_side(s);
        f.data[s].assign(static_cast<std::size_t>(f.facets_per_side[s]) * slots, 0.0);
    }
    return f;
}

namespace {
void check_cell_shape(const Grid& g, const CellField& f, const char* what) {
    if (f.cells != g.n_cells()) throw ContractViolation(std::string(what) + ": cell count does not match grid");
}
} // namespace

FaceField discrete_gradient(const Grid& g, const CellField& u) {
    check_cell_shape(g, u, "discrete_gradient");
    FaceField out = FaceField::zeros(g, u.slots);
    const int N = g.dim();
    for (int slot = 0; slot < u.slots; ++slot) {
        const double* us = u.slice(slot);
        for (int d = 0; d < N; ++d) {
            const long tcount = g.transverse_count(d);
            const int nd = g.cells[d];
            for (long c = 0; c < u.cells; ++c) {
                auto multi = g.cell_multi(c);
                if (multi[d] == 0) continue; // handled via the face on its right
                long left = g.neighbor(c, d, -1);
                long t_lin = g.cell_transverse(d, c);
                double grad = (us[c] - us[left]) / g.h[d];
                out.at(slot, d, g.face_index(d, multi[d], t_lin)) = grad;
                (void)tcount;
            }
            // one-sided copies onto boundary faces
            for (long t = 0; t < g.transverse_count(d); ++t) {
                if (nd >= 2) {
                    out.at(slot, d, g.face_index(d, 0, t)) = out.at(slot, d, g.face_index(d, 1, t));
                    out.at(slot, d, g.face_index(d, nd, t)) = out.at(slot, d, g.face_index(d, nd - 1, t));
                } else {
                    out.at(slot, d, g.face_index(d, 0, t)) = 0.0;
                    out.at(slot, d, g.face_index(d, nd, t)) = 0.0;
                }
            }
        }
    }
    return out;
}

CellField discrete_divergence(const Grid& g, const FaceField& w, const BoundaryField* jdata) {
    if (w.dim != g.dim()) throw ContractViolation("discrete_divergence: face field dimension mismatch");
    for (int d = 0; d < g.dim(); ++d)
        if (w.faces_per_axis[d] != g.faces_along(d))
            throw ContractViolation("discrete_divergence: face count mismatch on axis " + std::to_string(d));
    if (jdata && jdata->slots != w.slots)
        throw ContractViolation("discrete_divergence: boundary data slot count mismatch");

    CellField out = CellField::zeros(g, w.slots);
    const int N = g.dim();
    for (int slot = 0; slot < w.slots; ++slot) {
        double* os = out.slice(slot);
        for (long c = 0; c < out.cells; ++c) {
            auto multi = g.cell_multi(c);
            double div = 0.0;
            for (int d = 0; d < N; ++d) {
                long t_lin = g.cell_transverse(d, c);
                double w_hi, w_lo;
                if (multi[d] == g.cells[d] - 1) {
                    // high boundary face: outward normal +e_d, flux w.nu = -j
                    w_hi = jdata ? -jdata->at(slot, 2 * d + 1, t_lin) : 0.0;
                } else {
                    w_hi = w.at(slot, d, g.face_index(d, multi[d] + 1, t_lin));
                }
                if (multi[d] == 0) {
                    // low boundary face: outward normal -e_d, flux w.nu = -j means +j along +e_d
                    w_lo = jdata ? jdata->at(slot, 2 * d, t_lin) : 0.0;
                } else {
                    w_lo = w.at(slot, d, g.face_index(d, multi[d], t_lin));
                }
                div += (w_hi - w_lo) / g.h[d];
            }
            os[c] = div;
        }
    }
    return out;
}

CellVectorField cell_gradient(const Grid& g, const CellField& u) {
    check_cell_shape(g, u, "cell_gradient");
    CellVectorField out = CellVectorField::zeros(g, u.slots);
    const int N = g.dim();
    for (int slot = 0; slot < u.slots; ++slot) {
        const double* us = u.slice(slot);
        for (long c = 0; c < u.cells; ++c) {
            for (int d = 0; d < N; ++d) {
                long lo = g.neighbor(c, d, -1);
                long hi = g.neighbor(c, d, +1);
                double acc = 0.0;
                if (hi >= 0) acc += (us[hi] - us[c]) / (2.0 * g.h[d]);
                if (lo >= 0) acc += (us[c] - us[lo]) / (2.0 * g.h[d]);
                out.at(slot, c, d) = acc;
            }
        }
    }
    return out;
}

FaceField face_flux_from_collocated(const Grid& g, const CellVectorField& W, const BoundaryField* jdata) {
    if (W.cells != g.n_cells() || W.dim != g.dim())
        throw ContractViolation("face_flux_from_collocated: shape mismatch");
    FaceField out = FaceField::zeros(g, W.slots);
    const int N = g.dim();
    for (int slot = 0; slot < W.slots; ++slot) {
        for (int d = 0; d < N; ++d) {
            const int nd = g.cells[d];
            for (long c = 0; c < W.cells; ++c) {
                auto multi = g.cell_multi(c);
                if (multi[d] == 0) continue;
                long left = g.neighbor(c, d, -1);
                long t_lin = g.cell_transverse(d, c);
                out.at(slot, d, g.face_index(d, multi[d], t_lin)) =
                    0.5 * (W.at(slot, left, d) + W.at(slot, c, d));
            }
            for (long t = 0; t < g.transverse_count(d); ++t) {
                double j_lo = jdata ? jdata->at(slot, 2 * d, t) : 0.0;
                double j_hi = jdata ? jdata->at(slot, 2 * d + 1, t) : 0.0;
                out.at(slot, d, g.face_index(d, 0, t)) = j_lo;   // w.nu = -j at low side
                out.at(slot, d, g.face_index(d, nd, t)) = -j_hi; // w.nu = -j at high side
            }
        }
    }
    return out;
}

CellField cell_divergence(const Grid& g, const CellVectorField& W, const BoundaryField* jdata) {
    FaceField flux = face_flux_from_collocated(g, W, jdata);
    return discrete_divergence(g, flux, nullptr) /* boundary already in flux */;
}

double cell_inner(const Grid& g, const CellField& a, const CellField& b) {
    if (a.cells != b.cells || a.slots != b.slots) throw ContractViolation("cell_inner: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc * g.cell_volume();
}

double face_inner_interior(const Grid& g, const FaceField& a, const FaceField& b) {
    if (a.dim != b.dim || a.slots != b.slots) throw ContractViolation("face_inner_interior: shape mismatch");
    double acc = 0.0;
    for (int slot = 0; slot < a.slots; ++slot)
        for (int d = 0; d < g.dim(); ++d)
            for (int gpos = 1; gpos < g.cells[d]; ++gpos)
                for (long t = 0; t < g.transverse_count(d); ++t) {
                    long f = g.face_index(d, gpos, t);
                    acc += a.at(slot, d, f) * b.at(slot, d, f);
                }
    return acc * g.cell_volume();
}

double boundary_pairing(const Grid& g, const CellField& u, const FaceField& w) {
    double acc = 0.0;
    for (int slot = 0; slot < u.slots; ++slot) {
        for (int s = 0; s < g.n_sides(); ++s) {
            int d = s / 2;
            bool hi = (s % 2) != 0;
            double area = g.facet_area(s);
            for (long t = 0; t < g.facets_per_side(s); ++t) {
                long adj = g.boundary_adjacent_cell(s, t);
                long f = g.face_index(d, hi ? g.cells[d] : 0, t);
                double w_dot_nu = hi ? w.at(slot, d, f) : -w.at(slot, d, f);
                acc += area * u.at(slot, adj) * w_dot_nu;
            }
        }
    }
    return acc;
}

int reflect_source_index(int ext_index, int n_cells) {
    if (ext_index < n_cells) return n_cells - 1 - ext_index;
    if (ext_index < 2 * n_cells) return ext_index - n_cells;
    return 3 * n_cells - 1 - ext_index;
}

namespace {
Grid make_extended_grid(const Grid& g, int pad_levels) {
    RectDomain ext_dom;
    ext_dom.bounds.resize(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        double a = g.domain.bounds[d][0], b = g.domain.bounds[d][1];
        ext_dom.bounds[d] = {2 * a - b, 2 * b - a};
    }
    ext_dom.horizon = g.domain.horizon + 2 * pad_levels * g.dt;
    std::vector<int> ext_cells(g.dim());
    for (int d = 0; d < g.dim(); ++d) ext_cells[d] = 3 * g.cells[d];
    return build_grid(ext_dom, ext_cells, g.steps + 2 * pad_levels);
}

/// Fills one extended level from a source level via the 3^N reflection maps.
void fill_reflected_level(const Grid& g, const Grid& ext, const double* src, double* dst) {
    for (long ec = 0; ec < ext.n_cells(); ++ec) {
        auto multi = ext.cell_multi(ec);
        std::vector<int> source(g.dim());
        for (int d = 0; d < g.dim(); ++d) source[d] = reflect_source_index(multi[d], g.cells[d]);
        dst[ec] = src[g.cell_index(source)];
    }
}
} // namespace

ExtendedField reflect_extend(const Grid& g, const CellField& field, double pad_time) {
    if (field.cells != g.n_cells()) throw ContractViolation("reflect_extend: field not on the given grid");
    if (pad_time < 0) throw ContractViolation("reflect_extend: pad_time must be nonnegative");
    int pad_levels = static_cast<int>(std::ceil(pad_time / g.dt - 1e-12));

    ExtendedField out;
    out.grid = make_extended_grid(g, pad_levels);
    out.pad_levels = pad_levels;
    out.offset.assign(g.dim(), 0);
    for (int d = 0; d < g.dim(); ++d) out.offset[d] = g.cells[d];
    out.field = CellField::zeros(out.grid, field.slots + 2 * pad_levels);

    const int K = field.slots - 1; // last original slot
    for (int l = 0; l < out.field.slots; ++l) {
        // shifted in time by pad_levels: extended level l draws from original
        // level l while l <= K, and holds level K past the horizon
        int src_level = std::min(l, K);
        fill_reflected_level(g, out.grid, field.slice(src_level), out.field.slice(l));
    }
    return out;
}

ExtendedPair reflect_extend_subsolution(const Grid& g, const CellField& v, const CellField& alpha,
                                        const std::vector<double>& psi, double lambda, double pad_time) {
    if (v.slots != g.steps + 1 || alpha.slots != g.steps)
        throw ContractViolation("reflect_extend_subsolution: v needs steps+1 levels, alpha needs steps slots");
    if (static_cast<long>(psi.size()) != g.n_cells())
        throw ContractViolation("reflect_extend_subsolution: psi size mismatch");
    int pad_levels = static_cast<int>(std::ceil(pad_time / g.dt - 1e-12));

    ExtendedPair out;
    out.v.grid = make_extended_grid(g, pad_levels);
    out.v.pad_levels = pad_levels;
    out.v.offset.assign(g.dim(), 0);
    for (int d = 0; d < g.dim(); ++d) out.v.offset[d] = g.cells[d];
    out.v.field = CellField::zeros(out.v.grid, v.slots + 2 * pad_levels);

    const int K = g.steps;
    std::vector<double> level(g.n_cells());
    for (int l = 0; l < out.v.field.slots; ++l) {
        const double* src;
        if (l <= K) {
            src = v.slice(l);
        } else {
            // z(t) = psi + lambda (T_shift - t) past the shifted horizon
            for (long c = 0; c < g.n_cells(); ++c) level[c] = psi[c] + lambda * g.dt * (K - l);
            src = level.data();
        }
        fill_reflected_level(g, out.v.grid, src, out.v.field.slice(l));
    }

    out.alpha.grid = out.v.grid;
    out.alpha.pad_levels = pad_levels;
    out.alpha.offset = out.v.offset;
    out.alpha.field = CellField::zeros(out.alpha.grid, alpha.slots + 2 * pad_levels);
    std::vector<double> zero(g.n_cells(), 0.0);
    for (int l = 0; l < out.alpha.field.slots; ++l) {
        const double* src = (l <= K - 1) ? alpha.slice(l) : zero.data();
        fill_reflected_level(g, out.alpha.grid, src, out.alpha.field.slice(l));
    }
    return out;
}

CellField mollify(const ExtendedField& ext, const Grid& original, double eps) {
    const Grid& eg = ext.grid;
    if (eps <= 0) throw ContractViolation("mollify: eps must be positive");
    if (ext.pad_levels * original.dt < eps - 1e-15)
        throw ContractViolation("mollify: time extension margin smaller than eps");
    for (int d = 0; d < original.dim(); ++d)
        if (original.domain.length(d) < eps - 1e-15)
            throw ContractViolation("mollify: spatial extension margin smaller than eps on axis " +
                                    std::to_string(d));

    // kernel offsets within the space-time ball of radius eps
    const int N = original.dim();
    int kt = static_cast<int>(std::floor(eps / original.dt));
    std::vector<int> kx(N);
    for (int d = 0; d < N; ++d) kx[d] = static_cast<int>(std::floor(eps / original.h[d]));

    struct Tap {
        int dt_off;
        std::vector<int> dx_off;
        double weight;
    };
    std::vector<Tap> taps;
    std::vector<int> off(N, 0);
    double wsum = 0.0;
    // enumerate the rectangular bounding box, keep taps inside the ball
    std::vector<int> lo(N), hi(N);
    for (int d = 0; d < N; ++d) {
        lo[d] = -kx[d];
        hi[d] = kx[d];
    }
    std::vector<int> cur = lo;
    bool done = false;
    while (!done) {
        for (int t = -kt; t <= kt; ++t) {
            double s2 = static_cast<double>(t) * original.dt * t * original.dt;
            for (int d = 0; d < N; ++d) s2 += static_cast<double>(cur[d]) * original.h[d] * cur[d] * original.h[d];
            s2 /= eps * eps;
            if (s2 < 1.0) {
                double w = std::pow(1.0 - s2, 3);
                taps.push_back({t, cur, w});
                wsum += w;
            }
        }
        int d = N - 1;
        while (d >= 0) {
            if (++cur[d] <= hi[d]) break;
            cur[d] = lo[d];
            --d;
        }
        if (d < 0) done = true;
    }
    for (auto& tap : taps) tap.weight /= wsum; // discrete unit mass, exactly

    CellField out = CellField::zeros(original, ext.field.slots - 2 * ext.pad_levels);
    for (int l = 0; l < out.slots; ++l) {
        int el = l + ext.pad_levels;
        for (long c = 0; c < original.n_cells(); ++c) {
            auto multi = original.cell_multi(c);
            double acc = 0.0;
            std::vector<int> emulti(N);
            for (const auto& tap : taps) {
                for (int d = 0; d < N; ++d) emulti[d] = multi[d] + ext.offset[d] + tap.dx_off[d];
                acc += tap.weight * ext.field.at(el + tap.dt_off, eg.cell_index(emulti));
            }
            out.at(l, c) = acc;
        }
    }
    return out;
}

io::Snapshot to_snapshot(const Grid& g, const CellField& f) {
    io::Snapshot s;
    s.kind = "cell";
    s.dims.push_back(g.dim());
    for (int c : g.cells) s.dims.push_back(c);
    s.dims.push_back(f.slots);
    s.payload = f.data;
    return s;
}

io::Snapshot to_snapshot(const Grid& g, const CellVectorField& f) {
    io::Snapshot s;
    s.kind = "cellvec";
    s.dims.push_back(g.dim());
    for (int c : g.cells) s.dims.push_back(c);
    s.dims.push_back(f.slots);
    s.payload = f.data;
    return s;
}

io::Snapshot to_snapshot(const Grid& g, const FaceField& f) {
    io::Snapshot s;
    s.kind = "face";
    s.dims.push_back(g.dim());
    for (int c : g.cells) s.dims.push_back(c);
    s.dims.push_back(f.slots);
    for (int d = 0; d < f.dim; ++d)
        s.payload.insert(s.payload.end(), f.data[d].begin(), f.data[d].end());
    return s;
}

namespace {
void check_snapshot_grid(const Grid& g, const io::Snapshot& s, const char* what) {
    if (s.dims.size() != static_cast<std::size_t>(g.dim()) + 2 || s.dims[0] != g.dim())
        throw ContractViolation(std::string(what) + ": snapshot dimension header mismatch");
    for (int d = 0; d < g.dim(); ++d)
        if (s.dims[1 + d] != g.cells[d])
            throw ContractViolation(std::string(what) + ": snapshot cell count mismatch on axis " +
                                    std::to_string(d));
}
} // namespace

CellField cell_from_snapshot(const Grid& g, const io::Snapshot& s) {
    if (s.kind != "cell") throw ContractViolation("cell_from_snapshot: kind mismatch");
    check_snapshot_grid(g, s, "cell_from_snapshot");
    CellField f;
    f.cells = g.n_cells();
    f.slots = static_cast<int>(s.dims.back());
    if (s.payload.size() != static_cast<std::size_t>(f.cells) * f.slots)
        throw ContractViolation("cell_from_snapshot: payload size mismatch");
    f.data = s.payload;
    return f;
}

CellVectorField cellvec_from_snapshot(const Grid& g, const io::Snapshot& s) {
    if (s.kind != "cellvec") throw ContractViolation("cellvec_from_snapshot: kind mismatch");
    check_snapshot_grid(g, s, "cellvec_from_snapshot");
    CellVectorField f;
    f.cells = g.n_cells();
    f.dim = g.dim();
    f.slots = static_cast<int>(s.dims.back());
    if (s.payload.size() != static_cast<std::size_t>(f.cells) * f.dim * f.slots)
        throw ContractViolation("cellvec_from_snapshot: payload size mismatch");
    f.data = s.payload;
    return f;
}

FaceField face_from_snapshot(const Grid& g, const io::Snapshot& s) {
    if (s.kind != "face") throw ContractViolation("face_from_snapshot: kind mismatch");
    check_snapshot_grid(g, s, "face_from_snapshot");
    FaceField f = FaceField::zeros(g, static_cast<int>(s.dims.back()));
    std::size_t off = 0;
    for (int d = 0; d < f.dim; ++d) {
        if (off + f.data[d].size() > s.payload.size())
            throw ContractViolation("face_from_snapshot: payload size mismatch");
        std::copy(s.payload.begin() + off, s.payload.begin() + off + f.data[d].size(), f.data[d].begin());
        off += f.data[d].size();
    }
    if (off != s.payload.size()) throw ContractViolation("face_from_snapshot: payload size mismatch");
    return f;
}

} // namespace mfgn
