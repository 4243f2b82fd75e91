#pragma once

#include "mfgn/io.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mfgn {

/// Axis-aligned box domain with a time horizon.
struct RectDomain {
    std::vector<std::array<double, 2>> bounds; // {a_i, b_i} per axis
    double horizon = 0.0;

    int dim() const { return static_cast<int>(bounds.size()); }
    double length(int d) const { return bounds[d][1] - bounds[d][0]; }
    double volume() const;
    void validate() const; // throws ConfigError on a_i >= b_i, T <= 0, dim < 1
};

/// Space-time discretization of a RectDomain.
///
/// Layout conventions (stable, used by the snapshot format):
///  - cells are indexed row-major with the LAST axis fastest;
///  - faces along axis d sit at positions g = 0..cells[d]; g = 0 and
///    g = cells[d] are boundary faces, the rest interior;
///  - boundary sides are numbered s = 2*d + hi (hi = 0 low facet, 1 high),
///    each side carries one facet per transverse cell (row-major over the
///    remaining axes);
///  - time levels k = 0..steps carry densities and potentials, time
///    intervals k = 0..steps-1 carry fluxes and running costs.
struct Grid {
    RectDomain domain;
    std::vector<int> cells;
    int steps = 0;
    std::vector<double> h; // per-axis spacing
    double dt = 0.0;

    int dim() const { return static_cast<int>(cells.size()); }
    long n_cells() const;
    double cell_volume() const;
    double time_at(int level) const { return dt * level; }
    double time_mid(int interval) const { return dt * (interval + 0.5); }

    long cell_index(const std::vector<int>& multi) const;
    std::vector<int> cell_multi(long lin) const;
    std::vector<double> cell_center(long lin) const;
    /// Linear index of the neighbor cell shifted by +/-1 along axis d, or -1
    /// if the shift leaves the grid.
    long neighbor(long lin, int d, int step) const;

    long transverse_count(int d) const;           // cells per face sheet
    long faces_along(int d) const;                // (cells[d]+1) * transverse
    long n_interior_faces() const;
    /// Linear face index within axis d: position g (0..cells[d]) major,
    /// transverse row-major minor.
    long face_index(int d, int g, long t_lin) const;
    /// Transverse linear index of the sheet containing a given cell.
    long cell_transverse(int d, long cell_lin) const;

    int n_sides() const { return 2 * dim(); }
    long facets_per_side(int side) const { return transverse_count(side / 2); }
    long n_boundary_facets() const;
    double facet_area(int side) const; // product of h over transverse axes (1 in 1D)
    long boundary_adjacent_cell(int side, long t_lin) const;
    std::vector<double> facet_center(int side, long t_lin) const;
};

/// Builds a grid; throws ConfigError on non-positive resolutions.
Grid build_grid(const RectDomain& domain, const std::vector<int>& cells_per_axis, int time_steps);

/// One scalar per cell per time slot (levels for densities/potentials,
/// intervals for running costs).
struct CellField {
    long cells = 0;
    int slots = 0;
    std::vector<double> data; // slot-major

    static CellField zeros(const Grid& g, int slots);
    static CellField constant(const Grid& g, int slots, double value);
    double& at(int slot, long cell) { return data[static_cast<std::size_t>(slot) * cells + cell]; }
    double at(int slot, long cell) const { return data[static_cast<std::size_t>(slot) * cells + cell]; }
    const double* slice(int slot) const { return data.data() + static_cast<std::size_t>(slot) * cells; }
    double* slice(int slot) { return data.data() + static_cast<std::size_t>(slot) * cells; }
};

/// One N-vector per cell per time interval (the collocated flux).
struct CellVectorField {
    long cells = 0;
    int dim = 0;
    int slots = 0;
    std::vector<double> data; // slot-major, then cell, then component

    static CellVectorField zeros(const Grid& g, int slots);
    double& at(int slot, long cell, int d) {
        return data[(static_cast<std::size_t>(slot) * cells + cell) * dim + d];
    }
    double at(int slot, long cell, int d) const {
        return data[(static_cast<std::size_t>(slot) * cells + cell) * dim + d];
    }
};

/// One scalar per face (interior + boundary) per time slot, oriented along
/// the +axis direction of the face normal.
struct FaceField {
    int dim = 0;
    int slots = 0;
    std::vector<long> faces_per_axis;
    std::vector<std::vector<double>> data; // per axis: slot-major * face index

    static FaceField zeros(const Grid& g, int slots);
    double& at(int slot, int d, long face) {
        return data[d][static_cast<std::size_t>(slot) * faces_per_axis[d] + face];
    }
    double at(int slot, int d, long face) const {
        return data[d][static_cast<std::size_t>(slot) * faces_per_axis[d] + face];
    }
};

/// One scalar per boundary facet per time slot (influx data, traces).
struct BoundaryField {
    int sides = 0;
    int slots = 0;
    std::vector<long> facets_per_side;
    std::vector<std::vector<double>> data; // per side: slot-major * facet

    static BoundaryField zeros(const Grid& g, int slots);
    double& at(int slot, int side, long facet) {
        return data[side][static_cast<std::size_t>(slot) * facets_per_side[side] + facet];
    }
    double at(int slot, int side, long facet) const {
        return data[side][static_cast<std::size_t>(slot) * facets_per_side[side] + facet];
    }
};

// ---------------------------------------------------------------------------
// Discrete differential operators.
//
// Face pair (exactly adjoint; see the summation-by-parts identity below):
//   discrete_gradient  : cell scalars -> face values; centered difference
//                        across interior faces, one-sided copy at boundary.
//   discrete_divergence: face values + boundary influx -> cell scalars.
//
// Collocated pair (used by the solver; also exactly adjoint):
//   cell_gradient  : cell scalars -> cell vectors; average of the two
//                    adjacent interior-face differences, so boundary cells
//                    see half of their one-sided difference.
//   cell_divergence: cell vectors + boundary influx -> cell scalars; equals
//                    discrete_divergence(face_flux_from_collocated(.)).
//
// For all u (CellField) and each slot:
//   <u, discrete_divergence(w, jdata)> + <discrete_gradient(u), w>_interior
//       = boundary integral of u * (w . nu)
// with cell inner products weighted by cell volume, face inner products by
// cell volume over interior faces only, and the boundary integral using the
// adjacent-cell trace of u. The identity holds to machine precision.
// ---------------------------------------------------------------------------

FaceField discrete_gradient(const Grid& g, const CellField& u);
/// jdata may be null; boundary faces then contribute zero flux. With jdata,
/// boundary faces carry flux -j (inflow j >= 0 on every facet).
CellField discrete_divergence(const Grid& g, const FaceField& w, const BoundaryField* jdata);

CellVectorField cell_gradient(const Grid& g, const CellField& u);
CellField cell_divergence(const Grid& g, const CellVectorField& W, const BoundaryField* jdata);

/// Face flux carried by a collocated field: interior faces average the two
/// adjacent cell values; boundary faces carry -j oriented along +axis
/// (so +j on low sides, -j on high sides).
FaceField face_flux_from_collocated(const Grid& g, const CellVectorField& W, const BoundaryField* jdata);

/// Weighted inner products matching the identity above.
double cell_inner(const Grid& g, const CellField& a, const CellField& b);
double face_inner_interior(const Grid& g, const FaceField& a, const FaceField& b);
/// Boundary integral sum_facets area * trace(u) * (w . nu) per slot, where
/// trace(u) is the boundary-adjacent cell value.
double boundary_pairing(const Grid& g, const CellField& u, const FaceField& w);

// ---------------------------------------------------------------------------
// Reflection extension and mollification.
// ---------------------------------------------------------------------------

/// A cell field on the reflected/extended cylinder. Spatial cells triple per
/// axis (reflection across both facets); time levels gain pad_levels on each
/// end, level l corresponding to t = (l - pad_levels) * dt.
struct ExtendedField {
    Grid grid; // extended grid
    CellField field;
    int pad_levels = 0;
    std::vector<int> offset; // index of the original cell block per axis
};

/// Maps an extended cell index along one axis back to its source cell in the
/// original grid (the reflection map; applying it to a mirrored index
/// returns the original).
int reflect_source_index(int ext_index, int n_cells);

/// Even extension across every facet plus time shift; past-the-horizon
/// levels hold the last original level. pad_time is rounded up to whole
/// levels.
ExtendedField reflect_extend(const Grid& g, const CellField& field, double pad_time);

/// Extension of a subsolution pair (v, alpha): v continues past the horizon
/// as psi + lambda * (T_shifted - t) with lambda = -max |H(grad psi)|
/// supplied by the caller; alpha continues as zero.
struct ExtendedPair {
    ExtendedField v;
    ExtendedField alpha; // interval-aligned: slots = levels - 1
};
ExtendedPair reflect_extend_subsolution(const Grid& g, const CellField& v, const CellField& alpha,
                                        const std::vector<double>& psi, double lambda, double pad_time);

/// Discrete space-time convolution with the polynomial bump kernel
/// (1 - s^2)^3 of radius eps (s = scaled space-time distance), normalized to
/// unit discrete mass, restricted back to the original cylinder. Requires an
/// extension margin of at least eps in time and space.
CellField mollify(const ExtendedField& ext, const Grid& original, double eps);

// ---------------------------------------------------------------------------
// Snapshot adapters (binary format documented in io.hpp / README).
// ---------------------------------------------------------------------------

io::Snapshot to_snapshot(const Grid& g, const CellField& f);
io::Snapshot to_snapshot(const Grid& g, const CellVectorField& f);
io::Snapshot to_snapshot(const Grid& g, const FaceField& f);
CellField cell_from_snapshot(const Grid& g, const io::Snapshot& s);
CellVectorField cellvec_from_snapshot(const Grid& g, const io::Snapshot& s);
FaceField face_from_snapshot(const Grid& g, const io::Snapshot& s);

} // namespace mfgn
