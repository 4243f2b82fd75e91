#pragma once

#include "mfgn/convex.hpp"
#include "mfgn/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfgn {

/// Weighted agent ensemble: initial agents sampled from m0 plus boundary
/// injections scheduled from the influx intensity. Every agent carries the
/// same weight, calibrated so the ensemble mass at the horizon matches the
/// integral of m0 plus the total influx.
struct AgentEnsemble {
    int dim = 0;
    long n = 0;
    long n_initial = 0;
    double weight = 0.0;
    std::vector<double> pos;   // n * dim at birth
    std::vector<double> birth; // birth times (0 for initial agents)
    std::uint64_t seed = 0;

    double mass_at(double t) const; // bookkeeping: weight * #agents born by t
};

AgentEnsemble seed_agents(const Grid& g, const std::vector<double>& m0, const BoundaryField& j,
                          long n_agents, std::uint64_t seed);

/// Trajectories integrated through the drift -H_p(grad u), recorded as
/// per-level position sets at the requested time levels.
struct TrajectoryRecord {
    std::vector<int> levels;
    std::vector<std::vector<double>> positions; // per level: packed alive positions
    std::vector<long> alive;                    // per level: agent count
    double weight = 0.0;
    long exit_clamp_events = 0;
    long agent_steps = 0;
    // small fixed-size trajectory sample for CSV export: sample_count paths
    // recorded at every grid level
    long sample_count = 0;
    std::vector<double> sample_paths; // sample_count * (steps+1) * dim
};

/// Explicit midpoint integration with multilinear interpolation of the
/// cell-centered gradient of u; the drift on interval k uses u at level k.
/// Agents that step outside the closure are reflected then clamped, and the
/// event is counted.
TrajectoryRecord integrate(const Grid& g, const Hamiltonian& H, const CellField& u,
                           const AgentEnsemble& ens, double dt_sub, const std::vector<int>& record_levels,
                           long sample_count = 64);

/// Weighted per-cell histogram of one recorded level.
std::vector<double> empirical_density(const Grid& g, const TrajectoryRecord& rec, int level_index);

struct DensityCompareRow {
    int level = 0;
    double l1_rel = 0.0;
    double mass_emp = 0.0;
    double mass_solver = 0.0;
};
std::vector<DensityCompareRow> compare_density(const Grid& g, const TrajectoryRecord& rec,
                                               const CellField& m);

} // namespace mfgn
