#pragma once

#include "mfgn/convex.hpp"
#include "mfgn/field_expr.hpp"
#include "mfgn/grid.hpp"
#include "mfgn/solver_config.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace mfgn {

/// Full description of one game instance: domain, cost families, data
/// fields, and the derived exponents the checks need.
struct ProblemSpec {
    RectDomain domain;
    Hamiltonian hamiltonian;
    Coupling coupling;
    FieldExpr psi = FieldExpr::constant_expr(0.0);
    FieldExpr m0 = FieldExpr::constant_expr(1.0);
    FieldExpr j = FieldExpr::constant_expr(0.0);
    double delta_mask = 1e-3;

    double r() const { return hamiltonian.r; }
    double q() const { return coupling.q; }

    struct Derived {
        double r_conj = 0.0;       // r' = r/(r-1)
        double q_conj = 0.0;       // q'
        double beta = 0.0;         // flux integrability exponent qr/(qr-q+1)
        double holder_nu = 0.0;    // (r - N(q-1)) / (N(q-1)(r-1) + rq)
        bool exponent_gap_ok = false;     // r > N(q-1)
        bool exponent_uniqueness_ok = false; // r > Nq/(Nq+q-2)
        bool strictly_positive_data = false; // m0 > 0 and j > 0 on samples
    };
    Derived derived;

    // Data fields sampled on a grid. m0 and psi at cell centers; j at facet
    // centers and interval midpoints.
    std::vector<double> sample_m0(const Grid& g) const;
    std::vector<double> sample_psi(const Grid& g) const;
    BoundaryField sample_j(const Grid& g) const;
    CellField sample_ftilde_intervals(const Grid& g) const; // per interval midpoint
};

struct ValidationIssue {
    bool fatal = false;
    std::string message;
};
struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const {
        for (const auto& i : issues)
            if (i.fatal) return false;
        return true;
    }
    std::string to_text() const;
};

/// Validates the spec against the structural requirements: fatal issues name
/// the violated growth/positivity requirement and throw ConfigError unless
/// collect_only; the exponent-relation audits are recorded as warnings.
/// Fills spec.derived.
ValidationReport validate_spec(ProblemSpec& spec, bool collect_only = false);

nlohmann::json spec_to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const nlohmann::json& j);

/// A runnable configuration: spec + grid resolution + solver parameters.
struct RunConfig {
    ProblemSpec spec;
    std::vector<int> grid_cells;
    int grid_steps = 0;
    SolverConfig solver;

    Grid make_grid() const { return build_grid(spec.domain, grid_cells, grid_steps); }
};

nlohmann::json run_config_to_json(const RunConfig& rc);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path_or_builtin); // "builtin:<name>" or a file path
std::uint64_t config_hash(const RunConfig& rc);

/// Named, versioned instance catalog shared by tests, docs, and the CLI.
struct Instance {
    std::string name;
    std::string description;
    int version = 1;
    RunConfig config;
    double holder_C_ref = 0.0; // frozen regression reference, 0 = unset
};
const std::vector<Instance>& builtin_instances();
const Instance& builtin_instance(const std::string& name);

} // namespace mfgn
