#pragma once

#include "mfgn/problem.hpp"
#include "mfgn/solver.hpp"
#include "mfgn/verify.hpp"

#include <string>
#include <vector>

namespace mfgn {

inline constexpr const char* kToolVersion = "mfgn 1.0.0";

/// Inventory of one output directory: every file listed with a checksum.
/// The timestamp is the only field that varies between identical runs.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::uint64_t config_hash = 0;
    std::string timestamp;
    std::vector<std::pair<std::string, std::string>> files; // name -> fnv64 hex
    std::string to_json_text() const;
};

std::string certificate_text(const Certificate& cert);

/// Writes the full solve output directory: resolved config, certificate,
/// snapshots (m, u, alpha, collocated and face flux), gap history CSV, mass
/// balance CSV, and the manifest.
void write_solve_outputs(const std::string& dir, const RunConfig& rc, const DiscreteProblem& dp,
                         const SolveResult& res);

struct SolveOutputs {
    RunConfig rc;
    Grid grid;
    CellField m;
    CellField u;
    CellField alpha;
    CellVectorField w;
    FaceField w_face;
    Certificate certificate; // re-evaluated from the snapshots
};
SolveOutputs load_solve_outputs(const std::string& dir);

std::string weak_report_text(const WeakSolutionReport& rep);

} // namespace mfgn
