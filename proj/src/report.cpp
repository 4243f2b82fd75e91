#include "mfgn/report.hpp"

#include "mfgn/errors.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <sstream>

namespace mfgn {

std::string RunManifest::to_json_text() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["config_hash"] = io::hex64(config_hash);
    j["timestamp"] = timestamp;
    nlohmann::json files_json = nlohmann::json::object();
    for (const auto& [name, sum] : files) files_json[name] = sum;
    j["files"] = files_json;
    return j.dump(2) + "\n";
}

std::string certificate_text(const Certificate& cert) {
    std::ostringstream os;
    os << "solution certificate\n";
    os << "  primal value        " << io::format_double(cert.primal) << "\n";
    os << "  dual value          " << io::format_double(cert.dual) << "\n";
    os << "  duality gap         " << io::format_double(cert.gap) << " (relative "
       << io::format_double(cert.rel_gap) << ")\n";
    os << "  continuity residual " << io::format_double(cert.cont_residual) << "\n";
    os << "  mass defect (rel)   " << io::format_double(cert.mass_defect_rel) << "\n";
    os << "  cost optimality     sup |alpha - f(m)| = " << io::format_double(cert.opt_cost_sup)
       << " on {m > " << io::format_double(cert.delta_mask) << "}\n";
    os << "  drift optimality    sup |w + m Hp(grad u)| = " << io::format_double(cert.opt_drift_sup)
       << "\n";
    os << "  energy defect at T  " << io::format_double(cert.energy_defect_T) << "\n";
    os << "  min density         " << io::format_double(cert.min_density) << "\n";
    os << "  weak duality        " << (cert.weak_duality_ok ? "ok" : "VIOLATED") << "\n";
    os << "  dual feasibility    " << (cert.dual_feasible ? "ok" : "FLAGGED") << "\n";
    os << "  converged           " << (cert.converged ? "yes" : "no") << " after " << cert.iterations
       << " iterations\n";
    os << "[summary]\n" << cert.to_kv().to_text();
    return os.str();
}

namespace {
std::string now_string() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void add_file(RunManifest& man, const std::string& dir, const std::string& name) {
    auto bytes = io::read_bytes(dir + "/" + name);
    man.files.emplace_back(name, io::hex64(io::fnv1a(bytes.data(), bytes.size())));
}
} // namespace

void write_solve_outputs(const std::string& dir, const RunConfig& rc, const DiscreteProblem& dp,
                         const SolveResult& res) {
    std::filesystem::create_directories(dir);
    const Grid& g = dp.grid();

    io::write_text_file(dir + "/config.json", run_config_to_json(rc).dump(2) + "\n");
    io::write_text_file(dir + "/certificate.txt", certificate_text(res.certificate));

    io::write_snapshot(dir + "/m.snap", to_snapshot(g, res.m));
    io::write_snapshot(dir + "/u.snap", to_snapshot(g, res.u));
    io::write_snapshot(dir + "/alpha.snap", to_snapshot(g, res.alpha));
    io::write_snapshot(dir + "/wcell.snap", to_snapshot(g, res.w));
    io::write_snapshot(dir + "/wface.snap", to_snapshot(g, res.w_face));

    io::CsvWriter gap({"iter", "primal", "dual", "gap", "residual"});
    for (const auto& rec : res.state.history)
        gap.add_row({static_cast<double>(rec.iter), rec.primal, rec.dual, rec.gap, rec.residual});
    gap.write(dir + "/gap_history.csv");

    io::CsvWriter mass({"t", "mass", "expected_mass", "defect"});
    for (const auto& row : dp.continuity().mass_balance_table(res.m))
        mass.add_row({row.t, row.mass, row.expected, row.defect});
    mass.write(dir + "/mass_balance.csv");

    RunManifest man;
    man.config_hash = config_hash(rc);
    man.timestamp = now_string();
    for (const char* name : {"config.json", "certificate.txt", "m.snap", "u.snap", "alpha.snap",
                             "wcell.snap", "wface.snap", "gap_history.csv", "mass_balance.csv"})
        add_file(man, dir, name);
    io::write_text_file(dir + "/manifest.json", man.to_json_text());
}

SolveOutputs load_solve_outputs(const std::string& dir) {
    SolveOutputs out;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text_file(dir + "/config.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("load_solve_outputs: bad config.json in " + dir + ": " + e.what());
    }
    out.rc = run_config_from_json(j);
    validate_spec(out.rc.spec);
    out.grid = out.rc.make_grid();
    out.m = cell_from_snapshot(out.grid, io::read_snapshot(dir + "/m.snap"));
    out.u = cell_from_snapshot(out.grid, io::read_snapshot(dir + "/u.snap"));
    out.alpha = cell_from_snapshot(out.grid, io::read_snapshot(dir + "/alpha.snap"));
    out.w = cellvec_from_snapshot(out.grid, io::read_snapshot(dir + "/wcell.snap"));
    out.w_face = face_from_snapshot(out.grid, io::read_snapshot(dir + "/wface.snap"));
    return out;
}

std::string weak_report_text(const WeakSolutionReport& rep) {
    return rep.to_text() + "[summary]\n" + rep.to_kv().to_text();
}

} // namespace mfgn
