// Command-line entry point: validate -> solve -> verify -> simulate -> report.
// Every subcommand exits 0 on success and nonzero with a one-line
// machine-parsable reason on stderr otherwise.

#include "mfgn/characteristics.hpp"
#include "mfgn/errors.hpp"
#include "mfgn/problem.hpp"
#include "mfgn/report.hpp"
#include "mfgn/solver.hpp"
#include "mfgn/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

std::string default_out(const std::string& leaf) {
    const char* root = std::getenv("MFGN_OUT_ROOT");
    return (root && *root ? std::string(root) : std::string(".")) + "/" + leaf;
}

int cmd_solve(const std::string& config, std::string out, const std::string& checkpoint, bool resume,
              bool json_summary) {
    mfgn::RunConfig rc = mfgn::load_run_config(config);
    if (out.empty()) out = default_out("solve-out");
    mfgn::Grid grid = rc.make_grid();
    mfgn::DiscreteProblem dp(rc.spec, grid);

    mfgn::SolveState resumed;
    const mfgn::SolveState* resume_ptr = nullptr;
    if (resume) {
        if (checkpoint.empty()) throw mfgn::ConfigError("solve: --resume requires --checkpoint");
        resumed = mfgn::load_checkpoint(checkpoint, mfgn::config_hash(rc), grid);
        resume_ptr = &resumed;
    }
    mfgn::SolveResult res = mfgn::solve(rc.spec, grid, rc.solver, resume_ptr, checkpoint);
    mfgn::write_solve_outputs(out, rc, dp, res);
    if (!checkpoint.empty()) mfgn::save_checkpoint(checkpoint, res.state, mfgn::config_hash(rc));

    if (json_summary) {
        std::cout << res.certificate.to_kv().to_json() << "\n";
    } else {
        std::cout << mfgn::certificate_text(res.certificate);
        std::cout << "outputs written to " << out << "\n";
    }
    return res.certificate.converged ? 0 : 3;
}

int cmd_verify(const std::string& in_dir, const std::string& report_path, bool json_summary) {
    mfgn::SolveOutputs so = mfgn::load_solve_outputs(in_dir);
    mfgn::DiscreteProblem dp(so.rc.spec, so.grid);
    mfgn::VerifyOptions opts;
    opts.delta = so.rc.solver.delta_mask;
    mfgn::WeakSolutionReport rep = mfgn::verify_solution(dp, so.m, so.w, so.u, so.alpha, opts);

    // recompute the duality certificate from the snapshots
    bool dual_ok = false;
    double primal = dp.evaluate_M(so.m, so.w);
    double dual = dp.evaluate_K(so.u, so.alpha, &dual_ok);
    double gap = primal + dual;
    double scale = std::max({std::abs(primal), std::abs(dual), 1e-12});

    std::string text = mfgn::weak_report_text(rep);
    mfgn::io::KvBlock kv = rep.to_kv();
    kv.set("primal_value", primal);
    kv.set("dual_value", dual);
    kv.set("duality_gap", gap);
    kv.set("relative_gap", gap / scale);
    if (!report_path.empty())
        mfgn::io::write_text_file(report_path, text + "[duality]\n" + kv.to_text());

    bool pass = true;
    std::string failing;
    auto gate = [&](bool ok, const char* name) {
        if (!ok && pass) failing = name;
        pass = pass && ok;
    };
    gate(rep.subsolution.sup <= 1e-8 * scale + 1e-12, "subsolution");
    gate(rep.mass_defect_rel <= 1e-10, "mass_balance");
    gate(gap >= -1e-8 * scale && gap <= 1e-4 * scale, "duality_gap");
    gate(dual_ok, "dual_feasibility");
    gate(std::abs(rep.energy_defect_T) <= 1e-4 * scale, "energy_identity");

    if (json_summary)
        std::cout << kv.to_json() << "\n";
    else
        std::cout << text;
    if (!pass) {
        std::cerr << "error: verify: check '" << failing << "' failed\n";
        return 4;
    }
    return 0;
}

int cmd_simulate(const std::string& solve_dir, long agents, std::uint64_t seed, std::string out,
                 double dt_sub_frac, bool json_summary) {
    mfgn::SolveOutputs so = mfgn::load_solve_outputs(solve_dir);
    const mfgn::Grid& g = so.grid;
    if (out.empty()) out = default_out("sim-out");
    std::filesystem::create_directories(out);

    mfgn::DiscreteProblem dp(so.rc.spec, g);
    mfgn::AgentEnsemble ens =
        mfgn::seed_agents(g, dp.continuity().m0(), dp.continuity().influx(), agents, seed);
    std::vector<int> levels = {0, g.steps / 4, g.steps / 2, 3 * g.steps / 4, g.steps};
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    mfgn::TrajectoryRecord rec = mfgn::integrate(g, so.rc.spec.hamiltonian, so.u, ens,
                                                 g.dt * dt_sub_frac, levels);

    auto rows = mfgn::compare_density(g, rec, so.m);
    mfgn::io::CsvWriter cmp({"level", "t", "l1_rel", "mass_empirical", "mass_solver"});
    for (const auto& row : rows)
        cmp.add_row({static_cast<double>(row.level), g.time_at(row.level), row.l1_rel, row.mass_emp,
                     row.mass_solver});
    cmp.write(out + "/density_compare.csv");

    std::vector<std::string> cols = {"agent", "level", "t"};
    for (int d = 0; d < g.dim(); ++d) cols.push_back("x" + std::to_string(d));
    mfgn::io::CsvWriter traj(cols);
    for (long a = 0; a < rec.sample_count; ++a)
        for (int k = 0; k <= g.steps; ++k) {
            std::vector<double> row = {static_cast<double>(a), static_cast<double>(k), g.time_at(k)};
            for (int d = 0; d < g.dim(); ++d)
                row.push_back(rec.sample_paths[(a * (g.steps + 1) + k) * g.dim() + d]);
            traj.add_row(row);
        }
    traj.write(out + "/trajectories_sample.csv");

    mfgn::io::KvBlock kv;
    kv.set("agents", static_cast<long>(ens.n));
    kv.set("agent_weight", ens.weight);
    kv.set("exit_clamp_events", rec.exit_clamp_events);
    kv.set("agent_steps", rec.agent_steps);
    double worst = 0.0;
    for (const auto& row : rows)
        if (row.level > 0) worst = std::max(worst, row.l1_rel);
    kv.set("density_l1_rel_max", worst);
    mfgn::io::write_text_file(out + "/summary.txt", kv.to_text());
    if (json_summary)
        std::cout << kv.to_json() << "\n";
    else
        std::cout << kv.to_text() << "outputs written to " << out << "\n";
    return 0;
}

int cmd_conjugate_table(const std::string& phi_name, double r, double c, double at, bool has_at,
                        double from, double to, double step, const std::string& csv) {
    mfgn::ScalarConvexFn fn;
    if (phi_name == "counterexample")
        fn = mfgn::counterexample_fn();
    else if (phi_name == "power")
        fn = mfgn::power_fn(r, c);
    else if (phi_name == "quadratic")
        fn = mfgn::quadratic_fn();
    else if (phi_name == "paper_example") {
        mfgn::Hamiltonian H = mfgn::Hamiltonian::paper_example(r, c);
        fn.name = "paper_example";
        fn.phi = [H](double x) { return H.profile(std::abs(x)); };
        fn.phi_star = [H](double s) { return H.conjugate(std::abs(s)); };
        fn.closed_form_conjugate = false;
    } else {
        throw mfgn::ConfigError("conjugate-table: unknown function '" + phi_name + "'");
    }

    std::vector<double> xs, phis;
    for (double x = fn.sample_lo; x <= fn.sample_hi + 1e-12; x += fn.sample_step) {
        xs.push_back(x);
        phis.push_back(fn.phi(x));
    }

    if (has_at) {
        auto res = mfgn::numerical_legendre(xs, phis, at);
        if (!res.trusted)
            std::cerr << "warning: conjugate-table: maximizer on the sample boundary, value untrusted\n";
        std::cout << mfgn::io::format_double(res.value) << "\n";
        return 0;
    }
    mfgn::io::CsvWriter table({"s", "phi_star"});
    long untrusted = 0;
    for (double s = from; s <= to + 1e-12; s += step) {
        auto res = mfgn::numerical_legendre(xs, phis, s);
        if (!res.trusted) ++untrusted;
        table.add_row({s, res.value});
    }
    if (csv.empty())
        std::cout << table.to_text();
    else
        table.write(csv);
    if (untrusted > 0)
        std::cerr << "warning: conjugate-table: " << untrusted << " rows hit the sample boundary\n";
    return 0;
}

int cmd_report(const std::string& solve_dir, const std::string& sim_dir, const std::string& out_path) {
    mfgn::SolveOutputs so = mfgn::load_solve_outputs(solve_dir);
    mfgn::DiscreteProblem dp(so.rc.spec, so.grid);
    mfgn::VerifyOptions opts;
    opts.delta = so.rc.solver.delta_mask;
    mfgn::WeakSolutionReport rep = mfgn::verify_solution(dp, so.m, so.w, so.u, so.alpha, opts);

    std::ostringstream os;
    os << "run report (" << mfgn::kToolVersion << ")\n\n";
    os << "== certificate ==\n" << mfgn::io::read_text_file(solve_dir + "/certificate.txt") << "\n";
    os << "== weak solution checks ==\n" << mfgn::weak_report_text(rep) << "\n";
    if (!sim_dir.empty()) {
        os << "== simulation comparison ==\n"
           << mfgn::io::read_text_file(sim_dir + "/density_compare.csv") << "\n";
        os << mfgn::io::read_text_file(sim_dir + "/summary.txt") << "\n";
    }
    os << "== gap history (plot data) ==\n"
       << mfgn::io::read_text_file(solve_dir + "/gap_history.csv");
    mfgn::io::write_text_file(out_path, os.str());
    std::cout << "report written to " << out_path << "\n";
    return 0;
}

int cmd_instances(const std::string& emit_dir) {
    for (const auto& inst : mfgn::builtin_instances()) {
        std::cout << inst.name << " (v" << inst.version << "): " << inst.description << "\n";
        if (!emit_dir.empty()) {
            std::filesystem::create_directories(emit_dir);
            mfgn::io::write_text_file(emit_dir + "/" + inst.name + ".cfg",
                                      mfgn::run_config_to_json(inst.config).dump(2) + "\n");
        }
    }
    return 0;
}

int cmd_validate(const std::string& config) {
    mfgn::RunConfig rc = mfgn::load_run_config(config);
    mfgn::ValidationReport rep = mfgn::validate_spec(rc.spec, true);
    std::cout << (rep.ok() ? "valid\n" : "invalid\n") << rep.to_text();
    std::cout << "derived: r'=" << mfgn::io::format_double(rc.spec.derived.r_conj)
              << " q'=" << mfgn::io::format_double(rc.spec.derived.q_conj)
              << " beta=" << mfgn::io::format_double(rc.spec.derived.beta)
              << " nu=" << mfgn::io::format_double(rc.spec.derived.holder_nu) << "\n";
    return rep.ok() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational solver and verification suite for first-order "
                 "mean-field games with Neumann boundary influx"};
    app.require_subcommand(1);

    std::string config, out, checkpoint, in_dir, report_path, solve_dir, sim_dir, csv, phi_name = "power";
    std::string emit_dir;
    bool resume = false, json_summary = false, has_at = false;
    long agents = 100000;
    std::uint64_t seed = 1;
    double r = 2.0, c = 1.0, at = 0.0, from = 0.0, to = 1.0, step = 0.1, dt_sub_frac = 0.25;

    auto* solve = app.add_subcommand("solve", "solve an instance and write certificates");
    solve->add_option("--config", config, "config file or builtin:<name>")->required();
    solve->add_option("--out", out, "output directory");
    solve->add_option("--checkpoint", checkpoint, "checkpoint file");
    solve->add_flag("--resume", resume, "resume from the checkpoint");
    solve->add_flag("--json-summary", json_summary, "emit only the machine-readable summary");

    auto* verify = app.add_subcommand("verify", "run the weak-solution certificate suite");
    verify->add_option("--in", in_dir, "solve output directory")->required();
    verify->add_option("--report", report_path, "report file");
    verify->add_flag("--json-summary", json_summary, "emit only the machine-readable summary");

    auto* simulate = app.add_subcommand("simulate", "integrate agent trajectories through the solve");
    simulate->add_option("--solve-dir", solve_dir, "solve output directory")->required();
    simulate->add_option("--agents", agents, "agent count");
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--out", out, "output directory");
    simulate->add_option("--dt-sub", dt_sub_frac, "substep size as a fraction of dt");
    simulate->add_flag("--json-summary", json_summary, "emit only the machine-readable summary");

    auto* conj = app.add_subcommand("conjugate-table", "evaluate or tabulate convex conjugates");
    conj->add_option("--phi", phi_name, "counterexample | power | quadratic | paper_example");
    conj->add_option("--r", r, "exponent");
    conj->add_option("--c", c, "scale");
    auto* at_opt = conj->add_option("--at", at, "single evaluation point");
    conj->add_option("--from", from, "table start");
    conj->add_option("--to", to, "table end");
    conj->add_option("--step", step, "table step");
    conj->add_option("--csv", csv, "CSV output path");

    auto* report = app.add_subcommand("report", "aggregate certificate, checks, and simulation data");
    report->add_option("--solve-dir", solve_dir, "solve output directory")->required();
    report->add_option("--sim-dir", sim_dir, "simulation output directory");
    report->add_option("--out", report_path, "report file")->required();

    auto* instances = app.add_subcommand("instances", "list builtin instances");
    instances->add_option("--emit", emit_dir, "write annotated config files to a directory");

    auto* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("--config", config, "config file or builtin:<name>")->required();

    CLI11_PARSE(app, argc, argv);
    has_at = at_opt->count() > 0;

    try {
        if (solve->parsed()) return cmd_solve(config, out, checkpoint, resume, json_summary);
        if (verify->parsed()) return cmd_verify(in_dir, report_path, json_summary);
        if (simulate->parsed()) return cmd_simulate(solve_dir, agents, seed, out, dt_sub_frac, json_summary);
        if (conj->parsed()) return cmd_conjugate_table(phi_name, r, c, at, has_at, from, to, step, csv);
        if (report->parsed()) return cmd_report(solve_dir, sim_dir, report_path);
        if (instances->parsed()) return cmd_instances(emit_dir);
        if (validate->parsed()) return cmd_validate(config);
    } catch (const mfgn::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const mfgn::NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 5;
    } catch (const mfgn::ContractViolation& e) {
        std::cerr << "error: contract: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
