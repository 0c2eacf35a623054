// Command-line driver: reads a rest mesh and an initial map, computes a
// foldover-free map and writes it together with a JSON report.
//
// Exit status: 0 on success (min det J > 0), 1 when the run ended with
// inverted elements, 2 on usage or input errors.

#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "untangle/io.hpp"
#include "untangle/solver.hpp"

int main(int argc, char** argv) {
    using namespace untangle;

    CLI::App app{"Compute a foldover-free map of a triangle, quad or tetrahedral mesh"};
    RunConfig cfg;
    std::string locks, scheme = "auto", eps_rule = "heuristic", targets = "rest";
    bool quiet = false;

    app.add_option("--rest", cfg.rest_path, "Rest mesh (Medit .mesh)")->required();
    app.add_option("--init", cfg.init_path, "Initial map with the same connectivity (Medit .mesh)")->required();
    app.add_option("--locks", locks, "Lock list, one 0-based vertex index per line (overrides vertex references)");
    app.add_option("--lambda", cfg.solver.lambda, "Shape/area trade-off")->capture_default_str();
    app.add_option("--scheme", scheme, "quasi_newton | newton | auto")->capture_default_str();
    app.add_option("--eps-rule", eps_rule, "theory | heuristic")->capture_default_str();
    app.add_option("--targets", targets, "Target shapes: rest | regular")->capture_default_str();
    app.add_option("--out", cfg.out_mesh, "Output map (Medit .mesh)")->required();
    app.add_option("--report", cfg.out_report, "Output report (JSON)")->required();
    app.add_option("--threads", cfg.solver.threads, "Worker threads for element loops")->capture_default_str();
    app.add_option("--max-outer", cfg.solver.max_outer, "Maximum outer iterations")->capture_default_str();
    app.add_option("--max-inner", cfg.solver.lbfgs.max_iterations, "Maximum L-BFGS iterations per outer iteration")
        ->capture_default_str();
    app.add_flag("-q,--quiet", quiet, "Do not print the per-iteration trace");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!locks.empty()) cfg.locks_path = locks;
        cfg.solver.scheme = parse_scheme(scheme);
        cfg.solver.eps_rule = parse_eps_rule(eps_rule);
        cfg.targets = parse_target_policy(targets);
        cfg.validate();

        const MeshPair mesh = read_mesh_pair(cfg.rest_path, cfg.init_path, cfg.locks_path);
        const Instance inst = build_instance(mesh, cfg.targets);
        const UntangleResult result = untangle::untangle(inst, mesh.initial_map, cfg.solver);
        write_outputs(mesh, result, cfg);

        if (!quiet) {
            for (const IterationRecord& r : result.trace.records)
                std::printf("%4d %-12s eps %.3e  F %.6e -> %.6e  min det %+.3e  sigma %.3f  inner %d\n", r.k,
                            to_string(r.scheme).c_str(), r.eps, r.f_before, r.f_after, r.min_det, r.sigma,
                            r.inner_iterations);
        }
        std::printf("%s: min det %.4e, max stretch %.4e, %zu outer iterations, %.2f s\n",
                    result.success ? "success" : "FAILED", result.quality.min_det, result.quality.max_stretch,
                    result.trace.records.size(), result.wall_time_s);
        return result.success ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
