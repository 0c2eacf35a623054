#include <fstream>

#include "untangle/io.hpp"

namespace untangle {

namespace {

void check_writable_parent(const std::filesystem::path& p) {
    if (p.empty()) throw std::invalid_argument("missing output path");
    const auto dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
    if (!std::filesystem::is_directory(dir))
        throw std::invalid_argument("output directory " + dir.string() + " does not exist");
}

void check_exists(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw std::invalid_argument("input file " + p.string() + " does not exist");
}

}  // namespace

void RunConfig::validate() const {
    check_exists(rest_path);
    check_exists(init_path);
    if (locks_path) check_exists(*locks_path);
    check_writable_parent(out_mesh);
    check_writable_parent(out_report);
    solver.validate();
}

nlohmann::json trace_to_json(const IterationTrace& trace) {
    nlohmann::json out = nlohmann::json::array();
    for (const IterationRecord& r : trace.records) {
        nlohmann::json j = {
            {"k", r.k},
            {"scheme", to_string(r.scheme)},
            {"eps", r.eps},
            {"eps_next", r.eps_next},
            {"f_before", r.f_before},
            {"f_after", r.f_after},
            {"f_next", r.f_next},
            {"min_det", r.min_det},
            {"sigma", r.sigma},
            {"sigma_raw", r.sigma_raw},
            {"inner_iterations", r.inner_iterations},
            {"inner_flagged", r.inner_flagged},
            {"cg_fallback", r.cg_fallback},
            {"descent_certified", r.descent_certified},
            {"wall_time_s", r.wall_time_s},
        };
        if (r.suff_cond_checked) j["suff_cond"] = r.suff_cond_holds;
        if (r.non_growth_checked) j["non_growth"] = r.non_growth_holds;
        out.push_back(std::move(j));
    }
    return out;
}

nlohmann::json make_report(const UntangleResult& result, const RunConfig& config) {
    const QualityReport& q = result.quality;
    const SolverConfig& s = config.solver;
    return {
        {"success", result.success},
        {"min_det", q.min_det},
        {"max_stretch", q.max_stretch},
        {"min_det_p95", q.min_det_p95},
        {"max_stretch_p95", q.max_stretch_p95},
        {"iterations", result.trace.records.size()},
        {"inner_iterations", result.inner_iterations},
        {"wall_time_s", result.wall_time_s},
        {"num_measurements", q.num_measurements},
        {"num_inverted", q.num_inverted},
        {"final_eps", result.state.eps},
        {"per_element_det", q.det},
        {"trace", trace_to_json(result.trace)},
        {"config",
         {
             {"rest", config.rest_path.string()},
             {"init", config.init_path.string()},
             {"locks", config.locks_path ? config.locks_path->string() : ""},
             {"lambda", s.lambda},
             {"scheme", to_string(s.scheme)},
             {"eps_rule", to_string(s.eps_rule)},
             {"targets", to_string(config.targets)},
             {"max_outer", s.max_outer},
             {"threads", s.threads},
         }},
    };
}

void write_outputs(const MeshPair& mesh, const UntangleResult& result, const RunConfig& config) {
    write_medit(config.out_mesh, mesh.dim, result.state.U, mesh.elements, mesh.locked);
    std::ofstream out(config.out_report);
    if (!out) throw std::runtime_error("cannot write " + config.out_report.string());
    out << make_report(result, config).dump(2) << '\n';
    if (!out) throw std::runtime_error("error while writing " + config.out_report.string());
}

}  // namespace untangle
