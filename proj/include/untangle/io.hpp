#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "untangle/mesh.hpp"
#include "untangle/solver.hpp"

namespace untangle {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& path, int line, const std::string& what);
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

// Contents of a Medit ASCII .mesh file. Planar meshes (triangles/quads
// with constant z) come back with dim == 2. When tetrahedra are present,
// triangles and quads are treated as boundary faces and dropped.
struct MeditMesh {
    int dim = 3;
    Eigen::VectorXd coords;          // vertex-major
    std::vector<int> vertex_refs;
    std::vector<Element> elements;   // 0-based
    std::vector<int> element_lines;  // source line of each element

    [[nodiscard]] int num_vertices() const noexcept { return int(vertex_refs.size()); }
};

[[nodiscard]] MeditMesh read_medit(const std::filesystem::path& path);

// Planar meshes are written with Dimension 3 and z = 0.
void write_medit(const std::filesystem::path& path, int dim, const Eigen::VectorXd& coords,
                 const std::vector<Element>& elements, const std::vector<bool>& locked = {});

// One 0-based vertex index per line; '#' starts a comment.
[[nodiscard]] std::vector<bool> read_lock_list(const std::filesystem::path& path, int num_vertices);

// Rest mesh + initial map with identical connectivity. Locks come from
// rest-mesh vertex references > 0 unless a lock list is given.
[[nodiscard]] MeshPair read_mesh_pair(const std::filesystem::path& rest, const std::filesystem::path& map,
                                      const std::optional<std::filesystem::path>& locks = std::nullopt);

struct RunConfig {
    std::filesystem::path rest_path;
    std::filesystem::path init_path;
    std::optional<std::filesystem::path> locks_path;
    std::filesystem::path out_mesh;
    std::filesystem::path out_report;
    TargetPolicy targets = TargetPolicy::rest_shape;
    SolverConfig solver;

    // Input files must exist, output directories must be writable.
    void validate() const;
};

[[nodiscard]] nlohmann::json trace_to_json(const IterationTrace& trace);
[[nodiscard]] nlohmann::json make_report(const UntangleResult& result, const RunConfig& config);

// Writes the optimized map (same connectivity as the input) and the JSON report.
void write_outputs(const MeshPair& mesh, const UntangleResult& result, const RunConfig& config);

}  // namespace untangle
