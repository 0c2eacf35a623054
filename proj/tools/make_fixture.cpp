// Writes one of the built-in test problems as a rest/initial .mesh pair.
// Locked vertices carry reference 1 in both files.

#include <exception>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "untangle/fixtures.hpp"
#include "untangle/io.hpp"

int main(int argc, char** argv) {
    using namespace untangle;

    CLI::App app{"Generate a test fixture"};
    std::string name;
    FixtureParams params;
    std::string rest, init, locks;

    app.add_option("--name", name, "point_swap_square | triangle_fan_12 | cavity_cube | stretched_bar")->required();
    app.add_option("--n", params.n, "Cells per side (bar: cells along x)")->capture_default_str();
    app.add_option("--angle", params.angle_deg, "Inner boundary rotation in degrees (cavity_cube)")->capture_default_str();
    app.add_option("--ny", params.ny, "Cells across the bar (stretched_bar)")->capture_default_str();
    app.add_option("--factor", params.factor, "Stretch factor (stretched_bar)")->capture_default_str();
    app.add_option("--rest", rest, "Output rest mesh")->required();
    app.add_option("--init", init, "Output initial map")->required();
    app.add_option("--locks", locks, "Also write the lock list");

    CLI11_PARSE(app, argc, argv);

    try {
        const Fixture fx = generate_fixture(name, params);
        const MeshPair& m = fx.mesh;
        write_medit(rest, m.dim, m.rest, m.elements, m.locked);
        write_medit(init, m.dim, m.initial_map, m.elements, m.locked);
        if (!locks.empty()) {
            std::ofstream out(locks);
            out << "# locked vertices of " << fx.name << '\n';
            for (int v = 0; v < m.num_vertices(); ++v)
                if (m.locked[v]) out << v << '\n';
        }
        std::cout << fx.name << ": " << m.num_vertices() << " vertices, " << m.elements.size()
                  << " elements, targets " << to_string(fx.policy) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
