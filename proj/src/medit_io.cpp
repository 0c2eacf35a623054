#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "untangle/io.hpp"

namespace untangle {

ParseError::ParseError(const std::filesystem::path& path, int line, const std::string& what)
    : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

struct Token {
    std::string text;
    int line;
};

class Tokenizer {
public:
    explicit Tokenizer(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::string line;
        for (int n = 1; std::getline(in, line); ++n) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream ss(line);
            for (std::string t; ss >> t;) tokens_.push_back({t, n});
        }
    }

    [[nodiscard]] bool done() const { return pos_ >= tokens_.size(); }
    [[nodiscard]] int line() const {
        if (tokens_.empty()) return 0;
        return tokens_[std::min(pos_, tokens_.size() - 1)].line;
    }

    const Token& next(const char* expected) {
        if (done()) throw ParseError(path_, line(), std::string("unexpected end of file, expected ") + expected);
        return tokens_[pos_++];
    }

    template <class T>
    T number(const char* expected) {
        const Token& t = next(expected);
        T value{};
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(path_, t.line, std::string("expected ") + expected + ", got '" + t.text + "'");
        return value;
    }

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

struct RawElement {
    Element element;
    int line;
};

void read_elements(Tokenizer& tok, ElementKind kind, int nodes, std::vector<RawElement>& out) {
    const int header = tok.line();
    const long count = tok.number<long>("element count");
    if (count < 0) throw ParseError(tok.path(), header, "negative element count");
    for (long e = 0; e < count; ++e) {
        RawElement raw;
        raw.element.kind = kind;
        raw.line = tok.line();
        for (int i = 0; i < nodes; ++i) raw.element.v[i] = tok.number<int>("vertex index") - 1;
        (void)tok.number<long>("element reference");
        out.push_back(raw);
    }
}

void skip_records(Tokenizer& tok, int width) {
    const long count = tok.number<long>("record count");
    for (long i = 0; i < count * width; ++i) (void)tok.next("record entry");
}

}  // namespace

MeditMesh read_medit(const std::filesystem::path& path) {
    Tokenizer tok(path);
    int file_dim = 0;
    int vertices_line = 0;
    std::vector<double> xyz;
    std::vector<int> refs;
    std::vector<RawElement> tris, quads, tets;

    while (!tok.done()) {
        const Token& kw = tok.next("section keyword");
        const std::string key = lower(kw.text);
        if (key == "meshversionformatted") {
            (void)tok.number<int>("format version");
        } else if (key == "dimension") {
            file_dim = tok.number<int>("dimension");
            if (file_dim != 2 && file_dim != 3) throw ParseError(path, kw.line, "dimension must be 2 or 3");
        } else if (key == "vertices") {
            if (file_dim == 0) throw ParseError(path, kw.line, "Vertices section before Dimension");
            vertices_line = kw.line;
            const long n = tok.number<long>("vertex count");
            if (n < 0) throw ParseError(path, kw.line, "negative vertex count");
            for (long v = 0; v < n; ++v) {
                for (int c = 0; c < 3; ++c) xyz.push_back(c < file_dim ? tok.number<double>("coordinate") : 0.0);
                refs.push_back(tok.number<int>("vertex reference"));
            }
        } else if (key == "triangles") {
            read_elements(tok, ElementKind::triangle, 3, tris);
        } else if (key == "quadrilaterals") {
            read_elements(tok, ElementKind::quad, 4, quads);
        } else if (key == "tetrahedra") {
            read_elements(tok, ElementKind::tetrahedron, 4, tets);
        } else if (key == "edges") {
            skip_records(tok, 3);
        } else if (key == "corners" || key == "requiredvertices" || key == "ridges") {
            skip_records(tok, 1);
        } else if (key == "end") {
            break;
        } else {
            throw ParseError(path, kw.line, "unsupported section '" + kw.text + "'");
        }
    }

    MeditMesh mesh;
    mesh.vertex_refs = refs;
    const int nv = int(refs.size());

    std::vector<RawElement> raw;
    if (!tets.empty()) {
        if (file_dim != 3) throw ParseError(path, tets.front().line, "tetrahedra in a 2D file");
        mesh.dim = 3;
        raw = std::move(tets);
    } else {
        mesh.dim = 2;
        raw = std::move(tris);
        raw.insert(raw.end(), quads.begin(), quads.end());
    }
    if (raw.empty()) throw ParseError(path, tok.line(), "no triangles, quadrilaterals or tetrahedra");

    for (const RawElement& r : raw) {
        for (int i = 0; i < r.element.size(); ++i)
            if (r.element.v[i] < 0 || r.element.v[i] >= nv)
                throw ParseError(path, r.line, "vertex index " + std::to_string(r.element.v[i] + 1) +
                                                   " out of range 1.." + std::to_string(nv));
        mesh.elements.push_back(r.element);
        mesh.element_lines.push_back(r.line);
    }

    mesh.coords.resize(std::ptrdiff_t(nv) * mesh.dim);
    if (mesh.dim == 2 && nv > 0) {
        double scale = 1.0;
        for (double x : xyz) scale = std::max(scale, std::abs(x));
        const double z0 = xyz[2];
        for (int v = 0; v < nv; ++v)
            if (std::abs(xyz[3 * v + 2] - z0) > 1e-12 * scale)
                throw ParseError(path, vertices_line, "planar mesh has non-constant z (vertex " +
                                                          std::to_string(v + 1) + ")");
    }
    for (int v = 0; v < nv; ++v)
        for (int c = 0; c < mesh.dim; ++c) mesh.coords(std::ptrdiff_t(v) * mesh.dim + c) = xyz[3 * v + c];
    return mesh;
}

void write_medit(const std::filesystem::path& path, int dim, const Eigen::VectorXd& coords,
                 const std::vector<Element>& elements, const std::vector<bool>& locked) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const Eigen::Index nv = coords.size() / dim;
    out << "MeshVersionFormatted 2\nDimension 3\n\nVertices\n" << nv << '\n';
    out << std::setprecision(17);
    for (Eigen::Index v = 0; v < nv; ++v) {
        for (int c = 0; c < 3; ++c) out << (c < dim ? coords(v * dim + c) : 0.0) << ' ';
        out << ((std::size_t(v) < locked.size() && locked[v]) ? 1 : 0) << '\n';
    }
    auto section = [&](ElementKind kind, const char* name) {
        const auto n = std::count_if(elements.begin(), elements.end(), [&](const Element& e) { return e.kind == kind; });
        if (n == 0) return;
        out << '\n' << name << '\n' << n << '\n';
        for (const Element& e : elements) {
            if (e.kind != kind) continue;
            for (int i = 0; i < e.size(); ++i) out << e.v[i] + 1 << ' ';
            out << "0\n";
        }
    };
    section(ElementKind::triangle, "Triangles");
    section(ElementKind::quad, "Quadrilaterals");
    section(ElementKind::tetrahedron, "Tetrahedra");
    out << "\nEnd\n";
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

std::vector<bool> read_lock_list(const std::filesystem::path& path, int num_vertices) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<bool> locked(num_vertices, false);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string t;
        if (!(ss >> t)) continue;
        long idx = -1;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
        if (ec != std::errc() || ptr != t.data() + t.size()) throw ParseError(path, n, "expected a vertex index, got '" + t + "'");
        if (idx < 0 || idx >= num_vertices)
            throw ParseError(path, n, "vertex index " + std::to_string(idx) + " out of range");
        if (std::string extra; ss >> extra) throw ParseError(path, n, "trailing token '" + extra + "'");
        locked[idx] = true;
    }
    return locked;
}

MeshPair read_mesh_pair(const std::filesystem::path& rest, const std::filesystem::path& map,
                        const std::optional<std::filesystem::path>& locks) {
    const MeditMesh r = read_medit(rest);
    const MeditMesh m = read_medit(map);
    if (m.dim != r.dim) throw ParseError(map, 1, "dimension differs from the rest mesh");
    if (m.num_vertices() != r.num_vertices())
        throw ParseError(map, 1, "connectivity mismatch: " + std::to_string(m.num_vertices()) + " vertices, rest mesh has " +
                                     std::to_string(r.num_vertices()));
    if (m.elements.size() != r.elements.size())
        throw ParseError(map, m.element_lines.empty() ? 1 : m.element_lines.front(),
                         "connectivity mismatch: " + std::to_string(m.elements.size()) + " elements, rest mesh has " +
                             std::to_string(r.elements.size()));
    for (std::size_t e = 0; e < r.elements.size(); ++e) {
        const Element &a = r.elements[e], &b = m.elements[e];
        if (a.kind != b.kind || a.v != b.v)
            throw ParseError(map, m.element_lines[e], "connectivity mismatch at element " + std::to_string(e + 1));
    }

    MeshPair pair;
    pair.dim = r.dim;
    pair.rest = r.coords;
    pair.initial_map = m.coords;
    pair.elements = r.elements;
    if (locks) {
        pair.locked = read_lock_list(*locks, r.num_vertices());
    } else {
        pair.locked.resize(r.num_vertices());
        for (int v = 0; v < r.num_vertices(); ++v) pair.locked[v] = r.vertex_refs[v] > 0;
    }
    return pair;
}

}  // namespace untangle
