#include "amfem/mesh.hpp"

#include "amfem/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace amfem {

namespace {

std::uint64_t edge_key(int a, int b) {
    auto lo = static_cast<std::uint64_t>(std::min(a, b));
    auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

double cross(const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); }

double signed_area_of(const Point& a, const Point& b, const Point& c) {
    return 0.5 * cross(b - a, c - a);
}

// Local edge i is opposite local vertex i, traversed counterclockwise.
std::array<int, 2> local_edge(const Triangle& t, int i) {
    return {t[static_cast<std::size_t>((i + 1) % 3)], t[static_cast<std::size_t>((i + 2) % 3)]};
}

struct PointHash {
    std::size_t operator()(const std::pair<double, double>& p) const noexcept {
        return std::hash<double>{}(p.first) ^ (std::hash<double>{}(p.second) * 1000003u);
    }
};

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
           std::vector<int> generation, std::vector<int> ancestor)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      generation_(std::move(generation)),
      ancestor_(std::move(ancestor)) {
    if (generation_.empty()) generation_.assign(triangles_.size(), 0);
    if (ancestor_.empty()) {
        ancestor_.resize(triangles_.size());
        std::iota(ancestor_.begin(), ancestor_.end(), 0);
    }
    validate();
}

Mesh Mesh::with_longest_edge_tags(std::vector<Point> vertices, std::vector<Triangle> triangles) {
    for (auto& t : triangles) {
        for (int v : t) {
            if (v < 0 || static_cast<std::size_t>(v) >= vertices.size())
                throw ValidationError("triangle references vertex " + std::to_string(v) +
                                      " out of range");
        }
        if (signed_area_of(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0) std::swap(t[1], t[2]);
        // Edge opposite local vertex i has length |v_{i+1} - v_{i+2}|.
        int best = 0;
        double best_len = -1.0;
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(t, i);
            const double len = (vertices[p] - vertices[q]).squaredNorm();
            const double tol = 1e-12 * std::max(len, best_len);
            if (len > best_len + tol ||
                (std::abs(len - best_len) <= tol && t[static_cast<std::size_t>(i)] < t[static_cast<std::size_t>(best)])) {
                best = i;
                best_len = len;
            }
        }
        // Rotate so the opposite vertex of the reference edge comes last.
        std::rotate(t.begin(), t.begin() + (best + 1) % 3, t.end());
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

void Mesh::validate() const {
    if (generation_.size() != triangles_.size() || ancestor_.size() != triangles_.size())
        throw ValidationError("generation/ancestor arrays must have one entry per triangle");
    const auto nv = static_cast<int>(vertices_.size());
    std::unordered_map<std::uint64_t, std::vector<std::pair<int, int>>> directed;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int v : tri) {
            if (v < 0 || v >= nv)
                throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                                      std::to_string(v) + " out of range");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ValidationError("triangle " + std::to_string(t) + " repeats a vertex");
        if (!(signed_area(static_cast<int>(t)) > 0.0))
            throw ValidationError("triangle " + std::to_string(t) + " is not positively oriented");
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(tri, i);
            directed[edge_key(p, q)].emplace_back(p, q);
        }
    }
    std::unordered_map<std::pair<double, double>, int, PointHash> vertex_at;
    for (int v = 0; v < nv; ++v) vertex_at.emplace(std::make_pair(vertices_[v].x(), vertices_[v].y()), v);
    for (const auto& [key, uses] : directed) {
        if (uses.size() > 2)
            throw StructuralError("edge shared by more than two triangles");
        if (uses.size() == 2 && uses[0].first != uses[1].second)
            throw StructuralError("adjacent triangles have inconsistent orientation");
        if (uses.size() == 1) {
            const Point mid = 0.5 * (vertices_[uses[0].first] + vertices_[uses[0].second]);
            if (vertex_at.contains({mid.x(), mid.y()}))
                throw StructuralError("hanging vertex at midpoint of edge (" +
                                      std::to_string(uses[0].first) + ", " +
                                      std::to_string(uses[0].second) + ")");
        }
    }
}

double Mesh::signed_area(int t) const {
    const auto& tri = triangle(t);
    return signed_area_of(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
}

double Mesh::area(int t) const { return std::abs(signed_area(t)); }

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) sum += area(static_cast<int>(t));
    return sum;
}

double Mesh::size(int t) const { return std::sqrt(area(t)); }

Point Mesh::centroid(int t) const {
    const auto& tri = triangle(t);
    return (vertex(tri[0]) + vertex(tri[1]) + vertex(tri[2])) / 3.0;
}

double Mesh::min_angle(int t) const {
    const auto& tri = triangle(t);
    double best = std::numbers::pi;
    for (int i = 0; i < 3; ++i) {
        const Point& p = vertex(tri[static_cast<std::size_t>(i)]);
        const Point u = vertex(tri[static_cast<std::size_t>((i + 1) % 3)]) - p;
        const Point w = vertex(tri[static_cast<std::size_t>((i + 2) % 3)]) - p;
        best = std::min(best, std::atan2(std::abs(cross(u, w)), u.dot(w)));
    }
    return best;
}

double Mesh::min_angle() const {
    double best = std::numbers::pi;
    for (std::size_t t = 0; t < triangles_.size(); ++t) best = std::min(best, min_angle(static_cast<int>(t)));
    return best;
}

int Mesh::max_similarity_classes() const {
    std::map<int, std::set<std::pair<long long, long long>>> classes;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        std::array<double, 3> len{};
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(tri, i);
            len[static_cast<std::size_t>(i)] = (vertex(p) - vertex(q)).norm();
        }
        std::sort(len.begin(), len.end());
        // Shape signature up to similarity (and reflection), quantized.
        const auto r0 = std::llround(len[0] / len[2] * 1e8);
        const auto r1 = std::llround(len[1] / len[2] * 1e8);
        classes[ancestor_[t]].emplace(r0, r1);
    }
    std::size_t worst = 0;
    for (const auto& [anc, set] : classes) worst = std::max(worst, set.size());
    return static_cast<int>(worst);
}

std::vector<std::array<int, 2>> Mesh::boundary_edges() const {
    std::map<std::uint64_t, int> count;
    for (const auto& tri : triangles_)
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(tri, i);
            ++count[edge_key(p, q)];
        }
    std::vector<std::array<int, 2>> out;
    for (const auto& [key, c] : count)
        if (c == 1) out.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)});
    return out;
}

namespace {

Mesh structured_mesh(int n, double x0, double y0, double width, int cells_x, int cells_y,
                     const std::function<bool(int, int)>& keep_cell) {
    const double h = width / n;
    std::vector<int> index(static_cast<std::size_t>((cells_x + 1) * (cells_y + 1)), -1);
    auto id = [&](int i, int j) -> int& { return index[static_cast<std::size_t>(j * (cells_x + 1) + i)]; };
    std::vector<Point> vertices;
    std::vector<Triangle> triangles;
    for (int j = 0; j < cells_y; ++j)
        for (int i = 0; i < cells_x; ++i)
            if (keep_cell(i, j)) id(i, j) = id(i + 1, j) = id(i, j + 1) = id(i + 1, j + 1) = 0;
    for (int j = 0; j <= cells_y; ++j)
        for (int i = 0; i <= cells_x; ++i)
            if (id(i, j) == 0) {
                id(i, j) = static_cast<int>(vertices.size());
                vertices.emplace_back(x0 + i * h, y0 + j * h);
            }
    for (int j = 0; j < cells_y; ++j)
        for (int i = 0; i < cells_x; ++i) {
            if (!keep_cell(i, j)) continue;
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    return Mesh::with_longest_edge_tags(std::move(vertices), std::move(triangles));
}

}  // namespace

Mesh generate_unit_square(int n) {
    if (n < 1) throw ValidationError("unit square subdivision count must be >= 1");
    return structured_mesh(n, 0.0, 0.0, 1.0, n, n, [](int, int) { return true; });
}

Mesh generate_lshape(int n) {
    if (n < 1) throw ValidationError("L-shape subdivision count must be >= 1");
    // Cells of (-1,1)^2 with width 1/n; drop the quadrant x >= 0, y < 0.
    return structured_mesh(n, -1.0, -1.0, 1.0, 2 * n, 2 * n,
                           [n](int i, int j) { return !(i >= n && j < n); });
}

namespace {

class Bisector {
public:
    explicit Bisector(const Mesh& mesh)
        : vertices_(mesh.vertices()),
          triangles_(mesh.triangles()),
          generation_(mesh.generations()),
          ancestor_(mesh.ancestors()),
          alive_(mesh.num_triangles(), 1) {
        parent_.resize(mesh.num_triangles());
        std::iota(parent_.begin(), parent_.end(), 0);
        for (std::size_t t = 0; t < triangles_.size(); ++t) attach(static_cast<int>(t));
    }

    void refine(int t) {
        const std::size_t cap = std::max<std::size_t>(count_alive_, 1);
        std::vector<int> stack{t};
        while (!stack.empty()) {
            const int cur = stack.back();
            if (!alive_[static_cast<std::size_t>(cur)]) {
                stack.pop_back();
                continue;
            }
            const auto& tri = triangles_[static_cast<std::size_t>(cur)];
            const auto ref = edge_key(tri[0], tri[1]);
            const int nb = neighbor(cur, ref);
            if (nb >= 0) {
                const auto& ntri = triangles_[static_cast<std::size_t>(nb)];
                if (edge_key(ntri[0], ntri[1]) != ref) {
                    if (stack.size() > cap)
                        throw StructuralError("newest vertex bisection closure does not terminate "
                                              "(incompatible reference edges)");
                    stack.push_back(nb);
                    continue;
                }
            }
            const int m = midpoint(tri[0], tri[1]);
            bisect(cur, m);
            if (nb >= 0) bisect(nb, m);
            stack.pop_back();
        }
    }

    bool alive(int t) const { return alive_[static_cast<std::size_t>(t)] != 0; }

    RefineResult finish() && {
        std::vector<Triangle> tris;
        std::vector<int> gen, anc, par;
        tris.reserve(count_alive_);
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            if (!alive_[t]) continue;
            tris.push_back(triangles_[t]);
            gen.push_back(generation_[t]);
            anc.push_back(ancestor_[t]);
            par.push_back(parent_[t]);
        }
        return {Mesh(std::move(vertices_), std::move(tris), std::move(gen), std::move(anc)),
                std::move(par)};
    }

private:
    void attach(int t) {
        const auto& tri = triangles_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(tri, i);
            auto& slot = edges_.try_emplace(edge_key(p, q), std::array<int, 2>{-1, -1}).first->second;
            (slot[0] < 0 ? slot[0] : slot[1]) = t;
        }
        ++count_alive_;
    }

    void detach(int t) {
        const auto& tri = triangles_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(tri, i);
            auto it = edges_.find(edge_key(p, q));
            auto& slot = it->second;
            if (slot[0] == t) {
                slot[0] = slot[1];
                slot[1] = -1;
            } else {
                slot[1] = -1;
            }
            if (slot[0] < 0) edges_.erase(it);
        }
        alive_[static_cast<std::size_t>(t)] = 0;
        --count_alive_;
    }

    int neighbor(int t, std::uint64_t key) const {
        const auto& slot = edges_.at(key);
        return slot[0] == t ? slot[1] : slot[0];
    }

    int midpoint(int a, int b) {
        auto [it, inserted] = midpoints_.try_emplace(edge_key(a, b), static_cast<int>(vertices_.size()));
        if (inserted) vertices_.push_back(0.5 * (vertices_[static_cast<std::size_t>(a)] +
                                                 vertices_[static_cast<std::size_t>(b)]));
        return it->second;
    }

    void bisect(int t, int m) {
        const auto idx = static_cast<std::size_t>(t);
        const Triangle tri = triangles_[idx];
        detach(t);
        const auto [a, b, c] = tri;
        for (const Triangle child : {Triangle{c, a, m}, Triangle{b, c, m}}) {
            triangles_.push_back(child);
            generation_.push_back(generation_[idx] + 1);
            ancestor_.push_back(ancestor_[idx]);
            parent_.push_back(parent_[idx]);
            alive_.push_back(1);
            attach(static_cast<int>(triangles_.size() - 1));
        }
    }

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<int> generation_;
    std::vector<int> ancestor_;
    std::vector<int> parent_;
    std::vector<char> alive_;
    std::size_t count_alive_ = 0;
    std::unordered_map<std::uint64_t, std::array<int, 2>> edges_{};
    std::unordered_map<std::uint64_t, int> midpoints_;
};

}  // namespace

RefineResult refine_with_parents(const Mesh& mesh, const MarkSet& marked) {
    const auto n = static_cast<int>(mesh.num_triangles());
    MarkSet sorted = marked;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (int t : sorted)
        if (t < 0 || t >= n)
            throw ValidationError("marked index " + std::to_string(t) + " is not a triangle of the mesh");
    if (sorted.empty()) {
        std::vector<int> parent(mesh.num_triangles());
        std::iota(parent.begin(), parent.end(), 0);
        return {mesh, std::move(parent)};
    }
    Bisector bisector(mesh);
    for (int t : sorted)
        if (bisector.alive(t)) bisector.refine(t);
    return std::move(bisector).finish();
}

Mesh refine(const Mesh& mesh, const MarkSet& marked) { return refine_with_parents(mesh, marked).mesh; }

Mesh refine_uniform(const Mesh& mesh, int times) {
    Mesh out = mesh;
    for (int i = 0; i < times; ++i) {
        MarkSet all(out.num_triangles());
        std::iota(all.begin(), all.end(), 0);
        out = refine(out, all);
    }
    return out;
}

std::size_t EdgeTable::num_boundary() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.boundary; }));
}

EdgeTable edge_tables(const Mesh& mesh) {
    std::map<std::uint64_t, std::vector<std::pair<int, int>>> uses;  // key -> (triangle, local edge)
    const auto nt = static_cast<int>(mesh.num_triangles());
    for (int t = 0; t < nt; ++t)
        for (int i = 0; i < 3; ++i) {
            auto [p, q] = local_edge(mesh.triangle(t), i);
            uses[edge_key(p, q)].emplace_back(t, i);
        }
    EdgeTable table;
    table.local.resize(mesh.num_triangles());
    table.edges.reserve(uses.size());
    for (const auto& [key, list] : uses) {
        if (list.size() > 2) throw StructuralError("nonconforming mesh: edge shared by more than two triangles");
        Edge e;
        e.vertices = {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)};
        const Point d = mesh.vertex(e.vertices[1]) - mesh.vertex(e.vertices[0]);
        e.length = d.norm();
        e.tangent = d / e.length;
        e.normal = Point(e.tangent.y(), -e.tangent.x());
        e.plus = list[0].first;
        if (list.size() == 2) {
            e.minus = list[1].first;
            if (e.minus < e.plus) std::swap(e.plus, e.minus);
        }
        e.boundary = list.size() == 1;
        const int id = static_cast<int>(table.edges.size());
        for (auto [t, i] : list) table.local[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = id;
        table.edges.push_back(e);
    }
    return table;
}

namespace {

// Barycentric containment test with a relative tolerance.
bool contains(const Mesh& mesh, int t, const Point& p, double tol) {
    const auto& tri = mesh.triangle(t);
    const Point& a = mesh.vertex(tri[0]);
    const Point& b = mesh.vertex(tri[1]);
    const Point& c = mesh.vertex(tri[2]);
    const double area2 = cross(b - a, c - a);
    const double l0 = cross(b - p, c - p) / area2;
    const double l1 = cross(c - p, a - p) / area2;
    const double l2 = 1.0 - l0 - l1;
    return l0 >= -tol && l1 >= -tol && l2 >= -tol;
}

class BucketGrid {
public:
    explicit BucketGrid(const Mesh& mesh) : mesh_(mesh) {
        lo_ = hi_ = mesh.vertex(0);
        for (const auto& v : mesh.vertices()) {
            lo_ = lo_.cwiseMin(v);
            hi_ = hi_.cwiseMax(v);
        }
        cells_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
        const Point span = (hi_ - lo_).cwiseMax(Point::Constant(1e-300));
        scale_ = Point(cells_ / span.x(), cells_ / span.y());
        buckets_.resize(static_cast<std::size_t>(cells_ * cells_));
        for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
            const auto& tri = mesh.triangle(t);
            Point bl = mesh.vertex(tri[0]), tr = bl;
            for (int v : tri) {
                bl = bl.cwiseMin(mesh.vertex(v));
                tr = tr.cwiseMax(mesh.vertex(v));
            }
            auto [i0, j0] = cell(bl);
            auto [i1, j1] = cell(tr);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * cells_ + i)].push_back(t);
        }
    }

    std::pair<int, int> cell(const Point& p) const {
        auto clampi = [this](double x) { return std::clamp(static_cast<int>(std::floor(x)), 0, cells_ - 1); };
        return {clampi((p.x() - lo_.x()) * scale_.x()), clampi((p.y() - lo_.y()) * scale_.y())};
    }

    const std::vector<int>& candidates(const Point& p) const {
        auto [i, j] = cell(p);
        return buckets_[static_cast<std::size_t>(j * cells_ + i)];
    }

private:
    const Mesh& mesh_;
    Point lo_, hi_, scale_;
    int cells_ = 1;
    std::vector<std::vector<int>> buckets_;
};

}  // namespace

std::vector<int> locate_in_coarse(const Mesh& coarse, const Mesh& fine) {
    if (coarse.num_triangles() == 0 || fine.num_triangles() == 0)
        throw StructuralError("cannot relate empty meshes");
    const BucketGrid grid(coarse);
    const auto nf = static_cast<int>(fine.num_triangles());
    std::vector<int> owner(fine.num_triangles(), -1);
    std::vector<double> covered(coarse.num_triangles(), 0.0);
    for (int t = 0; t < nf; ++t) {
        const Point c = fine.centroid(t);
        for (int k : grid.candidates(c)) {
            if (!contains(coarse, k, c, 1e-12)) continue;
            const auto& tri = fine.triangle(t);
            if (std::all_of(tri.begin(), tri.end(), [&](int v) { return contains(coarse, k, fine.vertex(v), 1e-10); })) {
                owner[static_cast<std::size_t>(t)] = k;
                break;
            }
        }
        if (owner[static_cast<std::size_t>(t)] < 0)
            throw StructuralError("fine triangle " + std::to_string(t) + " is not contained in any coarse triangle");
        covered[static_cast<std::size_t>(owner[static_cast<std::size_t>(t)])] += fine.area(t);
    }
    for (int k = 0; k < static_cast<int>(coarse.num_triangles()); ++k)
        if (std::abs(covered[static_cast<std::size_t>(k)] - coarse.area(k)) > 1e-10 * coarse.area(k))
            throw StructuralError("coarse triangle " + std::to_string(k) + " is not tiled by the fine mesh");
    return owner;
}

std::vector<int> refined_elements(const Mesh& coarse, const Mesh& fine) {
    const auto owner = locate_in_coarse(coarse, fine);
    std::vector<int> count(coarse.num_triangles(), 0);
    for (int k : owner) ++count[static_cast<std::size_t>(k)];
    std::vector<int> out;
    for (std::size_t k = 0; k < count.size(); ++k)
        if (count[k] != 1) out.push_back(static_cast<int>(k));
    return out;
}

std::vector<int> refined_neighborhood(const Mesh& coarse, const Mesh& fine) {
    const auto refined = refined_elements(coarse, fine);
    std::vector<char> touched(coarse.num_vertices(), 0);
    for (int k : refined)
        for (int v : coarse.triangle(k)) touched[static_cast<std::size_t>(v)] = 1;
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(coarse.num_triangles()); ++k) {
        const auto& tri = coarse.triangle(k);
        if (std::any_of(tri.begin(), tri.end(), [&](int v) { return touched[static_cast<std::size_t>(v)] != 0; }))
            out.push_back(k);
    }
    return out;
}

std::string mesh_to_json(const Mesh& mesh) {
    nlohmann::json j;
    auto& verts = j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices()) verts.push_back({v.x(), v.y()});
    auto& tris = j["triangles"] = nlohmann::json::array();
    for (const auto& t : mesh.triangles()) tris.push_back({t[0], t[1], t[2]});
    auto& bnd = j["boundary"] = nlohmann::json::array();
    for (const auto& e : mesh.boundary_edges()) bnd.push_back({e[0], e[1]});
    j["generation"] = mesh.generations();
    j["ancestor"] = mesh.ancestors();
    return j.dump();
}

Mesh mesh_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("mesh JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("mesh JSON: top level must be an object");
    static const std::set<std::string> known{"vertices", "triangles", "boundary", "generation", "ancestor"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ValidationError("mesh JSON: unknown key '" + key + "'");
    if (!j.contains("vertices") || !j.contains("triangles"))
        throw ValidationError("mesh JSON: 'vertices' and 'triangles' are required");
    try {
        std::vector<Point> vertices;
        for (const auto& v : j.at("vertices")) {
            if (v.size() != 2) throw ValidationError("mesh JSON: vertices must be [x, y] pairs");
            vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        std::vector<Triangle> triangles;
        for (const auto& t : j.at("triangles")) {
            if (t.size() != 3) throw ValidationError("mesh JSON: triangles must be [a, b, c] triples");
            triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
        }
        std::vector<int> generation, ancestor;
        if (j.contains("generation")) generation = j["generation"].get<std::vector<int>>();
        if (j.contains("ancestor")) ancestor = j["ancestor"].get<std::vector<int>>();
        Mesh mesh(std::move(vertices), std::move(triangles), std::move(generation), std::move(ancestor));
        if (j.contains("boundary")) {
            std::set<std::array<int, 2>> given;
            for (const auto& e : j["boundary"]) {
                if (e.size() != 2) throw ValidationError("mesh JSON: boundary entries must be [v0, v1] pairs");
                const int a = e[0].get<int>(), b = e[1].get<int>();
                given.insert({std::min(a, b), std::max(a, b)});
            }
            const auto actual = mesh.boundary_edges();
            if (given != std::set<std::array<int, 2>>(actual.begin(), actual.end()))
                throw ValidationError("mesh JSON: 'boundary' does not match the triangulation's boundary");
        }
        return mesh;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("mesh JSON: ") + e.what());
    }
}

Mesh read_mesh_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mesh file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return mesh_from_json(buffer.str());
}

void write_mesh_json(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write mesh file " + path.string());
    out << mesh_to_json(mesh) << '\n';
}

}  // namespace amfem
