#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace amfem {

using Point = Eigen::Vector2d;

/// Vertex triple (a, b, c), counterclockwise. The edge (a, b) is the
/// reference (refinement) edge and c is the newest vertex.
using Triangle = std::array<int, 3>;

/// Sorted set of triangle indices selected for refinement.
using MarkSet = std::vector<int>;

/// Conforming 2D triangulation carrying newest-vertex-bisection tags.
///
/// Meshes are immutable values: refinement returns a new mesh. Each triangle
/// remembers how many times it has been bisected (`generation`) and which
/// triangle of the initial mesh it descends from (`ancestor`).
class Mesh {
public:
    Mesh() = default;

    /// Builds a mesh taking vertex order and reference edges as given.
    /// Validates indices, orientation and conformity.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::vector<int> generation = {}, std::vector<int> ancestor = {});

    /// Builds an initial mesh: orients every triangle counterclockwise and
    /// tags its longest edge as reference edge (ties broken by the lowest
    /// opposite-vertex index).
    static Mesh with_longest_edge_tags(std::vector<Point> vertices,
                                       std::vector<Triangle> triangles);

    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }
    int generation(int t) const { return generation_[static_cast<std::size_t>(t)]; }
    int ancestor(int t) const { return ancestor_[static_cast<std::size_t>(t)]; }
    const std::vector<int>& generations() const noexcept { return generation_; }
    const std::vector<int>& ancestors() const noexcept { return ancestor_; }

    double area(int t) const;
    double signed_area(int t) const;
    double total_area() const;
    /// h_K = |K|^{1/2}.
    double size(int t) const;
    Point centroid(int t) const;
    /// Smallest interior angle of triangle t, in radians.
    double min_angle(int t) const;
    /// Smallest interior angle over the mesh, in radians.
    double min_angle() const;

    /// Number of geometrically distinct similarity classes among the
    /// descendants of each initial triangle; returns the maximum over ancestors.
    int max_similarity_classes() const;

    /// Boundary edges as sorted vertex pairs (lo, hi).
    std::vector<std::array<int, 2>> boundary_edges() const;

    friend bool operator==(const Mesh&, const Mesh&) = default;

private:
    void validate() const;

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<int> generation_;
    std::vector<int> ancestor_;
};

/// Unit square [0,1]^2 split into n x n cells, each cut along its
/// (i,j)-(i+1,j+1) diagonal. 2n^2 triangles.
Mesh generate_unit_square(int n);

/// L-shaped domain (-1,1)^2 \ [0,1)x(-1,0) with 3n^2 cells, 6n^2 triangles.
/// The reentrant corner sits at the origin.
Mesh generate_lshape(int n);

struct RefineResult {
    Mesh mesh;
    /// parent[i] is the index in the input mesh of the triangle that new
    /// triangle i lies in.
    std::vector<int> parent;
};

/// Newest vertex bisection with conformity closure. Every marked triangle is
/// bisected at least once; neighbors are bisected recursively until the
/// shared reference edges match. Throws ValidationError on bad indices and
/// StructuralError if the closure does not terminate.
RefineResult refine_with_parents(const Mesh& mesh, const MarkSet& marked);

Mesh refine(const Mesh& mesh, const MarkSet& marked);

/// Marks every triangle once (each triangle bisected exactly once when the
/// mesh is compatibly tagged).
Mesh refine_uniform(const Mesh& mesh, int times = 1);

struct Edge {
    std::array<int, 2> vertices;  ///< lo < hi; the edge points from lo to hi
    double length = 0.0;
    /// Adjacent triangles: plus has the smaller index; minus is -1 on the boundary.
    int plus = -1;
    int minus = -1;
    bool boundary = false;
    Point tangent;  ///< unit vector from lo to hi
    Point normal;   ///< tangent rotated clockwise: (t_y, -t_x)
};

struct EdgeTable {
    /// Sorted lexicographically by (lo, hi).
    std::vector<Edge> edges;
    /// Local edge i of triangle t is the edge opposite local vertex i and
    /// maps to edges[local[t][i]].
    std::vector<std::array<int, 3>> local;

    std::size_t num_boundary() const;
};

/// Edge connectivity. Throws StructuralError on nonconforming meshes.
EdgeTable edge_tables(const Mesh& mesh);

/// For every triangle of `fine`, the index of the triangle of `coarse`
/// containing it. Throws StructuralError if `fine` is not a refinement of
/// `coarse`.
std::vector<int> locate_in_coarse(const Mesh& coarse, const Mesh& fine);

/// Coarse triangles that are not triangles of the fine mesh.
std::vector<int> refined_elements(const Mesh& coarse, const Mesh& fine);

/// Coarse triangles touching (sharing at least a vertex with) a refined
/// triangle, refined triangles included. Sorted.
std::vector<int> refined_neighborhood(const Mesh& coarse, const Mesh& fine);

Mesh read_mesh_json(const std::filesystem::path& path);
void write_mesh_json(const Mesh& mesh, const std::filesystem::path& path);
std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const std::string& text);

}  // namespace amfem
