#include "amfem/elements.hpp"
#include "amfem/error.hpp"
#include "amfem/quadrature.hpp"
#include "amfem/spaces.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace amfem;

namespace {

const std::vector<ElementFamily> kFamilies{{Family::RaviartThomas, 0}, {Family::BrezziDouglasMarini, 0},
                                           {Family::RaviartThomas, 1}};

}  // namespace

TEST_CASE("triangle quadrature integrates monomials exactly") {
    for (int degree = 0; degree <= 6; ++degree) {
        const QuadratureRule rule = triangle_quadrature(degree);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15));
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q)
                    s += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
                CHECK(s == doctest::Approx(oracle::monomial_integral(a, b)).epsilon(1e-14));
            }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto l = rule.barycentric(q);
            CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0));
            CHECK(l[0] >= 0.0);
        }
    }
    CHECK_THROWS_AS(triangle_quadrature(7), ValidationError);
    CHECK_THROWS_AS(triangle_quadrature(-1), ValidationError);
}

TEST_CASE("quadrature examples") {
    const auto integrate = [](const QuadratureRule& r, auto f) {
        double s = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * f(r.points[q]);
        return s;
    };
    CHECK(integrate(triangle_quadrature(1), [](const Eigen::Vector2d& p) { return p.x(); }) ==
          doctest::Approx(1.0 / 6.0));
    CHECK(integrate(triangle_quadrature(2), [](const Eigen::Vector2d& p) { return p.x() * p.x(); }) ==
          doctest::Approx(1.0 / 12.0));
}

TEST_CASE("line quadrature") {
    for (int degree = 0; degree <= 9; ++degree) {
        const LineRule r = line_quadrature(degree);
        for (int a = 0; a <= degree; ++a) {
            double s = 0.0;
            for (std::size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q], a);
            CHECK(s == doctest::Approx(1.0 / (a + 1)).epsilon(1e-14));
        }
    }
}

TEST_CASE("stress element sizes") {
    CHECK(StressElement({Family::RaviartThomas, 0}).size() == 3);
    CHECK(StressElement({Family::BrezziDouglasMarini, 0}).size() == 6);
    CHECK(StressElement({Family::RaviartThomas, 1}).size() == 8);
    CHECK(StressElement({Family::RaviartThomas, 1}).interior_dofs() == 2);
    CHECK_THROWS_AS(StressElement({Family::RaviartThomas, 2}), ValidationError);
    CHECK_THROWS_AS(StressElement({Family::BrezziDouglasMarini, 1}), ValidationError);
}

TEST_CASE("local basis is dual to the degrees of freedom") {
    for (const auto& fam : kFamilies) {
        const StressElement el(fam);
        for (int j = 0; j < el.size(); ++j) {
            const Eigen::VectorXd d = el.apply_dofs([&](const Eigen::Vector2d& p) { return el.basis(j).value(p); });
            Eigen::VectorXd e = Eigen::VectorXd::Zero(el.size());
            e(j) = 1.0;
            CHECK((d - e).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("reference edge moments by an independent rule") {
    // Edge i runs counterclockwise from vertex i+1 to vertex i+2.
    const auto& v = reference_vertices();
    for (const auto& fam : kFamilies) {
        const StressElement el(fam);
        for (int j = 0; j < el.size(); ++j)
            for (int i = 0; i < 3; ++i) {
                const Eigen::Vector2d a = v[static_cast<std::size_t>((i + 1) % 3)];
                const Eigen::Vector2d b = v[static_cast<std::size_t>((i + 2) % 3)];
                const Eigen::Vector2d t = (b - a).normalized();
                const Eigen::Vector2d n(t.y(), -t.x());
                for (int m = 0; m < el.edge_dofs(); ++m) {
                    const double moment = oracle::integrate_segment(a, b, [&](const Eigen::Vector2d& x) {
                        const double s = (x - a).norm() / (b - a).norm();
                        const double q = m == 0 ? 1.0 : 2.0 * s - 1.0;
                        return el.basis(j).value(x).dot(n) * q;
                    });
                    const double expect = (j == i * el.edge_dofs() + m) ? 1.0 : 0.0;
                    CHECK(moment == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
                }
            }
    }
}

TEST_CASE("divergence of the local basis lies in P_k") {
    for (const auto& fam : kFamilies) {
        const StressElement el(fam);
        for (int j = 0; j < el.size(); ++j) {
            const VectorPolynomial& p = el.basis(j);
            const double d0 = p.divergence({0, 0});
            const double dx = p.divergence({1, 0}) - d0;
            const double dy = p.divergence({0, 1}) - d0;
            if (fam.order == 0) {
                CHECK(std::abs(dx) < 1e-12);
                CHECK(std::abs(dy) < 1e-12);
            }
            for (const Eigen::Vector2d& x : {Eigen::Vector2d(0.2, 0.3), Eigen::Vector2d(0.7, 0.1), Eigen::Vector2d(0.05, 0.9)})
                CHECK(p.divergence(x) == doctest::Approx(d0 + dx * x.x() + dy * x.y()).epsilon(1e-12).scale(1.0));
        }
    }
    // RT0: integrated flux one through one edge, so div = 1 / |K| = 2.
    const StressElement rt0({Family::RaviartThomas, 0});
    for (int j = 0; j < 3; ++j) CHECK(rt0.basis(j).divergence({0.3, 0.3}) == doctest::Approx(2.0));
}

TEST_CASE("physical RT0 basis matches the closed form") {
    const Mesh m = refine(generate_lshape(1), {1, 4});
    const DofMap dofs(m, {Family::RaviartThomas, 0}, ProblemKind::Poisson);
    const FieldEvaluator eval(m, dofs);
    LocalStressBasis basis;
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
        const auto& tri = m.triangle(t);
        const std::array<Eigen::Vector2d, 3> p{m.vertex(tri[0]), m.vertex(tri[1]), m.vertex(tri[2])};
        const Eigen::Vector2d xhat(0.25, 0.4);
        eval.stress_basis(t, xhat, basis);
        const Eigen::Vector2d x = eval.map(t).to_physical(xhat);
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector2d expect = dofs.stress_sign(t, i) * oracle::rt0_closed_form(p, i, x);
            CHECK((basis.value[static_cast<std::size_t>(i)] - expect).norm() < 1e-12);
            CHECK(basis.divergence[static_cast<std::size_t>(i)] ==
                  doctest::Approx(dofs.stress_sign(t, i) / m.area(t)));
        }
    }
}

TEST_CASE("displacement basis") {
    CHECK(DisplacementElement(0).size() == 1);
    CHECK(DisplacementElement(0).value(0, {0.3, 0.2}) == 1.0);
    const DisplacementElement p1(1);
    CHECK(p1.size() == 3);
    const QuadratureRule rule = triangle_quadrature(2);
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) gram(i, j) += rule.weights[q] * p1.value(i, rule.points[q]) * p1.value(j, rule.points[q]);
    CHECK(gram.determinant() > 1e-6);
    // {1, x, y}: entries are reference monomial integrals.
    CHECK(gram(1, 2) == doctest::Approx(oracle::monomial_integral(1, 1)));
    CHECK(gram(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("Piola transform") {
    SUBCASE("identity map") {
        const AffineMap id({0, 0}, {1, 0}, {0, 1});
        const Eigen::Vector2d v(0.3, -1.2);
        CHECK(piola_value(id, v).isApprox(v));
        CHECK(piola_divergence(id, 2.5) == doctest::Approx(2.5));
        CHECK(piola_pullback(id, v).isApprox(v));
    }
    SUBCASE("uniform scaling by s divides the divergence by s^2") {
        const double s = 3.0;
        const AffineMap map({0, 0}, {s, 0}, {0, s});
        CHECK(map.det == doctest::Approx(s * s));
        CHECK(piola_divergence(map, 2.0) == doctest::Approx(2.0 / (s * s)));
        CHECK(piola_value(map, {1.0, 0.0}).isApprox(Eigen::Vector2d(1.0 / s, 0.0)));
    }
    SUBCASE("degenerate triangle") { CHECK_THROWS_AS(AffineMap({0, 0}, {1, 1}, {2, 2}), ValidationError); }
    SUBCASE("mapped RT0 has unit flux through its edge on random affine images") {
        auto gen = oracle::rng(7);
        const StressElement el({Family::RaviartThomas, 0});
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::Vector2d a = oracle::random_vector(gen, 2), b = oracle::random_vector(gen, 2), c = oracle::random_vector(gen, 2);
            if (((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x()) < 0) std::swap(b, c);
            if (std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x()) < 1e-2) continue;
            const AffineMap map(a, b, c);
            const std::array<Eigen::Vector2d, 3> p{a, b, c};
            for (int i = 0; i < 3; ++i) {
                const Eigen::Vector2d s = p[static_cast<std::size_t>((i + 1) % 3)];
                const Eigen::Vector2d e = p[static_cast<std::size_t>((i + 2) % 3)];
                const Eigen::Vector2d t = (e - s).normalized();
                const Eigen::Vector2d n(t.y(), -t.x());
                for (int j = 0; j < 3; ++j) {
                    const double flux = oracle::integrate_segment(s, e, [&](const Eigen::Vector2d& x) {
                        return piola_value(map, el.basis(j).value(map.to_reference(x))).dot(n);
                    });
                    CHECK(flux == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("global stress fields are H(div) conforming") {
    auto gen = oracle::rng(11);
    const Mesh m = refine(refine(generate_lshape(1), {0, 2}), {1, 5, 6});
    for (const auto& fam : kFamilies)
        for (ProblemKind kind : {ProblemKind::Poisson, ProblemKind::Stokes}) {
            const DofMap dofs(m, fam, kind);
            const FieldEvaluator eval(m, dofs);
            const Eigen::VectorXd sigma = oracle::random_vector(gen, dofs.n_sigma());
            const LineRule line = line_quadrature(6);
            double worst = 0.0;
            for (const auto& e : dofs.edges().edges) {
                if (e.boundary) continue;
                const Point a = m.vertex(e.vertices[0]), b = m.vertex(e.vertices[1]);
                for (double s : line.points) {
                    const Point x = a + s * (b - a);
                    const Eigen::Vector2d plus =
                        eval.stress(e.plus, eval.map(e.plus).to_reference(x), sigma).value * e.normal;
                    const Eigen::Vector2d minus =
                        eval.stress(e.minus, eval.map(e.minus).to_reference(x), sigma).value * e.normal;
                    worst = std::max(worst, (plus - minus).lpNorm<Eigen::Infinity>());
                }
            }
            CHECK(worst < 1e-12);
        }
}

TEST_CASE("divergence of global fields is representable in the displacement space") {
    auto gen = oracle::rng(12);
    const Mesh m = refine(generate_unit_square(2), {3});
    for (const auto& fam : kFamilies) {
        const DofMap dofs(m, fam, ProblemKind::Poisson);
        const FieldEvaluator eval(m, dofs);
        const Eigen::VectorXd sigma = oracle::random_vector(gen, dofs.n_sigma());
        const Eigen::VectorXd bsigma = divergence_matrix(m, dofs) * sigma;
        const Eigen::SparseMatrix<double> mass = displacement_mass(m, dofs);
        const Eigen::VectorXd coeff = Eigen::MatrixXd(mass).ldlt().solve(bsigma);
        const QuadratureRule rule = triangle_quadrature(4);
        double worst = 0.0;
        for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t)
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double div = eval.stress(t, rule.points[q], sigma).divergence(0);
                const double rec = eval.displacement(t, rule.points[q], coeff)(0);
                worst = std::max(worst, std::abs(div - rec) / std::max(1.0, std::abs(div)));
            }
        CHECK(worst < 1e-12);
    }
}
