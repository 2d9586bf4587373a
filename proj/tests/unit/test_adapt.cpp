#include "amfem/adapt.hpp"
#include "amfem/error.hpp"
#include "amfem/system.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace amfem;

namespace {

AfemConfig config_for(ProblemSpec problem, Mesh mesh, long long max_dofs) {
    AfemConfig c;
    c.problem = std::move(problem);
    c.initial_mesh = std::move(mesh);
    c.max_dofs = max_dofs;
    return c;
}

double bulk(const std::vector<double>& v, const MarkSet& m) {
    double s = 0.0;
    for (int i : m) s += v[static_cast<std::size_t>(i)];
    return s;
}

}  // namespace

TEST_CASE("Doerfler marking examples") {
    CHECK(doerfler_mark(std::vector<double>{4, 3, 2, 1}, 0.5) == MarkSet{0, 1});
    CHECK(doerfler_mark(std::vector<double>{1, 2, 3, 4}, 0.5) == MarkSet{2, 3});
    CHECK(doerfler_mark(std::vector<double>{4, 0, 2, 0, 1}, 1.0) == MarkSet{0, 2, 4});
    CHECK(doerfler_mark(std::vector<double>{7.5}, 0.1) == MarkSet{0});
    CHECK(doerfler_mark(std::vector<double>{0, 0, 0}, 0.5).empty());
    // Ties go to the lower index.
    CHECK(doerfler_mark(std::vector<double>{1, 1, 1, 1}, 0.5) == MarkSet{0, 1});
    CHECK(doerfler_mark(std::vector<double>{2, 5, 5, 1}, 0.3) == MarkSet{1});
    CHECK_THROWS_AS(doerfler_mark(std::vector<double>{1}, 0.0), ValidationError);
    CHECK_THROWS_AS(doerfler_mark(std::vector<double>{1}, 1.5), ValidationError);
    IndicatorSet ind;
    ind.eta2 = {1, 1, 0};
    ind.osc2 = {0, 0, 3};
    CHECK(doerfler_mark(ind, 0.5) == MarkSet{2});
}

TEST_CASE("greedy marking has minimal cardinality") {
    auto gen = oracle::rng(100);
    std::uniform_int_distribution<int> size(1, 12);
    std::exponential_distribution<double> mag(1.0);
    std::bernoulli_distribution zero(0.1), tie(0.2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(size(gen)));
        for (auto& x : v) x = zero(gen) ? 0.0 : mag(gen);
        for (std::size_t i = 1; i < v.size(); ++i)
            if (tie(gen)) v[i] = v[i - 1];
        for (double theta : {0.1, 0.3, 0.5, 0.9}) {
            const MarkSet m = doerfler_mark(v, theta);
            double total = 0.0;
            for (double x : v) total += x;
            if (total == 0.0) {
                CHECK(m.empty());
                continue;
            }
            CHECK(bulk(v, m) >= theta * total);
            CHECK(static_cast<int>(m.size()) == oracle::brute_force_min_mark(v, theta));
            CHECK(std::is_sorted(m.begin(), m.end()));
        }
    }
}

TEST_CASE("configuration validation") {
    AfemConfig c = config_for(manufactured_poisson({}), generate_unit_square(1), 100);
    CHECK_NOTHROW(c.validate());
    for (double theta : {0.0, 1.0, -0.2, 1.5, std::nan("")}) {
        AfemConfig bad = c;
        bad.theta = theta;
        CHECK_THROWS_AS(bad.validate(), ValidationError);
    }
    AfemConfig bad = c;
    bad.max_dofs = -1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.bisections_per_mark = 0;
    CHECK_THROWS_AS(afem_run(bad), ValidationError);
    bad = c;
    bad.initial_mesh = Mesh();
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("max_dofs = 0 gives only the initial record") {
    const AfemHistory h = afem_run(config_for(manufactured_poisson({}), generate_unit_square(2), 0));
    REQUIRE(h.records.size() == 1);
    CHECK(h.records[0].k == 0);
    CHECK(h.records[0].ntri == 8);
    CHECK(h.records[0].nmarked == 0);
    CHECK(h.meshes.size() == 1);
    CHECK(h.error_source == "exact");
}

TEST_CASE("adaptive run on a smooth Poisson problem") {
    AfemConfig c = config_for(manufactured_poisson({Family::RaviartThomas, 0}), refine_uniform(generate_unit_square(2)), 4000);
    const AfemHistory h = afem_run(c);
    REQUIRE(h.records.size() >= 5);
    for (std::size_t k = 1; k < h.records.size(); ++k) {
        const auto& prev = h.records[k - 1];
        const auto& cur = h.records[k];
        CHECK(cur.eta2 < prev.eta2);
        CHECK(cur.ntri > prev.ntri);
        CHECK(cur.k == static_cast<int>(k));
        CHECK(prev.nmarked == static_cast<int>(h.marked[k - 1].size()));
        // Nested meshes: every new triangle lies in one of the previous ones.
        CHECK_NOTHROW(locate_in_coarse(h.meshes[k - 1], h.meshes[k]));
        CHECK(prev.estimator_reduction_margin() >= -1e-10);
        CHECK(prev.oscillation_reduction_margin() >= -1e-12);
    }
    const auto& last = h.records.back();
    CHECK(std::isnan(last.eta2_frozen_next));
    CHECK(last.ndof() >= 4000);
    for (const auto& r : h.records) {
        CHECK(r.load_residual < 1e-10);
        CHECK(r.err_energy > 0.0);
        CHECK(r.n_sigma + r.n_u == r.ndof());
    }
    // Records are reproducible from the stored meshes.
    for (std::size_t k = 0; k < h.records.size(); k += 2) {
        const Solution sol = solve_problem(h.meshes[k], c.problem);
        const IndicatorSet ind = indicators(h.meshes[k], sol.dofs, sol.field.sigma, c.problem.source);
        CHECK(total(ind).eta2 == doctest::Approx(h.records[k].eta2).epsilon(1e-10));
        CHECK(total(ind).osc2 == doctest::Approx(h.records[k].osc2).epsilon(1e-10).scale(1e-30));
        CHECK(sol.dofs.n_sigma() == h.records[k].n_sigma);
    }
}

TEST_CASE("contraction of the estimator surrogate") {
    for (ProblemKind kind : {ProblemKind::Poisson, ProblemKind::Stokes}) {
        const ProblemSpec p = kind == ProblemKind::Poisson ? constant_source(kind, {}) : manufactured_stokes({});
        const Mesh m = kind == ProblemKind::Poisson ? generate_lshape(1) : generate_unit_square(2);
        AfemConfig c = config_for(p, m, 6000);
        c.error_mode = ErrorMode::None;
        const AfemHistory h = afem_run(c);
        REQUIRE(h.records.size() >= 6);
        for (std::size_t k = 5; k < h.records.size(); ++k) {
            const double a = h.records[k - 5].eta2 + h.records[k - 5].osc2;
            const double b = h.records[k].eta2 + h.records[k].osc2;
            CHECK(std::pow(b / a, 1.0 / 5.0) < 1.0);
        }
        for (std::size_t k = 0; k + 1 < h.records.size(); ++k) {
            CHECK(h.records[k].estimator_reduction_margin() >= -1e-10);
            CHECK(h.records[k].oscillation_reduction_margin() >= -1e-12);
            if (kind == ProblemKind::Stokes) CHECK(h.records[k].trace_mean < 1e-10);
        }
        CHECK(h.error_source == "none");
        CHECK(std::isnan(h.records[0].err_energy));
    }
}

TEST_CASE("uniform runs double the triangle count") {
    AfemConfig c = config_for(constant_source(ProblemKind::Poisson, {}), generate_lshape(1), 1500);
    c.error_mode = ErrorMode::None;
    const AfemHistory h = uniform_run(c);
    REQUIRE(h.records.size() >= 4);
    for (std::size_t k = 1; k < h.records.size(); ++k) {
        CHECK(h.records[k].ntri == 2 * h.records[k - 1].ntri);
        CHECK(h.records[k - 1].nmarked == h.records[k - 1].ntri);
    }
}

TEST_CASE("refine_marked bisects marked elements the requested number of times") {
    auto gen = oracle::rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Mesh m = refine(generate_lshape(1), oracle::random_marks(gen, 6, 3));
        const MarkSet marked = oracle::random_marks(gen, static_cast<int>(m.num_triangles()), 4);
        for (int b : {1, 2, 3}) {
            const RefineResult r = refine_marked(m, marked, b);
            CHECK(r.parent == locate_in_coarse(m, r.mesh));
            std::vector<int> children(m.num_triangles(), 0);
            for (int p : r.parent) ++children[static_cast<std::size_t>(p)];
            for (int t : marked) {
                CHECK(children[static_cast<std::size_t>(t)] >= (1 << b));
                for (std::size_t i = 0; i < r.parent.size(); ++i)
                    if (r.parent[i] == t) CHECK(r.mesh.generation(static_cast<int>(i)) >= m.generation(t) + b);
            }
            CHECK(oracle::conforming(r.mesh));
        }
    }
}

TEST_CASE("reference errors without an exact solution") {
    AfemConfig c = config_for(constant_source(ProblemKind::Poisson, {}), generate_lshape(1), 300);
    const AfemHistory h = afem_run(c);
    CHECK(h.error_source == "reference");
    for (const auto& r : h.records) {
        CHECK(std::isfinite(r.err_energy));
        CHECK(r.err_energy > 0.0);
    }
    c.error_mode = ErrorMode::Exact;
    CHECK_THROWS_AS(afem_run(c), ValidationError);
}

TEST_CASE("history CSV round trip") {
    AfemConfig c = config_for(manufactured_poisson({}), generate_unit_square(1), 200);
    c.keep_fields = false;
    const AfemHistory h = afem_run(c);
    CHECK(h.meshes.empty());
    const auto path = std::filesystem::temp_directory_path() / "amfem_history_test.csv";
    write_history_csv(h, path);
    {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "k,ntri,ndof,eta2,osc2,err_energy,nmarked,seconds");
    }
    const std::vector<HistoryRow> rows = read_history_csv(path);
    REQUIRE(rows.size() == h.records.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].k == h.records[i].k);
        CHECK(rows[i].ntri == h.records[i].ntri);
        CHECK(rows[i].ndof == h.records[i].ndof());
        CHECK(rows[i].eta2 == h.records[i].eta2);
        CHECK(rows[i].osc2 == h.records[i].osc2);
        CHECK(rows[i].err_energy == h.records[i].err_energy);
        CHECK(rows[i].nmarked == h.records[i].nmarked);
    }
    std::filesystem::remove(path);

    const auto bad = std::filesystem::temp_directory_path() / "amfem_history_bad.csv";
    {
        std::ofstream out(bad);
        out << "k,ntri,ndof,eta2\n0,2,7,1.0\n";
    }
    CHECK_THROWS_AS(read_history_csv(bad), ValidationError);
    {
        std::ofstream out(bad);
        out << "k,ntri,ndof,eta2,osc2,err_energy,nmarked,seconds\n0,2,7,abc,0,nan,1,0.1\n";
    }
    CHECK_THROWS_AS(read_history_csv(bad), ValidationError);
    std::filesystem::remove(bad);
    CHECK_THROWS_AS(read_history_csv(bad), ValidationError);
}

TEST_CASE("history CSV is deterministic apart from timing") {
    AfemConfig c = config_for(manufactured_stokes({Family::BrezziDouglasMarini, 0}), generate_unit_square(2), 1500);
    const AfemHistory a = afem_run(c), b = afem_run(c);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].eta2 == b.records[i].eta2);
        CHECK(a.records[i].osc2 == b.records[i].osc2);
        CHECK(a.records[i].err_energy == b.records[i].err_energy);
        CHECK(a.marked[i] == b.marked[i]);
    }
    CHECK(a.meshes.back() == b.meshes.back());
}

TEST_CASE("margins") {
    IterationRecord r;
    r.eta2 = 4.0;
    r.eta2_marked = 2.0;
    r.eta2_frozen_next = 2.5;
    CHECK(r.estimator_reduction_margin() == 0.5);
    r.osc2 = 1.0;
    r.osc2_refined = 1.0;
    r.osc2_next = 0.0;
    CHECK(r.oscillation_reduction_margin() == 0.5);
}
