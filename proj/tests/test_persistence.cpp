#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "delaykit/persistence.hpp"
#include "delaykit/rng.hpp"
#include "oracle_persistence.hpp"

using namespace delaykit;

namespace {

PointCloud cloud2d(const std::vector<std::pair<double, double>>& pts) {
    PointCloud c;
    c.dim = 2;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c.data.push_back(pts[i].first);
        c.data.push_back(pts[i].second);
        c.time_index.push_back(static_cast<std::int64_t>(i));
    }
    return c;
}

PointCloud random_cloud(std::size_t n, int dim, Rng& rng) {
    PointCloud c;
    c.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) c.data.push_back(rng.uniform() * 2.0 - 1.0);
        c.time_index.push_back(static_cast<std::int64_t>(i));
    }
    return c;
}

std::vector<oracle::OracleFeature> strip(const PersistenceDiagram& d) {
    std::vector<oracle::OracleFeature> out;
    for (const auto& f : d.features) out.push_back({f.dim, f.birth, f.death});
    std::sort(out.begin(), out.end());
    return out;
}

bool multisets_match(const std::vector<oracle::OracleFeature>& a,
                     const std::vector<oracle::OracleFeature>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].dim != b[i].dim) return false;
        if (std::isinf(a[i].death) != std::isinf(b[i].death)) return false;
        if (std::abs(a[i].birth - b[i].birth) > tol) return false;
        if (!std::isinf(a[i].death) && std::abs(a[i].death - b[i].death) > tol)
            return false;
    }
    return true;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("build_rips edge enumeration") {
    const auto two = cloud2d({{0, 0}, {1, 0}});
    const auto f2 = build_rips(two, 2.0);
    REQUIRE(f2.edges.size() == 1);
    CHECK(f2.edges[0].length == 1.0);

    const auto f0 = build_rips(two, 0.0);
    CHECK(f0.edges.empty());

    const auto square = cloud2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto fs = build_rips(square, 2.0);
    REQUIRE(fs.edges.size() == 6);
    int unit = 0, diag = 0;
    for (const auto& e : fs.edges) {
        if (e.length == 1.0) ++unit;
        if (e.length == doctest::Approx(std::sqrt(2.0))) ++diag;
    }
    CHECK(unit == 4);
    CHECK(diag == 2);
    // ascending with lexicographic ties
    for (std::size_t k = 1; k < fs.edges.size(); ++k) {
        const auto& p = fs.edges[k - 1];
        const auto& q = fs.edges[k];
        CHECK((p.length < q.length ||
               (p.length == q.length && (p.i < q.i || (p.i == q.i && p.j < q.j)))));
    }
}

TEST_CASE("unit square diagram and representative") {
    const auto square = cloud2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto diagram = compute_persistence(build_rips(square));

    int h0_finite = 0, h0_inf = 0;
    for (const auto& f : diagram.features) {
        if (f.dim != 0) continue;
        if (std::isinf(f.death)) {
            ++h0_inf;
        } else {
            CHECK(f.death == doctest::Approx(1.0));
            ++h0_finite;
        }
    }
    CHECK(h0_finite == 3);
    CHECK(h0_inf == 1);

    std::vector<const PersistenceFeature*> h1;
    for (const auto& f : diagram.features)
        if (f.dim == 1) h1.push_back(&f);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0]->birth == doctest::Approx(1.0));
    CHECK(h1[0]->death == doctest::Approx(std::sqrt(2.0)));
    // four corners in rotational order, lowest vertex first, positive area
    CHECK(h1[0]->representative == std::vector<int>{0, 1, 2, 3});

    const auto [pers, feature] = max_persistence(diagram, 1);
    CHECK(pers == doctest::Approx(std::sqrt(2.0) - 1.0));
    REQUIRE(feature.has_value());

    const auto loop = representative_cycle(build_rips(square), *feature);
    CHECK(loop == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("regular hexagon h1 bar is (1, sqrt 3)") {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 6; ++k) {
        const double a = 2.0 * 3.14159265358979323846 * k / 6.0;
        pts.push_back({std::cos(a), std::sin(a)});
    }
    const auto diagram = compute_persistence(build_rips(cloud2d(pts)));
    std::vector<const PersistenceFeature*> h1;
    for (const auto& f : diagram.features)
        if (f.dim == 1) h1.push_back(&f);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0]->birth == doctest::Approx(1.0));
    CHECK(h1[0]->death == doctest::Approx(std::sqrt(3.0)));
    CHECK(h1[0]->representative.size() == 6);
    CHECK(h1[0]->representative[0] == 0);
}

TEST_CASE("two clusters die at the bridge distance") {
    const auto pts = cloud2d({{0, 0}, {0.1, 0}, {0, 0.1}, {5, 0}, {5.1, 0}, {5, 0.1}});
    const auto diagram = compute_persistence(build_rips(pts));
    int big_death = 0, h0_inf = 0;
    for (const auto& f : diagram.features) {
        if (f.dim != 0) continue;
        if (std::isinf(f.death))
            ++h0_inf;
        else if (f.death > 1.0)
            ++big_death;
    }
    CHECK(big_death == 1);
    CHECK(h0_inf == 1);
}

TEST_CASE("max_persistence on empty and tied diagrams") {
    PersistenceDiagram empty;
    const auto [p0, f0] = max_persistence(empty, 1);
    CHECK(p0 == 0.0);
    CHECK(!f0.has_value());

    PersistenceDiagram tied;
    tied.features.push_back({1, 2.0, 5.0, {0, 1, 2}});
    tied.features.push_back({1, 1.0, 4.0, {3, 4, 5}});
    const auto [p1, f1] = max_persistence(tied, 1);
    CHECK(p1 == 3.0);
    REQUIRE(f1.has_value());
    CHECK(f1->birth == 1.0);  // tie resolves to the earlier birth

    PersistenceDiagram longer;
    longer.features.push_back({1, 1.0, 2.0, {0, 1, 2}});
    longer.features.push_back({1, 1.0, 4.0, {3, 4, 5}});
    const auto [p2, f2] = max_persistence(longer, 1);
    CHECK(p2 == 3.0);
    CHECK(f2->death == 4.0);
}

TEST_CASE("collinear points have no representative cycle") {
    const auto line = cloud2d({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    const auto filt = build_rips(line);
    const auto diagram = compute_persistence(filt);
    for (const auto& f : diagram.features) CHECK(f.dim == 0);
    PersistenceFeature fake;
    fake.dim = 1;
    fake.birth = 1.0;
    fake.death = 2.0;
    CHECK_THROWS_WITH_AS(representative_cycle(filt, fake),
                         doctest::Contains("not found"), std::runtime_error);
    PersistenceFeature wrong_dim;
    wrong_dim.dim = 0;
    CHECK_THROWS_AS(representative_cycle(filt, wrong_dim), std::invalid_argument);
}

TEST_CASE("diagram is invariant under point permutations") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto cloud = random_cloud(7, 2, rng);
        const auto base = strip(compute_persistence(build_rips(cloud)));

        PointCloud shuffled;
        shuffled.dim = cloud.dim;
        const std::size_t n = cloud.n_pts();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t src = (i + 3) % n;
            shuffled.data.push_back(cloud.row(src)[0]);
            shuffled.data.push_back(cloud.row(src)[1]);
            shuffled.time_index.push_back(static_cast<std::int64_t>(i));
        }
        const auto perm = strip(compute_persistence(build_rips(shuffled)));
        CHECK(multisets_match(base, perm, 1e-12));
    }
}

TEST_CASE("scaling scales the diagram exactly, rigid motions leave it") {
    Rng rng(77);
    const auto cloud = random_cloud(10, 2, rng);
    const auto base = strip(compute_persistence(build_rips(cloud)));

    PointCloud scaled = cloud;
    for (auto& v : scaled.data) v *= 4.0;  // power of two: exact
    const auto s = strip(compute_persistence(build_rips(scaled)));
    REQUIRE(s.size() == base.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].birth == 4.0 * base[i].birth);
        if (!std::isinf(base[i].death)) CHECK(s[i].death == 4.0 * base[i].death);
    }

    const double c = std::cos(0.7), sn = std::sin(0.7);
    PointCloud moved = cloud;
    for (std::size_t i = 0; i < moved.n_pts(); ++i) {
        const double x = cloud.row(i)[0], y = cloud.row(i)[1];
        moved.row(i)[0] = c * x - sn * y + 3.25;
        moved.row(i)[1] = sn * x + c * y - 1.5;
    }
    const auto m = strip(compute_persistence(build_rips(moved)));
    CHECK(multisets_match(base, m, 1e-9));
}

TEST_CASE("h0 deaths sum to the euclidean mst weight") {
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const auto cloud = random_cloud(20, 2, rng);
        const auto diagram = compute_persistence(build_rips(cloud));
        double h0_sum = 0.0;
        for (const auto& f : diagram.features)
            if (f.dim == 0 && !std::isinf(f.death)) h0_sum += f.death;

        // Prim's algorithm, independent of the union-find path.
        const std::size_t n = cloud.n_pts();
        std::vector<double> best(n, kInf);
        std::vector<std::uint8_t> used(n, 0);
        best[0] = 0.0;
        double mst = 0.0;
        for (std::size_t step = 0; step < n; ++step) {
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i)
                if (!used[i] && (pick == n || best[i] < best[pick])) pick = i;
            used[pick] = 1;
            mst += best[pick];
            for (std::size_t i = 0; i < n; ++i)
                if (!used[i]) best[i] = std::min(best[i], point_dist(cloud, pick, i));
        }
        CHECK(std::abs(h0_sum - mst) < 1e-9);
    }
}

TEST_CASE("matches the brute-force oracle on random small clouds") {
    Rng rng(2025);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform_int(5));  // 3..7
        const int dim = 2 + static_cast<int>(rng.uniform_int(2));                // 2..3
        const auto cloud = random_cloud(n, dim, rng);
        const auto ours = strip(compute_persistence(build_rips(cloud)));
        const auto truth = oracle::oracle_diagram(cloud, 1e18);
        CHECK(multisets_match(ours, truth, 1e-12));
    }
}

TEST_CASE("matches the oracle on truncated filtrations") {
    Rng rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.uniform_int(4));
        const auto cloud = random_cloud(n, 2, rng);
        const double max_scale = 0.4 + rng.uniform();
        const auto ours = strip(compute_persistence(build_rips(cloud, max_scale)));
        const auto truth = oracle::oracle_diagram(cloud, max_scale);
        CHECK(multisets_match(ours, truth, 1e-12));
    }
}

TEST_CASE("duplicate points produce no zero bars") {
    const auto cloud = cloud2d({{0, 0}, {0, 0}, {1, 0}});
    const auto diagram = compute_persistence(build_rips(cloud));
    int inf_count = 0;
    for (const auto& f : diagram.features) {
        CHECK(f.death > f.birth);
        if (std::isinf(f.death)) ++inf_count;
    }
    CHECK(inf_count == 1);
}
