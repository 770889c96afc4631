#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "saasqual/cluster_quality.hpp"

using namespace saasqual;
using Eigen::MatrixXd;

namespace {

MatrixXd four_points() {
    MatrixXd x(4, 6);
    x.row(0).setConstant(1.0);
    x.row(1).setConstant(1.2);
    x.row(2).setConstant(9.0);
    x.row(3).setConstant(9.2);
    return x;
}

HardAssignment labels(std::vector<int> l, int m) { return HardAssignment{std::move(l), m}; }

HardAssignment random_labels(std::mt19937_64& rng, int n, int m) {
    std::vector<int> l(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) l[i] = i < m ? i : static_cast<int>(rng() % static_cast<unsigned>(m));
    std::shuffle(l.begin(), l.end(), rng);
    return labels(l, m);
}

}  // namespace

TEST_CASE("hard_assign") {
    MatrixXd g(3, 2);
    g << 0.2, 0.8, 0.5, 0.5, 0.9, 0.1;
    const auto a = hard_assign(g);
    CHECK(a.labels == std::vector<int>{1, 0, 0});
    CHECK(a.num_clusters == 2);
    const auto single = hard_assign(MatrixXd::Ones(4, 1));
    CHECK(single.labels == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("silhouette") {
    SUBCASE("four-point instance") {
        const auto s = silhouette(four_points(), labels({0, 0, 1, 1}, 2));
        // mpmath at 40 digits, straight from the definition.
        const double expected[] = {0.9753086419753086, 0.9746835443037974, 0.9746835443037976, 0.9753086419753088};
        for (int i = 0; i < 4; ++i) CHECK(std::abs(s.per_point[i] - expected[i]) <= 1e-9);
        CHECK(std::abs(s.mean - 0.9749960931395532) <= 1e-9);
        CHECK_FALSE(s.degenerate);
    }
    SUBCASE("two singleton clusters score zero") {
        MatrixXd x(2, 6);
        x.row(0).setConstant(2.0);
        x.row(1).setConstant(7.0);
        const auto s = silhouette(x, labels({0, 1}, 2));
        CHECK(s.mean == 0.0);
        CHECK(s.per_point == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("all points identical") {
        const auto s = silhouette(MatrixXd::Constant(5, 6, 3.0), labels({0, 0, 1, 1, 1}, 2));
        CHECK(s.mean == 0.0);
        for (double v : s.per_point) CHECK(v == 0.0);
    }
    SUBCASE("single cluster is degenerate") {
        const auto s = silhouette(four_points(), labels({0, 0, 0, 0}, 1));
        CHECK(s.degenerate);
        CHECK(s.mean == 0.0);
    }
    SUBCASE("random labeled instances against brute force") {
        std::mt19937_64 rng(71);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 6 + trial;
            const int m = 2 + trial % 4;
            const MatrixXd x = oracle::random_ratings(rng, n);
            const auto l = random_labels(rng, n, m);
            const auto s = silhouette(x, l);
            const auto want = oracle::silhouette(x, l.labels, m);
            double mean = 0;
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(s.per_point[i] - static_cast<double>(want[i])) <= 1e-9);
                CHECK(s.per_point[i] >= -1.0);
                CHECK(s.per_point[i] <= 1.0);
                mean += s.per_point[i];
            }
            CHECK(std::abs(s.mean - mean / n) <= 1e-12);
        }
    }
    SUBCASE("invariant under relabeling and row permutation") {
        std::mt19937_64 rng(73);
        const MatrixXd x = oracle::random_ratings(rng, 20);
        const auto l = random_labels(rng, 20, 3);
        const auto base = silhouette(x, l);

        auto relabeled = l;
        for (auto& v : relabeled.labels) v = (v + 1) % 3;
        CHECK(std::abs(silhouette(x, relabeled).mean - base.mean) <= 1e-12);

        std::vector<int> perm(20);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        MatrixXd px(20, 6);
        auto pl = l;
        for (int i = 0; i < 20; ++i) {
            px.row(i) = x.row(perm[i]);
            pl.labels[i] = l.labels[perm[i]];
        }
        const auto permuted = silhouette(px, pl);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(permuted.per_point[i] - base.per_point[perm[i]]) <= 1e-12);
    }
    SUBCASE("needs two points") {
        CHECK_THROWS_AS(silhouette(MatrixXd::Ones(1, 6), labels({0}, 1)), Error);
    }
}

TEST_CASE("davies_bouldin") {
    SUBCASE("four-point instance") {
        // mpmath at 40 digits.
        CHECK(std::abs(davies_bouldin(four_points(), labels({0, 0, 1, 1}, 2)) - 0.024999999999999953) <= 1e-9);
    }
    SUBCASE("tight far-apart clusters score near zero") {
        std::mt19937_64 rng(79);
        std::normal_distribution<double> noise(0.0, 0.1);
        MatrixXd x(40, 6);
        std::vector<int> l(40);
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 6; ++j) x(i, j) = (i < 20 ? 2.5 : 8.5) + noise(rng);
            l[i] = i < 20 ? 0 : 1;
        }
        const double db = davies_bouldin(x, labels(l, 2));
        CHECK(db < 0.2);
        CHECK(std::abs(db - static_cast<double>(oracle::davies_bouldin(x, l, 2))) <= 1e-9);
    }
    SUBCASE("random labeled instances against brute force") {
        std::mt19937_64 rng(83);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 8 + trial;
            const int m = 2 + trial % 4;
            const MatrixXd x = oracle::random_ratings(rng, n);
            const auto l = random_labels(rng, n, m);
            CHECK(std::abs(davies_bouldin(x, l) - static_cast<double>(oracle::davies_bouldin(x, l.labels, m))) <= 1e-9);
        }
    }
    SUBCASE("translation invariance") {
        std::mt19937_64 rng(89);
        const MatrixXd x = oracle::random_ratings(rng, 18);
        const auto l = random_labels(rng, 18, 3);
        const MatrixXd shifted = x.rowwise() + Eigen::RowVectorXd::LinSpaced(6, -3.0, 40.0);
        CHECK(std::abs(davies_bouldin(x, l) - davies_bouldin(shifted, l)) <= 1e-9);
    }
    SUBCASE("errors") {
        auto expect = [](auto fn, ErrorKind kind) {
            try {
                fn();
                FAIL("expected an error");
            } catch (const Error& e) {
                CHECK(e.kind() == kind);
            }
        };
        expect([] { davies_bouldin(four_points(), labels({0, 0, 0, 0}, 1)); }, ErrorKind::UndefinedForSingleCluster);
        expect([] { davies_bouldin(four_points(), labels({0, 0, 2, 2}, 3)); }, ErrorKind::EmptyCluster);
        MatrixXd x(4, 6);
        x.row(0).setConstant(1.0);
        x.row(1).setConstant(3.0);
        x.row(2).setConstant(1.0);
        x.row(3).setConstant(3.0);
        expect([&] { davies_bouldin(x, labels({0, 0, 1, 1}, 2)); }, ErrorKind::CoincidentCentroids);
    }
}

TEST_CASE("adjusted_rand_index") {
    const std::vector<int> a = {0, 0, 1, 1, 2, 2};
    CHECK(adjusted_rand_index(a, a) == 1.0);
    const std::vector<int> relabeled = {5, 5, 3, 3, 9, 9};
    CHECK(adjusted_rand_index(a, relabeled) == doctest::Approx(1.0).epsilon(1e-15));

    SUBCASE("two-versus-three instance") {
        const std::vector<int> two = {0, 0, 0, 1, 1, 1};
        const std::vector<int> three = {0, 0, 1, 1, 2, 2};
        // 15 pairs: 2 together in both, 6 in the first, 3 in the second -> 8/33.
        CHECK(adjusted_rand_index(two, three) == doctest::Approx(8.0 / 33.0).epsilon(1e-14));
        CHECK(adjusted_rand_index(two, three) == doctest::Approx(oracle::ari_by_pairs(two, three)).epsilon(1e-14));
    }
    SUBCASE("random partitions against pair enumeration, symmetric") {
        std::mt19937_64 rng(97);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 2 + trial;
            std::vector<int> x(n), y(n);
            for (int i = 0; i < n; ++i) {
                x[i] = static_cast<int>(rng() % 3);
                y[i] = static_cast<int>(rng() % 4);
            }
            const double v = adjusted_rand_index(x, y);
            CHECK(v == doctest::Approx(oracle::ari_by_pairs(x, y)).epsilon(1e-12));
            CHECK(v == adjusted_rand_index(y, x));
        }
    }
    SUBCASE("trivial partitions") {
        const std::vector<int> one = {0, 0, 0, 0};
        const std::vector<int> singletons = {0, 1, 2, 3};
        CHECK(adjusted_rand_index(one, one) == 1.0);
        CHECK(adjusted_rand_index(singletons, singletons) == 1.0);
        CHECK(adjusted_rand_index(one, singletons) < 1.0);
    }
    SUBCASE("length mismatch") {
        try {
            adjusted_rand_index(std::vector<int>{0, 1}, std::vector<int>{0, 1, 1});
            FAIL("expected LengthMismatch");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::LengthMismatch);
        }
    }
}

TEST_CASE("quality_indices") {
    const auto q = quality_indices(four_points(), labels({0, 0, 1, 1}, 2));
    CHECK(q.cluster_sizes == std::vector<int>{2, 2});
    REQUIRE(q.davies_bouldin.has_value());
    CHECK_FALSE(q.degenerate);

    const auto single = quality_indices(four_points(), labels({0, 0, 0, 0}, 1));
    CHECK_FALSE(single.davies_bouldin.has_value());
    CHECK(single.degenerate);

    const auto lone = quality_indices(MatrixXd::Ones(1, 6), labels({0}, 1));
    CHECK(lone.degenerate);
    CHECK(lone.cluster_sizes == std::vector<int>{1});
}
