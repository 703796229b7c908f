#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nftaudit/lof.hpp"

#include "test_util.hpp"

using namespace nftaudit::lof;

namespace {

using Mat = PointMatrix<double>;

Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.begin()->size());
    Mat m(n, d);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Mat random_points(testutil::Lcg& rng, int n, int dim, bool quantize) {
    Mat m(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            double v = rng.real01() * 10.0;
            if (quantize) v = std::round(v);  // forces many exact duplicates
            m(i, j) = v;
        }
    return m;
}

// Relative comparison that treats two infinities as equal.
void check_close(double a, double b, double rel = 1e-9) {
    if (std::isinf(a) || std::isinf(b)) {
        CHECK(std::isinf(a));
        CHECK(std::isinf(b));
        return;
    }
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    CHECK(std::abs(a - b) <= rel * scale);
}

}  // namespace

TEST_CASE("three collinear points, k=1: hand-computed scores") {
    const Mat pts = from_rows({{0.0}, {1.0}, {3.0}});
    const auto scores = lof_scores(pts, 1);
    REQUIRE(scores.size() == 3);

    // A(0) and B(1) are mutual nearest neighbors at distance 1; C(3) reaches
    // B only through a reachability distance of 2.
    CHECK(scores[0].lrd == doctest::Approx(1.0));
    CHECK(scores[1].lrd == doctest::Approx(1.0));
    CHECK(scores[2].lrd == doctest::Approx(0.5));
    CHECK(scores[0].lof == doctest::Approx(1.0));
    CHECK(scores[1].lof == doctest::Approx(1.0));
    CHECK(scores[2].lof == doctest::Approx(2.0));
}

TEST_CASE("unit square corners, k=2: perfectly uniform, all scores 1") {
    const Mat pts = from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    for (const auto& s : lof_scores(pts, 2)) {
        CHECK(s.lrd == doctest::Approx(1.0));
        CHECK(s.lof == doctest::Approx(1.0));
    }
}

TEST_CASE("square corners with float scalar behave the same") {
    PointMatrix<float> pts(4, 2);
    pts << 0.f, 0.f, 0.f, 1.f, 1.f, 0.f, 1.f, 1.f;
    for (const auto& s : lof_scores(pts, 2)) CHECK(s.lof == doctest::Approx(1.f));
}

TEST_CASE("ties at the k-distance are all included") {
    const Mat pts = from_rows({{0.0}, {1.0}, {-1.0}, {5.0}});
    const auto neighborhoods = knn(pts, 1);
    CHECK(neighborhoods[0].k_distance == doctest::Approx(1.0));
    REQUIRE(neighborhoods[0].members.size() == 2);  // both B and C at distance 1
    CHECK(neighborhoods[0].members[0].second == 1);
    CHECK(neighborhoods[0].members[1].second == 2);
}

TEST_CASE("coincident cluster: lrd is infinite, lof clamps to 1") {
    Mat pts(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i) pts.row(i) << 2.5, -1.0;
    const auto neighborhoods = knn(pts, 2);
    for (const auto& ns : neighborhoods) {
        CHECK(ns.k_distance == 0.0);
        CHECK(ns.members.size() == 4);  // tie inclusion beyond k
    }
    for (const auto& s : lof_scores(pts, 2)) {
        CHECK(std::isinf(s.lrd));
        CHECK(s.lof == 1.0);
    }
}

TEST_CASE("7x7 unit lattice: deep interior point has lrd and lof exactly 1") {
    // At k = 4 the neighbors of (3,3) sit at unit distance, and the center
    // must be three rows from every edge before the whole lrd/lof cascade
    // sees only points whose own k-distance is 1.
    Mat pts(49, 2);
    Eigen::Index r = 0;
    Eigen::Index center = -1;
    for (int x = 0; x < 7; ++x)
        for (int y = 0; y < 7; ++y) {
            if (x == 3 && y == 3) center = r;
            pts.row(r++) << double(x), double(y);
        }
    const auto scores = lof_scores(pts, 4);
    const auto c = static_cast<std::size_t>(center);
    CHECK(scores[c].lrd == doctest::Approx(1.0));
    CHECK(scores[c].lof == doctest::Approx(1.0));
}

TEST_CASE("a far outlier gets the top score by a wide margin") {
    testutil::Lcg rng(7);
    Mat pts(21, 2);
    for (Eigen::Index i = 0; i < 20; ++i) pts.row(i) << rng.real01(), rng.real01();
    pts.row(20) << 100.0, 100.0;

    const auto scores = lof_scores(pts, 3);
    for (Eigen::Index i = 0; i < 20; ++i) CHECK(scores[i].lof < 3.0);
    CHECK(scores[20].lof > 10.0);
}

TEST_CASE("pushing the outlier further away never lowers its score") {
    double previous = 0.0;
    for (double distance : {10.0, 20.0, 40.0, 80.0}) {
        testutil::Lcg local(12);  // identical cluster each round
        Mat pts(16, 2);
        for (Eigen::Index i = 0; i < 15; ++i) pts.row(i) << local.real01(), local.real01();
        pts.row(15) << distance, 0.0;
        const double lof = lof_scores(pts, 3)[15].lof;
        CHECK(lof > previous);
        previous = lof;
    }
}

TEST_CASE("scores are invariant under rigid motion; lrd scales inversely") {
    testutil::Lcg rng(55);
    Mat pts = random_points(rng, 60, 2, false);
    const auto base = lof_scores(pts, 5);

    const double c = std::cos(0.7319), s = std::sin(0.7319);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    Mat moved = pts * rot.transpose();
    moved.col(0).array() += 13.7;
    moved.col(1).array() -= 4.2;
    const auto rotated = lof_scores(moved, 5);
    for (std::size_t i = 0; i < base.size(); ++i) {
        check_close(base[i].lof, rotated[i].lof);
        check_close(base[i].lrd, rotated[i].lrd);
    }

    const auto scaled = lof_scores(Mat(pts * 3.7), 5);
    for (std::size_t i = 0; i < base.size(); ++i) {
        check_close(base[i].lof, scaled[i].lof);
        check_close(base[i].lrd, scaled[i].lrd * 3.7);
    }
}

TEST_CASE("scores follow a permutation of the rows") {
    testutil::Lcg rng(91);
    const Mat pts = random_points(rng, 80, 3, false);
    const auto base = lof_scores(pts, 6);

    std::vector<Eigen::Index> perm(80);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
    Mat shuffled(80, 3);
    for (Eigen::Index i = 0; i < 80; ++i) shuffled.row(i) = pts.row(perm[i]);

    const auto permuted = lof_scores(shuffled, 6);
    for (Eigen::Index i = 0; i < 80; ++i) {
        check_close(permuted[i].lof, base[perm[i]].lof);
        check_close(permuted[i].lrd, base[perm[i]].lrd);
    }
}

TEST_CASE("reachability distance uses the neighbor's k-distance") {
    const Mat pts = from_rows({{0.0}, {1.0}, {2.0}, {10.0}});
    const auto neighborhoods = knn(pts, 2);
    // d_2(point 0) = 2, d_2(point 1) = 1.
    CHECK(reachability_distance(pts, neighborhoods, 1, 0) == doctest::Approx(2.0));
    CHECK(reachability_distance(pts, neighborhoods, 1, 0, RdConvention::kQueryKDistance) ==
          doctest::Approx(1.0));
    // Direct distance dominates both conventions for the far point.
    CHECK(reachability_distance(pts, neighborhoods, 3, 2) == doctest::Approx(8.0));
    CHECK_THROWS_AS(reachability_distance(pts, neighborhoods, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(reachability_distance(pts, neighborhoods, -1, 0), std::invalid_argument);
}

TEST_CASE("the two reachability conventions give different score vectors") {
    testutil::Lcg rng(23);
    Mat pts(31, 2);
    for (Eigen::Index i = 0; i < 30; ++i) pts.row(i) << rng.real01(), rng.real01();
    pts.row(30) << 8.0, 8.0;

    const auto canonical = lof_scores(pts, 4);
    const auto alternate = lof_scores(pts, 4, RdConvention::kQueryKDistance);
    bool any_difference = false;
    for (std::size_t i = 0; i < canonical.size(); ++i) {
        CHECK(alternate[i].lof > 0.0);
        CHECK_FALSE(std::isnan(alternate[i].lof));
        if (std::abs(canonical[i].lof - alternate[i].lof) > 1e-12) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("invalid inputs are rejected") {
    const Mat pts = from_rows({{0.0}, {1.0}, {3.0}});
    CHECK_THROWS_AS(lof_scores(pts, 0), std::invalid_argument);
    CHECK_THROWS_AS(lof_scores(pts, 3), std::invalid_argument);  // needs n > k
    CHECK_THROWS_AS(lof_scores_bruteforce(pts, 3), std::invalid_argument);

    Mat bad = pts;
    bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lof_scores(bad, 1), std::invalid_argument);
}

TEST_CASE("kd-tree scores match the quadratic reference on random data") {
    testutil::Lcg rng(2026);
    for (int round = 0; round < 100; ++round) {
        const int n = 25 + static_cast<int>(rng.below(96));
        const int dim = 2 + static_cast<int>(rng.below(4));
        const bool quantize = round % 3 == 0;  // every third set is duplicate-heavy
        const int k = 1 + static_cast<int>(rng.below(10));

        const Mat pts = random_points(rng, n, dim, quantize);
        const auto fast = lof_scores(pts, k);
        const auto slow = lof_scores_bruteforce(pts, k);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            check_close(fast[i].lof, slow[i].lof);
            check_close(fast[i].lrd, slow[i].lrd);
            CHECK_FALSE(std::isnan(fast[i].lof));
            CHECK(fast[i].lof >= 0.0);
            CHECK(fast[i].lrd > 0.0);
        }
    }
}
