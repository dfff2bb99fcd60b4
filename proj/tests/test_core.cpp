#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>

#include "lightcd/core.hpp"
#include "lightcd/csv.hpp"
#include "lightcd/rng.hpp"

using namespace lightcd;

namespace {

WindowPair make_pair(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& test,
                     std::int64_t t_start = -1) {
    return WindowPair(ref, test, t_start, t_start + 2 * ref.rows() + 1);
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
    return out;
}

}  // namespace

TEST_CASE("push_sample ring semantics") {
    Eigen::MatrixXd ref(2, 1), test(2, 1);
    ref << 0.0, 0.0;
    test << 10.0, 11.0;  // rows r0, r1
    WindowPair pair = make_pair(ref, test);

    Sample s{pair.next_t(), Eigen::VectorXd::Constant(1, 12.0)};
    Eigen::VectorXd evicted = pair.push(s);
    CHECK(evicted[0] == 10.0);
    CHECK(pair.test_row(0)[0] == 11.0);
    CHECK(pair.test_row(1)[0] == 12.0);
}

TEST_CASE("pushing the evicted row back leaves the multiset unchanged") {
    Eigen::MatrixXd ref = random_matrix(3, 2, 7);
    Eigen::MatrixXd test = random_matrix(3, 2, 8);
    WindowPair pair = make_pair(ref, test);
    Eigen::MatrixXd before = pair.test_in_order();

    Sample s{pair.next_t(), test.row(0).transpose()};
    pair.push(s);
    Eigen::MatrixXd after = pair.test_in_order();

    // same rows, rotated by one
    for (Eigen::Index i = 0; i + 1 < 3; ++i)
        CHECK(after.row(i) == before.row(i + 1));
    CHECK(after.row(2) == before.row(0));
}

TEST_CASE("after m pushes none of the original rows remain") {
    const Eigen::Index m = 5;
    Eigen::MatrixXd ref = random_matrix(m, 3, 1);
    Eigen::MatrixXd test = random_matrix(m, 3, 2);
    WindowPair pair = make_pair(ref, test);
    for (Eigen::Index i = 0; i < m; ++i) {
        Sample s{pair.next_t(), Eigen::VectorXd::Constant(3, 100.0 + double(i))};
        pair.push(s);
    }
    Eigen::MatrixXd now = pair.test_in_order();
    for (Eigen::Index i = 0; i < m; ++i) CHECK(now(i, 0) == 100.0 + double(i));
}

TEST_CASE("FIFO eviction order over k <= m pushes") {
    const Eigen::Index m = 6;
    Eigen::MatrixXd ref = random_matrix(m, 1, 3);
    Eigen::MatrixXd test(m, 1);
    for (Eigen::Index i = 0; i < m; ++i) test(i, 0) = double(i);
    WindowPair pair = make_pair(ref, test);
    for (Eigen::Index k = 0; k < 4; ++k) {
        Sample s{pair.next_t(), Eigen::VectorXd::Constant(1, 50.0)};
        Eigen::VectorXd evicted = pair.push(s);
        CHECK(evicted[0] == double(k));  // oldest first
    }
}

TEST_CASE("reference window is untouched by pushes") {
    Eigen::MatrixXd ref = random_matrix(4, 2, 11);
    Eigen::MatrixXd test = random_matrix(4, 2, 12);
    WindowPair pair = make_pair(ref, test);
    Eigen::MatrixXd ref_before = pair.ref();
    for (int i = 0; i < 13; ++i) {
        Sample s{pair.next_t(), random_matrix(1, 2, 100 + i).row(0).transpose()};
        pair.push(s);
    }
    CHECK(pair.ref() == ref_before);
}

TEST_CASE("push rejects dimension mismatch with expected and actual n") {
    Eigen::MatrixXd ref = random_matrix(2, 3, 5);
    WindowPair pair = make_pair(ref, random_matrix(2, 3, 6));
    Sample bad{pair.next_t(), Eigen::VectorXd::Zero(2)};
    try {
        pair.push(bad);
        FAIL("expected DimensionMismatchError");
    } catch (const DimensionMismatchError& e) {
        CHECK(e.expected == 3);
        CHECK(e.actual == 2);
    }
}

TEST_CASE("infer_bounds basics") {
    Eigen::MatrixXd w(3, 1);
    w << -1.0, 0.0, 3.0;
    SeriesMeta meta = infer_bounds(w);
    CHECK(meta.lower_bounds[0] == -1.0);
    CHECK(meta.upper_bounds[0] == 3.0);
    CHECK(meta.bounds_source == BoundsSource::inferred);

    Eigen::MatrixXd constant(2, 1);
    constant << 2.0, 2.0;
    meta = infer_bounds(constant);
    CHECK(meta.lower_bounds[0] == 2.0);
    CHECK(meta.upper_bounds[0] == 2.0);

    Eigen::MatrixXd two(2, 2);
    two << 0.0, -5.0, 1.0, 5.0;
    meta = infer_bounds(two);
    CHECK(meta.lower_bounds[0] == 0.0);
    CHECK(meta.upper_bounds[0] == 1.0);
    CHECK(meta.lower_bounds[1] == -5.0);
    CHECK(meta.upper_bounds[1] == 5.0);

    CHECK_THROWS_AS(infer_bounds(Eigen::MatrixXd(0, 0)), DegenerateWindowError);
}

TEST_CASE("infer_bounds is idempotent") {
    Eigen::MatrixXd w = random_matrix(20, 4, 42);
    SeriesMeta first = infer_bounds(w);
    SeriesMeta second = infer_bounds(w);
    CHECK(first.lower_bounds == second.lower_bounds);
    CHECK(first.upper_bounds == second.upper_bounds);
}

TEST_CASE("csv reader parses rows and optional header") {
    const char* path = "test_core_tmp.csv";
    {
        std::ofstream out(path);
        out << "a,b,c\n1,2,3\n4,5.5,-6e-1\n";
    }
    CsvReader reader(path);
    Eigen::VectorXd row;
    REQUIRE(reader.next(row));
    CHECK(row.size() == 3);
    CHECK(row[0] == 1.0);
    REQUIRE(reader.next(row));
    CHECK(row[1] == 5.5);
    CHECK(row[2] == -0.6);
    CHECK_FALSE(reader.next(row));
    std::remove(path);
}

TEST_CASE("csv reader aborts with the offending line number") {
    const char* path = "test_core_bad.csv";
    {
        std::ofstream out(path);
        out << "1,2\n3,4\n5,oops\n";
    }
    CsvReader reader(path);
    Eigen::VectorXd row;
    REQUIRE(reader.next(row));
    REQUIRE(reader.next(row));
    try {
        reader.next(row);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    std::remove(path);

    {
        std::ofstream out(path);
        out << "1,2\n3\n";
    }
    CsvReader short_row(path);
    REQUIRE(short_row.next(row));
    CHECK_THROWS_AS(short_row.next(row), ParseError);
    std::remove(path);
}
