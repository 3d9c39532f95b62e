#include "duelay/linalg.hpp"
#include "duelay/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace duelay;

namespace {

Vec random_vec(int d, StreamRng& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = n(rng);
    return v;
}

}  // namespace

TEST_CASE("info_matrix_new") {
    InfoMatrix m(2, 1.0);
    CHECK(m.matrix().isApprox(Mat::Identity(2, 2)));
    CHECK(m.logdet() == doctest::Approx(0.0));

    InfoMatrix m3(3, 2.0);
    CHECK(m3.logdet() == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(m3.logdet0() == m3.logdet());

    const double ridge = 0.5 / 0.10499358540350652;
    InfoMatrix m20(20, ridge);
    for (int i = 0; i < 20; ++i) CHECK(m20.inverse()(i, i) == doctest::Approx(1.0 / ridge));

    CHECK_THROWS_AS(InfoMatrix(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(InfoMatrix(2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(InfoMatrix(2, -1.0), std::invalid_argument);
}

TEST_CASE("rank_one_update small cases") {
    InfoMatrix m(2, 1.0);
    m.rank_one_update(Vec::Unit(2, 0), 1.0);
    Mat expected(2, 2);
    expected << 2, 0, 0, 1;
    CHECK(m.matrix().isApprox(expected));
    CHECK(m.logdet() == doctest::Approx(std::log(2.0)));
    CHECK(m.inverse()(0, 0) == doctest::Approx(0.5));

    InfoMatrix z(2, 1.0);
    z.rank_one_update(Vec::Zero(2), 1.0);
    CHECK(z.matrix().isApprox(Mat::Identity(2, 2)));
    CHECK(z.logdet() == 0.0);

    CHECK_THROWS_AS(m.rank_one_update(Vec::Zero(3), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(m.rank_one_update(Vec::Ones(2), -1.0), std::invalid_argument);
    Vec bad = Vec::Ones(2);
    bad[1] = std::nan("");
    CHECK_THROWS_AS(m.rank_one_update(bad, 1.0), std::invalid_argument);
}

TEST_CASE("maintained inverse matches Gauss-Jordan after 50 updates") {
    StreamRng rng = make_stream(11, "linalg-test");
    InfoMatrix m(5, 0.7);
    for (int i = 0; i < 50; ++i) m.rank_one_update(random_vec(5, rng), 1.0);
    const Mat direct = oracle::gauss_jordan_inverse(m.matrix());
    CHECK((m.inverse() - direct).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.logdet() == doctest::Approx(oracle::elimination_logdet(m.matrix())).epsilon(1e-10));
    CHECK(m.inverse_residual() < 1e-8);

    const Vec v = random_vec(5, rng);
    const double oracle_norm = std::sqrt(v.dot(direct * v));
    CHECK(std::abs(m.weighted_norm(v, true) - oracle_norm) < 1e-6);
}

TEST_CASE("weighted_norm") {
    InfoMatrix m(2, 1.0);
    Vec v(2);
    v << 3, 4;
    CHECK(m.weighted_norm(v, false) == doctest::Approx(5.0));
    CHECK(m.weighted_norm(Vec::Zero(2), true) == 0.0);

    InfoMatrix d(2, 1.0);
    d.rank_one_update(Vec::Unit(2, 0), 3.0);  // diag(4, 1)
    CHECK(d.weighted_norm(Vec::Unit(2, 0), false) == doctest::Approx(2.0));
    CHECK(d.weighted_norm(Vec::Unit(2, 0), true) == doctest::Approx(0.5));
    CHECK_THROWS_AS(d.weighted_norm(Vec::Zero(3), true), std::invalid_argument);
}

TEST_CASE("properties: monotone logdet and bounded inverse norm") {
    StreamRng rng = make_stream(5, "linalg-prop");
    const double ridge = 2.5;
    InfoMatrix m(8, ridge);
    double prev = m.logdet();
    for (int i = 0; i < 300; ++i) {
        m.rank_one_update(random_vec(8, rng), rng.uniform() * 2.0);
        CHECK(m.logdet() >= prev - 1e-12);
        prev = m.logdet();
        const Vec v = random_vec(8, rng);
        CHECK(m.weighted_norm(v, true) <= v.norm() / std::sqrt(ridge) + 1e-12);
    }
}

TEST_CASE("periodic refresh keeps the inverse accurate over 1e4 updates") {
    StreamRng rng = make_stream(3, "linalg-long");
    InfoMatrix m(16, 1.0);
    for (int i = 0; i < 10000; ++i) m.rank_one_update(random_vec(16, rng, 0.3), 1.0);
    CHECK(m.updates() == 10000);
    CHECK(m.inverse_residual() < 1e-6);
    const Mat direct = oracle::gauss_jordan_inverse(m.matrix());
    CHECK((m.inverse() - direct).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.logdet() == doctest::Approx(oracle::elimination_logdet(m.matrix())).epsilon(1e-10));
}

TEST_CASE("batched inverse quadratic forms agree with single ones") {
    StreamRng rng = make_stream(9, "linalg-batch");
    InfoMatrix m(6, 1.3);
    for (int i = 0; i < 20; ++i) m.rank_one_update(random_vec(6, rng), 1.0);
    Mat cols(6, 4);
    for (int j = 0; j < 4; ++j) cols.col(j) = random_vec(6, rng);
    const Vec q = m.inverse_quadratic_columns(cols);
    for (int j = 0; j < 4; ++j) CHECK(q[j] == doctest::Approx(m.inverse_quadratic(cols.col(j))).epsilon(1e-12));
}
