#include "duelay/environment.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace duelay;

TEST_CASE("theta_star is a unit vector and seed-deterministic") {
    Environment env(RewardKind::kLinear, 20, 20, 7);
    CHECK(std::abs(env.theta_star().norm() - 1.0) < 1e-12);
    Environment again(RewardKind::kLinear, 20, 20, 7);
    CHECK(env.theta_star() == again.theta_star());
    Environment other(RewardKind::kLinear, 20, 20, 8);
    CHECK(env.theta_star() != other.theta_star());

    Environment one(RewardKind::kLinear, 1, 2, 0);
    CHECK(std::abs(std::abs(one.theta_star()[0]) - 1.0) < 1e-15);
}

TEST_CASE("constructor rejects bad sizes") {
    CHECK_THROWS_AS(Environment(RewardKind::kLinear, 0, 20, 1), std::invalid_argument);
    CHECK_THROWS_AS(Environment(RewardKind::kLinear, 3, 1, 1), std::invalid_argument);
}

TEST_CASE("reward kinds parse and print") {
    CHECK(parse_reward_kind("quadratic") == RewardKind::kQuadratic);
    CHECK(to_string(RewardKind::kCubic) == "cubic");
    CHECK_THROWS_AS(parse_reward_kind("quartic"), std::invalid_argument);
}

TEST_CASE("draw_arms stays in the unit ball and is deterministic") {
    Environment env(RewardKind::kLinear, 20, 20, 3);
    const ArmSet a = env.draw_arms(5);
    CHECK(a.size() == 20);
    CHECK(a.round == 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.arm(i).norm() <= 1.0);
    CHECK(env.draw_arms(5).arms == a.arms);
    CHECK(env.draw_arms(6).arms != a.arms);
    CHECK_THROWS_AS(env.draw_arms(0), std::invalid_argument);
}

TEST_CASE("arm distribution is centred") {
    Environment env(RewardKind::kLinear, 2, 2, 11);
    Vec sum = Vec::Zero(2);
    int count = 0;
    for (int t = 1; t <= 5000; ++t) {
        const ArmSet a = env.draw_arms(t);
        sum += a.arms.rowwise().sum();
        count += 2;
    }
    CHECK((sum / count).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("reward for each kind") {
    Environment lin(RewardKind::kLinear, 3, 2, 1);
    const Vec th = lin.theta_star();
    Vec orth = Vec::Zero(3);
    // Any vector minus its projection onto theta is orthogonal to it.
    orth << 1, 0, 0;
    orth -= th.dot(orth) * th;
    CHECK(std::abs(lin.reward(orth)) < 1e-15);

    Environment quad(RewardKind::kQuadratic, 3, 2, 1);
    CHECK(quad.reward(-0.5 * quad.theta_star()) == doctest::Approx(0.25));
    Environment cub(RewardKind::kCubic, 3, 2, 1);
    CHECK(cub.reward(cub.theta_star()) == doctest::Approx(1.0));
    CHECK(cub.reward(cub.theta_star()) == cub.reward(cub.theta_star()));
    CHECK_THROWS_AS(lin.reward(Vec::Zero(4)), std::invalid_argument);
}

TEST_CASE("logistic helpers") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    for (double z : {-30.0, -3.0, -0.2, 0.0, 0.7, 4.0, 25.0}) {
        CHECK(sigmoid(z) == doctest::Approx(static_cast<double>(oracle::logistic_ld(z))).epsilon(1e-14));
        CHECK(log_sigmoid(z) == doctest::Approx(static_cast<double>(std::log(oracle::logistic_ld(z)))).epsilon(1e-13));
        const long double s = oracle::logistic_ld(z);
        CHECK(sigmoid_derivative(z) == doctest::Approx(static_cast<double>(s * (1.0L - s))).epsilon(1e-13));
    }
    CHECK(std::isfinite(log_sigmoid(-1000.0)));
    CHECK(log_sigmoid(-1000.0) == doctest::Approx(-1000.0));
}

TEST_CASE("preference sampling frequencies") {
    Environment env(RewardKind::kLinear, 1, 2, 0);
    const double s = env.theta_star()[0];
    Vec a(1), b(1), c(1);
    a << 0.0;
    b << 0.0;
    const int n = 100000;
    StreamRng rng = make_stream(1, "pref-test");
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += env.sample_preference(a, b, rng);
    CHECK(ones / double(n) >= 0.495);
    CHECK(ones / double(n) <= 0.505);

    // A reward gap of exactly 1 is beyond the unit ball; use a wide linear
    // environment to reach it: f(x) = s * x with |s| = 1.
    a << s * 1.0;
    c << 0.0;
    ones = 0;
    for (int i = 0; i < n; ++i) ones += env.sample_preference(a, c, rng);
    const double q = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(std::abs(ones / double(n) - q) <= oracle::three_sigma(q, n));

    // Swapped order: 1 - y(x2, x1) has the same law.
    int swapped = 0;
    for (int i = 0; i < n; ++i) swapped += 1 - env.sample_preference(c, a, rng);
    CHECK(std::abs(swapped / double(n) - ones / double(n)) <= 2.0 * oracle::three_sigma(q, n));

    a << s * 50.0;
    ones = 0;
    for (int i = 0; i < n; ++i) ones += env.sample_preference(a, c, rng);
    CHECK(ones / double(n) > 0.9999);
}

TEST_CASE("instantaneous regret") {
    Environment env(RewardKind::kLinear, 1, 2, 0);
    const double s = env.theta_star()[0];
    ArmSet arms;
    arms.arms.resize(1, 2);
    arms.arms << s * 1.0, 0.0;  // f-values {1, 0}
    arms.round = 1;
    CHECK(env.instantaneous_regret(arms, 0, 1) == doctest::Approx(1.0));
    CHECK(env.instantaneous_regret(arms, 0, 0) == 0.0);
    CHECK(env.best_arm(arms) == 0);
    CHECK_THROWS_AS(env.instantaneous_regret(arms, 0, 2), std::invalid_argument);

    for (RewardKind kind : {RewardKind::kLinear, RewardKind::kQuadratic, RewardKind::kCubic}) {
        Environment e(kind, 6, 9, 4);
        for (int t = 1; t <= 20; ++t) {
            const ArmSet a = e.draw_arms(t);
            double best = -1e300;
            for (Eigen::Index k = 0; k < a.arms.cols(); ++k) {
                const double v = e.theta_star().dot(a.arms.col(k));
                const double f = kind == RewardKind::kLinear ? v : kind == RewardKind::kQuadratic ? v * v : v * v * v;
                best = std::max(best, f);
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                for (std::size_t j = 0; j < a.size(); ++j) {
                    const double r = e.instantaneous_regret(a, i, j);
                    CHECK(r >= 0.0);
                    CHECK(r == doctest::Approx(2.0 * best - e.reward(a.arm(i)) - e.reward(a.arm(j))));
                }
            }
            const std::size_t b = e.best_arm(a);
            CHECK(e.instantaneous_regret(a, b, b) == 0.0);
        }
    }
}

TEST_CASE("sample_unit_sphere") {
    StreamRng rng = make_stream(2, "sphere");
    for (int i = 0; i < 100; ++i) CHECK(std::abs(sample_unit_sphere(7, rng).norm() - 1.0) < 1e-12);
}
