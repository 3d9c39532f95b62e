#include "duelay/delay.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace duelay;

TEST_CASE("delay sampling") {
    StreamRng rng = make_stream(1, "delay-test");
    const DelayModel c3 = DelayModel::constant(3, 3);
    for (int i = 0; i < 100; ++i) CHECK(c3.sample(rng) == 3);
    const DelayModel g1 = DelayModel::geometric(1.0, 2);
    for (int i = 0; i < 100; ++i) CHECK(g1.sample(rng) == 1);
    const DelayModel none = DelayModel::none();
    for (int i = 0; i < 100; ++i) CHECK(none.sample(rng) == 1);

    const DelayModel g = DelayModel::geometric(0.5, 3);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        const int d = g.sample(rng);
        CHECK_GE(d, 1);
        ones += d == 1;
    }
    CHECK(std::abs(ones / double(n) - 0.5) <= oracle::three_sigma(0.5, n));
}

TEST_CASE("rho closed forms") {
    CHECK(DelayModel::geometric(0.5, 1).rho() == doctest::Approx(0.5));
    CHECK(DelayModel::geometric(0.5, 2).rho() == doctest::Approx(0.75));
    double pmf_sum = 0.0;
    for (int k = 1; k <= 5; ++k) pmf_sum += 0.3 * std::pow(0.7, k - 1);
    CHECK(DelayModel::geometric(0.3, 5).rho() == doctest::Approx(pmf_sum).epsilon(1e-14));
    CHECK(DelayModel::constant(2, 3).rho() == 1.0);
    CHECK(DelayModel::none().rho() == 1.0);
    CHECK_THROWS_AS(DelayModel::constant(4, 3), std::invalid_argument);
    CHECK_THROWS_AS(rho_of(DelayModel::Kind::kConstant, 1.0, 5, 2), std::invalid_argument);
    CHECK_THROWS_AS(DelayModel::geometric(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(DelayModel::geometric(0.5, 0), std::invalid_argument);
}

TEST_CASE("ipw weight") {
    CHECK(ipw_weight(1, 5, 2, 3, 0.5) == 2.0);
    CHECK(ipw_weight(4, 5, 2, 3, 0.5) == 0.0);
    CHECK(ipw_weight(1, 100, 4, 3, 0.5) == 0.0);
    for (int s = 1; s < 10; ++s)
        for (int t = s + 1; t < 15; ++t)
            for (int d = 1; d < 8; ++d) {
                const double w = ipw_weight(s, t, d, 4, 0.8);
                CHECK((w == 0.0 || w == 1.0 / 0.8));
            }
    for (int s = 1; s < 10; ++s) CHECK(ipw_weight(s, s + 1, 1, 1, 1.0) == 1.0);
}

TEST_CASE("ipw weighting is unbiased for the preference probability") {
    const double q = 0.6;
    const int n = 100000;
    for (int m : {1, 3, 5}) {
        const DelayModel model = DelayModel::geometric(0.3, m);
        StreamRng rng = make_stream(m, "ipw-unbiased");
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const int y = rng.uniform() < q ? 1 : 0;
            const int d = model.sample(rng);
            const double v = ipw_weight(1, 1 + m, d, m, model.rho()) * y;
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / n;
        const double sd = std::sqrt((sum_sq / n - mean * mean) / n);
        CHECK(std::abs(mean - q) <= 3.0 * sd);
    }
}

TEST_CASE("pending queue arrivals") {
    PendingQueue q;
    DuelRecord r;
    r.round = 1;
    r.delay = 2;
    q.push(r);
    CHECK(q.poll(2, 3).empty());
    const auto got = q.poll(3, 3);
    REQUIRE(got.size() == 1);
    CHECK(got[0].delivered);
    CHECK(q.poll(3, 3).empty());

    DuelRecord late;
    late.round = 1;
    late.delay = 5;
    q.push(late);
    CHECK(q.poll(4, 3).empty());
    CHECK(q.size() == 1);
    CHECK(q.poll(5, 3).empty());
    CHECK(q.size() == 0);
    CHECK(q.dropped() == 1);

    DuelRecord bad;
    bad.round = 2;
    bad.delay = 0;
    CHECK_THROWS_AS(q.push(bad), std::invalid_argument);
}

TEST_CASE("every uncensored record is delivered exactly once") {
    StreamRng rng = make_stream(4, "queue-oracle");
    const DelayModel model = DelayModel::geometric(0.3, 3);
    PendingQueue q;
    std::set<std::int64_t> expected, got;
    const int n = 1000;
    for (int s = 1; s <= n; ++s) {
        for (const auto& rec : q.poll(s, 3)) {
            CHECK(rec.delivered);
            CHECK(rec.round + rec.delay <= s);
            CHECK(got.insert(rec.round).second);
        }
        DuelRecord r;
        r.round = s;
        r.delay = model.sample(rng);
        if (r.delay <= 3) expected.insert(s);
        q.push(r);
    }
    for (int t = n + 1; t <= n + 10; ++t)
        for (const auto& rec : q.poll(t, 3)) CHECK(got.insert(rec.round).second);
    CHECK(got == expected);
    CHECK(q.empty());
}

TEST_CASE("no-delay records arrive the next round") {
    PendingQueue q;
    for (int s = 1; s <= 20; ++s) {
        DuelRecord r;
        r.round = s;
        r.delay = 1;
        q.push(r);
        const auto got = q.poll(s + 1, 1);
        REQUIRE(got.size() == 1);
        CHECK(got[0].round == s);
    }
}
