#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "sybilsim/adversary.hpp"
#include "sybilsim/initialization.hpp"
#include "sybilsim/togcom.hpp"

using namespace sybilsim;

namespace {

SystemState window_state(double jg, std::initializer_list<double> joins) {
    SystemState s;
    s.jg_iter = jg;
    for (double t : joins) s.join_log.push(t);
    return s;
}

Bootstrapped boot(std::size_t n0, double jg0 = 1.0, std::uint64_t seed = 1) {
    Rng rng(seed);
    return bootstrap(n0, 1.0 / 18.0, 3.0, jg0, rng);
}

}  // namespace

TEST_CASE("entrance price counts requests in the trailing window") {
    const double t = 10.0;
    auto a = window_state(1.0, {t - 0.9, t - 0.5});
    CHECK(entrance_difficulty(a, t) == 3);
    auto b = window_state(1.0, {});
    CHECK(entrance_difficulty(b, t) == 1);
    auto c = window_state(2.0, {t - 0.7, t - 0.4, t - 0.1});
    CHECK(entrance_difficulty(c, t) == 3);
    auto d = window_state(1.0, {t - 1.0, t - 0.999});
    CHECK(entrance_difficulty(d, t) == 2);  // (t - 1, t] excludes t - 1
}

TEST_CASE("first good join of an iteration pays 1") {
    auto b = boot(10);
    CostLedger ledger;
    auto price = on_join(b.state, b.est, ledger, Member{false, 10}, 5.0);
    CHECK(price == 1);
    CHECK(ledger.alg_entrance == 1);
    CHECK(ledger.adv_entrance == 0);
    CHECK(b.state.good_count() == 11);
}

TEST_CASE("bad join into a window holding 9 requests pays 10") {
    auto b = boot(10);
    CostLedger ledger;
    for (int i = 0; i < 9; ++i) b.state.join_log.push(4.5);
    CHECK(on_join(b.state, b.est, ledger, Member{true, 0}, 5.0) == 10);
    CHECK(ledger.adv_entrance == 10);
}

TEST_CASE("k back-to-back bad joins pay k(k+1)/2") {
    for (std::uint64_t k : {1, 2, 7, 50, 300}) {
        auto b = boot(1000);
        CostLedger ledger;
        for (std::uint64_t j = 0; j < k; ++j) on_join(b.state, b.est, ledger, Member{true, 0}, 2.0);
        std::uint64_t oracle = 0;
        for (std::uint64_t j = 1; j <= k; ++j) oracle += j;
        CHECK(ledger.adv_entrance == oracle);
        CHECK(oracle == k * (k + 1) / 2);
        CHECK(b.state.bad_count() == k);
    }
}

TEST_CASE("purge trigger examples") {
    SystemState s;
    s.s_prev = 110;
    s.n_a = 6;
    s.n_d = 4;
    CHECK(purge_due(s));
    s.n_a = 5;
    CHECK_FALSE(purge_due(s));
    s.s_prev = 11;
    s.n_a = 1;
    s.n_d = 0;
    CHECK(purge_due(s));
}

TEST_CASE("purge keeps good IDs and only paid-for bad IDs") {
    Rng rng(3);
    for (std::uint64_t retain : {0, 8}) {
        auto b = boot(100);
        CostLedger ledger;
        admit_bad(b.state, b.est, ledger, 8);
        REQUIRE(b.state.size() == 108);
        execute_purge(b.state, b.est, ledger, retain, rng, 4.0);
        CHECK(b.state.size() == 100 + retain);
        CHECK(ledger.alg_purge == 100);
        CHECK(ledger.adv_purge == retain);
        CHECK(b.state.s_prev == 100 + retain);
        CHECK(b.state.iteration == 2);
        CHECK(b.state.n_a == 0);
        CHECK(ledger.rows.size() == 1);
        CHECK(ledger.rows[0].closed);
    }
    auto b = boot(100);
    CostLedger ledger;
    execute_purge(b.state, b.est, ledger, 5, rng, 1.0);
    CHECK(b.state.size() == 100);
    CHECK(ledger.alg_purge == 100);
    CHECK(ledger.adv_purge == 0);
}

TEST_CASE("adversary retains its oldest IDs first") {
    auto b = boot(50);
    CostLedger ledger;
    auto first = admit_bad(b.state, b.est, ledger, 5);
    Rng rng(1);
    execute_purge(b.state, b.est, ledger, 3, rng, 1.0);
    CHECK(b.state.bad.contains(first));
    CHECK(b.state.bad.contains(first + 2));
    CHECK_FALSE(b.state.bad.contains(first + 3));
}

TEST_CASE("committee size and selection") {
    CHECK(committee_size(5000, 1000, 3.0) == 21);
    CHECK(committee_size(21, 1000, 3.0) == 21);
    CHECK(committee_size(10, 1000, 3.0) == 10);
    CHECK(committee_size(1, 1, 3.0) == 1);  // ln 1 = 0, floor at one member

    auto one = boot(1);
    Rng rng(5);
    auto c = select_committee(one.state, rng);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == Member{false, 0});

    auto big = boot(1000);
    Rng r1(9), r2(9);
    auto a = select_committee(big.state, r1), b2 = select_committee(big.state, r2);
    CHECK(a.size() == 21);
    CHECK(a == b2);
    std::set<std::uint64_t> keys;
    for (const auto& m : a) keys.insert(m.key);
    CHECK(keys.size() == 21);
}

TEST_CASE("committee draws are uniform over members") {
    auto b = boot(30);
    Rng rng(17);
    std::vector<int> hits(30, 0);
    const int rounds = 30000;
    b.state.n0 = 3;  // ceil(3 ln 3) = 4 seats
    for (int r = 0; r < rounds; ++r)
        for (const auto& m : select_committee(b.state, rng)) ++hits[m.key];
    double expect = rounds * 4.0 / 30.0;
    for (int h : hits) CHECK(std::abs(h - expect) < 5 * std::sqrt(expect));
}

TEST_CASE("estimator fires at 3/5 new membership") {
    auto b = boot(100);
    CostLedger ledger;
    std::size_t fired_at = 0;
    CHECK_FALSE(estimator_update(b.state, b.est, 0.5));  // nothing new
    for (std::uint32_t k = 1; k <= 200 && !fired_at; ++k) {
        admit_good(b.state, b.est, ledger, 99 + k);
        if (estimator_update(b.state, b.est, double(k))) fired_at = k;
    }
    std::size_t k = 1;
    while (5 * k < 3 * (100 + k)) ++k;
    CHECK(k == 150);
    CHECK(fired_at == 150);
    CHECK(b.est.jg_hat == Catch::Approx(250.0 / 150.0));
    REQUIRE(b.est.intervals.size() == 1);
    CHECK(b.est.intervals[0].start == 0.0);
    CHECK(b.est.intervals[0].end == 150.0);
    CHECK(b.est.new_count == 0);
}

TEST_CASE("departures of new IDs shrink the estimator difference") {
    auto b = boot(10);
    CostLedger ledger;
    admit_good(b.state, b.est, ledger, 10);
    admit_good(b.state, b.est, ledger, 11);
    CHECK(b.est.new_count == 2);
    on_depart(b.state, b.est, ledger, 10);
    CHECK(b.est.new_count == 1);
    on_depart(b.state, b.est, ledger, 3);  // an old member
    CHECK(b.est.new_count == 1);
    CHECK(b.state.n_d == 2);
    CHECK_THROWS_AS(on_depart(b.state, b.est, ledger, 10), ValidationError);
}

TEST_CASE("the price uses the estimate latched at the iteration start") {
    auto b = boot(100, 1.0);
    CostLedger ledger;
    b.state.join_log.push(9.6);
    b.est.jg_hat = 10.0;  // window would shrink to 0.1 s
    CHECK(entrance_difficulty(b.state, 10.0) == 2);
    Rng rng(1);
    execute_purge(b.state, b.est, ledger, 0, rng, 10.0);
    CHECK(b.state.jg_iter == 10.0);
    CHECK(entrance_difficulty(b.state, 10.0) == 1);
}

TEST_CASE("window truncation at the iteration start is opt-in") {
    auto b = boot(100, 1.0);
    CostLedger ledger;
    b.state.join_log.push(9.5);
    Rng rng(1);
    execute_purge(b.state, b.est, ledger, 0, rng, 9.8);
    CHECK(entrance_difficulty(b.state, 10.0) == 2);
    b.state.truncate_window = true;
    CHECK(entrance_difficulty(b.state, 10.0) == 1);
}

TEST_CASE("window exit walk agrees with the price-level search") {
    Rng rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        JoinWindow log;
        std::uniform_int_distribution<int> count(0, 60);
        std::uniform_real_distribution<double> gap(0.0, 0.05);
        double t = 1.0;
        int n = count(rng);
        for (int i = 0; i < n; ++i) {
            t += gap(rng);
            log.push(t);
        }
        double w = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
        double now = t + std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        AdversaryLedger adv;
        adv.rate_T = std::exp(std::uniform_real_distribution<double>(0.0, 8.0)(rng));
        adv.budget_spent = static_cast<std::uint64_t>(std::floor(adv.rate_T * now * uniform01(rng)));
        auto first = log.end_index() - log.count_after(now - w);
        WindowPrice price{&log, first, w};
        double walk = price.earliest_affordable(adv, now);
        double search = greedy_search_time(adv, price, now);
        CHECK(walk == search);
        CHECK(adv.affords(walk, 1 + log.count_after(walk - w)));
    }
}
