#include <catch_amalgamated.hpp>

#include <cmath>

#include "sybilsim/adversary.hpp"
#include "sybilsim/rng.hpp"

using namespace sybilsim;

namespace {

struct ConstPrice {
    std::uint64_t p;
    std::uint64_t price_at(double) const { return p; }
    double time_price_at_most(std::uint64_t q, double t) const {
        return q >= p ? t : std::numeric_limits<double>::infinity();
    }
};

// Sequential oracle: keep adding joiners, the j-th paying base + j, while the budget lasts.
std::uint64_t sequential_batch(std::uint64_t budget, std::uint64_t base) {
    std::uint64_t k = 0, spent = 0;
    while (spent + base + k + 1 <= budget) {
        spent += base + k + 1;
        ++k;
    }
    return k;
}

}  // namespace

TEST_CASE("no budget means no injections") {
    AdversaryConfig cfg;
    AdversaryLedger led;
    CHECK_FALSE(next_injection(cfg, led, ConstPrice{1}, 0.0).has_value());
    cfg.strategy = Strategy::Burst;
    CHECK_FALSE(next_injection(cfg, led, ConstPrice{1}, 3.0).has_value());
}

TEST_CASE("greedy adversary at unit price injects rate_T per second") {
    AdversaryConfig cfg;
    cfg.rate_T = 2;
    AdversaryLedger led;
    led.rate_T = 2;
    double t = 0;
    std::uint64_t joins = 0;
    for (;;) {
        auto next = next_injection(cfg, led, ConstPrice{1}, t);
        REQUIRE(next.has_value());
        if (*next > 100.0) break;
        t = *next;
        led.budget_spent += 1;
        ++joins;
    }
    CHECK(joins == 200);
}

TEST_CASE("greedy adversary waits for the budget at a fixed price") {
    AdversaryLedger led;
    led.rate_T = 3;
    led.budget_spent = 6;
    double t = greedy_next_time(led, ConstPrice{5}, 1.0);
    CHECK(led.affords(t, 5));
    CHECK_FALSE(led.affords(std::nextafter(t, 0.0), 5));
    CHECK(t == Catch::Approx(11.0 / 3.0));
}

TEST_CASE("time_affordable is the first representable affordable instant") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        AdversaryLedger led;
        led.rate_T = std::exp(std::uniform_real_distribution<double>(-3, 20)(rng));
        led.budget_spent = rng() % 1000000;
        std::uint64_t p = 1 + rng() % 100000;
        double t = led.time_affordable(p);
        CHECK(led.affords(t, p));
        CHECK_FALSE(led.affords(std::nextafter(t, 0.0), p));
    }
}

TEST_CASE("burst batch size matches sequential price simulation") {
    CHECK(burst_batch_size(0) == 0);
    CHECK(burst_batch_size(1) == 1);
    CHECK(burst_batch_size(6) == 3);
    CHECK(burst_batch_size(9) == 3);
    CHECK(burst_batch_size(10) == 4);
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        std::uint64_t budget = rng() % 5000000;
        std::uint64_t base = i % 3 == 0 ? rng() % 500 : 0;
        CHECK(burst_batch_size(budget, base) == sequential_batch(budget, base));
    }
}

TEST_CASE("burst injections land on period multiples") {
    AdversaryConfig cfg;
    cfg.rate_T = 10;
    cfg.strategy = Strategy::Burst;
    cfg.burst_period = 5;
    AdversaryLedger led;
    led.rate_T = 10;
    CHECK(*next_injection(cfg, led, ConstPrice{1}, 0.0) == 5.0);
    CHECK(*next_injection(cfg, led, ConstPrice{1}, 3.0) == 5.0);
    CHECK(*next_injection(cfg, led, ConstPrice{1}, 5.0) == 5.0);  // still affordable at the instant
    led.budget_spent = 50;
    CHECK(*next_injection(cfg, led, ConstPrice{1}, 5.0) == 10.0);
}

TEST_CASE("purge response examples") {
    AdversaryConfig cfg;
    AdversaryLedger led;
    led.rate_T = 1;
    CHECK(purge_response(led, cfg, 5, 3.0) == 0);
    cfg.pays_purge = true;
    CHECK(purge_response(led, cfg, 5, 3.0) == 3);
    CHECK(purge_response(led, cfg, 0, 3.0) == 0);
    CHECK(purge_response(led, cfg, 2, 3.0) == 2);
}

TEST_CASE("adversary config validation") {
    AdversaryConfig cfg;
    cfg.rate_T = -1;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg.rate_T = 1;
    cfg.strategy = Strategy::Burst;
    cfg.burst_period = 0;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
}
