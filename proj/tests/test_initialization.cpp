#include <catch_amalgamated.hpp>

#include "sybilsim/initialization.hpp"

using namespace sybilsim;

TEST_CASE("all-good bootstrap") {
    Rng rng(1);
    auto b = bootstrap(1000, 1.0 / 18.0, 3.0, 10.0, rng);
    CHECK(b.state.size() == 1000);
    CHECK(b.state.bad_fraction() == 0.0);
    CHECK(b.state.committee.size() == 21);
    CHECK(b.state.iteration == 1);
    CHECK(b.state.s_prev == 1000);
    CHECK(b.state.jg_iter == 10.0);
    CHECK(b.est.jg_hat == 10.0);
    CHECK(b.est.last_change == 0.0);
    CHECK(b.est.new_count == 0);
}

TEST_CASE("adversarial bootstrap stays within alpha") {
    Rng rng(2);
    auto b = bootstrap(1000, 1.0 / 18.0, 3.0, 10.0, rng, 1.0 / 18.0);
    CHECK(b.state.bad_count() == 55);
    CHECK(b.state.good_count() == 1000);
    CHECK(b.state.bad_fraction() < 1.0 / 6.0);
}

TEST_CASE("committee majority is good across seeds") {
    int violations = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(s);
        auto b = bootstrap(1000, 1.0 / 18.0, 3.0, 10.0, rng, 1.0 / 18.0);
        if (2 * committee_bad(b.state.committee) >= b.state.committee.size()) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("bootstrap rejects bad parameters") {
    Rng rng(3);
    CHECK_THROWS_AS(bootstrap(0, 1.0 / 18.0, 3.0, 1.0, rng), ConfigError);
    CHECK_THROWS_AS(bootstrap(10, 1.0 / 18.0, 3.0, 0.0, rng), ConfigError);
    CHECK_THROWS_AS(bootstrap(10, 1.0 / 18.0, 3.0, 1.0, rng, 0.1), ConfigError);
    CHECK_THROWS_AS(bootstrap(10, 1.5, 3.0, 1.0, rng), ConfigError);
    std::vector<std::uint32_t> ids{1, 2};
    CHECK_THROWS_AS(bootstrap(3, 1.0 / 18.0, 3.0, 1.0, rng, 0.0, &ids), ConfigError);
    BootstrapConfig cfg;
    CHECK(cfg.initial_estimate() == Catch::Approx(10.0));
}
