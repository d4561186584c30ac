#include <catch_amalgamated.hpp>

#include <cmath>

#include "sybilsim/churn.hpp"
#include "sybilsim/engine.hpp"
#include "sybilsim/epochs.hpp"

using namespace sybilsim;

namespace {

ChurnTrace static_population(std::size_t n) {
    ChurnTrace tr;
    for (std::size_t i = 0; i < n; ++i) tr.events.push_back({0.0, tr.id_count++, TraceKind::Join});
    tr.n_init = n;
    return tr;
}

ChurnTrace gnutella(double duration, std::uint64_t seed) {
    auto spec = network_preset("gnutella");
    spec.duration = duration;
    return generate_trace(spec, seed);
}

}  // namespace

TEST_CASE("zero-length run") {
    SimConfig cfg;
    cfg.t_end = 0;
    AdversaryConfig adv;
    adv.rate_T = 100;
    auto res = run(cfg, gnutella(100, 1), adv);
    CHECK(res.timeseries.empty());
    CHECK(res.ledger.alg_total() == 0);
    CHECK(res.ledger.adv_total() == 0);
    CHECK(res.purges == 0);
}

TEST_CASE("no adversary means no bad IDs") {
    SimConfig cfg;
    cfg.t_end = 500;
    auto res = run(cfg, gnutella(500, 2), AdversaryConfig{});
    REQUIRE(res.timeseries.size() >= 500);
    for (const auto& row : res.timeseries) CHECK(row.bad_fraction == 0.0);
    CHECK(res.bad_joins == 0);
    CHECK(res.purges > 0);
}

TEST_CASE("same seed gives identical output") {
    SimConfig cfg;
    cfg.t_end = 300;
    cfg.seed = 77;
    AdversaryConfig adv;
    adv.rate_T = 4096;
    auto trace = gnutella(300, 3);
    for (auto name : {"togcom", "ccom", "gmcom", "tgch_sf98"}) {
        cfg.defense = with_defense(DefenseConfig{}, name);
        auto a = run(cfg, trace, adv), b = run(cfg, trace, adv);
        CHECK(timeseries_csv(a) == timeseries_csv(b));
        CHECK(ledger_csv(a) == ledger_csv(b));
    }
}

TEST_CASE("step advances the clock to the event time") {
    SimConfig cfg;
    cfg.t_end = 10;
    cfg.sample_interval = 0;
    ChurnTrace tr = static_population(5);
    tr.id_count = 6;
    tr.events.push_back({1.0, 5, TraceKind::Join});
    Simulation sim(cfg, tr, AdversaryConfig{});
    auto e = sim.step();
    REQUIRE(e.has_value());
    CHECK(e->kind == EventKind::JoinGood);
    CHECK(sim.now() == 1.0);
    CHECK(sim.state().good_count() == 6);
    CHECK_FALSE(sim.step().has_value());
}

TEST_CASE("equal times dispatch in sequence order") {
    SimConfig cfg;
    cfg.t_end = 10;
    cfg.sample_interval = 0;
    auto tr = static_population(5);
    Simulation sim(cfg, tr, AdversaryConfig{});
    sim.schedule({1.0, 1, EventKind::JoinGood, 100});
    sim.schedule({1.0, 0, EventKind::JoinGood, 101});
    auto first = sim.step();
    REQUIRE(first.has_value());
    CHECK(first->id == 101);
    CHECK(sim.step()->id == 100);
}

TEST_CASE("departure of an ID that is not live is a validation error") {
    SimConfig cfg;
    cfg.t_end = 10;
    cfg.sample_interval = 0;
    Simulation sim(cfg, static_population(5), AdversaryConfig{});
    sim.schedule({2.0, 0, EventKind::Depart, 42});
    CHECK_THROWS_AS(sim.step(), ValidationError);
}

TEST_CASE("unit-price bulk path matches a purge-cycle oracle") {
    // Static population, CCom: every purge removes all bad IDs, so purges
    // fire every ceil(n0 / 11) bad joins and each costs n0.
    for (double T : {3.0, 1000.0, 123456.0}) {
        for (std::size_t n0 : {100, 1000, 1234}) {
            SimConfig cfg;
            cfg.t_end = 50;
            cfg.sample_interval = 0;
            cfg.defense = with_defense(cfg.defense, "ccom");
            AdversaryConfig adv;
            adv.rate_T = T;
            auto res = run(cfg, static_population(n0), adv);
            std::uint64_t joins = 0;
            while (double(joins + 1) <= T * 50.0) ++joins;  // budget covers joins+1 units by t_end
            std::uint64_t per = (n0 + 10) / 11;
            CHECK(res.bad_joins == joins);
            CHECK(res.purges == joins / per);
            CHECK(res.ledger.alg_purge == res.purges * n0);
            CHECK(res.ledger.adv_entrance == joins);
            CHECK(res.invariants.population_violations == 0);
        }
    }
}

TEST_CASE("folded iteration rows keep totals") {
    SimConfig cfg;
    cfg.t_end = 200;
    cfg.defense = with_defense(cfg.defense, "ccom");
    AdversaryConfig adv;
    adv.rate_T = 1e6;
    auto res = run(cfg, gnutella(200, 5), adv);
    std::uint64_t alg = 0, adv_total = 0, iterations = 0;
    for (const auto& row : res.ledger.rows) {
        alg += (row.alg_entrance + row.alg_purge) * row.repeat;
        adv_total += (row.adv_entrance + row.adv_purge) * row.repeat;
        iterations += row.repeat;
    }
    CHECK(alg == res.ledger.alg_total());
    CHECK(adv_total == res.ledger.adv_total());
    CHECK(iterations == res.purges + 1);
    CHECK(res.ledger.rows.size() < iterations);
}

TEST_CASE("population invariant holds under attack") {
    auto trace = gnutella(300, 8);
    for (auto name : {"togcom", "ccom", "gmcom"}) {
        for (double T : {1.0, 1024.0, 1048576.0}) {
            SimConfig cfg;
            cfg.t_end = 300;
            cfg.defense = with_defense(cfg.defense, name);
            AdversaryConfig adv;
            adv.rate_T = T;
            auto res = run(cfg, trace, adv);
            INFO(name << " T=" << T);
            CHECK(res.invariants.population_violations == 0);
            for (const auto& row : res.timeseries) CHECK(row.bad_fraction < 1.0 / 6.0);
            CHECK(res.adv_rate() <= T);
        }
    }
}

TEST_CASE("quiet ToGCom spends on the order of the good join rate") {
    SimConfig cfg;
    cfg.t_end = 2000;
    auto res = run(cfg, gnutella(2000, 4), AdversaryConfig{});
    double jg = res.good_join_rate();
    CHECK(jg == Catch::Approx(1.0).margin(0.15));
    CHECK(res.alg_rate() >= jg);
    CHECK(res.alg_rate() <= 30 * jg);
}

TEST_CASE("ToGCom spend grows like the square root of T") {
    auto trace = gnutella(500, 6);
    auto A = [&](double T) {
        SimConfig cfg;
        cfg.t_end = 500;
        cfg.sample_interval = 0;
        AdversaryConfig adv;
        adv.rate_T = T;
        return run(cfg, trace, adv).alg_rate();
    };
    double ratio = A(std::ldexp(1.0, 20)) / A(std::ldexp(1.0, 16));
    CHECK(ratio == Catch::Approx(4.0).epsilon(0.2));
}

TEST_CASE("burst adversary is priced by the window") {
    SimConfig cfg;
    cfg.t_end = 100;
    cfg.sample_interval = 0;
    AdversaryConfig adv;
    adv.rate_T = 1000;
    adv.strategy = Strategy::Burst;
    adv.burst_period = 10;
    auto res = run(cfg, static_population(1000), adv);
    CHECK(res.bad_joins > 0);
    CHECK(res.ledger.adv_entrance <= 100000);
    CHECK(res.invariants.population_violations == 0);
}

TEST_CASE("synthetic initial population when the trace has none") {
    SimConfig cfg;
    cfg.t_end = 5;
    cfg.n0 = 300;
    ChurnTrace empty;
    Simulation sim(cfg, empty, AdversaryConfig{});
    CHECK(sim.state().good_count() == 300);
    cfg.n0 = 0;
    CHECK_THROWS_AS(Simulation(cfg, empty, AdversaryConfig{}), ConfigError);
}

TEST_CASE("config errors are raised up front") {
    SimConfig cfg;
    cfg.alpha = 0;
    CHECK_THROWS_AS(run(cfg, static_population(5), AdversaryConfig{}), ConfigError);
    cfg = SimConfig{};
    AdversaryConfig adv;
    adv.rate_T = -1;
    CHECK_THROWS_AS(run(cfg, static_population(5), adv), ConfigError);
    CHECK_THROWS_AS(with_defense(DefenseConfig{}, "nope"), ConfigError);
}

TEST_CASE("defense names round-trip") {
    for (std::string n : {"togcom", "ccom", "gmcom", "sybilcontrol", "tgch", "tgch_sf92", "tgch_sf98"})
        CHECK(defense_name(with_defense(DefenseConfig{}, n)) == n);
    CHECK(defense_name(with_defense(DefenseConfig{}, "remp-1e7")) == "remp-" + fmt_num(1e7));
}
