#include <catch_amalgamated.hpp>

#include <set>

#include "sybilsim/epochs.hpp"
#include "sybilsim/rng.hpp"

using namespace sybilsim;

namespace {

// Set-based recomputation of the epoch rule from scratch after every event.
std::vector<double> brute_force_boundaries(const ChurnTrace& tr) {
    std::set<std::uint32_t> live, at_boundary;
    std::vector<double> out;
    for (const auto& e : tr.events) {
        if (e.kind == TraceKind::Join) {
            live.insert(e.id);
            if (e.time == 0.0) at_boundary.insert(e.id);  // G_0
        } else {
            live.erase(e.id);
        }
        if (e.time == 0.0) continue;
        std::size_t fresh = 0;
        for (auto id : live)
            if (!at_boundary.count(id)) ++fresh;
        double last = out.empty() ? 0.0 : out.back();
        if (e.time > last && fresh > 0 && 4 * fresh >= 3 * live.size()) {
            out.push_back(e.time);
            at_boundary = live;
        }
    }
    return out;
}

ChurnTrace random_trace(std::uint64_t seed, std::size_t max_events) {
    Rng rng(seed);
    ChurnTrace tr;
    std::uniform_int_distribution<std::size_t> init(0, 40);
    tr.n_init = init(rng);
    std::vector<std::uint32_t> live;
    for (std::size_t i = 0; i < tr.n_init; ++i) {
        tr.events.push_back({0.0, tr.id_count, TraceKind::Join});
        live.push_back(tr.id_count++);
    }
    std::uniform_int_distribution<std::size_t> len(10, max_events);
    auto n = len(rng);
    double t = 0;
    std::bernoulli_distribution tie(0.3), leave(0.45);
    while (tr.events.size() < n) {
        if (t == 0.0 || !tie(rng)) t += 1.0;  // integer times, frequent ties
        if (!live.empty() && leave(rng)) {
            std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
            auto k = pick(rng);
            tr.events.push_back({t, live[k], TraceKind::Depart});
            live[k] = live.back();
            live.pop_back();
        } else {
            tr.events.push_back({t, tr.id_count, TraceKind::Join});
            live.push_back(tr.id_count++);
        }
    }
    validate(tr);
    return tr;
}

}  // namespace

TEST_CASE("first epoch closes at the 300th join after 100 initial IDs") {
    ChurnTrace tr;
    for (int i = 0; i < 100; ++i) tr.events.push_back({0.0, tr.id_count++, TraceKind::Join});
    tr.n_init = 100;
    for (int k = 1; k <= 400; ++k) tr.events.push_back({double(k), tr.id_count++, TraceKind::Join});
    auto ep = detect_epochs(tr);
    REQUIRE(ep.size() >= 1);
    // smallest k with 4k >= 3(100 + k)
    std::size_t k = 1;
    while (4 * k < 3 * (100 + k)) ++k;
    REQUIRE(k == 300);
    CHECK(ep.boundaries[0] == 300.0);
    CHECK(ep.joins[0] == 300);
    CHECK(ep.rates[0] == Catch::Approx(1.0));
    CHECK(ep.good_sets[0].size() == 400);
}

TEST_CASE("empty trace has no epochs") {
    ChurnTrace tr;
    auto ep = detect_epochs(tr);
    CHECK(ep.size() == 0);
    CHECK_FALSE(ep.warnings.empty());
}

TEST_CASE("epoch detection matches brute force on random traces") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto tr = random_trace(1000 + s, 3000);
        auto ep = detect_epochs(tr, false);
        CHECK(ep.boundaries == brute_force_boundaries(tr));
    }
}

TEST_CASE("rate lookups follow the epoch boundaries") {
    EpochAnalysis ep;
    ep.boundaries = {10, 20};
    ep.rates = {1, 3};
    ep.joins = {10, 30};
    ep.tail_end = 30;
    ep.tail_joins = 20;
    CHECK(ep.rate_at(5) == 1);
    CHECK(ep.rate_at(10) == 1);
    CHECK(ep.rate_at(10.5) == 3);
    CHECK(ep.rate_at(25) == 2);
    CHECK(ep.mean_rate(5, 15) == Catch::Approx(2.0));
    CHECK(ep.mean_rate(0, 30) == Catch::Approx((10 + 30 + 20) / 30.0));
    CHECK(ep.mean_rate(12, 12) == 3);
}
