#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "sybilsim/epochs.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/trace.hpp"

namespace sybilsim {

enum class Family { WeibullSession, ExpSessionPoissonArrival };

struct GeneratorSpec {
    Family family = Family::ExpSessionPoissonArrival;
    double shape = 1.0;          // Weibull shape; unused for exponential sessions
    double scale = 8280.0;       // Weibull scale, or exponential mean, in seconds
    double arrival_mean = 1.0;   // Poisson arrivals, IDs per second
    std::size_t n_init = 1000;
    double duration = 0.0;       // generate at least this long
    std::size_t min_epochs = 0;  // and keep going until this many epochs closed
    std::size_t max_events = 200'000'000;
};

inline void check_spec(const GeneratorSpec& spec) {
    if (!(spec.scale > 0)) throw ConfigError("session scale must be positive");
    if (spec.family == Family::WeibullSession && !(spec.shape > 0)) throw ConfigError("Weibull shape must be positive");
    if (!(spec.arrival_mean > 0)) throw ConfigError("arrival mean must be positive");
    if (!(spec.duration >= 0)) throw ConfigError("duration must be non-negative");
}

class SessionSampler {
public:
    explicit SessionSampler(const GeneratorSpec& spec)
        : family_(spec.family), weibull_(spec.shape, spec.scale), expo_(1.0 / spec.scale) {}

    double operator()(Rng& rng) {
        return family_ == Family::WeibullSession ? weibull_(rng) : expo_(rng);
    }

private:
    Family family_;
    std::weibull_distribution<double> weibull_;
    std::exponential_distribution<double> expo_;
};

namespace detail {

inline ChurnTrace generate(const GeneratorSpec& spec, std::uint64_t seed) {
    check_spec(spec);
    Rng rng(seed);
    SessionSampler session(spec);
    std::exponential_distribution<double> gap(spec.arrival_mean);

    using Pending = std::pair<double, std::uint32_t>;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> departures;

    ChurnTrace trace;
    EpochTracker epochs;
    auto emit = [&](const TraceEvent& e) {
        trace.events.push_back(e);
        epochs.apply(e);
    };

    for (std::size_t i = 0; i < spec.n_init; ++i) {
        auto id = trace.id_count++;
        emit({0.0, id, TraceKind::Join});
        departures.emplace(session(rng), id);
    }
    trace.n_init = spec.n_init;

    double next_arrival = gap(rng);
    while (trace.events.size() < spec.max_events) {
        bool arrival = departures.empty() || next_arrival <= departures.top().first;
        double t = arrival ? next_arrival : departures.top().first;
        if (t > spec.duration && epochs.epochs() >= spec.min_epochs) break;
        if (arrival) {
            auto id = trace.id_count++;
            emit({t, id, TraceKind::Join});
            departures.emplace(t + session(rng), id);
            next_arrival = t + gap(rng);
        } else {
            auto id = departures.top().second;
            departures.pop();
            emit({t, id, TraceKind::Depart});
        }
    }
    return trace;
}

}  // namespace detail

inline ChurnTrace gen_weibull(const GeneratorSpec& spec, std::uint64_t seed) {
    if (spec.family != Family::WeibullSession) throw ConfigError("gen_weibull needs a WeibullSession spec");
    return detail::generate(spec, seed);
}

inline ChurnTrace gen_exp_poisson(const GeneratorSpec& spec, std::uint64_t seed) {
    if (spec.family != Family::ExpSessionPoissonArrival)
        throw ConfigError("gen_exp_poisson needs an ExpSessionPoissonArrival spec");
    return detail::generate(spec, seed);
}

inline ChurnTrace generate_trace(const GeneratorSpec& spec, std::uint64_t seed) {
    return detail::generate(spec, seed);
}

// Session-time presets. Weibull scales are given in minutes.
inline GeneratorSpec network_preset(const std::string& network) {
    GeneratorSpec spec;
    if (network == "gnutella") {
        spec.family = Family::ExpSessionPoissonArrival;
        spec.scale = 2.3 * 3600.0;
    } else if (network == "bittorrent") {
        spec.family = Family::WeibullSession;
        spec.shape = 0.59;
        spec.scale = 41.0 * 60.0;
    } else if (network == "ethereum") {
        spec.family = Family::WeibullSession;
        spec.shape = 0.52;
        spec.scale = 9.8 * 60.0;
    } else {
        throw ConfigError("no generator preset for network '" + network + "'");
    }
    return spec;
}

}  // namespace sybilsim
