#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sybilsim/error.hpp"
#include "sybilsim/format.hpp"

namespace sybilsim {

enum class TraceKind : std::uint8_t { Join, Depart };

// `id` is a dense incarnation index: an external name that re-joins after
// departing gets a fresh id.
struct TraceEvent {
    double time;
    std::uint32_t id;
    TraceKind kind;
};

struct ChurnTrace {
    std::vector<TraceEvent> events;
    std::size_t n_init = 0;
    std::uint32_t id_count = 0;
    std::vector<std::string> names;  // empty for generated traces

    std::string name(std::uint32_t id) const {
        return id < names.size() ? names[id] : std::to_string(id);
    }
};

inline void validate(const ChurnTrace& trace) {
    // 0 = never seen, 1 = live, 2 = departed
    std::vector<std::uint8_t> status(trace.id_count, 0);
    std::size_t zero_joins = 0;
    double last = 0.0;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const auto& e = trace.events[i];
        if (!(e.time >= 0.0)) throw ValidationError("negative or non-finite time", i);
        if (e.time < last) throw ValidationError("times out of order", i);
        last = e.time;
        if (e.id >= trace.id_count) throw ValidationError("id out of range", i);
        auto& s = status[e.id];
        if (e.kind == TraceKind::Join) {
            if (s == 1) throw ValidationError("duplicate live join of id " + trace.name(e.id), i);
            if (s == 2) throw ValidationError("re-join of departed id " + trace.name(e.id) + " without a fresh incarnation", i);
            s = 1;
            if (e.time == 0.0) ++zero_joins;
        } else {
            if (s != 1) throw ValidationError("depart of id " + trace.name(e.id) + " that is not live", i);
            s = 2;
        }
    }
    if (zero_joins != trace.n_init)
        throw ValidationError("n_init " + std::to_string(trace.n_init) + " does not match " +
                              std::to_string(zero_joins) + " joins at time 0");
}

inline ChurnTrace load_trace(std::istream& in) {
    ChurnTrace trace;
    std::unordered_map<std::string, std::uint32_t> live;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto f = split(body, ',');
        if (f.size() != 3) throw ParseError("expected time,id,join|depart", lineno);
        double t;
        if (!parse_double(f[0], t)) throw ParseError("bad time '" + std::string(f[0]) + "'", lineno);
        if (f[1].empty()) throw ParseError("empty id", lineno);
        std::string name(f[1]);
        auto idx = trace.events.size();
        if (f[2] == "join") {
            if (live.count(name)) throw ValidationError("duplicate live join of id " + name, idx);
            auto id = trace.id_count++;
            trace.names.push_back(name);
            live.emplace(name, id);
            trace.events.push_back({t, id, TraceKind::Join});
            if (t == 0.0) ++trace.n_init;
        } else if (f[2] == "depart") {
            auto it = live.find(name);
            if (it == live.end()) throw ValidationError("depart of id " + name + " before its join", idx);
            trace.events.push_back({t, it->second, TraceKind::Depart});
            live.erase(it);
        } else {
            throw ParseError("bad event kind '" + std::string(f[2]) + "'", lineno);
        }
    }
    validate(trace);
    return trace;
}

inline ChurnTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file " + path);
    return load_trace(in);
}

inline ChurnTrace load_trace_string(const std::string& text) {
    std::istringstream in(text);
    return load_trace(in);
}

inline void serialize(const ChurnTrace& trace, std::ostream& out) {
    for (const auto& e : trace.events)
        out << fmt_num(e.time) << ',' << trace.name(e.id) << ','
            << (e.kind == TraceKind::Join ? "join" : "depart") << '\n';
}

inline std::string serialize(const ChurnTrace& trace) {
    std::ostringstream out;
    serialize(trace, out);
    return out.str();
}

}  // namespace sybilsim
