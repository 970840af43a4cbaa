#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ulamlab/fixedpoint.hpp"

namespace ulamlab::report {

using Json = nlohmann::ordered_json;

/// JSON has no infinities; keep the payload deterministic by spelling them.
inline Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Json trace_to_json(const fixedpoint::Trace& trace) {
    Json steps = Json::array();
    for (const auto& s : trace.steps) {
        Json row = Json::array();
        row.push_back(s.step);
        row.push_back(number(s.distance));
        row.push_back(number(s.ratio));
        steps.push_back(std::move(row));
    }
    Json j;
    j["stop"] = fixedpoint::stop_reason_name(trace.stop);
    j["declared-lipschitz"] = number(trace.declared_lipschitz);
    if (!trace.note.empty()) j["note"] = trace.note;
    j["steps"] = std::move(steps);
    return j;
}

/// CSV columns: step, distance, ratio.
inline void write_trace_csv(const fixedpoint::Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "step,distance,ratio\n";
    for (const auto& s : trace.steps)
        out << s.step << ',' << csv_number(s.distance) << ',' << csv_number(s.ratio) << '\n';
}

inline void write_profile_csv(const std::vector<std::string>& elements,
                              const std::vector<double>& bound,
                              const std::vector<double>& observed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "element,bound,observed\n";
    for (std::size_t i = 0; i < elements.size(); ++i) {
        out << elements[i] << ',' << csv_number(i < bound.size() ? bound[i] : 0.0) << ','
            << csv_number(i < observed.size() ? observed[i] : 0.0) << '\n';
    }
}

inline void write_sequence_csv(const std::vector<std::pair<std::string, std::vector<double>>>& seqs,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "label,n,value\n";
    for (const auto& [label, values] : seqs)
        for (std::size_t n = 0; n < values.size(); ++n)
            out << label << ',' << (n + 1) << ',' << csv_number(values[n]) << '\n';
}

} // namespace ulamlab::report
