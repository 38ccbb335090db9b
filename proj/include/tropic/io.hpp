#pragma once

/**
 * @file io.hpp
 * @brief Text formats: matrix literals and the network spec file.
 *
 * Matrix literal: one row per line, entries separated by whitespace, the
 * token "-inf" (max_plus) or "+inf" (min kinds) for the zero element.
 *
 * Network spec: JSON with either an explicit graph
 *
 *   { "nodes": [ {"id": 1, "c": "inf", "b": "inf", "service": "exp(1)"}, ... ],
 *     "arcs": [[1, 2], ...],
 *     "blocking": "none" }
 *
 * or a preset by name
 *
 *   { "preset": "open_tandem", "services": ["exp(1)", "exp(2)", "exp(3)"] }
 *
 * with preset parameters n, services, buffers, blocking, queues, arrival.
 */

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tropic/matrix.hpp"
#include "tropic/network.hpp"

namespace tropic {

// ---------------------------------------------------------------------------
// matrix literals
// ---------------------------------------------------------------------------

inline std::string zero_token(Semifield k) {
    switch (k) {
        case Semifield::max_plus: return "-inf";
        case Semifield::max_times: return "0";
        default: return "+inf";
    }
}

inline std::string to_string(const Scalar& s) {
    if (s.is_zero()) return zero_token(s.kind());
    std::ostringstream os;
    os.precision(17);
    os << s.value();
    return os.str();
}

inline Matrix parse_matrix(const std::string& text, Semifield kind = Semifield::max_plus) {
    std::vector<std::vector<Scalar>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream toks(line);
        std::vector<Scalar> row;
        std::string tok;
        while (toks >> tok) {
            if (tok == "-inf" || tok == "+inf" || tok == "inf" || tok == zero_token(kind)) {
                row.push_back(Scalar::zero(kind));
                continue;
            }
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) throw ParseError("bad matrix entry '" + tok + "'");
                row.push_back(v == 0.0 && kind == Semifield::max_times
                                  ? Scalar::zero(kind)
                                  : Scalar::finite(v, kind));
            } catch (const std::invalid_argument&) {
                throw ParseError("bad matrix entry '" + tok + "'");
            } catch (const std::out_of_range&) {
                throw ParseError("matrix entry out of range: '" + tok + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty matrix literal");
    const std::size_t cols = rows[0].size();
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(cols), kind);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ParseError("ragged matrix literal");
        for (std::size_t j = 0; j < cols; ++j)
            m.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
}

inline std::string render_matrix(const Matrix& m) {
    std::ostringstream os;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << to_string(m.at(i, j));
        }
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// network spec files
// ---------------------------------------------------------------------------

namespace detail {

inline Count parse_count(const nlohmann::json& v, const char* what) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::nullopt;
        throw ParseError(std::string(what) + ": expected a number or \"inf\"");
    }
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError(std::string(what) + ": expected a nonnegative integer or \"inf\"");
    return v.get<long long>();
}

inline Blocking parse_blocking(const std::string& s) {
    if (s == "none") return Blocking::none;
    if (s == "manufacturing") return Blocking::manufacturing;
    if (s == "communication") return Blocking::communication;
    throw ParseError("unknown blocking rule '" + s + "'");
}

inline std::vector<ServiceDistribution> parse_services(const nlohmann::json& j, int expected) {
    std::vector<ServiceDistribution> out;
    for (const auto& v : j) out.push_back(ServiceDistribution::parse(v.get<std::string>()));
    if (expected > 0 && static_cast<int>(out.size()) == 1)
        out.assign(static_cast<std::size_t>(expected), out[0]);
    if (expected > 0 && static_cast<int>(out.size()) != expected)
        throw ParseError("expected " + std::to_string(expected) + " service distributions");
    return out;
}

inline std::vector<Count> parse_buffers(const nlohmann::json& j) {
    std::vector<Count> out;
    for (const auto& v : j) out.push_back(parse_count(v, "buffer"));
    return out;
}

inline NetworkModel model_from_preset(const nlohmann::json& j) {
    const std::string preset = j.at("preset").get<std::string>();
    int n = j.value("n", 3);
    auto services = [&](int count) {
        if (!j.contains("services"))
            return std::vector<ServiceDistribution>(static_cast<std::size_t>(count),
                                                    ServiceDistribution::exponential(1.0));
        return parse_services(j.at("services"), count);
    };
    if (preset == "open_tandem") return presets::open_tandem(services(n));
    if (preset == "closed_tandem") return presets::closed_tandem(services(j.value("n", 2)));
    if (preset == "manufacturing_tandem" || preset == "communication_tandem") {
        Blocking rule = preset[0] == 'm' ? Blocking::manufacturing : Blocking::communication;
        std::vector<Count> buffers;
        if (j.contains("buffers")) {
            buffers = parse_buffers(j.at("buffers"));
        } else {
            // the reference configurations: last buffer 0 (manufacturing),
            // all non-source buffers 0 (communication)
            buffers.assign(static_cast<std::size_t>(n), std::nullopt);
            if (rule == Blocking::manufacturing) {
                buffers.back() = Count{0};
            } else {
                for (int i = 1; i < n; ++i) buffers[static_cast<std::size_t>(i)] = Count{0};
            }
        }
        return presets::blocked_tandem(services(n), buffers, rule);
    }
    if (preset == "fork_join_5") return presets::fork_join_5(services(5));
    if (preset == "round_robin") {
        int l = j.value("queues", 2);
        ServiceDistribution arrival =
            ServiceDistribution::parse(j.value("arrival", std::string("exp(1)")));
        return presets::round_robin(l, arrival, services(l));
    }
    throw ParseError("unknown preset '" + preset + "'");
}

} // namespace detail

/// Parse a network model from spec-file JSON (explicit graph or preset).
inline NetworkModel parse_network(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("network spec is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("preset")) return detail::model_from_preset(j);

        NetworkSpec s;
        std::vector<int> ids;
        for (const auto& node : j.at("nodes")) {
            int id = node.at("id").get<int>();
            ids.push_back(id);
            s.initial_customers.push_back(detail::parse_count(node.at("c"), "c"));
            s.buffer_capacity.push_back(
                node.contains("b") ? detail::parse_count(node.at("b"), "b") : std::nullopt);
            s.service.push_back(ServiceDistribution::parse(node.at("service").get<std::string>()));
        }
        s.n = static_cast<int>(ids.size());
        s.labels = ids;
        auto dense = [&](int id) {
            for (std::size_t i = 0; i < ids.size(); ++i)
                if (ids[i] == id) return static_cast<int>(i);
            throw ParseError("arc references unknown node id " + std::to_string(id));
        };
        if (j.contains("arcs"))
            for (const auto& arc : j.at("arcs")) {
                if (!arc.is_array() || arc.size() != 2) throw ParseError("arcs must be pairs");
                s.arcs.push_back({dense(arc[0].get<int>()), dense(arc[1].get<int>())});
            }
        s.blocking = detail::parse_blocking(j.value("blocking", std::string("none")));
        return make_model(std::move(s));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad network spec: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    std::ostringstream body;
    body << f.rdbuf();
    return body.str();
}

} // namespace tropic
