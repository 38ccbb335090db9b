#pragma once

/**
 * @file distribution.hpp
 * @brief Service-time distributions: nonnegative, with analytic means.
 */

#include <cctype>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tropic/errors.hpp"
#include "tropic/rng.hpp"

namespace tropic {

/**
 * @brief Distribution of one service-time variable.
 *
 * Supported kinds: det(v), exp(rate), unif(lo, hi), norm(mean, sd).
 * Normal is truncated at zero by rejection so that samples are valid
 * service times; its mean() is the analytic truncated-normal mean.
 */
class ServiceDistribution {
public:
    enum class Kind { deterministic, exponential, uniform, normal };

    static ServiceDistribution deterministic(double v) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("det: value must be >= 0");
        return {Kind::deterministic, v, 0.0};
    }
    static ServiceDistribution exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exp: rate must be > 0");
        return {Kind::exponential, rate, 0.0};
    }
    static ServiceDistribution uniform(double lo, double hi) {
        if (!(0.0 <= lo && lo < hi) || !std::isfinite(hi))
            throw DomainError("unif: need 0 <= lo < hi");
        return {Kind::uniform, lo, hi};
    }
    static ServiceDistribution normal(double mean, double sd) {
        if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd))
            throw DomainError("norm: sd must be > 0");
        return {Kind::normal, mean, sd};
    }

    Kind kind() const { return kind_; }
    bool is_deterministic() const { return kind_ == Kind::deterministic; }

    /// Analytic mean of the sampled (nonnegative) variable.
    double mean() const {
        switch (kind_) {
            case Kind::deterministic: return a_;
            case Kind::exponential: return 1.0 / a_;
            case Kind::uniform: return 0.5 * (a_ + b_);
            case Kind::normal: {
                // mean of the zero-truncated normal: mu + sd * phi(alpha) / Phi(-alpha)
                double alpha = -a_ / b_;
                double phi = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
                double tail = 0.5 * std::erfc(alpha / std::sqrt(2.0));
                return a_ + b_ * phi / tail;
            }
        }
        return 0.0;
    }

    double sample(const RngKey& key) const {
        switch (kind_) {
            case Kind::deterministic: return a_;
            case Kind::exponential: return -std::log(rng_u01(key, 0)) / a_;
            case Kind::uniform: return a_ + (b_ - a_) * rng_u01(key, 0);
            case Kind::normal: {
                // Box-Muller, rejecting negatives; two uniforms per attempt
                for (std::uint64_t attempt = 0;; ++attempt) {
                    double u1 = rng_u01(key, 2 * attempt);
                    double u2 = rng_u01(key, 2 * attempt + 1);
                    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
                    double x = a_ + b_ * z;
                    if (x >= 0.0) return x;
                }
            }
        }
        return 0.0;
    }

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
            case Kind::deterministic: os << "det(" << a_ << ")"; break;
            case Kind::exponential: os << "exp(" << a_ << ")"; break;
            case Kind::uniform: os << "unif(" << a_ << "," << b_ << ")"; break;
            case Kind::normal: os << "norm(" << a_ << "," << b_ << ")"; break;
        }
        return os.str();
    }

    /// Parse a distribution literal such as "exp(1)" or "unif(0,2)".
    static ServiceDistribution parse(const std::string& text);

    bool operator==(const ServiceDistribution& o) const {
        return kind_ == o.kind_ && a_ == o.a_ && b_ == o.b_;
    }

private:
    ServiceDistribution(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

    Kind kind_;
    double a_, b_;
};

inline ServiceDistribution ServiceDistribution::parse(const std::string& text) {
    auto fail = [&]() -> ServiceDistribution {
        throw ParseError("bad distribution literal: '" + text + "'");
    };
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') return fail();
    std::string head = s.substr(0, open);
    std::string args = s.substr(open + 1, s.size() - open - 2);
    std::vector<double> vals;
    std::istringstream is(args);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) return fail();
        } catch (const std::exception&) {
            return fail();
        }
    }
    try {
        if (head == "det" && vals.size() == 1) return deterministic(vals[0]);
        if (head == "exp" && vals.size() == 1) return exponential(vals[0]);
        if (head == "unif" && vals.size() == 2) return uniform(vals[0], vals[1]);
        if (head == "norm" && vals.size() == 2) return normal(vals[0], vals[1]);
    } catch (const DomainError& e) {
        throw ParseError(std::string(e.what()) + " in '" + text + "'");
    }
    return fail();
}

} // namespace tropic
