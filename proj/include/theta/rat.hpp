#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

namespace theta {

using Rat = boost::rational<long long>;

inline long long rat_floor(const Rat& r) {
    long long q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
    return q;
}

inline long long rat_ceil(const Rat& r) { return -rat_floor(-r); }

// ceil(m * r) as an integer
inline long long ceil_scaled(const Rat& r, long long m) {
    return rat_ceil(Rat(r.numerator() * m, r.denominator()));
}

inline std::string rat_str(const Rat& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Valuation value: a rational, a lower bound ("zero at this precision"),
// or exact +infinity.
struct Val {
    enum class Kind { finite, at_least, infinite };
    Kind kind = Kind::infinite;
    Rat v{0};

    static Val finite(const Rat& r) { return {Kind::finite, r}; }
    static Val at_least(const Rat& r) { return {Kind::at_least, r}; }
    static Val infinite() { return {Kind::infinite, Rat(0)}; }

    bool is_finite() const { return kind == Kind::finite; }
    bool is_infinite() const { return kind == Kind::infinite; }

    // Certified "valuation >= t".
    bool ge(const Rat& t) const {
        if (kind == Kind::infinite) return true;
        return v >= t;
    }

    std::string str() const {
        switch (kind) {
            case Kind::finite: return rat_str(v);
            case Kind::at_least: return ">=" + rat_str(v);
            default: return "inf";
        }
    }
};

}  // namespace theta
