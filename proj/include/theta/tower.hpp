#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "theta/rat.hpp"
#include "theta/residue.hpp"

namespace theta {

// Raised when an operation can no longer certify any digits of its result.
struct precision_exhausted : std::runtime_error {
    explicit precision_exhausted(const std::string& what) : std::runtime_error(what) {}
};

class Tower;
using TowerPtr = std::shared_ptr<const Tower>;
class Elt;

// A tamely ramified extension of Q_p presented as Q_p[w, pi] where w is a
// root of an irreducible residue polynomial of degree f (the unramified
// part) and pi^e = p with gcd(e, p) = 1 (the totally ramified part).
// Elements are coefficient vectors over Z/p^prec on the basis
// {w^a pi^b : 0 <= a < f, 0 <= b < e}.
class Tower : public std::enable_shared_from_this<Tower> {
public:
    static TowerPtr make(long p, int f, int e, int prec,
                         std::vector<long> residue_modulus = {});

    long p;
    int f, e, prec;      // prec = capacity in base-field digits
    long long pN;        // p^prec
    FqPtr residue;       // residue field F_{p^f}

    // ---- element constructors ----
    Elt zero() const;
    Elt one() const;
    Elt from_int(long long n) const;
    Elt from_rational(long long num, long long den) const;
    Elt uniformizer() const;           // pi (equals p when e = 1)
    Elt omega() const;                 // unramified generator (f > 1)
    Elt from_unit_coeffs(const std::vector<long long>& c, int pi_shift) const;
    // The zero-at-precision element known only modulo pi^pi_digits.
    Elt unknown_below(long long pi_digits) const;
    Elt sample_unit(class Rng& rng) const;  // random unit at full precision

    // Teichmueller lift of a residue-field element, computed by iterating
    // x -> x^q until stable.
    Elt teichmuller(const FqEl& u) const;

    // The unique m-th root of the unit b congruent to `seed` in the residue
    // field, for gcd(m, p) = 1.  Newton iteration from the residue seed.
    Elt hensel_root(long m, const Elt& b, const FqEl& seed) const;

    // internal tables
    std::vector<std::vector<long long>> omega_reduction;  // w^{f+k} expanded, k < f-1
    std::vector<long long> frob_omega;  // unramified coords of Frobenius(w), f > 1

    friend class Elt;

private:
    Tower() = default;
};

// Element of a tower: pi^shift * (unit-part coefficient vector), tracked to
// `rel` pi-adic digits of relative precision.  An all-zero coefficient
// vector means "zero at this precision": the value is only known to have
// valuation >= (shift + rel)/e, as opposed to the exact zero element.
class Elt {
public:
    Elt() = default;

    TowerPtr tower() const { return tw_; }
    bool is_exact_zero() const { return exact_zero_; }
    // True when the element is indistinguishable from zero at its precision.
    bool is_zero_at_precision() const;
    Val val() const;
    int rel_precision() const { return rel_; }

    Elt operator+(const Elt& o) const;
    Elt operator-(const Elt& o) const;
    Elt operator-() const;
    Elt operator*(const Elt& o) const;
    Elt inv() const;
    Elt pow(long long n) const;
    Elt mul_pi_power(long long k) const;  // exact multiplication by pi^k

    // Certified "val(x) >= t" at this precision; throws precision_exhausted
    // if the representation cannot decide.
    bool val_at_least(const Rat& t) const;
    bool congruent(const Elt& o, const Rat& t) const;  // val(x - o) >= t

    // Residue-field image; requires val >= 0 (unit or positive valuation).
    FqEl residue_image() const;

    // Unramified-part Frobenius (w -> w^p, pi fixed), applied k times.
    Elt frobenius(int k = 1) const;
    // pi -> zeta * pi for a Teichmueller root of unity zeta with zeta^e = 1.
    Elt rotate_uniformizer(const Elt& zeta) const;

    // Weaken the certified relative precision (never strengthens).
    Elt truncated(int rel) const;

    // Coefficient of w^a pi^b in the unit part (for inspection/serialization).
    std::vector<long long> unit_coeffs() const { return c_; }
    int pi_shift() const { return shift_; }

    std::string str() const;

private:
    friend class Tower;
    TowerPtr tw_;
    bool exact_zero_ = true;
    int shift_ = 0;  // power of pi
    int rel_ = 0;    // relative precision in pi-digits, <= e * prec
    std::vector<long long> c_;  // f*e coefficients mod p^prec, index a*e + b

    static Elt make_raw(TowerPtr tw, int shift, int rel, std::vector<long long> c);
    void normalize();
    bool coeffs_zero() const;
    void check_same(const Elt& o) const;
};

// Deterministic RNG used by samplers and the verification suites.
class Rng {
public:
    explicit Rng(unsigned long long seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    unsigned long long next();
    long long uniform(long long lo, long long hi);  // inclusive

private:
    unsigned long long state_;
};

// Hilbert symbol (a, b)_p over Q_p for odd p; a, b nonzero rationals
// presented as (valuation, unit-part mod p).
int hilbert_symbol_qp(long p, long long a_num, long long a_den,
                      long long b_num, long long b_den);

// Hilbert symbol for two base-tower elements (exact valuations required).
int hilbert_symbol(const Elt& a, const Elt& b);

// Legendre symbol of an integer modulo an odd prime.
int legendre_int(long long a, long p);

}  // namespace theta
