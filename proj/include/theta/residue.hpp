#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace theta {

class Fq;
using FqPtr = std::shared_ptr<const Fq>;

// Element of a finite field F_{p^f}, stored as a polynomial in the
// field generator with coefficients in [0, p).  Elements keep a pointer
// to their field so mixed-field arithmetic is caught at runtime.
struct FqEl {
    FqPtr fld;
    std::vector<long> c;  // length f

    bool is_zero() const;
    bool operator==(const FqEl& o) const;
    bool operator!=(const FqEl& o) const { return !(*this == o); }
};

// F_{p^f} for odd p and small f.  The modulus is a monic irreducible
// polynomial over F_p, found by search when not supplied.
class Fq : public std::enable_shared_from_this<Fq> {
public:
    static FqPtr make(long p, int f, std::vector<long> modulus = {});

    long p;
    int f;
    long q;  // p^f
    std::vector<long> modulus;  // monic of degree f; modulus[i] = coeff of x^i, modulus[f] = 1

    FqEl zero() const;
    FqEl one() const;
    FqEl from_int(long n) const;          // image of the integer n
    FqEl gen() const;                     // the class of x
    FqEl from_coeffs(std::vector<long> c) const;
    FqEl element(long index) const;       // index in [0, q), base-p digits as coeffs
    long index_of(const FqEl& a) const;

    FqEl add(const FqEl& a, const FqEl& b) const;
    FqEl sub(const FqEl& a, const FqEl& b) const;
    FqEl neg(const FqEl& a) const;
    FqEl mul(const FqEl& a, const FqEl& b) const;
    FqEl inv(const FqEl& a) const;
    FqEl pow(const FqEl& a, long long n) const;
    FqEl frobenius(const FqEl& a) const;  // x -> x^p
    long trace_to_prime(const FqEl& a) const;  // Tr to F_p, value in [0, p)

    // Quadratic character: 0 on zero, otherwise +-1.
    int legendre(const FqEl& a) const;
    bool is_square(const FqEl& a) const;
    // A fixed non-square unit (smallest index).
    FqEl nonsquare() const;
    FqEl sqrt(const FqEl& a) const;  // throws if not a square

private:
    Fq(long p, int f, std::vector<long> modulus);
    std::vector<long> poly_mod(std::vector<long> a) const;
};

// Dense matrix over Fq with the linear algebra the residue computations
// need: products, inverses, rank, kernels, solving.
struct FqMat {
    FqPtr fld;
    int rows = 0, cols = 0;
    std::vector<FqEl> a;

    static FqMat zero(FqPtr F, int r, int c);
    static FqMat identity(FqPtr F, int n);

    FqEl& at(int i, int j) { return a[i * cols + j]; }
    const FqEl& at(int i, int j) const { return a[i * cols + j]; }

    FqMat mul(const FqMat& o) const;
    FqMat add(const FqMat& o) const;
    FqMat sub(const FqMat& o) const;
    FqMat scale(const FqEl& s) const;
    FqMat transpose() const;
    FqMat map(FqEl (*fn)(const Fq&, const FqEl&)) const;  // entrywise
    FqMat frobenius_entries() const;
    FqMat inverse() const;  // throws if singular
    FqEl det() const;
    int rank() const;
    bool operator==(const FqMat& o) const;

    // Basis of the right kernel, as columns.
    std::vector<std::vector<FqEl>> kernel() const;
    // Solve A x = b; returns empty if inconsistent.
    std::vector<FqEl> solve(const std::vector<FqEl>& b) const;
};

}  // namespace theta
