#include "theta/residue.hpp"

#include <algorithm>

namespace theta {

namespace {

long mod_pos(long long a, long p) {
    long long r = a % p;
    if (r < 0) r += p;
    return static_cast<long>(r);
}

long inv_mod_p(long a, long p) {
    long t = 0, nt = 1, r = p, nr = mod_pos(a, p);
    while (nr != 0) {
        long q = r / nr;
        std::swap(t, nt);
        nt -= q * t;
        std::swap(r, nr);
        nr -= q * r;
    }
    if (r != 1) throw std::runtime_error("inv_mod_p: not invertible");
    return mod_pos(t, p);
}

// polynomial helpers over F_p; vectors are coefficient lists, low degree first
std::vector<long> poly_trim(std::vector<long> a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

std::vector<long> poly_mul(const std::vector<long>& a, const std::vector<long>& b, long p) {
    if (a.empty() || b.empty()) return {};
    std::vector<long> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = mod_pos(r[i + j] + (long long)a[i] * b[j], p);
    return poly_trim(r);
}

// remainder of a modulo monic m
std::vector<long> poly_rem(std::vector<long> a, const std::vector<long>& m, long p) {
    a = poly_trim(a);
    int dm = (int)m.size() - 1;
    while ((int)a.size() - 1 >= dm) {
        long lead = a.back();
        int shift = (int)a.size() - 1 - dm;
        for (int i = 0; i <= dm; ++i)
            a[i + shift] = mod_pos(a[i + shift] - (long long)lead * m[i], p);
        a = poly_trim(a);
    }
    return a;
}

std::vector<long> poly_powmod(std::vector<long> base, long long n,
                              const std::vector<long>& m, long p) {
    std::vector<long> r = {1};
    base = poly_rem(std::move(base), m, p);
    while (n > 0) {
        if (n & 1) r = poly_rem(poly_mul(r, base, p), m, p);
        base = poly_rem(poly_mul(base, base, p), m, p);
        n >>= 1;
    }
    return r;
}

std::vector<long> poly_gcd(std::vector<long> a, std::vector<long> b, long p) {
    a = poly_trim(std::move(a));
    b = poly_trim(std::move(b));
    while (!b.empty()) {
        // reduce a mod b after making b monic
        long linv = inv_mod_p(b.back(), p);
        for (auto& x : b) x = mod_pos((long long)x * linv, p);
        a = poly_rem(std::move(a), b, p);
        std::swap(a, b);
    }
    return a;
}

bool poly_irreducible(const std::vector<long>& m, long p) {
    int f = (int)m.size() - 1;
    // x^{p^f} == x mod m, and gcd(x^{p^d} - x, m) trivial for proper divisors d
    std::vector<long> x = {0, 1};
    long long pf = 1;
    for (int i = 0; i < f; ++i) pf *= p;
    std::vector<long> xq = poly_powmod(x, pf, m, p);
    std::vector<long> diff = xq;
    diff.resize(std::max<size_t>(diff.size(), 2), 0);
    diff[1] = mod_pos(diff[1] - 1, p);
    if (!poly_trim(diff).empty()) return false;
    for (int d = 1; d < f; ++d) {
        if (f % d != 0) continue;
        long long pd = 1;
        for (int i = 0; i < d; ++i) pd *= p;
        std::vector<long> xd = poly_powmod(x, pd, m, p);
        std::vector<long> g = xd;
        g.resize(std::max<size_t>(g.size(), 2), 0);
        g[1] = mod_pos(g[1] - 1, p);
        if (poly_gcd(g, m, p).size() > 1) return false;
    }
    return true;
}

}  // namespace

Fq::Fq(long p_, int f_, std::vector<long> mod_) : p(p_), f(f_), modulus(std::move(mod_)) {
    q = 1;
    for (int i = 0; i < f; ++i) q *= p;
}

FqPtr Fq::make(long p, int f, std::vector<long> modulus) {
    if (p < 3 || p % 2 == 0) throw std::invalid_argument("Fq: odd p required");
    if (f < 1) throw std::invalid_argument("Fq: f >= 1 required");
    if (modulus.empty()) {
        if (f == 1) {
            modulus = {0, 1};
        } else {
            // search x^f + c1 x + c0 first, then general low-coefficient polys
            bool found = false;
            for (long c0 = 1; c0 < p && !found; ++c0) {
                for (long c1 = 0; c1 < p && !found; ++c1) {
                    std::vector<long> m(f + 1, 0);
                    m[0] = c0;
                    m[1] = c1;
                    m[f] = 1;
                    if (poly_irreducible(m, p)) {
                        modulus = m;
                        found = true;
                    }
                }
            }
            if (!found) throw std::runtime_error("Fq: no sparse irreducible modulus found");
        }
    } else {
        if ((int)modulus.size() != f + 1 || modulus[f] != 1)
            throw std::invalid_argument("Fq: modulus must be monic of degree f");
        if (!poly_irreducible(modulus, p))
            throw std::invalid_argument("Fq: modulus is reducible");
    }
    return FqPtr(new Fq(p, f, std::move(modulus)));
}

bool FqEl::is_zero() const {
    for (long x : c)
        if (x != 0) return false;
    return true;
}

bool FqEl::operator==(const FqEl& o) const {
    if (fld.get() != o.fld.get()) throw std::invalid_argument("FqEl: field mismatch");
    return c == o.c;
}

std::vector<long> Fq::poly_mod(std::vector<long> a) const {
    a = poly_rem(std::move(a), modulus, p);
    a.resize(f, 0);
    return a;
}

FqEl Fq::zero() const { return {shared_from_this(), std::vector<long>(f, 0)}; }
FqEl Fq::one() const { return from_int(1); }

FqEl Fq::from_int(long n) const {
    std::vector<long> c(f, 0);
    c[0] = mod_pos(n, p);
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::gen() const {
    std::vector<long> c(f, 0);
    if (f == 1) {
        // generator of the prime field: smallest primitive root not needed,
        // the class of x is 0 mod x, so fall back to 1
        c[0] = 1;
    } else {
        c[1] = 1;
    }
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::from_coeffs(std::vector<long> c) const {
    c.resize(f, 0);
    for (auto& x : c) x = mod_pos(x, p);
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::element(long index) const {
    std::vector<long> c(f, 0);
    for (int i = 0; i < f; ++i) {
        c[i] = index % p;
        index /= p;
    }
    return {shared_from_this(), std::move(c)};
}

long Fq::index_of(const FqEl& a) const {
    long idx = 0, mult = 1;
    for (int i = 0; i < f; ++i) {
        idx += a.c[i] * mult;
        mult *= p;
    }
    return idx;
}

FqEl Fq::add(const FqEl& a, const FqEl& b) const {
    std::vector<long> c(f);
    for (int i = 0; i < f; ++i) c[i] = mod_pos(a.c[i] + b.c[i], p);
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::sub(const FqEl& a, const FqEl& b) const {
    std::vector<long> c(f);
    for (int i = 0; i < f; ++i) c[i] = mod_pos(a.c[i] - b.c[i], p);
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::neg(const FqEl& a) const {
    std::vector<long> c(f);
    for (int i = 0; i < f; ++i) c[i] = mod_pos(-a.c[i], p);
    return {shared_from_this(), std::move(c)};
}

FqEl Fq::mul(const FqEl& a, const FqEl& b) const {
    return {shared_from_this(), poly_mod(poly_mul(a.c, b.c, p))};
}

FqEl Fq::pow(const FqEl& a, long long n) const {
    if (n < 0) return pow(inv(a), -n);
    FqEl r = one();
    FqEl base = a;
    while (n > 0) {
        if (n & 1) r = mul(r, base);
        base = mul(base, base);
        n >>= 1;
    }
    return r;
}

FqEl Fq::inv(const FqEl& a) const {
    if (a.is_zero()) throw std::domain_error("Fq: inverse of zero");
    return pow(a, q - 2);
}

FqEl Fq::frobenius(const FqEl& a) const { return pow(a, p); }

long Fq::trace_to_prime(const FqEl& a) const {
    FqEl s = a, t = a;
    for (int i = 1; i < f; ++i) {
        t = frobenius(t);
        s = add(s, t);
    }
    for (int i = 1; i < f; ++i)
        if (s.c[i] != 0) throw std::logic_error("Fq: trace not in prime field");
    return s.c[0];
}

int Fq::legendre(const FqEl& a) const {
    if (a.is_zero()) return 0;
    FqEl r = pow(a, (q - 1) / 2);
    if (r == one()) return 1;
    return -1;
}

bool Fq::is_square(const FqEl& a) const { return legendre(a) >= 0; }

FqEl Fq::nonsquare() const {
    for (long i = 1; i < q; ++i) {
        FqEl a = element(i);
        if (legendre(a) == -1) return a;
    }
    throw std::logic_error("Fq: no nonsquare found");
}

FqEl Fq::sqrt(const FqEl& a) const {
    if (a.is_zero()) return zero();
    if (legendre(a) != 1) throw std::domain_error("Fq: sqrt of nonsquare");
    // brute force is fine at this size
    for (long i = 1; i < q; ++i) {
        FqEl x = element(i);
        if (mul(x, x) == a) return x;
    }
    throw std::logic_error("Fq: sqrt search failed");
}

FqMat FqMat::zero(FqPtr F, int r, int c) {
    FqMat m;
    m.fld = F;
    m.rows = r;
    m.cols = c;
    m.a.assign((size_t)r * c, F->zero());
    return m;
}

FqMat FqMat::identity(FqPtr F, int n) {
    FqMat m = zero(F, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = F->one();
    return m;
}

FqMat FqMat::mul(const FqMat& o) const {
    if (cols != o.rows) throw std::invalid_argument("FqMat: shape mismatch");
    FqMat r = zero(fld, rows, o.cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            if (at(i, k).is_zero()) continue;
            for (int j = 0; j < o.cols; ++j)
                r.at(i, j) = fld->add(r.at(i, j), fld->mul(at(i, k), o.at(k, j)));
        }
    return r;
}

FqMat FqMat::add(const FqMat& o) const {
    FqMat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = fld->add(a[i], o.a[i]);
    return r;
}

FqMat FqMat::sub(const FqMat& o) const {
    FqMat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = fld->sub(a[i], o.a[i]);
    return r;
}

FqMat FqMat::scale(const FqEl& s) const {
    FqMat r = *this;
    for (auto& x : r.a) x = fld->mul(x, s);
    return r;
}

FqMat FqMat::transpose() const {
    FqMat r = zero(fld, cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

FqMat FqMat::frobenius_entries() const {
    FqMat r = *this;
    for (auto& x : r.a) x = fld->frobenius(x);
    return r;
}

bool FqMat::operator==(const FqMat& o) const {
    if (rows != o.rows || cols != o.cols) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == o.a[i])) return false;
    return true;
}

namespace {

// Gauss-Jordan on [A | B]; returns false if A singular.
bool gauss_jordan(const Fq& F, FqMat& A, FqMat& B) {
    int n = A.rows;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!A.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return false;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A.at(piv, j), A.at(col, j));
            for (int j = 0; j < B.cols; ++j) std::swap(B.at(piv, j), B.at(col, j));
        }
        FqEl s = F.inv(A.at(col, col));
        for (int j = 0; j < n; ++j) A.at(col, j) = F.mul(A.at(col, j), s);
        for (int j = 0; j < B.cols; ++j) B.at(col, j) = F.mul(B.at(col, j), s);
        for (int r = 0; r < n; ++r) {
            if (r == col || A.at(r, col).is_zero()) continue;
            FqEl m = A.at(r, col);
            for (int j = 0; j < n; ++j)
                A.at(r, j) = F.sub(A.at(r, j), F.mul(m, A.at(col, j)));
            for (int j = 0; j < B.cols; ++j)
                B.at(r, j) = F.sub(B.at(r, j), F.mul(m, B.at(col, j)));
        }
    }
    return true;
}

}  // namespace

FqMat FqMat::inverse() const {
    if (rows != cols) throw std::invalid_argument("FqMat: inverse of non-square");
    FqMat A = *this;
    FqMat B = identity(fld, rows);
    if (!gauss_jordan(*fld, A, B)) throw std::domain_error("FqMat: singular");
    return B;
}

FqEl FqMat::det() const {
    if (rows != cols) throw std::invalid_argument("FqMat: det of non-square");
    FqMat A = *this;
    FqEl d = fld->one();
    int n = rows;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!A.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return fld->zero();
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A.at(piv, j), A.at(col, j));
            d = fld->neg(d);
        }
        d = fld->mul(d, A.at(col, col));
        FqEl s = fld->inv(A.at(col, col));
        for (int r = col + 1; r < n; ++r) {
            if (A.at(r, col).is_zero()) continue;
            FqEl m = fld->mul(A.at(r, col), s);
            for (int j = col; j < n; ++j)
                A.at(r, j) = fld->sub(A.at(r, j), fld->mul(m, A.at(col, j)));
        }
    }
    return d;
}

int FqMat::rank() const {
    FqMat A = *this;
    int rk = 0;
    for (int col = 0; col < cols && rk < rows; ++col) {
        int piv = -1;
        for (int r = rk; r < rows; ++r)
            if (!A.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rk)
            for (int j = 0; j < cols; ++j) std::swap(A.at(piv, j), A.at(rk, j));
        FqEl s = fld->inv(A.at(rk, col));
        for (int r = rk + 1; r < rows; ++r) {
            if (A.at(r, col).is_zero()) continue;
            FqEl m = fld->mul(A.at(r, col), s);
            for (int j = col; j < cols; ++j)
                A.at(r, j) = fld->sub(A.at(r, j), fld->mul(m, A.at(rk, j)));
        }
        ++rk;
    }
    return rk;
}

std::vector<std::vector<FqEl>> FqMat::kernel() const {
    // reduce to row echelon, track pivot columns
    FqMat A = *this;
    std::vector<int> pivot_col;
    int rk = 0;
    for (int col = 0; col < cols && rk < rows; ++col) {
        int piv = -1;
        for (int r = rk; r < rows; ++r)
            if (!A.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rk)
            for (int j = 0; j < cols; ++j) std::swap(A.at(piv, j), A.at(rk, j));
        FqEl s = fld->inv(A.at(rk, col));
        for (int j = 0; j < cols; ++j) A.at(rk, j) = fld->mul(A.at(rk, j), s);
        for (int r = 0; r < rows; ++r) {
            if (r == rk || A.at(r, col).is_zero()) continue;
            FqEl m = A.at(r, col);
            for (int j = 0; j < cols; ++j)
                A.at(r, j) = fld->sub(A.at(r, j), fld->mul(m, A.at(rk, j)));
        }
        pivot_col.push_back(col);
        ++rk;
    }
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<std::vector<FqEl>> basis;
    for (int freec = 0; freec < cols; ++freec) {
        if (is_pivot[freec]) continue;
        std::vector<FqEl> v(cols, fld->zero());
        v[freec] = fld->one();
        for (int r = 0; r < rk; ++r)
            v[pivot_col[r]] = fld->neg(A.at(r, freec));
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<FqEl> FqMat::solve(const std::vector<FqEl>& b) const {
    if ((int)b.size() != rows) throw std::invalid_argument("FqMat: rhs size");
    // row-reduce augmented matrix
    FqMat A = zero(fld, rows, cols + 1);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) A.at(i, j) = at(i, j);
        A.at(i, cols) = b[i];
    }
    std::vector<int> pivot_col;
    int rk = 0;
    for (int col = 0; col < cols && rk < rows; ++col) {
        int piv = -1;
        for (int r = rk; r < rows; ++r)
            if (!A.at(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rk)
            for (int j = 0; j <= cols; ++j) std::swap(A.at(piv, j), A.at(rk, j));
        FqEl s = fld->inv(A.at(rk, col));
        for (int j = 0; j <= cols; ++j) A.at(rk, j) = fld->mul(A.at(rk, j), s);
        for (int r = 0; r < rows; ++r) {
            if (r == rk || A.at(r, col).is_zero()) continue;
            FqEl m = A.at(r, col);
            for (int j = 0; j <= cols; ++j)
                A.at(r, j) = fld->sub(A.at(r, j), fld->mul(m, A.at(rk, j)));
        }
        pivot_col.push_back(col);
        ++rk;
    }
    for (int r = rk; r < rows; ++r)
        if (!A.at(r, cols).is_zero()) return {};  // inconsistent
    std::vector<FqEl> x(cols, fld->zero());
    for (int r = 0; r < rk; ++r) x[pivot_col[r]] = A.at(r, cols);
    return x;
}

}  // namespace theta
