#include "theta/tower.hpp"

#include <algorithm>
#include <sstream>

namespace theta {

namespace {

long long mulmod(long long a, long long b, long long m) {
    return (long long)((__int128)a * b % m);
}

long long mod_pos_ll(long long a, long long m) {
    long long r = a % m;
    if (r < 0) r += m;
    return r;
}

int vp_ll(long long c, long p, int cap) {
    // p-adic valuation of the representative c in [0, p^cap); c != 0
    int v = 0;
    while (v < cap && c % p == 0) {
        c /= p;
        ++v;
    }
    return v;
}

long long pow_ll(long long b, int n) {
    long long r = 1;
    for (int i = 0; i < n; ++i) r *= b;
    return r;
}

}  // namespace

unsigned long long Rng::next() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ULL;
    unsigned long long z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

long long Rng::uniform(long long lo, long long hi) {
    unsigned long long span = (unsigned long long)(hi - lo) + 1;
    return lo + (long long)(next() % span);
}

int legendre_int(long long a, long p) {
    a = mod_pos_ll(a, p);
    if (a == 0) return 0;
    long long r = 1, base = a, n = (p - 1) / 2;
    while (n > 0) {
        if (n & 1) r = mulmod(r, base, p);
        base = mulmod(base, base, p);
        n >>= 1;
    }
    return r == 1 ? 1 : -1;
}

TowerPtr Tower::make(long p, int f, int e, int prec, std::vector<long> residue_modulus) {
    if (p < 3 || p % 2 == 0) throw std::invalid_argument("tower: odd p required");
    if (f < 1 || e < 1) throw std::invalid_argument("tower: f, e >= 1 required");
    if (e % p == 0) throw std::invalid_argument("tower: tame ramification requires p does not divide e");
    if (prec < 2) throw std::invalid_argument("tower: precision >= 2 required");
    // capacity guard: p^prec must fit comfortably in 63 bits (products use 128)
    long double cap = 1;
    for (int i = 0; i < prec; ++i) {
        cap *= p;
        if (cap > 4.0e18) throw std::invalid_argument("tower: p^prec too large");
    }
    auto tw = std::shared_ptr<Tower>(new Tower());
    tw->p = p;
    tw->f = f;
    tw->e = e;
    tw->prec = prec;
    tw->pN = 1;
    for (int i = 0; i < prec; ++i) tw->pN *= p;
    tw->residue = Fq::make(p, f, std::move(residue_modulus));

    // reduction rows: w^{f+k} = sum_j omega_reduction[k][j] w^j  (mod p^prec)
    // computed from the monic residue modulus lifted with coefficients in [0, p)
    tw->omega_reduction.clear();
    std::vector<long long> cur(f, 0);  // w^f
    for (int j = 0; j < f; ++j)
        cur[j] = mod_pos_ll(-(long long)tw->residue->modulus[j], tw->pN);
    for (int k = 0; k <= f - 1; ++k) {
        tw->omega_reduction.push_back(cur);
        // multiply by w
        std::vector<long long> nxt(f, 0);
        long long top = cur[f - 1];
        for (int j = f - 1; j >= 1; --j) nxt[j] = cur[j - 1];
        nxt[0] = 0;
        if (top != 0)
            for (int j = 0; j < f; ++j)
                nxt[j] = mod_pos_ll(nxt[j] + mulmod(top, tw->omega_reduction[0][j], tw->pN), tw->pN);
        cur = nxt;
    }

    if (f > 1) {
        // Frobenius image of w: the root of the lifted modulus congruent to
        // w^p in the residue field, found by Newton iteration.
        Elt w = tw->omega();
        Elt z = w.pow(p);
        std::vector<Elt> coeff;  // lifted modulus as tower elements
        for (int i = 0; i < f; ++i) coeff.push_back(tw->from_int(tw->residue->modulus[i]));
        coeff.push_back(tw->one());
        auto eval = [&](const Elt& x, bool deriv) {
            Elt acc = tw->zero();
            for (int i = (int)coeff.size() - 1; i >= (deriv ? 1 : 0); --i) {
                Elt term = coeff[i];
                if (deriv) term = term * tw->from_int(i);
                acc = acc * x + term;
            }
            return acc;
        };
        int iters = 2;
        while ((1 << iters) < e * prec + 2) ++iters;
        for (int it = 0; it <= iters; ++it)
            z = z - eval(z, false) * eval(z, true).inv();
        auto cz = z.unit_coeffs();
        tw->frob_omega.assign(f, 0);
        if (z.pi_shift() != 0) throw std::logic_error("tower: frobenius image not a unit");
        for (int a = 0; a < f; ++a) tw->frob_omega[a] = cz[(size_t)a * e];
    }
    return tw;
}

// ---- Elt internals ----

bool Elt::coeffs_zero() const {
    for (long long x : c_)
        if (x != 0) return false;
    return true;
}

void Elt::check_same(const Elt& o) const {
    if (tw_.get() != o.tw_.get()) throw std::invalid_argument("element: tower mismatch");
}

Elt Elt::make_raw(TowerPtr tw, int shift, int rel, std::vector<long long> c) {
    Elt x;
    x.tw_ = std::move(tw);
    x.exact_zero_ = false;
    x.shift_ = shift;
    x.rel_ = std::min(rel, x.tw_->e * x.tw_->prec);
    x.c_ = std::move(c);
    for (auto& v : x.c_) v = mod_pos_ll(v, x.tw_->pN);
    x.normalize();
    return x;
}

void Elt::normalize() {
    const Tower& T = *tw_;
    if (rel_ <= 0)
        throw precision_exhausted("element: no certified digits remain");
    if (coeffs_zero()) return;  // zero at this precision, bound shift_ + rel_
    // pi-valuation of the unit part
    int m = T.e * T.prec + T.e;
    for (int a = 0; a < T.f; ++a)
        for (int b = 0; b < T.e; ++b) {
            long long v = c_[(size_t)a * T.e + b];
            if (v == 0) continue;
            m = std::min(m, T.e * vp_ll(v, T.p, T.prec) + b);
        }
    if (m == 0) return;
    if (m >= rel_) {
        // everything visible sits below the certified digits
        std::fill(c_.begin(), c_.end(), 0);
        return;
    }
    // divide the unit part by pi^m
    std::vector<long long> nc((size_t)T.f * T.e, 0);
    for (int a = 0; a < T.f; ++a)
        for (int b = 0; b < T.e; ++b) {
            long long v = c_[(size_t)a * T.e + b];
            if (v == 0) continue;
            int bb = b - m;
            int k = 0;
            while (bb < 0) {
                bb += T.e;
                ++k;
            }
            nc[(size_t)a * T.e + bb] = v / pow_ll(T.p, k);
        }
    c_ = std::move(nc);
    shift_ += m;
    rel_ -= m;
}

bool Elt::is_zero_at_precision() const { return exact_zero_ || coeffs_zero(); }

Val Elt::val() const {
    if (exact_zero_) return Val::infinite();
    if (coeffs_zero()) return Val::at_least(Rat(shift_ + rel_, tw_->e));
    return Val::finite(Rat(shift_, tw_->e));
}

bool Elt::val_at_least(const Rat& t) const {
    if (exact_zero_) return true;
    if (coeffs_zero()) {
        if (Rat(shift_ + rel_, tw_->e) >= t) return true;
        throw precision_exhausted("val_at_least: bound below threshold");
    }
    return Rat(shift_, tw_->e) >= t;
}

namespace {

// multiply a unit coefficient vector by pi^d, d >= 0 (wrap uses pi^e = p)
std::vector<long long> unit_shift_up(const Tower& T, const std::vector<long long>& c, int d) {
    std::vector<long long> r((size_t)T.f * T.e, 0);
    for (int a = 0; a < T.f; ++a)
        for (int b = 0; b < T.e; ++b) {
            long long v = c[(size_t)a * T.e + b];
            if (v == 0) continue;
            int bb = b + d;
            int k = bb / T.e;
            bb %= T.e;
            long long w = v;
            for (int i = 0; i < k; ++i) w = mulmod(w, T.p, T.pN);
            r[(size_t)a * T.e + bb] = mod_pos_ll(r[(size_t)a * T.e + bb] + w, T.pN);
        }
    return r;
}

std::vector<long long> unit_mul(const Tower& T, const std::vector<long long>& x,
                                const std::vector<long long>& y) {
    // accumulate over w-degree up to 2f-2, then reduce
    std::vector<long long> acc((size_t)(2 * T.f - 1) * T.e, 0);
    for (int a1 = 0; a1 < T.f; ++a1)
        for (int b1 = 0; b1 < T.e; ++b1) {
            long long v1 = x[(size_t)a1 * T.e + b1];
            if (v1 == 0) continue;
            for (int a2 = 0; a2 < T.f; ++a2)
                for (int b2 = 0; b2 < T.e; ++b2) {
                    long long v2 = y[(size_t)a2 * T.e + b2];
                    if (v2 == 0) continue;
                    long long v = mulmod(v1, v2, T.pN);
                    int b = b1 + b2;
                    if (b >= T.e) {
                        b -= T.e;
                        v = mulmod(v, T.p, T.pN);
                    }
                    size_t idx = (size_t)(a1 + a2) * T.e + b;
                    acc[idx] = mod_pos_ll(acc[idx] + v, T.pN);
                }
        }
    std::vector<long long> r((size_t)T.f * T.e, 0);
    for (int a = 0; a < T.f; ++a)
        for (int b = 0; b < T.e; ++b) r[(size_t)a * T.e + b] = acc[(size_t)a * T.e + b];
    for (int a = T.f; a <= 2 * T.f - 2; ++a)
        for (int b = 0; b < T.e; ++b) {
            long long v = acc[(size_t)a * T.e + b];
            if (v == 0) continue;
            const auto& row = T.omega_reduction[a - T.f];
            for (int j = 0; j < T.f; ++j) {
                size_t idx = (size_t)j * T.e + b;
                r[idx] = mod_pos_ll(r[idx] + mulmod(v, row[j], T.pN), T.pN);
            }
        }
    return r;
}

}  // namespace

Elt Elt::operator+(const Elt& o) const {
    check_same(o);
    if (exact_zero_) return o;
    if (o.exact_zero_) return *this;
    const Tower& T = *tw_;
    int s = std::min(shift_, o.shift_);
    long long known = std::min((long long)shift_ + rel_, (long long)o.shift_ + o.rel_);
    std::vector<long long> ca = unit_shift_up(T, c_, shift_ - s);
    std::vector<long long> cb = unit_shift_up(T, o.c_, o.shift_ - s);
    for (size_t i = 0; i < ca.size(); ++i) ca[i] = mod_pos_ll(ca[i] + cb[i], T.pN);
    return make_raw(tw_, s, (int)(known - s), std::move(ca));
}

Elt Elt::operator-() const {
    if (exact_zero_) return *this;
    Elt r = *this;
    for (auto& v : r.c_) v = mod_pos_ll(-v, tw_->pN);
    return r;
}

Elt Elt::operator-(const Elt& o) const { return *this + (-o); }

Elt Elt::operator*(const Elt& o) const {
    check_same(o);
    if (exact_zero_ || o.exact_zero_) return tw_->zero();
    const Tower& T = *tw_;
    int rel = std::min(rel_, o.rel_);
    if (coeffs_zero() || o.coeffs_zero()) {
        Elt r;
        r.tw_ = tw_;
        r.exact_zero_ = false;
        r.shift_ = shift_ + o.shift_;
        r.rel_ = rel;
        r.c_.assign((size_t)T.f * T.e, 0);
        return r;
    }
    return make_raw(tw_, shift_ + o.shift_, rel, unit_mul(T, c_, o.c_));
}

Elt Elt::inv() const {
    if (exact_zero_) throw std::domain_error("element: inverse of zero");
    if (coeffs_zero()) throw precision_exhausted("element: inverse of zero-at-precision");
    const Tower& T = *tw_;
    // invert the unit part: residue inverse, then Newton doubling
    FqEl r0 = T.residue->zero();
    {
        std::vector<long> rc(T.f, 0);
        for (int a = 0; a < T.f; ++a) rc[a] = (long)(c_[(size_t)a * T.e] % T.p);
        r0 = T.residue->from_coeffs(std::move(rc));
    }
    FqEl ri = T.residue->inv(r0);
    std::vector<long long> y((size_t)T.f * T.e, 0);
    for (int a = 0; a < T.f; ++a) y[(size_t)a * T.e] = ri.c[a];
    int steps = 1;
    while ((1 << steps) < T.e * T.prec) ++steps;
    for (int i = 0; i <= steps; ++i) {
        // y <- y * (2 - u * y)
        std::vector<long long> uy = unit_mul(T, c_, y);
        for (auto& v : uy) v = mod_pos_ll(-v, T.pN);
        uy[0] = mod_pos_ll(uy[0] + 2, T.pN);
        y = unit_mul(T, y, uy);
    }
    Elt r;
    r.tw_ = tw_;
    r.exact_zero_ = false;
    r.shift_ = -shift_;
    r.rel_ = rel_;
    r.c_ = std::move(y);
    return r;
}

Elt Elt::pow(long long n) const {
    if (n < 0) return inv().pow(-n);
    Elt r = tw_->one();
    Elt b = *this;
    while (n > 0) {
        if (n & 1) r = r * b;
        b = b * b;
        n >>= 1;
    }
    return r;
}

Elt Elt::mul_pi_power(long long k) const {
    if (exact_zero_) return *this;
    Elt r = *this;
    r.shift_ += (int)k;
    return r;
}

Elt Elt::truncated(int rel) const {
    if (exact_zero_) return *this;
    if (rel >= rel_) return *this;
    if (rel <= 0) throw precision_exhausted("truncated: no digits requested");
    Elt r = *this;
    r.rel_ = rel;
    r.normalize();
    return r;
}

bool Elt::congruent(const Elt& o, const Rat& t) const {
    return (*this - o).val_at_least(t);
}

FqEl Elt::residue_image() const {
    const Tower& T = *tw_;
    if (exact_zero_) return T.residue->zero();
    if (coeffs_zero()) {
        if (shift_ + rel_ >= 1) return T.residue->zero();
        throw precision_exhausted("residue: precision below the residue digit");
    }
    if (shift_ < 0) throw std::domain_error("residue: negative valuation");
    if (shift_ > 0) return T.residue->zero();
    std::vector<long> rc(T.f, 0);
    for (int a = 0; a < T.f; ++a) rc[a] = (long)(c_[(size_t)a * T.e] % T.p);
    return T.residue->from_coeffs(std::move(rc));
}

Elt Elt::frobenius(int k) const {
    const Tower& T = *tw_;
    if (T.f == 1 || exact_zero_ || coeffs_zero()) return *this;
    k = ((k % T.f) + T.f) % T.f;
    Elt r = *this;
    for (int it = 0; it < k; ++it) {
        // powers of frob(w)
        std::vector<std::vector<long long>> wp;
        std::vector<long long> cur((size_t)T.f * T.e, 0);
        cur[0] = 1;
        wp.push_back(cur);
        std::vector<long long> fo((size_t)T.f * T.e, 0);
        for (int a = 0; a < T.f; ++a) fo[(size_t)a * T.e] = T.frob_omega[a];
        for (int a = 1; a < T.f; ++a) wp.push_back(unit_mul(T, wp.back(), fo));
        std::vector<long long> nc((size_t)T.f * T.e, 0);
        for (int a = 0; a < T.f; ++a)
            for (int b = 0; b < T.e; ++b) {
                long long v = r.c_[(size_t)a * T.e + b];
                if (v == 0) continue;
                for (int j = 0; j < T.f; ++j)
                    for (int bb = 0; bb < T.e; ++bb) {
                        long long w = wp[a][(size_t)j * T.e + bb];
                        if (w == 0) continue;
                        int b2 = b + bb;
                        long long vv = mulmod(v, w, T.pN);
                        if (b2 >= T.e) {
                            b2 -= T.e;
                            vv = mulmod(vv, T.p, T.pN);
                        }
                        size_t idx = (size_t)j * T.e + b2;
                        nc[idx] = mod_pos_ll(nc[idx] + vv, T.pN);
                    }
            }
        r = make_raw(tw_, r.shift_, r.rel_, std::move(nc));
    }
    return r;
}

Elt Elt::rotate_uniformizer(const Elt& zeta) const {
    const Tower& T = *tw_;
    if (exact_zero_ || coeffs_zero()) return *this;
    // zeta acts on the basis by w^a pi^b -> zeta^b w^a pi^b, and the overall
    // pi^shift prefactor picks up zeta^shift
    Elt acc = T.zero();
    for (int b = 0; b < T.e; ++b) {
        std::vector<long long> part((size_t)T.f * T.e, 0);
        bool any = false;
        for (int a = 0; a < T.f; ++a) {
            part[(size_t)a * T.e + b] = c_[(size_t)a * T.e + b];
            if (part[(size_t)a * T.e + b] != 0) any = true;
        }
        if (!any) continue;
        Elt term;
        term.tw_ = tw_;
        term.exact_zero_ = false;
        term.shift_ = shift_;
        term.rel_ = rel_;
        term.c_ = std::move(part);
        term.normalize();
        acc = acc + term * zeta.pow(b);
    }
    long long sh = ((shift_ % T.e) + T.e) % T.e;
    return acc * zeta.pow(sh);
}

std::string Elt::str() const {
    if (exact_zero_) return "0";
    const Tower& T = *tw_;
    std::ostringstream os;
    if (coeffs_zero()) {
        os << "O(pi^" << (shift_ + rel_) << ")";
        return os.str();
    }
    os << "pi^" << shift_ << "*(";
    bool first = true;
    for (int a = 0; a < T.f; ++a)
        for (int b = 0; b < T.e; ++b) {
            long long v = c_[(size_t)a * T.e + b];
            if (v == 0) continue;
            if (!first) os << " + ";
            first = false;
            os << v;
            if (a > 0) os << "*w^" << a;
            if (b > 0) os << "*pi^" << b;
        }
    os << ") + O(pi^" << (shift_ + rel_) << ")";
    return os.str();
}

// ---- Tower element constructors ----

Elt Tower::zero() const {
    Elt x;
    x.tw_ = shared_from_this();
    x.exact_zero_ = true;
    x.shift_ = 0;
    x.rel_ = e * prec;
    x.c_.assign((size_t)f * e, 0);
    return x;
}

Elt Tower::one() const { return from_int(1); }

Elt Tower::from_int(long long n) const {
    if (n == 0) return zero();
    // strip p factors from the true integer first: dividing the positive
    // representative mod p^prec instead would corrupt the top digits for
    // negative inputs, which must stay fully certified
    long long m = n;
    int k = 0;
    while (m % p == 0) {
        m /= p;
        ++k;
    }
    std::vector<long long> c((size_t)f * e, 0);
    c[0] = mod_pos_ll(m, pN);
    Elt x = Elt::make_raw(shared_from_this(), e * k, e * prec, std::move(c));
    x.rel_ = e * prec;  // exact unit input: all stored digits are certified
    return x;
}

Elt Tower::from_unit_coeffs(const std::vector<long long>& c, int pi_shift) const {
    if ((int)c.size() != f * e) throw std::invalid_argument("from_unit_coeffs: size");
    std::vector<long long> cc = c;
    bool all0 = true;
    for (auto v : cc)
        if (v != 0) all0 = false;
    if (all0) return zero();
    // shared p factors are divided out of the true integers, for the same
    // representative-wrapping reason as in from_int
    for (;;) {
        bool alldiv = true;
        for (auto v : cc)
            if (v % p != 0) alldiv = false;
        if (!alldiv) break;
        for (auto& v : cc) v /= p;
        pi_shift += e;
    }
    Elt x = Elt::make_raw(shared_from_this(), pi_shift, e * prec, std::move(cc));
    if (x.pi_shift() == pi_shift) x.rel_ = e * prec;
    return x;
}

Elt Tower::unknown_below(long long pi_digits) const {
    Elt x;
    x.tw_ = shared_from_this();
    x.exact_zero_ = false;
    x.shift_ = (int)(pi_digits - 1);
    x.rel_ = 1;
    x.c_.assign((size_t)f * e, 0);
    return x;
}

Elt Tower::from_rational(long long num, long long den) const {
    if (den == 0) throw std::invalid_argument("from_rational: zero denominator");
    if (num == 0) return zero();
    int v = 0;
    while (num % p == 0) {
        num /= p;
        ++v;
    }
    while (den % p == 0) {
        den /= p;
        --v;
    }
    Elt x = from_int(num) * from_int(den).inv();
    return x.mul_pi_power((long long)e * v);
}

Elt Tower::uniformizer() const {
    return one().mul_pi_power(1);
}

Elt Tower::omega() const {
    if (f < 2) throw std::logic_error("omega: trivial unramified part");
    std::vector<long long> c((size_t)f * e, 0);
    c[(size_t)1 * e] = 1;
    return from_unit_coeffs(c, 0);
}

Elt Tower::sample_unit(Rng& rng) const {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<long long> c((size_t)f * e, 0);
        for (auto& v : c) v = (long long)(rng.next() % (unsigned long long)pN);
        bool unit = false;
        for (int a = 0; a < f; ++a)
            if (c[(size_t)a * e] % p != 0) unit = true;
        if (!unit) continue;
        return from_unit_coeffs(c, 0);
    }
    throw std::logic_error("sample_unit: rng failure");
}

Elt Tower::teichmuller(const FqEl& u) const {
    if (u.fld.get() != residue.get()) throw std::invalid_argument("teichmuller: wrong residue field");
    if (u.is_zero()) return zero();
    std::vector<long long> c((size_t)f * e, 0);
    for (int a = 0; a < f; ++a) c[(size_t)a * e] = u.c[a];
    Elt x = from_unit_coeffs(c, 0);
    long long q = residue->q;
    for (int i = 0; i < prec + 2; ++i) x = x.pow(q);
    return x;
}

Elt Tower::hensel_root(long m, const Elt& b, const FqEl& seed) const {
    if (m % p == 0) throw std::invalid_argument("hensel_root: p divides the exponent");
    if (b.is_zero_at_precision()) throw std::domain_error("hensel_root: radicand is zero");
    if (!b.val().is_finite() || b.val().v != Rat(0))
        throw std::domain_error("hensel_root: unit radicand required");
    FqEl sr = seed;
    if (residue->pow(sr, m) != b.residue_image())
        throw std::domain_error("hensel_root: seed is not a residue root");
    std::vector<long long> c((size_t)f * e, 0);
    for (int a = 0; a < f; ++a) c[(size_t)a * e] = sr.c[a];
    Elt x = from_unit_coeffs(c, 0);
    Elt me = from_int(m);
    int steps = 2;
    while ((1 << steps) < e * prec + 2) ++steps;
    for (int i = 0; i <= steps; ++i)
        x = x - (x.pow(m) - b) * (me * x.pow(m - 1)).inv();
    if (!(x.pow(m) - b).is_zero_at_precision())
        throw std::logic_error("hensel_root: iteration failed to converge");
    return x;
}

// ---- Hilbert symbol ----

int hilbert_symbol_qp(long p, long long a_num, long long a_den,
                      long long b_num, long long b_den) {
    if (a_num == 0 || b_num == 0 || a_den == 0 || b_den == 0)
        throw std::invalid_argument("hilbert: nonzero arguments required");
    auto split = [&](long long num, long long den, long& vout) {
        long v = 0;
        while (num % p == 0) {
            num /= p;
            ++v;
        }
        while (den % p == 0) {
            den /= p;
            --v;
        }
        vout = v;
        // unit part mod p
        long long u = mod_pos_ll(num, p);
        long long dinv = 1;
        {
            long long d = mod_pos_ll(den, p), x = 1, b0 = 0, m0 = p;
            // extended euclid
            long long r0 = m0, r1 = d, s0 = 0, s1 = 1;
            while (r1 != 0) {
                long long q = r0 / r1;
                long long r2 = r0 - q * r1;
                long long s2 = s0 - q * s1;
                r0 = r1;
                r1 = r2;
                s0 = s1;
                s1 = s2;
            }
            dinv = mod_pos_ll(s0, p);
            (void)x;
            (void)b0;
        }
        return mod_pos_ll(u * dinv, p);
    };
    long alpha, beta;
    long long u = split(a_num, a_den, alpha);
    long long v = split(b_num, b_den, beta);
    int result = 1;
    if ((alpha % 2 != 0) && (beta % 2 != 0) && ((p - 1) / 2) % 2 == 1) result = -result;
    if (beta % 2 != 0) result *= legendre_int(u, p);
    if (alpha % 2 != 0) result *= legendre_int(v, p);
    return result;
}

int hilbert_symbol(const Elt& a, const Elt& b) {
    auto tw = a.tower();
    if (tw->f != 1 || tw->e != 1)
        throw std::invalid_argument("hilbert: base tower Q_p required");
    auto part = [&](const Elt& x, long long& unit_mod_p, long& valn) {
        Val v = x.val();
        if (!v.is_finite()) throw std::invalid_argument("hilbert: nonzero argument required");
        if (v.v.denominator() != 1) throw std::logic_error("hilbert: integral valuation expected");
        valn = (long)v.v.numerator();
        unit_mod_p = x.unit_coeffs()[0] % tw->p;
    };
    long long ua, ub;
    long va, vb;
    part(a, ua, va);
    part(b, ub, vb);
    long p = tw->p;
    int result = 1;
    if ((va % 2 != 0) && (vb % 2 != 0) && ((p - 1) / 2) % 2 == 1) result = -result;
    if (vb % 2 != 0) result *= legendre_int(ua, p);
    if (va % 2 != 0) result *= legendre_int(ub, p);
    return result;
}

}  // namespace theta
