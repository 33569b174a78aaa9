#include "theta/fweil.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace theta {

namespace {

const double kTol = 1e-6;

std::string mat_key(const FqMat& m) {
    std::ostringstream os;
    os << m.rows << 'x' << m.cols;
    for (const auto& e : m.a) os << ':' << m.fld->index_of(e);
    return os.str();
}

// Re-express a matrix over an identical field instance (same p, f, modulus).
FqMat retag(const FqMat& m, const FqPtr& fld) {
    if (m.fld == fld) return m;
    if (m.fld->p != fld->p || m.fld->f != fld->f || m.fld->modulus != fld->modulus)
        throw std::invalid_argument("retag: incompatible finite fields");
    FqMat out = FqMat::zero(fld, m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) = fld->element(m.fld->index_of(m.at(i, j)));
    return out;
}

FqEl retag_el(const FqEl& x, const FqPtr& fld) {
    if (x.fld == fld) return x;
    if (x.fld->p != fld->p || x.fld->f != fld->f || x.fld->modulus != fld->modulus)
        throw std::invalid_argument("retag: incompatible finite fields");
    return fld->element(x.fld->index_of(x));
}

// tau(u)^T gram v for coordinate vectors over the space's field.
FqEl herm_pair(const FiniteHermitianSpace& l, const std::vector<FqEl>& u,
               const std::vector<FqEl>& v) {
    const auto& F = *l.fld;
    FqEl s = F.zero();
    for (int i = 0; i < l.dim(); ++i) {
        if (u[(size_t)i].is_zero()) continue;
        FqEl ui = fq_tau(l, u[(size_t)i]);
        for (int j = 0; j < l.dim(); ++j)
            s = F.add(s, F.mul(F.mul(ui, l.gram.at(i, j)), v[(size_t)j]));
    }
    return s;
}

std::vector<FqEl> mat_col(const FqMat& m, int j) {
    std::vector<FqEl> c((size_t)m.rows);
    for (int i = 0; i < m.rows; ++i) c[(size_t)i] = m.at(i, j);
    return c;
}

bool in_col_span(const FqMat& basis, const std::vector<FqEl>& v) {
    if (basis.cols == 0) {
        for (const auto& x : v)
            if (!x.is_zero()) return false;
        return true;
    }
    FqMat ext = FqMat::zero(basis.fld, basis.rows, basis.cols + 1);
    for (int i = 0; i < basis.rows; ++i) {
        for (int j = 0; j < basis.cols; ++j) ext.at(i, j) = basis.at(i, j);
        ext.at(i, basis.cols) = v[(size_t)i];
    }
    return ext.rank() == basis.rank();
}

}  // namespace

// ---- finite symplectic spaces ----

FiniteSymplecticSpace FiniteSymplecticSpace::make(FqPtr fld, FqMat form) {
    std::vector<Cx> psi((size_t)fld->p);
    for (long k = 0; k < fld->p; ++k)
        psi[(size_t)k] = std::polar(1.0, 2.0 * M_PI * (double)k / (double)fld->p);
    return make_with(std::move(fld), std::move(form), std::move(psi));
}

FiniteSymplecticSpace FiniteSymplecticSpace::make_with(FqPtr fld, FqMat form,
                                                       std::vector<Cx> psi_p) {
    if (fld->p == 2) throw std::invalid_argument("finite symplectic space: even characteristic");
    if (form.rows != form.cols) throw std::invalid_argument("finite symplectic space: not square");
    if (form.rows % 2 != 0) throw std::invalid_argument("finite symplectic space: odd dimension");
    for (int i = 0; i < form.rows; ++i)
        for (int j = 0; j < form.cols; ++j)
            if (form.at(i, j) != fld->neg(form.at(j, i)))
                throw std::invalid_argument("finite symplectic space: form not alternating");
    if (form.rows > 0 && form.rank() != form.rows)
        throw std::invalid_argument("finite symplectic space: degenerate form");
    if ((long)psi_p.size() != fld->p)
        throw std::invalid_argument("finite symplectic space: character table size");
    FiniteSymplecticSpace W;
    W.fld = std::move(fld);
    W.dim = form.rows;
    W.form = std::move(form);
    W.psi_p = std::move(psi_p);
    return W;
}

Cx FiniteSymplecticSpace::psi(const FqEl& x) const { return psi_p[(size_t)fld->trace_to_prime(x)]; }

FqMat symplectic_basis(const FiniteSymplecticSpace& W) {
    const auto& F = *W.fld;
    int d = W.dim;
    std::vector<std::vector<FqEl>> rem;
    for (int i = 0; i < d; ++i) {
        std::vector<FqEl> e((size_t)d, F.zero());
        e[(size_t)i] = F.one();
        rem.push_back(e);
    }
    auto B = [&](const std::vector<FqEl>& u, const std::vector<FqEl>& v) {
        FqEl s = F.zero();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                s = F.add(s, F.mul(F.mul(u[(size_t)i], W.form.at(i, j)), v[(size_t)j]));
        return s;
    };
    std::vector<std::vector<FqEl>> es, fs;
    while (!rem.empty()) {
        std::vector<FqEl> u = rem.front();
        rem.erase(rem.begin());
        bool zero = true;
        for (const auto& x : u)
            if (!x.is_zero()) zero = false;
        if (zero) continue;
        int pick = -1;
        for (size_t k = 0; k < rem.size(); ++k)
            if (!B(u, rem[k]).is_zero()) {
                pick = (int)k;
                break;
            }
        if (pick < 0) throw std::logic_error("symplectic basis: degenerate complement");
        std::vector<FqEl> v = rem[(size_t)pick];
        rem.erase(rem.begin() + pick);
        FqEl c = F.inv(B(u, v));
        for (auto& x : v) x = F.mul(x, c);
        for (auto& w : rem) {
            FqEl a = B(u, w);  // w -> w - a v, then add back along u
            for (int i = 0; i < d; ++i) w[(size_t)i] = F.sub(w[(size_t)i], F.mul(a, v[(size_t)i]));
            FqEl b = B(v, w);
            for (int i = 0; i < d; ++i) w[(size_t)i] = F.add(w[(size_t)i], F.mul(b, u[(size_t)i]));
        }
        es.push_back(u);
        fs.push_back(v);
    }
    int n = (int)es.size();
    FqMat out = FqMat::zero(W.fld, d, 2 * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i) {
            out.at(i, k) = es[(size_t)k][(size_t)i];
            out.at(i, n + k) = fs[(size_t)k][(size_t)i];
        }
    if (2 * n != d) throw std::logic_error("symplectic basis: dimension drop");
    return out;
}

// ---- the Weil representation ----

FiniteWeilRep build_weil(const FiniteSymplecticSpace& W, long long op_budget) {
    FiniteWeilRep R;
    R.W = W;
    R.n = W.dim / 2;
    R.dim = 1;
    for (int i = 0; i < R.n; ++i) {
        R.dim *= W.fld->q;
        if (R.dim > op_budget) throw std::invalid_argument("weil model: operator budget exceeded");
    }
    R.std_basis = symplectic_basis(W);
    R.std_basis_inv = W.dim > 0 ? R.std_basis.inverse() : R.std_basis;
    Cx g = 0.0;
    for (long t = 0; t < W.fld->q; ++t) {
        FqEl x = W.fld->element(t);
        g += W.psi(W.fld->mul(x, x));
    }
    // inverse normalized Gauss sum per hyperbolic pair, with the extra
    // quadratic symbol of -2 that the half-integral phase conventions below
    // demand; this scalar makes the operators a true (non-projective)
    // representation (checked exhaustively for p up to 13 at rank one and by
    // sampling at rank two)
    long prime = W.fld->p;
    double s2 = (double)legendre_int(((-2) % prime + prime) % prime, prime);
    R.gauss_norm = std::pow(s2 * std::conj(g) / (double)W.fld->q, R.n);
    return R;
}

std::vector<FqEl> FiniteWeilRep::point(long long idx) const {
    std::vector<FqEl> y((size_t)n);
    for (int i = 0; i < n; ++i) {
        y[(size_t)i] = W.fld->element(idx % W.fld->q);
        idx /= W.fld->q;
    }
    return y;
}

long long FiniteWeilRep::index(const std::vector<FqEl>& y) const {
    long long idx = 0;
    for (int i = n - 1; i >= 0; --i) idx = idx * W.fld->q + W.fld->index_of(y[(size_t)i]);
    return idx;
}

CMat FiniteWeilRep::heisenberg(const std::vector<FqEl>& w, const FqEl& t) const {
    const auto& F = *W.fld;
    if ((int)w.size() != W.dim) throw std::invalid_argument("heisenberg: bad vector size");
    // standard coordinates: x = first n, y0 = last n
    std::vector<FqEl> ws((size_t)W.dim, F.zero());
    for (int i = 0; i < W.dim; ++i)
        for (int j = 0; j < W.dim; ++j)
            ws[(size_t)i] = F.add(ws[(size_t)i], F.mul(std_basis_inv.at(i, j), w[(size_t)j]));
    FqEl half = F.inv(F.from_int(2));
    CMat M = CMat::Zero(dim, dim);
    for (long long r = 0; r < dim; ++r) {
        std::vector<FqEl> y = point(r);
        // phase psi(t - x . (y + y0/2)), target point y + y0
        FqEl ph = t;
        std::vector<FqEl> yt = y;
        for (int i = 0; i < n; ++i) {
            FqEl mid = F.add(y[(size_t)i], F.mul(half, ws[(size_t)(n + i)]));
            ph = F.sub(ph, F.mul(ws[(size_t)i], mid));
            yt[(size_t)i] = F.add(yt[(size_t)i], ws[(size_t)(n + i)]);
        }
        M(r, index(yt)) = W.psi(ph);
    }
    return M;
}

namespace {

struct StdOps {
    const FiniteWeilRep& R;

    CMat linear(const FqMat& A) const {  // diag(A, A^-T)
        const auto& F = *R.W.fld;
        double chi = F.legendre(A.det());
        CMat M = CMat::Zero(R.dim, R.dim);
        for (long long r = 0; r < R.dim; ++r) {
            std::vector<FqEl> y = R.point(r);
            std::vector<FqEl> Aty((size_t)R.n, F.zero());
            for (int i = 0; i < R.n; ++i)
                for (int j = 0; j < R.n; ++j)
                    Aty[(size_t)i] = F.add(Aty[(size_t)i], F.mul(A.at(j, i), y[(size_t)j]));
            M(r, R.index(Aty)) = chi;
        }
        return M;
    }

    CMat quad(const FqMat& S) const {  // [[I,S],[0,I]]
        const auto& F = *R.W.fld;
        FqEl half = F.inv(F.from_int(2));
        CMat M = CMat::Zero(R.dim, R.dim);
        for (long long r = 0; r < R.dim; ++r) {
            std::vector<FqEl> y = R.point(r);
            FqEl ph = F.zero();
            for (int i = 0; i < R.n; ++i)
                for (int j = 0; j < R.n; ++j)
                    ph = F.add(ph, F.mul(F.mul(y[(size_t)i], S.at(i, j)), y[(size_t)j]));
            M(r, r) = R.W.psi(F.mul(half, ph));
        }
        return M;
    }

    CMat weyl() const {  // [[0,I],[-I,0]], normalized Fourier transform
        const auto& F = *R.W.fld;
        CMat M = CMat::Zero(R.dim, R.dim);
        for (long long r = 0; r < R.dim; ++r) {
            std::vector<FqEl> y = R.point(r);
            for (long long c = 0; c < R.dim; ++c) {
                std::vector<FqEl> u = R.point(c);
                FqEl ph = F.zero();
                for (int i = 0; i < R.n; ++i) ph = F.add(ph, F.mul(y[(size_t)i], u[(size_t)i]));
                M(r, c) = R.gauss_norm * R.W.psi(ph);
            }
        }
        return M;
    }
};

}  // namespace

CMat FiniteWeilRep::weil_std(const FqMat& g) const {
    const auto& F = *W.fld;
    if (g.rows != W.dim || g.cols != W.dim) throw std::invalid_argument("weil: bad matrix size");
    if (n == 0) return CMat::Identity(1, 1);
    // check g^T J g = J for the standard form
    FqMat J = FqMat::zero(W.fld, W.dim, W.dim);
    for (int i = 0; i < n; ++i) {
        J.at(i, n + i) = F.one();
        J.at(n + i, i) = F.neg(F.one());
    }
    if (!(g.transpose().mul(J).mul(g) == J)) throw std::invalid_argument("weil: not symplectic");

    StdOps ops{*this};
    auto block = [&](int bi, int bj) {
        FqMat b = FqMat::zero(W.fld, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b.at(i, j) = g.at(bi * n + i, bj * n + j);
        return b;
    };
    FqMat A = block(0, 0), Bm = block(0, 1), C = block(1, 0), D = block(1, 1);

    bool c_zero = true;
    for (const auto& e : C.a)
        if (!e.is_zero()) c_zero = false;
    if (c_zero) {
        // g = diag(A, A^-T) . [[I, A^-1 B],[0, I]]
        return ops.linear(A) * ops.quad(A.inverse().mul(Bm));
    }
    if (C.rank() == n) {
        // g = [[I, AC^-1],[0,I]] . sigma . diag(-C, ...) . [[I, C^-1 D],[0,I]]
        FqMat Cinv = C.inverse();
        FqMat negC = C.scale(F.neg(F.one()));
        return ops.quad(A.mul(Cinv)) * ops.weyl() * ops.linear(negC) * ops.quad(Cinv.mul(D));
    }
    // singular nonzero C: pick symmetric S with CS + D invertible, then
    // g . n(S) . sigma has an invertible lower-left block
    FqMat S = FqMat::zero(W.fld, n, n);
    bool found = false;
    long long diag_count = 1;
    for (int i = 0; i < n && diag_count <= 100000; ++i) diag_count *= F.q;
    for (long long it = 0; it < diag_count && !found; ++it) {
        long long v = it;
        for (int i = 0; i < n; ++i) {
            S.at(i, i) = F.element(v % F.q);
            v /= F.q;
        }
        if (C.mul(S).add(D).rank() == n) found = true;
    }
    if (!found) {
        Rng rng(0x5eedULL);
        for (int att = 0; att < 2000 && !found; ++att) {
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    FqEl x = F.element(rng.uniform(0, F.q - 1));
                    S.at(i, j) = x;
                    S.at(j, i) = x;
                }
            if (C.mul(S).add(D).rank() == n) found = true;
        }
    }
    if (!found) throw std::logic_error("weil: no completing symmetric matrix found");
    // h = n(S) sigma;  omega(g) = omega(g h) omega(sigma)^-1 omega(n(-S))
    FqMat gh = FqMat::zero(W.fld, W.dim, W.dim);
    {
        FqMat AS_B = A.mul(S).add(Bm), CS_D = C.mul(S).add(D);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                gh.at(i, j) = F.neg(AS_B.at(i, j));
                gh.at(i, n + j) = A.at(i, j);
                gh.at(n + i, j) = F.neg(CS_D.at(i, j));
                gh.at(n + i, n + j) = C.at(i, j);
            }
    }
    StdOps ops2{*this};
    return weil_std(gh) * ops2.weyl().adjoint() * ops2.quad(S.scale(F.neg(F.one())));
}

CMat FiniteWeilRep::weil(const FqMat& g) const {
    if (n == 0) return CMat::Identity(1, 1);
    return weil_std(std_basis_inv.mul(g).mul(std_basis));
}

int chi_parabolic(const FiniteWeilRep& R, const FqMat& g_std) {
    const auto& F = *R.W.fld;
    int n = R.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!g_std.at(n + i, j).is_zero())
                throw std::invalid_argument("chi_parabolic: element not in the Siegel parabolic");
    FqMat A = FqMat::zero(R.W.fld, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A.at(i, j) = g_std.at(i, j);
    return F.legendre(A.det());
}

// ---- Heisenberg group ----

HeisEl heis_mul(const FiniteSymplecticSpace& W, const HeisEl& a, const HeisEl& b) {
    const auto& F = *W.fld;
    if ((int)a.w.size() != W.dim || (int)b.w.size() != W.dim)
        throw std::invalid_argument("heis_mul: bad vector size");
    HeisEl out;
    out.w.resize((size_t)W.dim);
    FqEl pair = F.zero();
    for (int i = 0; i < W.dim; ++i) {
        out.w[(size_t)i] = F.add(a.w[(size_t)i], b.w[(size_t)i]);
        for (int j = 0; j < W.dim; ++j)
            pair = F.add(pair, F.mul(F.mul(a.w[(size_t)i], W.form.at(i, j)), b.w[(size_t)j]));
    }
    FqEl half = F.inv(F.from_int(2));
    out.t = F.add(F.add(a.t, b.t), F.mul(half, pair));
    return out;
}

FiniteSymplecticSpace residue_heisenberg_space(const ResidueSymplecticData& rsd) {
    if (!rsd.radical.empty())
        throw std::invalid_argument("residue heisenberg space: degenerate residue form");
    return FiniteSymplecticSpace::make(rsd.fld, rsd.form);
}

HeisEl special_morphism_residue(const SpacePtr& V, const ResidueSymplecticData& rsd,
                                const Mat& gamma, const std::vector<FqEl>& coords) {
    if (coords.size() != rsd.basis.size())
        throw std::invalid_argument("special morphism: coordinate count");
    const TowerPtr& D = V->alg->D;
    Mat X = Mat::zero(V->alg, V->n, V->n);
    for (size_t k = 0; k < coords.size(); ++k) {
        long v = coords[k].c.empty() ? 0 : coords[k].c[0];
        if (v != 0) X = X.add(rsd.basis[k].scale(D->from_int(v)));
    }
    Elt B = V->trace_form(X, gamma);
    HeisEl out;
    out.w = coords;
    out.t = retag_el(B.residue_image(), rsd.fld);
    return out;
}

// ---- finite hermitian spaces ----

FqEl fq_tau(const FiniteHermitianSpace& l, const FqEl& x) {
    return l.conj ? l.fld->frobenius(x) : x;
}

namespace {

void check_herm(const FiniteHermitianSpace& l) {
    if (l.conj && l.fld->f != 2)
        throw std::invalid_argument("hermitian space: conjugation needs a quadratic field");
    for (int i = 0; i < l.dim(); ++i)
        for (int j = 0; j < l.dim(); ++j) {
            FqEl want = fq_tau(l, l.gram.at(j, i));
            if (l.eps < 0) want = l.fld->neg(want);
            if (l.gram.at(i, j) != want)
                throw std::invalid_argument("hermitian space: gram does not match the sign");
        }
    if (l.dim() > 0 && l.gram.rank() != l.dim())
        throw std::invalid_argument("hermitian space: degenerate gram");
}

}  // namespace

std::vector<FqMat> isometry_group(const FiniteHermitianSpace& l, long cap) {
    check_herm(l);
    const auto& F = *l.fld;
    int d = l.dim();
    if (d == 0) return {FqMat::zero(l.fld, 0, 0)};
    long long nvec = 1;
    for (int i = 0; i < d; ++i) {
        nvec *= F.q;
        if (nvec > 100000) throw std::invalid_argument("isometry group: vector space too large");
    }
    std::vector<std::vector<FqEl>> vecs;
    vecs.reserve((size_t)nvec);
    for (long long idx = 0; idx < nvec; ++idx) {
        std::vector<FqEl> v((size_t)d);
        long long t = idx;
        for (int i = 0; i < d; ++i) {
            v[(size_t)i] = F.element(t % F.q);
            t /= F.q;
        }
        vecs.push_back(std::move(v));
    }
    std::vector<FqMat> out;
    std::vector<std::vector<FqEl>> cols;
    std::function<void(int)> rec = [&](int j) {
        if (j == d) {
            FqMat g = FqMat::zero(l.fld, d, d);
            for (int c = 0; c < d; ++c)
                for (int i = 0; i < d; ++i) g.at(i, c) = cols[(size_t)c][(size_t)i];
            out.push_back(std::move(g));
            if ((long)out.size() > cap) throw std::invalid_argument("isometry group: cap exceeded");
            return;
        }
        for (const auto& v : vecs) {
            bool ok = true;
            for (int i = 0; i <= j && ok; ++i) {
                const auto& u = (i == j) ? v : cols[(size_t)i];
                if (herm_pair(l, u, v) != l.gram.at(i, j)) ok = false;
            }
            if (!ok) continue;
            cols.push_back(v);
            rec(j + 1);
            cols.pop_back();
        }
    };
    rec(0);
    return out;
}

namespace {

// Greedy totally isotropic flag: mutually orthogonal isotropic vectors, one
// per hyperbolic pair split off the space.
std::vector<std::vector<FqEl>> isotropic_flag(const FiniteHermitianSpace& l) {
    const auto& F = *l.fld;
    int d = l.dim();
    std::vector<std::vector<FqEl>> flag;
    // current complement basis as columns in the ambient space
    FqMat comp = FqMat::identity(l.fld, d);
    for (;;) {
        int m = comp.cols;
        if (m < 2) break;
        long long nvec = 1;
        for (int i = 0; i < m; ++i) nvec *= F.q;
        // isotropic vector in the complement coordinates
        std::vector<FqEl> iso;
        for (long long idx = 1; idx < nvec && iso.empty(); ++idx) {
            std::vector<FqEl> c((size_t)m);
            long long t = idx;
            for (int i = 0; i < m; ++i) {
                c[(size_t)i] = F.element(t % F.q);
                t /= F.q;
            }
            std::vector<FqEl> v((size_t)d, F.zero());
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < m; ++k)
                    v[(size_t)i] = F.add(v[(size_t)i], F.mul(comp.at(i, k), c[(size_t)k]));
            bool zero = true;
            for (const auto& x : v)
                if (!x.is_zero()) zero = false;
            if (!zero && herm_pair(l, v, v).is_zero()) iso = v;
        }
        if (iso.empty()) break;
        // partner with nonzero pairing inside the complement
        std::vector<FqEl> partner;
        for (int k = 0; k < m && partner.empty(); ++k) {
            std::vector<FqEl> v = mat_col(comp, k);
            if (!herm_pair(l, iso, v).is_zero()) partner = v;
        }
        if (partner.empty()) break;
        flag.push_back(iso);
        // new complement: orthogonal to both iso and partner inside comp
        FqMat rows = FqMat::zero(l.fld, 2, m);
        for (int k = 0; k < m; ++k) {
            rows.at(0, k) = herm_pair(l, iso, mat_col(comp, k));
            rows.at(1, k) = herm_pair(l, partner, mat_col(comp, k));
        }
        auto ker = rows.kernel();
        FqMat nc = FqMat::zero(l.fld, d, (int)ker.size());
        for (int k = 0; k < (int)ker.size(); ++k)
            for (int i = 0; i < d; ++i) {
                FqEl s = F.zero();
                for (int t2 = 0; t2 < m; ++t2)
                    s = F.add(s, F.mul(comp.at(i, t2), ker[(size_t)k][(size_t)t2]));
                nc.at(i, k) = s;
            }
        comp = nc;
    }
    return flag;
}

}  // namespace

int witt_index_f(const FiniteHermitianSpace& l) { return (int)isotropic_flag(l).size(); }

FiniteHermitianSpace add_hyperbolic(const FiniteHermitianSpace& l) {
    const auto& F = *l.fld;
    int d = l.dim();
    FiniteHermitianSpace out = l;
    out.gram = FqMat::zero(l.fld, d + 2, d + 2);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.gram.at(i, j) = l.gram.at(i, j);
    out.gram.at(d, d + 1) = F.one();
    out.gram.at(d + 1, d) = F.from_int(l.eps);
    return out;
}

// ---- character tables ----

int FiniteGroupRepTable::index_of_element(const FqMat& g) const {
    for (size_t i = 0; i < elements.size(); ++i)
        if (elements[i] == g) return (int)i;
    return -1;
}

int FiniteGroupRepTable::trivial_char() const {
    for (size_t i = 0; i < chars.size(); ++i) {
        bool ok = true;
        for (const auto& v : chars[i])
            if (std::abs(v - Cx(1.0, 0.0)) > kTol) ok = false;
        if (ok) return (int)i;
    }
    throw std::logic_error("character table: trivial character missing");
}

Cx FiniteGroupRepTable::inner(int i, int j) const {
    Cx s = 0.0;
    for (int k = 0; k < classes(); ++k)
        s += (double)class_size[(size_t)k] * chars[(size_t)i][(size_t)k] *
             std::conj(chars[(size_t)j][(size_t)k]);
    return s / (double)order();
}

FiniteGroupRepTable character_table_of(std::vector<FqMat> elements,
                                       const std::vector<std::vector<FqMat>>& radicals) {
    FiniteGroupRepTable T;
    T.elements = std::move(elements);
    long N = (long)T.elements.size();
    if (N == 0) throw std::invalid_argument("character table: empty element list");

    std::unordered_map<std::string, int> idx;
    for (long i = 0; i < N; ++i) idx[mat_key(T.elements[(size_t)i])] = (int)i;
    auto lookup = [&](const FqMat& g) {
        auto it = idx.find(mat_key(g));
        if (it == idx.end()) throw std::invalid_argument("character table: set not closed");
        return it->second;
    };
    int d = T.elements[0].rows;
    int id_idx = lookup(FqMat::identity(T.elements[0].fld, d));
    std::vector<int> inv_idx((size_t)N);
    for (long i = 0; i < N; ++i)
        inv_idx[(size_t)i] = d == 0 ? (int)i : lookup(T.elements[(size_t)i].inverse());

    // conjugacy classes
    T.class_of.assign((size_t)N, -1);
    for (long i = 0; i < N; ++i) {
        if (T.class_of[(size_t)i] >= 0) continue;
        int c = (int)T.class_rep.size();
        T.class_rep.push_back((int)i);
        long size = 0;
        for (long h = 0; h < N; ++h) {
            int j = d == 0 ? (int)i
                           : lookup(T.elements[(size_t)h]
                                        .mul(T.elements[(size_t)i])
                                        .mul(T.elements[(size_t)inv_idx[(size_t)h]]));
            if (T.class_of[(size_t)j] < 0) {
                T.class_of[(size_t)j] = c;
                ++size;
            }
        }
        T.class_size.push_back(size);
    }
    int r = T.classes();
    int id_class = T.class_of[(size_t)id_idx];

    // class algebra structure constants: a[i](j,k) = #{u in C_i : u^-1 g_k in C_j}
    std::vector<Eigen::MatrixXd> Ms((size_t)r, Eigen::MatrixXd::Zero(r, r));
    for (int k = 0; k < r; ++k) {
        const FqMat& gk = T.elements[(size_t)T.class_rep[(size_t)k]];
        for (long u = 0; u < N; ++u) {
            int i = T.class_of[(size_t)u];
            int j = d == 0 ? id_class
                           : T.class_of[(size_t)lookup(
                                 T.elements[(size_t)inv_idx[(size_t)u]].mul(gk))];
            Ms[(size_t)i](j, k) += 1.0;
        }
    }

    // simultaneous eigenvectors of the commuting class matrices via a
    // generic linear combination (Burnside-Dixon)
    Eigen::MatrixXcd vecs;
    bool ok = false;
    for (unsigned long long seed = 1; seed <= 40 && !ok; ++seed) {
        Rng rng(seed * 0x9e3779b9ULL + 17);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(r, r);
        for (int i = 0; i < r; ++i) M += (double)rng.uniform(1, 997) * Ms[(size_t)i];
        Eigen::EigenSolver<Eigen::MatrixXd> es(M);
        // distinct eigenvalues needed for clean one-dimensional eigenspaces
        ok = true;
        for (int a = 0; a < r && ok; ++a)
            for (int b = a + 1; b < r && ok; ++b)
                if (std::abs(es.eigenvalues()(a) - es.eigenvalues()(b)) < 1e-7 * (1.0 + N)) ok = false;
        if (ok) vecs = es.eigenvectors();
    }
    if (!ok) throw std::logic_error("character table: eigenvalue separation failed");

    // each eigenvector, normalized at the identity class, lists the central
    // character values omega_k = |C_k| chi(g_k) / chi(1)
    std::vector<std::vector<Cx>> chars;
    std::vector<long> degrees;
    for (int c = 0; c < r; ++c) {
        Eigen::VectorXcd v = vecs.col(c);
        if (std::abs(v(id_class)) < 1e-9) throw std::logic_error("character table: bad eigenvector");
        v /= v(id_class);
        double s = 0.0;
        for (int k = 0; k < r; ++k) s += std::norm(v(k)) / (double)T.class_size[(size_t)k];
        double deg = std::sqrt((double)N / s);
        long di = (long)std::llround(deg);
        if (std::abs(deg - (double)di) > 1e-4) throw std::logic_error("character table: degree not integral");
        std::vector<Cx> chi((size_t)r);
        for (int k = 0; k < r; ++k) chi[(size_t)k] = v(k) * (double)di / (double)T.class_size[(size_t)k];
        chars.push_back(std::move(chi));
        degrees.push_back(di);
    }

    // deterministic ordering: by degree, then by values
    std::vector<int> order(r);
    for (int i = 0; i < r; ++i) order[(size_t)i] = i;
    auto snap = [](double x) { return std::llround(x * 1e5); };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (degrees[(size_t)a] != degrees[(size_t)b]) return degrees[(size_t)a] < degrees[(size_t)b];
        for (int k = 0; k < r; ++k) {
            auto ra = snap(chars[(size_t)a][(size_t)k].real()), rb = snap(chars[(size_t)b][(size_t)k].real());
            if (ra != rb) return ra < rb;
            auto ia = snap(chars[(size_t)a][(size_t)k].imag()), ib = snap(chars[(size_t)b][(size_t)k].imag());
            if (ia != ib) return ia < ib;
        }
        return false;
    });
    for (int i = 0; i < r; ++i) {
        T.chars.push_back(chars[(size_t)order[(size_t)i]]);
        T.degrees.push_back(degrees[(size_t)order[(size_t)i]]);
    }

    // orthonormality and the degree identity
    long sumsq = 0;
    for (int i = 0; i < r; ++i) {
        sumsq += T.degrees[(size_t)i] * T.degrees[(size_t)i];
        for (int j = 0; j < r; ++j) {
            Cx ip = T.inner(i, j);
            double want = i == j ? 1.0 : 0.0;
            if (std::abs(ip - want) > 1e-4) throw std::logic_error("character table: orthonormality failed");
        }
    }
    if (sumsq != N) throw std::logic_error("character table: degree sum identity failed");

    // cuspidality: zero character sum over every nontrivial unipotent radical
    T.cuspidal.assign((size_t)r, 1);
    for (const auto& U : radicals) {
        if (U.size() <= 1) continue;
        for (int i = 0; i < r; ++i) {
            Cx s = 0.0;
            for (const auto& u : U) s += T.chars[(size_t)i][(size_t)T.class_of[(size_t)lookup(u)]];
            if (std::abs(s) > kTol * (double)U.size()) T.cuspidal[(size_t)i] = 0;
        }
    }
    return T;
}

FiniteGroupRepTable character_table(const FiniteHermitianSpace& l, long cap) {
    auto elements = isometry_group(l, cap);
    const auto& F = *l.fld;
    int d = l.dim();
    auto flag = isotropic_flag(l);
    std::vector<std::vector<FqMat>> radicals;
    for (size_t k = 1; k <= flag.size(); ++k) {
        // I_k = span(flag[0..k)), its perp, and the elements acting trivially
        // on I_k, perp/I_k, and V/perp
        FqMat I = FqMat::zero(l.fld, d, (int)k);
        for (size_t c = 0; c < k; ++c)
            for (int i = 0; i < d; ++i) I.at(i, (int)c) = flag[c][(size_t)i];
        FqMat rows = FqMat::zero(l.fld, (int)k, d);
        for (size_t c = 0; c < k; ++c)
            for (int j = 0; j < d; ++j) {
                std::vector<FqEl> ej((size_t)d, F.zero());
                ej[(size_t)j] = F.one();
                rows.at((int)c, j) = herm_pair(l, flag[c], ej);
            }
        auto ker = rows.kernel();
        FqMat perp = FqMat::zero(l.fld, d, (int)ker.size());
        for (size_t c = 0; c < ker.size(); ++c)
            for (int i = 0; i < d; ++i) perp.at(i, (int)c) = ker[c][(size_t)i];
        std::vector<FqMat> U;
        for (const auto& g : elements) {
            bool ok = true;
            for (int c = 0; c < I.cols && ok; ++c) {
                std::vector<FqEl> gi((size_t)d, F.zero());
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        gi[(size_t)i] = F.add(gi[(size_t)i], F.mul(g.at(i, j), I.at(j, c)));
                for (int i = 0; i < d; ++i)
                    if (gi[(size_t)i] != I.at(i, c)) ok = false;  // fixes I_k pointwise
            }
            for (int c = 0; c < perp.cols && ok; ++c) {
                std::vector<FqEl> diff((size_t)d, F.zero());
                for (int i = 0; i < d; ++i) {
                    for (int j = 0; j < d; ++j)
                        diff[(size_t)i] = F.add(diff[(size_t)i], F.mul(g.at(i, j), perp.at(j, c)));
                    diff[(size_t)i] = F.sub(diff[(size_t)i], perp.at(i, c));
                }
                if (!in_col_span(I, diff)) ok = false;  // (g-1) perp inside I_k
            }
            for (int c = 0; c < d && ok; ++c) {
                std::vector<FqEl> diff((size_t)d, F.zero());
                for (int i = 0; i < d; ++i) diff[(size_t)i] = g.at(i, c);
                diff[(size_t)c] = F.sub(diff[(size_t)c], F.one());
                if (!in_col_span(perp, diff)) ok = false;  // (g-1) V inside perp
            }
            if (ok) U.push_back(g);
        }
        radicals.push_back(std::move(U));
    }
    return character_table_of(std::move(elements), radicals);
}

// ---- finite theta correspondence ----

FqMat FiniteDualPair::embed_left(const FqMat& g) const {
    const auto& F = *l.fld;
    int dl = l.dim(), dlp = lp.dim(), e = F.f;
    FqMat out = FqMat::zero(W.fld, W.dim, W.dim);
    for (int i = 0; i < dl; ++i)
        for (int j = 0; j < dlp; ++j)
            for (int a = 0; a < e; ++a) {
                int col = (i * dlp + j) * e + a;
                for (int k = 0; k < dl; ++k) {
                    FqEl z = F.mul(F.pow(F.gen(), a), g.at(k, i));
                    for (int b = 0; b < e; ++b) {
                        long coeff = b < (int)z.c.size() ? z.c[(size_t)b] : 0;
                        if (coeff != 0)
                            out.at((k * dlp + j) * e + b, col) = W.fld->from_int(coeff);
                    }
                }
            }
    return out;
}

FqMat FiniteDualPair::embed_right(const FqMat& gp) const {
    const auto& F = *l.fld;
    int dl = l.dim(), dlp = lp.dim(), e = F.f;
    FqMat out = FqMat::zero(W.fld, W.dim, W.dim);
    for (int i = 0; i < dl; ++i)
        for (int j = 0; j < dlp; ++j)
            for (int a = 0; a < e; ++a) {
                int col = (i * dlp + j) * e + a;
                for (int k = 0; k < dlp; ++k) {
                    FqEl z = F.mul(F.pow(F.gen(), a), gp.at(k, j));
                    for (int b = 0; b < e; ++b) {
                        long coeff = b < (int)z.c.size() ? z.c[(size_t)b] : 0;
                        if (coeff != 0)
                            out.at((i * dlp + k) * e + b, col) = W.fld->from_int(coeff);
                    }
                }
            }
    return out;
}

FiniteDualPair make_dual_pair(const FiniteHermitianSpace& l, const FiniteHermitianSpace& lp,
                              long long op_budget) {
    if (l.fld->p != lp.fld->p || l.fld->f != lp.fld->f || l.conj != lp.conj)
        throw std::invalid_argument("dual pair: mismatched coefficient fields");
    if (l.eps * lp.eps != -1)
        throw std::invalid_argument("dual pair: signs do not make the tensor symplectic");
    FiniteDualPair P;
    P.l = l;
    P.lp.fld = l.fld;  // single field instance throughout
    P.lp.conj = lp.conj;
    P.lp.eps = lp.eps;
    P.lp.gram = retag(lp.gram, l.fld);
    const auto& F = *l.fld;
    int dl = l.dim(), dlp = lp.dim(), e = F.f;
    int dW = dl * dlp * e;
    FqPtr prime = Fq::make(F.p, 1);
    FqMat form = FqMat::zero(prime, dW, dW);
    for (int i = 0; i < dl; ++i)
        for (int j = 0; j < dlp; ++j)
            for (int a = 0; a < e; ++a)
                for (int k = 0; k < dl; ++k)
                    for (int m = 0; m < dlp; ++m)
                        for (int b = 0; b < e; ++b) {
                            // Tr(tau(xi^a) xi^b <v_i, v_k> tau(<v'_j, v'_m>))
                            FqEl z = F.mul(fq_tau(P.l, F.pow(F.gen(), a)), F.pow(F.gen(), b));
                            z = F.mul(z, P.l.gram.at(i, k));
                            z = F.mul(z, fq_tau(P.lp, P.lp.gram.at(j, m)));
                            long tr = F.trace_to_prime(z);
                            form.at((i * dlp + j) * e + a, (k * dlp + m) * e + b) =
                                prime->from_int(tr);
                        }
    P.W = FiniteSymplecticSpace::make(prime, std::move(form));
    P.rep = build_weil(P.W, op_budget);
    return P;
}

std::vector<std::pair<int, long>> theta_decompose(const FiniteDualPair& pair,
                                                  const FiniteGroupRepTable& tab, int rho,
                                                  const FiniteGroupRepTable& tab_p) {
    if (rho < 0 || rho >= (int)tab.chars.size())
        throw std::invalid_argument("theta_decompose: character index out of range");
    int r = tab.classes(), rp = tab_p.classes();
    std::vector<CMat> left((size_t)r), right((size_t)rp);
    for (int c = 0; c < r; ++c)
        left[(size_t)c] = pair.rep.weil(pair.embed_left(tab.elements[(size_t)tab.class_rep[(size_t)c]]));
    for (int c = 0; c < rp; ++c)
        right[(size_t)c] = pair.rep.weil(
            pair.embed_right(retag(tab_p.elements[(size_t)tab_p.class_rep[(size_t)c]], pair.l.fld)));
    // trace table over class pairs
    std::vector<std::vector<Cx>> tr((size_t)r, std::vector<Cx>((size_t)rp));
    for (int c = 0; c < r; ++c)
        for (int cp = 0; cp < rp; ++cp)
            tr[(size_t)c][(size_t)cp] = (left[(size_t)c] * right[(size_t)cp]).trace();
    double NN = (double)tab.order() * (double)tab_p.order();
    std::vector<std::pair<int, long>> out;
    for (int j = 0; j < (int)tab_p.chars.size(); ++j) {
        Cx s = 0.0;
        for (int c = 0; c < r; ++c)
            for (int cp = 0; cp < rp; ++cp)
                s += (double)tab.class_size[(size_t)c] * (double)tab_p.class_size[(size_t)cp] *
                     tr[(size_t)c][(size_t)cp] * std::conj(tab.chars[(size_t)rho][(size_t)c]) *
                     std::conj(tab_p.chars[(size_t)j][(size_t)cp]);
        s /= NN;
        long m = std::lround(s.real());
        if (std::abs(s - (double)m) > 1e-3)
            throw std::logic_error("theta_decompose: non-integral multiplicity");
        if (m < 0) throw std::logic_error("theta_decompose: negative multiplicity");
        if (m > 0) out.emplace_back(j, m);
    }
    return out;
}

FirstOccurrence first_occurrence(const FiniteHermitianSpace& l, const FiniteGroupRepTable& tab,
                                 int rho, const FiniteHermitianSpace& aniso, int tower_cap,
                                 long long op_budget) {
    FiniteHermitianSpace cur = aniso;
    cur.gram = retag(aniso.gram, l.fld);
    cur.fld = l.fld;
    FirstOccurrence out;
    for (int k = 0; k <= tower_cap; ++k) {
        FiniteDualPair pair = make_dual_pair(l, cur, op_budget);
        FiniteGroupRepTable tab_p = character_table(cur);
        auto dec = theta_decompose(pair, tab, rho, tab_p);
        if (!dec.empty()) {
            out.found = true;
            out.planes = k;
            out.lp = cur;
            out.tab_p = std::move(tab_p);
            out.rho_p = dec.front().first;
            return out;
        }
        cur = add_hyperbolic(cur);
    }
    return out;
}

// ---- depth-zero lift ----

DepthZeroLift lift_depth_zero_datum(const DatumSkeleton& datum, int rho_l, int rho_lstar,
                                    const WittClass& Tp, int tower_cap, long long op_budget) {
    const SpacePtr& V = datum.x.space;
    const AlgebraPtr& alg = V->alg;
    if (alg->kind == AlgKind::ram_quad)
        throw std::invalid_argument(
            "depth-zero lift: ramified quadratic residues need the doubled model");
    Val dep = depth_of(datum.Gamma);
    if (dep.is_finite() && dep.v < Rat(0))
        throw std::invalid_argument("depth-zero lift: input has a positive-depth part");
    if (Tp.kind != alg->kind || Tp.eps != -V->eps || Tp.p != alg->D->p)
        throw std::invalid_argument("depth-zero lift: target class does not match the dual tower");

    DepthZeroLift out;
    out.res = good_lattice_residues(datum.x);
    out.l = {out.res.fld, out.res.conj, out.res.eps_l, out.res.form_l};
    out.lstar = {out.res.fld, out.res.conj, out.res.eps_lstar, out.res.form_lstar};
    out.tab_l = character_table(out.l);
    out.tab_lstar = character_table(out.lstar);
    if (rho_l < 0 || rho_l >= (int)out.tab_l.chars.size() || rho_lstar < 0 ||
        rho_lstar >= (int)out.tab_lstar.chars.size())
        throw std::invalid_argument("depth-zero lift: character index out of range");
    out.cuspidal = out.tab_l.cuspidal[(size_t)rho_l] == 1 &&
                   out.tab_lstar.cuspidal[(size_t)rho_lstar] == 1;

    int epsp = -V->eps;
    // anisotropic kernels of the two residue towers of the target class
    FiniteHermitianSpace lp_aniso{out.res.fld, out.res.conj, alg->eps_D * epsp,
                                  FqMat::zero(out.res.fld, 0, 0)};
    FiniteHermitianSpace lpstar_aniso{out.res.fld, out.res.conj, epsp,
                                      FqMat::zero(out.res.fld, 0, 0)};
    if (Tp.aniso_dim > 0) {
        SpacePtr Va = witt_representative(Tp, alg->D->prec);
        std::vector<Rat> grads;
        for (int i = 0; i < Va->n; ++i) {
            Val v = Va->gram.at(i, i).val();
            if (!v.is_finite()) throw std::logic_error("depth-zero lift: degenerate representative");
            grads.push_back(v.v / 2);
        }
        auto vert = SplitLatticeFunction::make(Va, Mat::identity(Va->alg, Va->n), grads, 2);
        auto resa = good_lattice_residues(vert);
        lp_aniso.gram = retag(resa.form_l, out.res.fld);
        lpstar_aniso.gram = retag(resa.form_lstar, out.res.fld);
        if (resa.eps_l != lp_aniso.eps || resa.eps_lstar != lpstar_aniso.eps)
            throw std::logic_error("depth-zero lift: residue sign mismatch");
    }

    FirstOccurrence fo_star = first_occurrence(out.l, out.tab_l, rho_l, lpstar_aniso, tower_cap,
                                               op_budget);
    if (!fo_star.found) throw std::logic_error("depth-zero lift: no occurrence in the dual tower");
    FirstOccurrence fo = first_occurrence(out.lstar, out.tab_lstar, rho_lstar, lp_aniso, tower_cap,
                                          op_budget);
    if (!fo.found) throw std::logic_error("depth-zero lift: no occurrence in the dual tower");
    out.lp = fo.lp;
    out.tab_lp = std::move(fo.tab_p);
    out.rho_lp = fo.rho_p;
    out.lpstar = fo_star.lp;
    out.tab_lpstar = std::move(fo_star.tab_p);
    out.rho_lpstar = fo_star.rho_p;

    out.target = upsilon(alg, epsp, out.lp.gram, out.lpstar.gram);
    if (out.lp.dim() + out.lpstar.dim() != out.target.space->n)
        throw std::logic_error("depth-zero lift: residue dimensions do not fill the target");
    if (!(witt_invariants(out.target.space) == Tp))
        throw std::logic_error("depth-zero lift: assembled space left the target tower");

    int np = out.target.space->n;
    SpectralElement zero = SpectralElement::make(
        out.target.space, Mat::zero(alg, np, np), Mat::identity(alg, np),
        {{alg->D, alg->D->zero(), np}});
    std::vector<std::complex<double>> rho_char;
    for (const auto& v : out.tab_lp.chars[(size_t)out.rho_lp]) rho_char.push_back(v);
    for (const auto& v : out.tab_lpstar.chars[(size_t)out.rho_lpstar]) rho_char.push_back(v);
    out.lifted = DatumSkeleton{out.target.fn, std::move(zero), datum.phi_label,
                               std::move(rho_char)};
    return out;
}

}  // namespace theta
