#include "theta/hermitian.hpp"

#include <algorithm>

namespace theta {

SpacePtr Space::make(AlgebraPtr alg, int eps, Mat gram) {
    if (eps != 1 && eps != -1) throw std::invalid_argument("space: eps must be +-1");
    if (gram.rows != gram.cols) throw std::invalid_argument("space: square gram required");
    auto V = std::make_shared<Space>();
    V->alg = alg;
    V->eps = eps;
    V->n = gram.rows;
    V->gram = gram;
    if (V->n > 0) {
        Mat herm = gram.tau_transpose().sub(eps > 0 ? gram : gram.neg());
        if (!herm.is_zero_at_precision())
            throw std::invalid_argument("space: gram is not eps-Hermitian");
        V->gram_inv = gram.inverse();
    } else {
        V->gram_inv = gram;
    }
    return V;
}

Elt Space::pair(const Mat& u, const Mat& v) const {
    return u.tau_transpose().mul(gram).mul(v).at(0, 0);
}

Mat Space::adjoint(const Mat& X) const {
    if (X.rows != n || X.cols != n) throw std::invalid_argument("adjoint: dimension mismatch");
    return gram_inv.mul(X.tau_transpose()).mul(gram);
}

bool Space::in_unitary_lie(const Mat& X) const {
    return X.add(adjoint(X)).is_zero_at_precision();
}

bool Space::in_unitary_group(const Mat& g) const {
    return adjoint(g).mul(g).sub(Mat::identity(alg, n)).is_zero_at_precision();
}

Elt Space::trace_form(const Mat& X, const Mat& Y) const {
    Elt t = alg->trace_to_base(X.mul(Y).trace());
    return t * alg->F->from_rational(1, 2);
}

SpacePtr twist_space(const SpacePtr& V, const Mat& gamma) {
    if (!V->in_unitary_lie(gamma)) throw std::invalid_argument("twist: gamma not skew-adjoint");
    Mat g2 = V->gram.mul(gamma);
    return Space::make(V->alg, -V->eps, g2);  // make() re-checks invertibility
}

// ---- square classes over Q_p ----

SquareClass square_class(const Elt& x) {
    auto tw = x.tower();
    if (tw->f != 1 || tw->e != 1) throw std::invalid_argument("square_class: base element required");
    Val v = x.val();
    if (!v.is_finite()) throw std::invalid_argument("square_class: nonzero element required");
    SquareClass c;
    c.vp = (int)(((v.v.numerator() % 2) + 2) % 2);
    c.sq = legendre_int(x.unit_coeffs()[0], tw->p);
    return c;
}

SquareClass square_class_of_int(long long n, long p) {
    if (n == 0) throw std::invalid_argument("square_class: nonzero required");
    int vp = 0;
    while (n % p == 0) {
        n /= p;
        vp ^= 1;
    }
    return {vp, legendre_int(n, p)};
}

SquareClass square_class_mul(SquareClass a, SquareClass b, long p) {
    (void)p;
    return {a.vp ^ b.vp, a.sq * b.sq};
}

long long square_class_rep(SquareClass c, long p) {
    long long u = 1;
    if (c.sq < 0) {
        // smallest nonsquare unit
        for (long long k = 2; k < p; ++k)
            if (legendre_int(k, p) == -1) {
                u = k;
                break;
            }
    }
    return c.vp ? u * p : u;
}

int hilbert_classes(SquareClass a, SquareClass b, long p) {
    return hilbert_symbol_qp(p, square_class_rep(a, p), 1, square_class_rep(b, p), 1);
}

// ---- Witt invariants ----

bool WittClass::operator==(const WittClass& o) const {
    if (kind != o.kind || eps != o.eps || p != o.p || aniso_dim != o.aniso_dim) return false;
    if (kind == AlgKind::split && eps == 1) return disc == o.disc && hasse == o.hasse;
    if (kind != AlgKind::split) return disc_norm == o.disc_norm;
    return true;  // symplectic
}

namespace {

// Congruence-diagonalize the form given by gram (with the space's tau and
// eps), returning the diagonal entries.  Entries that vanish at precision
// are treated as exact zeros.
std::vector<Elt> diagonalize_form(const AlgebraPtr& alg, int eps, Mat M) {
    int n = M.rows;
    auto& D = *alg->D;
    std::vector<Elt> out;
    std::vector<int> alive(n);
    for (int i = 0; i < n; ++i) alive[i] = i;
    // basis change tracked implicitly by updating the Gram matrix
    while (!alive.empty()) {
        // best diagonal pivot
        int bi = -1;
        Rat bv(0);
        for (int idx : alive) {
            const Elt& d = M.at(idx, idx);
            if (d.is_zero_at_precision()) continue;
            Rat v = d.val().v;
            if (bi < 0 || v < bv) {
                bi = idx;
                bv = v;
            }
        }
        if (bi < 0) {
            // all remaining diagonal entries vanish; fix one up using an
            // off-diagonal entry (possible since the residue char is odd)
            int oi = -1, oj = -1;
            Rat ov(0);
            for (int i : alive)
                for (int j : alive) {
                    if (i == j) continue;
                    const Elt& x = M.at(i, j);
                    if (x.is_zero_at_precision()) continue;
                    Rat v = x.val().v;
                    if (oi < 0 || v < ov) {
                        oi = i;
                        oj = j;
                        ov = v;
                    }
                }
            if (oi < 0) throw std::domain_error("witt: degenerate form");
            // v_oi <- v_oi + v_oj * c for c in {1, delta, 1+delta}
            std::vector<Elt> cands = {D.one()};
            if (alg->kind == AlgKind::unram_quad) {
                cands.push_back(D.omega());
                cands.push_back(D.one() + D.omega());
            } else if (alg->kind == AlgKind::ram_quad) {
                cands.push_back(D.uniformizer());
                cands.push_back(D.one() + D.uniformizer());
            }
            bool fixed = false;
            for (const Elt& c : cands) {
                // new diagonal entry at oi: tau(c) M_ji + M_ij c (+ c* M_jj c ~ 0)
                Elt nd = alg->tau(c) * M.at(oj, oi) + M.at(oi, oj) * c +
                         alg->tau(c) * M.at(oj, oj) * c + M.at(oi, oi);
                if (nd.is_zero_at_precision()) continue;
                // apply the basis change: row/col oi += c * row/col oj
                for (int k = 0; k < n; ++k) M.at(oi, k) = M.at(oi, k) + alg->tau(c) * M.at(oj, k);
                for (int k = 0; k < n; ++k) M.at(k, oi) = M.at(k, oi) + M.at(k, oj) * c;
                fixed = true;
                break;
            }
            if (!fixed) throw std::domain_error("witt: could not create a diagonal pivot");
            continue;
        }
        // clear row/column bi against the other alive indices
        Elt dinv = M.at(bi, bi).inv();
        for (int j : alive) {
            if (j == bi) continue;
            Elt c = dinv * M.at(bi, j);
            if (c.is_exact_zero() || c.is_zero_at_precision()) continue;
            // v_j <- v_j - v_bi * c
            for (int k = 0; k < n; ++k) M.at(k, j) = M.at(k, j) - M.at(k, bi) * c;
            for (int k = 0; k < n; ++k) M.at(j, k) = M.at(j, k) - alg->tau(c) * M.at(bi, k);
        }
        out.push_back(M.at(bi, bi));
        alive.erase(std::find(alive.begin(), alive.end(), bi));
    }
    (void)eps;
    return out;
}

SquareClass class_of_minus_one(long p) { return square_class_of_int(-1, p); }

// strip hyperbolic planes from symmetric invariants
void strip_symmetric(long p, int& n, SquareClass& disc, int& hasse) {
    auto isotropic = [&]() {
        if (n >= 5) return true;
        if (n <= 1) return false;
        if (n == 2) return disc == class_of_minus_one(p);
        if (n == 3) {
            SquareClass md = square_class_mul(class_of_minus_one(p), disc, p);
            return hasse == hilbert_classes(class_of_minus_one(p), md, p);
        }
        // n == 4
        if (!(disc == square_class_of_int(1, p))) return true;
        return hasse == hilbert_classes(class_of_minus_one(p), class_of_minus_one(p), p);
    };
    while (n >= 2 && isotropic()) {
        SquareClass d2 = square_class_mul(disc, class_of_minus_one(p), p);
        hasse = hasse * hilbert_classes(d2, class_of_minus_one(p), p);
        disc = d2;
        n -= 2;
    }
    if (n == 0) {
        disc = square_class_of_int(1, p);
        hasse = 1;
    }
}

// norm-class indicator of a base element class for the quadratic algebra
int norm_class(const AlgebraPtr& alg, SquareClass c) {
    long p = alg->F->p;
    SquareClass dd = (alg->kind == AlgKind::unram_quad)
                         ? SquareClass{0, -1}   // D = F(sqrt u)
                         : SquareClass{1, 1};   // D = F(sqrt p)
    return hilbert_classes(c, dd, p);
}

// a fixed tau-skew unit-scale for converting skew-Hermitian to Hermitian
Elt skew_scale(const AlgebraPtr& alg) {
    if (alg->kind == AlgKind::unram_quad) {
        Elt w = alg->D->omega();
        return w - alg->tau(w);
    }
    if (alg->kind == AlgKind::ram_quad) return alg->D->uniformizer();
    throw std::logic_error("skew_scale: quadratic algebra required");
}

}  // namespace

WittClass witt_invariants(const SpacePtr& V) {
    WittClass c;
    c.kind = V->alg->kind;
    c.eps = V->eps;
    c.p = V->alg->F->p;
    if (c.kind == AlgKind::split && V->eps == -1) {
        // symplectic: trivial Witt group; require even rank
        if (V->n % 2 != 0) throw std::invalid_argument("witt: odd symplectic rank");
        c.aniso_dim = 0;
        return c;
    }
    if (V->n == 0) {
        c.disc = square_class_of_int(1, c.p);
        return c;
    }
    if (c.kind == AlgKind::split) {
        auto diag = diagonalize_form(V->alg, V->eps, V->gram);
        std::vector<SquareClass> cls;
        for (auto& d : diag) cls.push_back(square_class(d));
        SquareClass disc = square_class_of_int(1, c.p);
        int hasse = 1;
        for (size_t i = 0; i < cls.size(); ++i) {
            disc = square_class_mul(disc, cls[i], c.p);
            for (size_t j = i + 1; j < cls.size(); ++j)
                hasse *= hilbert_classes(cls[i], cls[j], c.p);
        }
        int n = V->n;
        strip_symmetric(c.p, n, disc, hasse);
        c.aniso_dim = n;
        c.disc = disc;
        c.hasse = hasse;
        return c;
    }
    // Hermitian over quadratic D; convert skew-Hermitian by the fixed scale
    Mat G = V->gram;
    if (V->eps == -1) G = G.scale(skew_scale(V->alg));
    auto diag = diagonalize_form(V->alg, 1, G);
    SquareClass det = square_class_of_int(1, c.p);
    for (auto& d : diag) {
        auto coords = V->alg->coords_base(d);
        if (!coords[1].is_zero_at_precision())
            throw std::logic_error("witt: Hermitian diagonal entry not tau-fixed");
        det = square_class_mul(det, square_class(coords[0]), c.p);
    }
    int n = V->n;
    // strip: rank >= 3 always isotropic; rank 2 isotropic iff -det is a norm
    while (n >= 3 ||
           (n == 2 && norm_class(V->alg, square_class_mul(det, class_of_minus_one(c.p), c.p)) == 1)) {
        det = square_class_mul(det, class_of_minus_one(c.p), c.p);
        n -= 2;
    }
    c.aniso_dim = n;
    c.disc_norm = (n == 0) ? 1 : norm_class(V->alg, det);
    if (n == 2) {
        // rank-2 anisotropic kernels all share det = -r mod norms
        c.disc_norm = norm_class(V->alg, det);
    }
    return c;
}

namespace {

// Diagonal entries of the dictionary representative, built on a caller
// supplied algebra so classes over separate instances can be combined.
std::vector<Elt> representative_diag(const WittClass& c, const AlgebraPtr& alg) {
    auto& D = *alg->D;
    auto diag_space = [&](const std::vector<Elt>& d) {
        Mat G = Mat::zero(alg, (int)d.size(), (int)d.size());
        for (size_t i = 0; i < d.size(); ++i) G.at((int)i, (int)i) = d[i];
        return Space::make(alg, c.eps, G);
    };
    if (c.kind == AlgKind::split && c.eps == -1) {
        if (c.aniso_dim != 0) throw std::invalid_argument("witt rep: symplectic class is trivial");
        return {};
    }
    if (c.kind == AlgKind::split) {
        if (c.aniso_dim == 0) return {};
        // dictionary search over the four square classes
        long p = c.p;
        std::vector<SquareClass> reps = {{0, 1}, {0, -1}, {1, 1}, {1, -1}};
        std::vector<int> pick(c.aniso_dim, 0);
        while (true) {
            SquareClass disc = square_class_of_int(1, p);
            int hasse = 1;
            for (int i = 0; i < c.aniso_dim; ++i) {
                disc = square_class_mul(disc, reps[pick[i]], p);
                for (int j = i + 1; j < c.aniso_dim; ++j)
                    hasse *= hilbert_classes(reps[pick[i]], reps[pick[j]], p);
            }
            if (disc == c.disc && hasse == c.hasse) {
                std::vector<Elt> d;
                for (int i = 0; i < c.aniso_dim; ++i)
                    d.push_back(D.from_int(square_class_rep(reps[pick[i]], p)));
                // the dictionary entry must itself be anisotropic
                WittClass check = witt_invariants(diag_space(d));
                if (check == c) return d;
            }
            int k = c.aniso_dim - 1;
            while (k >= 0 && pick[k] == 3) pick[k--] = 0;
            if (k < 0) break;
            ++pick[k];
        }
        throw std::logic_error("witt rep: dictionary search failed");
    }
    // Hermitian over quadratic D
    Elt one = D.one();
    Elt r = (c.kind == AlgKind::unram_quad) ? D.from_int(D.p)
                                            : D.from_int(square_class_rep({0, -1}, c.p));
    std::vector<Elt> d;
    if (c.aniso_dim == 1) {
        d = {c.disc_norm == 1 ? one : r};
    } else if (c.aniso_dim == 2) {
        d = {one, -r};
    } else if (c.aniso_dim != 0) {
        throw std::invalid_argument("witt rep: Hermitian anisotropic dim <= 2");
    }
    if (c.eps == -1) {
        Elt s = skew_scale(alg);
        for (auto& x : d) x = x * s.inv();
    }
    WittClass check = witt_invariants(diag_space(d));
    if (!(check == c)) throw std::logic_error("witt rep: representative mismatch");
    return d;
}

}  // namespace

SpacePtr witt_representative(const WittClass& c, int prec) {
    AlgebraPtr alg = Algebra::make(c.kind, c.p, prec);
    auto d = representative_diag(c, alg);
    Mat G = Mat::zero(alg, (int)d.size(), (int)d.size());
    for (size_t i = 0; i < d.size(); ++i) G.at((int)i, (int)i) = d[i];
    return Space::make(alg, c.eps, G);
}

WittClass witt_add(const WittClass& a, const WittClass& b, int prec) {
    if (a.kind != b.kind || a.eps != b.eps || a.p != b.p)
        throw std::invalid_argument("witt add: incompatible classes");
    AlgebraPtr alg = Algebra::make(a.kind, a.p, prec);
    auto da = representative_diag(a, alg);
    auto db = representative_diag(b, alg);
    int n = (int)(da.size() + db.size());
    Mat G = Mat::zero(alg, n, n);
    for (size_t i = 0; i < da.size(); ++i) G.at((int)i, (int)i) = da[i];
    for (size_t i = 0; i < db.size(); ++i) {
        int k = (int)(da.size() + i);
        G.at(k, k) = db[i];
    }
    return witt_invariants(Space::make(alg, a.eps, G));
}

WittClass witt_negate(const WittClass& a, int prec) {
    SpacePtr ra = witt_representative(a, prec);
    return witt_invariants(Space::make(ra->alg, ra->eps, ra->gram.neg()));
}

WittClass witt_subtract(const WittClass& a, const WittClass& b, int prec) {
    return witt_add(a, witt_negate(b, prec), prec);
}

bool isometric(const SpacePtr& V1, const SpacePtr& V2) {
    if (V1->alg->kind != V2->alg->kind || V1->eps != V2->eps || V1->n != V2->n ||
        V1->alg->F->p != V2->alg->F->p)
        return false;
    return witt_invariants(V1) == witt_invariants(V2);
}

}  // namespace theta
