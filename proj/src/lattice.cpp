#include "theta/lattice.hpp"

#include <algorithm>
#include <numeric>

namespace theta {

namespace {

Mat hstack(const Mat& a, const Mat& b) {
    if (a.cols == 0) return b;
    if (b.cols == 0) return a;
    Mat r = Mat::zero(a.alg, a.rows, a.cols + b.cols);
    r.paste(0, 0, a);
    r.paste(0, a.cols, b);
    return r;
}

Mat scale_columns_pi(const Mat& a, const std::vector<long long>& k) {
    Mat r = a;
    for (int j = 0; j < r.cols; ++j)
        for (int i = 0; i < r.rows; ++i) r.at(i, j) = r.at(i, j).mul_pi_power(k[j]);
    return r;
}

}  // namespace

Mat lattice_column_basis(const Mat& gens) {
    Mat M = gens;
    int n = M.rows, k = M.cols;
    std::vector<bool> row_done(n, false);
    std::vector<bool> col_used(k, false);
    std::vector<std::pair<int, int>> pivots;  // (row, col) in selection order
    while (true) {
        int bi = -1, bj = -1;
        Rat bv(0);
        for (int i = 0; i < n; ++i) {
            if (row_done[i]) continue;
            for (int j = 0; j < k; ++j) {
                if (col_used[j]) continue;
                const Elt& x = M.at(i, j);
                if (x.is_zero_at_precision()) continue;
                Rat v = x.val().v;
                if (bi < 0 || v < bv) {
                    bi = i;
                    bj = j;
                    bv = v;
                }
            }
        }
        if (bi < 0) break;
        Elt pinv = M.at(bi, bj).inv();
        for (int j = 0; j < k; ++j) {
            if (col_used[j] || j == bj) continue;
            Elt c = M.at(bi, j) * pinv;
            if (c.is_exact_zero() || c.is_zero_at_precision()) continue;
            for (int i = 0; i < n; ++i) M.at(i, j) = M.at(i, j) - M.at(i, bj) * c;
        }
        row_done[bi] = true;
        col_used[bj] = true;
        pivots.push_back({bi, bj});
    }
    std::sort(pivots.begin(), pivots.end());
    Mat out = Mat::zero(M.alg, n, (int)pivots.size());
    for (size_t t = 0; t < pivots.size(); ++t)
        for (int i = 0; i < n; ++i) out.at(i, (int)t) = M.at(i, pivots[t].second);
    return out;
}

bool lattice_contains(const Mat& basis, const Mat& w) { return lattice_includes(basis, w); }

bool lattice_includes(const Mat& basis, const Mat& sub) {
    if (basis.rows != basis.cols) throw std::invalid_argument("lattice: full-rank basis required");
    Mat C = mat_solve(basis, sub);
    for (const Elt& x : C.a)
        if (!x.val_at_least(Rat(0))) return false;
    return true;
}

bool lattice_equal(const Mat& b1, const Mat& b2) {
    return lattice_includes(b1, b2) && lattice_includes(b2, b1);
}

Mat lattice_sum(const Mat& a, const Mat& b) { return lattice_column_basis(hstack(a, b)); }

Mat lattice_intersect(const Mat& a, const Mat& b) {
    // (A cap B) = (A' + B')' for the standard-pairing module duals
    Mat ad = a.inverse().transpose();
    Mat bd = b.inverse().transpose();
    return lattice_sum(ad, bd).inverse().transpose();
}

Mat lattice_form_dual(const SpacePtr& V, const Mat& basis) {
    // L* = {v : <v, L> in p_D} = tau((gram basis)^{-T}) varpi_D
    Mat GM = V->gram.mul(basis);
    return GM.inverse().tau_transpose().mul_pi_power(1);
}

Mat kron(const Mat& A, const Mat& B) {
    Mat K = Mat::zero(A.alg, A.rows * B.rows, A.cols * B.cols);
    for (int i1 = 0; i1 < A.rows; ++i1)
        for (int j1 = 0; j1 < A.cols; ++j1)
            for (int i2 = 0; i2 < B.rows; ++i2)
                for (int j2 = 0; j2 < B.cols; ++j2)
                    K.at(i1 * B.rows + i2, j1 * B.cols + j2) = A.at(i1, j1) * B.at(i2, j2);
    return K;
}

// ---- split lattice functions ----

SplitLatticeFunction SplitLatticeFunction::make(SpacePtr space, Mat basis,
                                                std::vector<Rat> gradings, long m) {
    if (!space) throw std::invalid_argument("lattice function: space required");
    if (basis.rows != space->n || basis.cols != space->n)
        throw std::invalid_argument("lattice function: basis must be n x n");
    if ((int)gradings.size() != space->n)
        throw std::invalid_argument("lattice function: one grading per basis vector");
    if (m <= 0) throw std::invalid_argument("lattice function: positive denominator required");
    for (const Rat& c : gradings)
        if ((c * m).denominator() != 1)
            throw std::invalid_argument("lattice function: grading outside (1/m)Z");
    basis.inverse();  // throws when singular at precision
    SplitLatticeFunction sL;
    sL.space = std::move(space);
    sL.basis = std::move(basis);
    sL.gradings = std::move(gradings);
    sL.m = m;
    return sL;
}

long long SplitLatticeFunction::pi_exp(int i, const Rat& t) const {
    return rat_ceil((t - gradings[i]) * space->alg->e_D);
}

Mat SplitLatticeFunction::lattice_at(const Rat& t) const {
    std::vector<long long> k(space->n);
    for (int i = 0; i < space->n; ++i) k[i] = pi_exp(i, t);
    return scale_columns_pi(basis, k);
}

Mat SplitLatticeFunction::lattice_just_after(const Rat& t) const {
    std::vector<long long> k(space->n);
    for (int i = 0; i < space->n; ++i) k[i] = rat_floor((t - gradings[i]) * space->alg->e_D) + 1;
    return scale_columns_pi(basis, k);
}

std::vector<Rat> SplitLatticeFunction::jumps_in_period() const {
    int e = space->alg->e_D;
    std::vector<Rat> js;
    for (const Rat& c : gradings) {
        // representative of c modulo 1/e in the window (0, 1/e]
        Rat r = c - Rat(rat_ceil(c * e) - 1, e);
        if (std::find(js.begin(), js.end(), r) == js.end()) js.push_back(r);
    }
    std::sort(js.begin(), js.end());
    return js;
}

SplitLatticeFunction dual_lattice_function(const SplitLatticeFunction& sL) {
    Mat Bd = sL.space->gram.mul(sL.basis).inverse().tau_transpose();
    std::vector<Rat> g;
    for (const Rat& c : sL.gradings) g.push_back(-c);
    return SplitLatticeFunction::make(sL.space, Bd, g, sL.m);
}

bool is_self_dual(const SplitLatticeFunction& sL, const std::vector<Rat>& samples) {
    std::vector<Rat> ts = sL.jumps_in_period();
    for (const Rat& t : samples)
        if (std::find(ts.begin(), ts.end(), t) == ts.end()) ts.push_back(t);
    for (const Rat& t : ts) {
        Mat dual = lattice_form_dual(sL.space, sL.lattice_at(t));
        if (!lattice_equal(dual, sL.lattice_just_after(-t))) return false;
    }
    return true;
}

TensorLattice tensor_lattice(const SplitLatticeFunction& sL, const SplitLatticeFunction& sLp) {
    if (sL.space->alg != sLp.space->alg)
        throw std::invalid_argument("tensor lattice: algebra mismatch");
    TensorLattice T;
    T.left = sL;
    T.right = sLp;
    Mat G = kron(sL.space->gram, sLp.space->gram);
    T.tensor_space = Space::make(sL.space->alg, sL.space->eps * sLp.space->eps, G);
    std::vector<Rat> g;
    for (const Rat& c : sL.gradings)
        for (const Rat& cp : sLp.gradings) g.push_back(c + cp);
    long m = std::lcm(sL.m, sLp.m);
    T.fn = SplitLatticeFunction::make(T.tensor_space, kron(sL.basis, sLp.basis), g, m);
    return T;
}

bool moy_prasad_member(const Mat& X, const SplitLatticeFunction& sL, const Rat& t, MPMode mode) {
    int n = sL.space->n;
    int e = sL.space->alg->e_D;
    if (mode == MPMode::group) {
        if (t < 0) throw std::invalid_argument("moy-prasad: group depth must be >= 0");
        if (!sL.space->in_unitary_group(X)) return false;
        if (t > 0)
            return moy_prasad_member(X.sub(Mat::identity(X.alg, n)), sL, t, MPMode::algebra);
        // depth zero: g stabilizes every lattice in the chain
        Mat Xi = X.inverse();
        for (const Rat& u : sL.jumps_in_period()) {
            Mat Lu = sL.lattice_at(u);
            if (!lattice_includes(Lu, X.mul(Lu)) || !lattice_includes(Lu, Xi.mul(Lu)))
                return false;
        }
        return true;
    }
    Mat Y = mat_solve(sL.basis, X.mul(sL.basis));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Rat bound(rat_ceil((t + sL.gradings[j] - sL.gradings[i]) * e), e);
            if (!Y.at(i, j).val_at_least(bound)) return false;
        }
    return true;
}

Rat moy_prasad_grade(const Mat& X, const SplitLatticeFunction& sL) {
    Mat Y = mat_solve(sL.basis, X.mul(sL.basis));
    bool found = false;
    Rat best(0);
    for (int i = 0; i < sL.space->n; ++i)
        for (int j = 0; j < sL.space->n; ++j) {
            const Elt& y = Y.at(i, j);
            if (y.is_zero_at_precision()) continue;
            Rat v = y.val().v + sL.gradings[i] - sL.gradings[j];
            if (!found || v < best) {
                best = v;
                found = true;
            }
        }
    if (!found) throw precision_exhausted("moy-prasad grade: element vanishes at precision");
    return best;
}

// ---- good lattices and residues ----

namespace {

FqEl residue_or_zero(const Elt& x) {
    if (x.is_exact_zero() || x.is_zero_at_precision()) {
        return x.tower()->residue->zero();
    }
    return x.residue_image();
}

FqMat residue_matrix(const Mat& C, const FqPtr& fld) {
    FqMat R = FqMat::zero(fld, C.rows, C.cols);
    for (int i = 0; i < C.rows; ++i)
        for (int j = 0; j < C.cols; ++j) R.at(i, j) = residue_or_zero(C.at(i, j));
    return R;
}

// Columns of `big` (mod p_D, in the coordinates of the full-rank lattice M)
// extending the span of `small` to the residue image of big; returns the
// selected column indices.
std::vector<int> residue_complement(const FqMat& small, const FqMat& big) {
    std::vector<int> picked;
    FqMat cur = small;
    int base = small.rank();
    for (int j = 0; j < big.cols; ++j) {
        FqMat trial = FqMat::zero(big.fld, big.rows, cur.cols + 1);
        for (int i = 0; i < big.rows; ++i) {
            for (int c = 0; c < cur.cols; ++c) trial.at(i, c) = cur.at(i, c);
            trial.at(i, cur.cols) = big.at(i, j);
        }
        if (trial.rank() > base) {
            picked.push_back(j);
            cur = trial;
            ++base;
        }
    }
    return picked;
}

}  // namespace

GoodLatticeResidues good_lattice_residues(const SplitLatticeFunction& sL) {
    const SpacePtr& V = sL.space;
    const AlgebraPtr& alg = V->alg;
    if (sL.jumps_in_period().size() > 2)
        throw std::invalid_argument("good lattice: more than two jumps per period");
    GoodLatticeResidues R;
    R.alg = alg;
    R.L = sL.lattice_just_after(Rat(0));
    R.Lstar = lattice_form_dual(V, R.L);
    if (!lattice_includes(R.Lstar, R.L) || !lattice_includes(R.L, R.Lstar.mul_pi_power(1)))
        throw std::invalid_argument("good lattice: L* varpi <= L <= L* fails");
    R.fld = alg->residue_field();
    R.conj = (alg->f_D == 2);
    R.eps_l = alg->eps_D * V->eps;
    R.eps_lstar = V->eps;

    // ell = L / L* varpi: complement of the residue image of L* varpi in L
    {
        FqMat zero_cols = FqMat::zero(R.fld, V->n, 0);
        FqMat sub = residue_matrix(mat_solve(R.L, R.Lstar.mul_pi_power(1)), R.fld);
        FqMat full = FqMat::identity(R.fld, V->n);
        auto idx = residue_complement(sub, full);
        (void)zero_cols;
        R.dim_l = (int)idx.size();
        R.lifts_l = Mat::zero(alg, V->n, R.dim_l);
        for (int t = 0; t < R.dim_l; ++t)
            for (int i = 0; i < V->n; ++i) R.lifts_l.at(i, t) = R.L.at(i, idx[t]);
        R.form_l = FqMat::zero(R.fld, R.dim_l, R.dim_l);
        for (int a = 0; a < R.dim_l; ++a)
            for (int b = 0; b < R.dim_l; ++b) {
                Mat u = R.lifts_l.submatrix(0, a, V->n, 1);
                Mat v = R.lifts_l.submatrix(0, b, V->n, 1);
                R.form_l.at(a, b) = alg->scaled_residue(V->pair(u, v), 1);
            }
    }
    // ell* = L* / L
    {
        FqMat sub = residue_matrix(mat_solve(R.Lstar, R.L), R.fld);
        FqMat full = FqMat::identity(R.fld, V->n);
        auto idx = residue_complement(sub, full);
        R.dim_lstar = (int)idx.size();
        R.lifts_lstar = Mat::zero(alg, V->n, R.dim_lstar);
        for (int t = 0; t < R.dim_lstar; ++t)
            for (int i = 0; i < V->n; ++i) R.lifts_lstar.at(i, t) = R.Lstar.at(i, idx[t]);
        R.form_lstar = FqMat::zero(R.fld, R.dim_lstar, R.dim_lstar);
        for (int a = 0; a < R.dim_lstar; ++a)
            for (int b = 0; b < R.dim_lstar; ++b) {
                Mat u = R.lifts_lstar.submatrix(0, a, V->n, 1);
                Mat v = R.lifts_lstar.submatrix(0, b, V->n, 1);
                R.form_lstar.at(a, b) = alg->scaled_residue(V->pair(u, v), 0);
            }
    }
    return R;
}

namespace {

// entrywise Teichmueller lift of a residue matrix into the D-tower
Mat teich_lift(const AlgebraPtr& alg, const FqMat& M) {
    Mat L = Mat::zero(alg, M.rows, M.cols);
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) L.at(i, j) = alg->D->teichmuller(M.at(i, j));
    return L;
}

bool residue_hermitian(const FqMat& M, bool conj, int eps) {
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) {
            FqEl x = M.at(j, i);
            if (conj) x = M.fld->frobenius(x);
            FqEl want = eps > 0 ? M.at(i, j) : M.fld->neg(M.at(i, j));
            if (!(M.fld->sub(x, want) == M.fld->zero())) return false;
        }
    return true;
}

}  // namespace

UpsilonResult upsilon(const AlgebraPtr& alg, int eps, const FqMat& l_form,
                      const FqMat& lstar_form) {
    bool conj = (alg->f_D == 2);
    if (l_form.rows != l_form.cols || lstar_form.rows != lstar_form.cols)
        throw std::invalid_argument("upsilon: square residue forms required");
    if (!residue_hermitian(l_form, conj, alg->eps_D * eps) ||
        !residue_hermitian(lstar_form, conj, eps))
        throw std::invalid_argument("upsilon: residue pair not realizable for this sign");
    if ((l_form.rows > 0 && l_form.rank() < l_form.rows) ||
        (lstar_form.rows > 0 && lstar_form.rank() < lstar_form.rows))
        throw std::invalid_argument("upsilon: residue forms must be nondegenerate");
    int nl = l_form.rows, ns = lstar_form.rows, n = nl + ns;
    Mat G = Mat::zero(alg, n, n);
    G.paste(0, 0, teich_lift(alg, lstar_form));
    G.paste(ns, ns, teich_lift(alg, l_form).mul_pi_power(1));
    UpsilonResult U;
    U.space = Space::make(alg, eps, G);
    std::vector<Rat> g(n, Rat(0));
    for (int i = ns; i < n; ++i) g[i] = Rat(1, 2 * alg->e_D);
    U.fn = SplitLatticeFunction::make(U.space, Mat::identity(alg, n), g, 2 * alg->e_D);
    return U;
}

// ---- module functions and the self-dual hull ----

Mat ModuleFunction::at(const Rat& t) const {
    int e = space->alg->e_D;
    long long k = rat_ceil(t * e) - 1;  // t - k/e lies in (0, 1/e]
    Rat t0 = t - Rat(k, e);
    for (size_t j = 0; j < jumps.size(); ++j)
        if (jumps[j] >= t0) return gens[j].mul_pi_power(k);
    // above the last jump of the window: the next period's first module
    return gens[0].mul_pi_power(k + 1);
}

bool module_pairing_bound(const ModuleFunction& N) {
    int e = N.space->alg->e_D;
    std::vector<Rat> ts;
    for (const Rat& t : N.jumps)
        for (int d = -1; d <= 1; ++d) ts.push_back(t + Rat(d, e));
    for (const Rat& t1 : ts)
        for (const Rat& t2 : ts) {
            Mat A = N.at(t1), B = N.at(t2);
            Rat bound(rat_ceil((t1 + t2 + Rat(1, N.m)) * e), e);
            for (int a = 0; a < A.cols; ++a)
                for (int b = 0; b < B.cols; ++b) {
                    Elt v = N.space->pair(A.submatrix(0, a, A.rows, 1),
                                          B.submatrix(0, b, B.rows, 1));
                    if (!v.val_at_least(bound)) return false;
                }
        }
    return true;
}

namespace {

bool lattice_is_good(const SpacePtr& V, const Mat& R) {
    Mat Rs = lattice_form_dual(V, R);
    return lattice_includes(Rs, R) && lattice_includes(R, Rs.mul_pi_power(1));
}

// smallest good lattice diagonal in ref_basis containing the module N0
Mat smallest_good_lattice(const SpacePtr& V, const Mat& ref_basis, const Mat& N0) {
    int n = V->n, e = V->alg->e_D;
    std::vector<long long> k(n, (long long)e);  // cap for rows N0 does not touch
    if (N0.cols > 0) {
        Mat C = mat_solve(ref_basis, N0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < C.cols; ++j) {
                const Elt& x = C.at(i, j);
                if (x.is_zero_at_precision()) continue;
                Rat v = x.val().v * e;
                k[i] = std::min(k[i], (long long)rat_floor(v));
            }
    }
    // search small enlargements ordered by total decrement, then
    // lexicographically, for the first good lattice
    for (int total = 0; total <= 3 * n; ++total) {
        std::vector<long long> d(n, 0);
        while (true) {
            long long s = std::accumulate(d.begin(), d.end(), 0LL);
            if (s == total) {
                std::vector<long long> kk(n);
                for (int i = 0; i < n; ++i) kk[i] = k[i] - d[i];
                Mat R = scale_columns_pi(ref_basis, kk);
                if (lattice_is_good(V, R)) return R;
            }
            int i = n - 1;
            while (i >= 0 && d[i] == 3) d[i--] = 0;
            if (i < 0) break;
            ++d[i];
        }
    }
    throw std::domain_error("no good lattice found near the reference basis");
}

}  // namespace

SplitLatticeFunction selfdual_from_module_function(const ModuleFunction& N,
                                                   const Mat& ref_basis) {
    const SpacePtr& V = N.space;
    int e = V->alg->e_D, n = V->n;
    long m = N.m;
    if (m % e != 0)
        throw std::invalid_argument("module function: denominator must respect ramification");
    if (!module_pairing_bound(N))
        throw std::invalid_argument("module function: pairing bound hypothesis fails");

    Mat R = smallest_good_lattice(V, ref_basis, N.at(Rat(0)));
    Mat Rstar = lattice_form_dual(V, R);

    // lattices at i/(2m) for i in the window (-m/e, m/e]
    long M0 = m / e;
    std::vector<Rat> ts;
    std::vector<Mat> Ls;
    for (long i = -M0 + 1; i <= M0; ++i) {
        Rat t(i, 2 * m);
        Mat Li;
        if (i <= 0) {
            Li = lattice_sum(N.at(Rat(i - 1, 2 * m)), Rstar);
        } else {
            // (N_{-i/2m})* cap R = (N_{-i/2m} + R*)*
            Li = lattice_form_dual(V, Ls[(size_t)(M0 - i)]);
        }
        ts.push_back(t);
        Ls.push_back(Li);
    }
    // sanity: decreasing chain with period drop into L varpi
    for (size_t j = 0; j + 1 < Ls.size(); ++j)
        if (!lattice_includes(Ls[j], Ls[j + 1]))
            throw std::domain_error("module function: constructed chain is not decreasing");
    if (!lattice_includes(Ls.back(), Ls.front().mul_pi_power(1)))
        throw std::domain_error("module function: constructed chain breaks periodicity");

    // adapted basis: extend residue bases from the deepest lattice upward
    Mat L = Ls.front();
    FqPtr fld = V->alg->residue_field();
    FqMat chosen = FqMat::zero(fld, n, 0);
    std::vector<Mat> lifts;
    std::vector<Rat> grads;
    for (int j = (int)Ls.size() - 1; j >= 0; --j) {
        FqMat img = residue_matrix(mat_solve(L, Ls[j]), fld);
        auto idx = residue_complement(chosen, img);
        for (int c : idx) {
            lifts.push_back(Ls[j].submatrix(0, c, n, 1));
            grads.push_back(ts[j]);
            FqMat next = FqMat::zero(fld, n, chosen.cols + 1);
            for (int i = 0; i < n; ++i) {
                for (int cc = 0; cc < chosen.cols; ++cc) next.at(i, cc) = chosen.at(i, cc);
                next.at(i, chosen.cols) = img.at(i, c);
            }
            chosen = next;
        }
    }
    if ((int)lifts.size() != n)
        throw std::domain_error("module function: adapted basis extraction failed");
    Mat basis = Mat::zero(V->alg, n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) basis.at(i, j) = lifts[j].at(i, 0);
    return SplitLatticeFunction::make(V, basis, grads, 2 * m);
}

}  // namespace theta
