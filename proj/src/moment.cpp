#include "theta/moment.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace theta {

namespace {

bool elt_zero(const Elt& x) { return x.is_exact_zero() || x.is_zero_at_precision(); }

long long lcm_ll(long long a, long long b) { return a / std::gcd(a, b) * b; }

FqEl residue_or_zero(const Elt& x, const FqPtr& fld) {
    if (elt_zero(x)) return fld->zero();
    return x.residue_image();
}

Mat commutator(const Mat& A, const Mat& B) { return A.mul(B).sub(B.mul(A)); }

// F-linear combination of matrices with base-tower coefficients.
Mat combine(const std::vector<Mat>& mats, const std::vector<Elt>& coeff) {
    Mat acc = Mat::zero(mats[0].alg, mats[0].rows, mats[0].cols);
    for (size_t k = 0; k < mats.size(); ++k)
        if (!elt_zero(coeff[k])) acc = acc.add(mats[k].scale(mats[0].alg->embed_base(coeff[k])));
    return acc;
}

Mat combine_residue(const std::vector<Mat>& mats, const std::vector<FqEl>& coeff) {
    std::vector<Elt> c;
    for (const FqEl& x : coeff) c.push_back(mats[0].alg->F->from_int(x.c[0]));
    return combine(mats, c);
}

// The F-basis of unit matrices dual to Mat::flatten coordinates.
std::vector<Mat> unit_matrices(const AlgebraPtr& alg, int rows, int cols) {
    int K = rows * cols * alg->dim_F();
    std::vector<Elt> v((size_t)K, alg->F->zero());
    std::vector<Mat> out;
    for (int k = 0; k < K; ++k) {
        v[k] = alg->F->one();
        out.push_back(Mat::unflatten(alg, rows, cols, v));
        v[k] = alg->F->zero();
    }
    return out;
}

std::vector<Mat> kernel_mats(const std::vector<Mat>& span,
                             const std::vector<std::vector<Elt>>& coeffs) {
    std::vector<Mat> out;
    for (const auto& c : coeffs) out.push_back(combine(span, c));
    return out;
}

// The filtration of Hom(V_src, V_tgt) by a pair of split lattice functions:
// X at level t iff X sL_u <= sL'_{u+t} for every u.  In the adapted bases
// this is the entrywise bound val(Y_ij) >= ceil(e (t + c_j - c'_i)) / e.
struct HomFilt {
    const SplitLatticeFunction* tgt;
    const SplitLatticeFunction* src;

    const AlgebraPtr& alg() const { return tgt->space->alg; }

    long long bound(int i, int j, const Rat& t) const {
        return rat_ceil((t + src->gradings[j] - tgt->gradings[i]) * alg()->e_D);
    }
    Mat conj(const Mat& X) const { return mat_solve(tgt->basis, X.mul(src->basis)); }
    // smallest u > t at which the entrywise bounds change
    Rat next_jump(const Rat& t) const {
        int e = alg()->e_D;
        bool found = false;
        Rat best(0);
        for (const Rat& ci : tgt->gradings)
            for (const Rat& cj : src->gradings) {
                Rat cd = cj - ci;
                Rat u = Rat(rat_floor((t + cd) * e) + 1, e) - cd;
                if (!found || u < best) {
                    best = u;
                    found = true;
                }
            }
        if (!found) throw std::invalid_argument("filtration: empty grading data");
        return best;
    }
};

long long min_val_or_throw(const std::vector<Elt>& v) {
    bool found = false;
    long long mv = 0;
    for (const Elt& x : v) {
        if (elt_zero(x)) continue;
        long long w = x.val().v.numerator();
        if (!found || w < mv) {
            mv = w;
            found = true;
        }
    }
    if (!found) throw precision_exhausted("lattice coordinates: column vanishes at precision");
    return mv;
}

// o-basis, as coefficient vectors over F with respect to `span`, of the
// lattice {c : sum_k c_k span_k lies in the level-t filtration}.  Standard
// saturation: scale the coordinate columns integral and primitive, then
// divide residue relations by p until the residues are independent.
std::vector<std::vector<Elt>> lattice_coords(const std::vector<Mat>& span, const HomFilt& filt,
                                             const Rat& t) {
    if (span.empty()) return {};
    const AlgebraPtr& alg = span[0].alg;
    TowerPtr F = alg->F;
    FqPtr fp = F->residue;
    int K = (int)span.size();

    std::vector<std::vector<Elt>> u(K), c(K);
    for (int k = 0; k < K; ++k) {
        Mat Y = filt.conj(span[k]);
        for (int i = 0; i < Y.rows; ++i)
            for (int j = 0; j < Y.cols; ++j)
                Y.at(i, j) = Y.at(i, j).mul_pi_power(-filt.bound(i, j, t));
        u[k] = Y.flatten();
        c[k].assign((size_t)K, F->zero());
        c[k][k] = F->one();
    }
    int N = (int)u[0].size();

    auto shift = [&](int k, long long by) {
        for (Elt& x : u[k])
            if (!x.is_exact_zero()) x = x.mul_pi_power(by);
        for (Elt& x : c[k])
            if (!x.is_exact_zero()) x = x.mul_pi_power(by);
    };
    for (int k = 0; k < K; ++k) shift(k, -min_val_or_throw(u[k]));

    for (int guard = 0;; ++guard) {
        if (guard > 5000) throw std::runtime_error("lattice coordinates: saturation stalled");
        FqMat R = FqMat::zero(fp, N, K);
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < N; ++i) R.at(i, k) = residue_or_zero(u[k][i], fp);
        auto kern = R.kernel();
        if (kern.empty()) break;
        const auto& lam = kern[0];
        int k0 = -1;
        std::vector<Elt> nu((size_t)N, F->zero()), nc((size_t)K, F->zero());
        for (int k = 0; k < K; ++k) {
            if (lam[k].is_zero()) continue;
            k0 = k;
            Elt s = F->from_int(lam[k].c[0]);
            for (int i = 0; i < N; ++i) nu[i] = nu[i] + s * u[k][i];
            for (int i = 0; i < K; ++i) nc[i] = nc[i] + s * c[k][i];
        }
        u[k0] = std::move(nu);
        c[k0] = std::move(nc);
        shift(k0, -1);
        long long mv = min_val_or_throw(u[k0]);
        if (mv > 0) shift(k0, -mv);
    }
    return c;
}

std::vector<std::vector<Elt>> as_cols(const std::vector<Mat>& mats) {
    std::vector<std::vector<Elt>> out;
    for (const Mat& m : mats) out.push_back(m.flatten());
    return out;
}

// The residue quotient (S cap Hom_t)/(S cap Hom_{t+}) of the F-span S with
// representatives and reduction data over the prime residue field.
struct QuotientData {
    TowerPtr F;
    FqPtr fp;
    std::vector<Mat> span;
    std::vector<std::vector<Elt>> span_cols;
    std::vector<std::vector<Elt>> lat;  // o-basis coefficient vectors of L_t
    FqMat plus_res;                     // L_{t+} basis in L_t coordinates, mod p
    std::vector<int> rep_idx;
    std::vector<Mat> reps;

    int qdim() const { return (int)rep_idx.size(); }

    // quotient coordinates of a matrix lying in S cap Hom_t
    std::vector<FqEl> reduce(const Mat& Z) const {
        auto sc = base_solve(F, span_cols, Z.flatten());
        if (sc.empty()) throw std::invalid_argument("quotient: element outside the subspace");
        auto y = base_solve(F, lat, sc);
        if (y.empty()) throw std::runtime_error("quotient: lattice basis degenerate");
        std::vector<FqEl> rho;
        for (const Elt& x : y) {
            if (!elt_zero(x) && !x.val_at_least(Rat(0)))
                throw std::invalid_argument("quotient: element outside the lattice");
            rho.push_back(residue_or_zero(x, fp));
        }
        int K = (int)lat.size(), q = qdim();
        FqMat A = FqMat::zero(fp, K, K + q);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) A.at(i, j) = plus_res.at(i, j);
        for (int j = 0; j < q; ++j) A.at(rep_idx[j], K + j) = fp->one();
        auto x = A.solve(rho);
        if (x.empty()) throw std::runtime_error("quotient: reduction failed");
        return std::vector<FqEl>(x.begin() + K, x.end());
    }
};

QuotientData make_quotient(const std::vector<Mat>& span, const HomFilt& filt, const Rat& t) {
    QuotientData Q;
    if (span.empty()) {
        Q.plus_res = FqMat::zero(filt.alg()->F->residue, 0, 0);
        return Q;
    }
    const AlgebraPtr& alg = span[0].alg;
    Q.F = alg->F;
    Q.fp = alg->F->residue;
    Q.span = span;
    Q.span_cols = as_cols(span);
    Q.lat = lattice_coords(span, filt, t);
    auto plus = lattice_coords(span, filt, filt.next_jump(t));
    int K = (int)span.size();
    Q.plus_res = FqMat::zero(Q.fp, K, K);
    for (int j = 0; j < K; ++j) {
        auto y = base_solve(Q.F, Q.lat, plus[j]);
        if (y.empty()) throw std::runtime_error("quotient: nested lattice solve failed");
        for (int i = 0; i < K; ++i) Q.plus_res.at(i, j) = residue_or_zero(y[i], Q.fp);
    }
    // greedily extend the column span of plus_res by unit vectors
    FqMat cur = Q.plus_res;
    int rk = cur.rank();
    for (int a = 0; a < K && rk < K; ++a) {
        FqMat ext = FqMat::zero(Q.fp, K, cur.cols + 1);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < cur.cols; ++j) ext.at(i, j) = cur.at(i, j);
        ext.at(a, cur.cols) = Q.fp->one();
        if (ext.rank() > rk) {
            Q.rep_idx.push_back(a);
            cur = ext;
            ++rk;
        }
    }
    for (int a : Q.rep_idx) Q.reps.push_back(combine(span, Q.lat[a]));
    return Q;
}

struct GammaFormData {
    QuotientData Q;
    FqMat form;
    std::vector<std::vector<FqEl>> radical;
};

GammaFormData gamma_form_internal(const SpacePtr& V, const SplitLatticeFunction& sL,
                                  const Mat& gamma, const Rat& s) {
    GammaFormData out;
    HomFilt filt{&sL, &sL};
    out.Q = make_quotient(lie_basis(V), filt, s);
    int q = out.Q.qdim();
    out.form = FqMat::zero(V->alg->F->residue, q, q);
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            Elt v = V->trace_form(commutator(out.Q.reps[a], out.Q.reps[b]), gamma);
            if (!elt_zero(v) && !v.val_at_least(Rat(0)))
                throw std::runtime_error("residue form: pairing value is not integral");
            out.form.at(a, b) = residue_or_zero(v, out.form.fld);
        }
    out.radical = out.form.kernel();
    return out;
}

}  // namespace

// ---- dual pair contexts ----

DualPairContext DualPairContext::make(SpacePtr V, SpacePtr Vp) {
    if (!V || !Vp) throw std::invalid_argument("dual pair: both spaces required");
    if (V->alg != Vp->alg) throw std::invalid_argument("dual pair: shared algebra required");
    if (Vp->eps != -V->eps) throw std::invalid_argument("dual pair: opposite signs required");
    return DualPairContext{std::move(V), std::move(Vp)};
}

Mat DualPairContext::star(const Mat& w) const {
    if (w.rows != Vp->n || w.cols != V->n) throw std::invalid_argument("star: shape mismatch");
    return V->gram_inv.mul(w.tau_transpose()).mul(Vp->gram);
}

Mat DualPairContext::moment(const Mat& w) const { return star(w).mul(w); }

Mat DualPairContext::moment_p(const Mat& w) const { return w.mul(star(w)); }

Elt DualPairContext::pair_w(const Mat& w1, const Mat& w2) const {
    return V->alg->trace_to_base(star(w1).mul(w2).trace());
}

SpacePtr gamma_class_space(const SpacePtr& V, const Mat& gamma) {
    gamma.inverse();  // throws when singular at precision
    return twist_space(V, gamma);
}

// ---- filtration utilities ----

bool hom_filtration_member(const Mat& X, const SplitLatticeFunction& tgt,
                           const SplitLatticeFunction& src, const Rat& t) {
    HomFilt filt{&tgt, &src};
    Mat Y = filt.conj(X);
    int e = tgt.space->alg->e_D;
    for (int i = 0; i < Y.rows; ++i)
        for (int j = 0; j < Y.cols; ++j)
            if (!Y.at(i, j).val_at_least(Rat(filt.bound(i, j, t), e))) return false;
    return true;
}

std::vector<Mat> lie_basis(const SpacePtr& V) {
    auto units = unit_matrices(V->alg, V->n, V->n);
    std::vector<std::vector<Elt>> cols;
    for (const Mat& E : units) cols.push_back(E.add(V->adjoint(E)).flatten());
    return kernel_mats(units, base_kernel(V->alg->F, cols));
}

std::vector<Mat> centralizer_basis(const SpacePtr& V, const std::vector<Mat>& span,
                                   const std::vector<Mat>& gammas) {
    if (span.empty() || gammas.empty()) return span;
    std::vector<std::vector<Elt>> cols;
    for (const Mat& S : span) {
        std::vector<Elt> col;
        for (const Mat& g : gammas) {
            auto part = commutator(g, S).flatten();
            col.insert(col.end(), part.begin(), part.end());
        }
        cols.push_back(std::move(col));
    }
    return kernel_mats(span, base_kernel(V->alg->F, cols));
}

std::vector<Mat> orth_complement_basis(const SpacePtr& V, const std::vector<Mat>& big,
                                       const std::vector<Mat>& small) {
    if (big.empty() || small.empty()) return big;
    std::vector<std::vector<Elt>> cols;
    for (const Mat& B : big) {
        std::vector<Elt> col;
        for (const Mat& S : small) col.push_back(V->trace_form(B, S));
        cols.push_back(std::move(col));
    }
    return kernel_mats(big, base_kernel(V->alg->F, cols));
}

int filtered_quotient_dim(const std::vector<Mat>& span, const SplitLatticeFunction& tgt,
                          const SplitLatticeFunction& src, const Rat& t) {
    if (span.empty()) return 0;
    HomFilt filt{&tgt, &src};
    return make_quotient(span, filt, t).qdim();
}

// ---- transported lattices and the coset solver ----

SplitLatticeFunction transported_lattice(const SpacePtr& Vp, const SplitLatticeFunction& sL,
                                         const Mat& w, const Rat& s) {
    std::vector<Rat> g;
    for (const Rat& c : sL.gradings) g.push_back(c - s);
    long long m = lcm_ll(sL.m, s.denominator());
    auto out = SplitLatticeFunction::make(Vp, w.mul(sL.basis), g, m);
    if (!is_self_dual(out))
        throw std::invalid_argument("transported lattice function is not self-dual");
    return out;
}

Mat solve_moment(const DualPairContext& ctx, const Mat& w0, const Mat& gamma,
                 const SplitLatticeFunction& sL, const Rat& r, const Mat& gamma_check,
                 const Rat& t0, int* iters) {
    if (iters) *iters = 0;
    const SpacePtr& V = ctx.V;
    const AlgebraPtr& alg = V->alg;
    TowerPtr F = alg->F;
    int n = V->n;
    if (r <= 0) throw std::invalid_argument("solve_moment: positive depth required");
    Rat s = r / 2;
    if (!V->in_unitary_lie(gamma))
        throw std::invalid_argument("solve_moment: target is not skew-adjoint");
    if (!V->in_unitary_lie(gamma_check))
        throw std::invalid_argument("solve_moment: gamma_check is not skew-adjoint");
    Mat gci = gamma_check.inverse();

    Mat m0 = ctx.moment(w0);
    Mat d0 = gamma.sub(m0);
    if (d0.is_zero_at_precision()) return w0;
    if (!moy_prasad_member(d0, sL, t0 - s, MPMode::algebra))
        throw std::invalid_argument("solve_moment: initial residual below the starting level");
    Mat ge = m0.sub(gamma_check);
    if (!ge.is_zero_at_precision() && moy_prasad_grade(ge, sL) <= -r)
        throw std::invalid_argument("solve_moment: gamma_check does not match M(w0) above -r");

    // centralizer of gamma_check in gl(V), with the trace-form projection
    auto units = unit_matrices(alg, n, n);
    std::vector<std::vector<Elt>> ad_cols;
    for (const Mat& E : units) ad_cols.push_back(commutator(gamma_check, E).flatten());
    auto cent = kernel_mats(units, base_kernel(F, ad_cols));
    int C = (int)cent.size();
    std::vector<std::vector<Elt>> gram_cols(C);
    for (int b = 0; b < C; ++b)
        for (int a = 0; a < C; ++a) gram_cols[b].push_back(V->trace_form(cent[a], cent[b]));
    auto project_cent = [&](const Mat& Z) {
        std::vector<Elt> rhs;
        for (int a = 0; a < C; ++a) rhs.push_back(V->trace_form(Z, cent[a]));
        auto cc = base_solve(F, gram_cols, rhs);
        if (cc.empty())
            throw std::runtime_error("solve_moment: trace form degenerate on the centralizer");
        return combine(cent, cc);
    };
    Elt half = alg->D->from_rational(1, 2);

    Mat w = w0;
    bool have_prev = false;
    Rat prev(0);
    for (int iter = 0; iter < 500; ++iter) {
        Mat delta = gamma.sub(ctx.moment(w));
        if (delta.is_zero_at_precision()) return w;
        if (iters) *iters = iter + 1;
        Rat grade = moy_prasad_grade(delta, sL);
        if (have_prev && grade <= prev)
            throw std::runtime_error("solve_moment: stalled at residual level " + rat_str(grade));
        prev = grade;
        have_prev = true;

        Mat dc = project_cent(delta);
        Mat Xc = gci.mul(dc).scale(half);
        Mat dp = delta.sub(dc);
        Mat Xp = Mat::zero(alg, n, n);
        if (!dp.is_zero_at_precision()) {
            auto sol = base_solve(F, ad_cols, dp.flatten());
            if (sol.empty())
                throw std::runtime_error("solve_moment: residual escapes the bracket image");
            Mat X0 = combine(units, sol);
            Xp = X0.sub(project_cent(X0));
        }
        w = w.mul(Mat::identity(alg, n).add(Xc).add(Xp));
    }
    throw std::runtime_error("solve_moment: iteration budget exhausted");
}

GoodFactorization transport_factorization(const DualPairContext& ctx,
                                          const GoodFactorization& fac, const Mat& w) {
    Mat sum = fac.remainder.gamma;
    for (const auto& t : fac.terms) sum = sum.add(t.gamma);
    if (!ctx.moment(w).sub(sum).is_zero_at_precision())
        throw std::invalid_argument("transport: M(w) does not match the factored element");
    Mat wi = w.inverse();
    auto move = [&](const SpectralElement& T) {
        return SpectralElement::make(ctx.Vp, w.mul(T.gamma).mul(wi), w.mul(T.basis), T.blocks);
    };
    GoodFactorization out;
    out.space = ctx.Vp;
    out.r = fac.r;
    out.case_two = fac.case_two;
    for (const auto& t : fac.terms) out.terms.push_back(move(t));
    out.remainder = move(fac.remainder);
    return out;
}

// ---- the positive-depth lift ----

TransportResult lift_positive_block_with(const DatumSkeleton& datum, const SpacePtr& Vp,
                                         const Mat& w) {
    const SpacePtr& V = datum.x.space;
    Rat r = datum_depth(datum.Gamma);
    if (r <= 0) throw std::invalid_argument("lift: positive depth required");
    for (const auto& b : datum.Gamma.blocks) {
        Val v = b.gamma.val();
        if (!v.is_finite() || -v.v != r)
            throw std::invalid_argument("lift: datum is not a single positive-depth block");
    }
    auto ctx = DualPairContext::make(V, Vp);
    if (!ctx.moment(w).sub(datum.Gamma.gamma).is_zero_at_precision())
        throw std::invalid_argument("lift: M(w) must equal the datum element");

    TransportResult res;
    res.ctx = ctx;
    res.w = w;
    res.r = r;
    res.s = r / 2;
    res.fac = howe_factorize(datum.Gamma);
    res.xp = transported_lattice(Vp, datum.x, w, res.s);
    res.fac_p = transport_factorization(ctx, res.fac, w);
    res.gamma_p = ctx.moment_p(w);

    std::vector<SpectralBlock> nb;
    for (const auto& b : datum.Gamma.blocks) nb.push_back({b.E, -b.gamma, b.mult});
    auto Gp = SpectralElement::make(Vp, res.gamma_p.neg(), w.mul(datum.Gamma.basis), nb);
    res.lifted = DatumSkeleton{res.xp, Gp, datum.phi_label, datum.rho_character};
    return res;
}

TransportResult lift_positive_block(const DatumSkeleton& datum) {
    const SpacePtr& V = datum.x.space;
    SpacePtr Vp = gamma_class_space(V, datum.Gamma.gamma);
    return lift_positive_block_with(datum, Vp, Mat::identity(V->alg, V->n));
}

// ---- residue symplectic data and structural predicates ----

ResidueSymplecticData gamma_residue_form(const SpacePtr& V, const SplitLatticeFunction& sL,
                                         const Mat& gamma, const Rat& s) {
    auto data = gamma_form_internal(V, sL, gamma, s);
    return ResidueSymplecticData{V->alg->F->residue, data.Q.reps, data.form, data.radical};
}

OrbitStructureReport verify_orbit_structure(const DatumSkeleton& datum,
                                            const TransportResult& result, int sample_budget) {
    OrbitStructureReport rep;
    std::ostringstream notes;
    if (sample_budget < 1) sample_budget = 1;

    const SpacePtr& V = result.ctx.V;
    const SpacePtr& Vp = result.ctx.Vp;
    const AlgebraPtr& alg = V->alg;
    FqPtr fp = alg->F->residue;
    const SplitLatticeFunction& sL = datum.x;
    const SplitLatticeFunction& sLp = result.xp;
    const Mat& w = result.w;
    const Mat& gm = datum.Gamma.gamma;
    Rat s = result.s;
    int d = result.fac.d();
    Elt half = alg->D->from_rational(1, 2);

    std::vector<Mat> gam, gam_p;
    for (const auto& t : result.fac.terms) gam.push_back(t.gamma);
    for (const auto& t : result.fac_p.terms) gam_p.push_back(t.gamma);
    std::vector<int> I;
    for (int i = 0; i <= (result.fac.case_two ? d : d - 1); ++i) I.push_back(i);

    HomFilt fg{&sL, &sL}, fgp{&sLp, &sLp};

    // centralizer chains: level i kills the terms with index >= i
    auto g_full = lie_basis(V);
    auto gp_full = lie_basis(Vp);
    std::vector<std::vector<Mat>> chain(d + 2), chain_p(d + 2);
    chain[d + 1] = g_full;
    chain_p[d + 1] = gp_full;
    for (int i = d; i >= 0; --i) {
        chain[i] = centralizer_basis(V, chain[i + 1], {gam[i]});
        chain_p[i] = centralizer_basis(Vp, chain_p[i + 1], {gam_p[i]});
    }

    // (1) residue dimensions of the chain filtrations agree level by level
    try {
        int e = alg->e_D;
        std::vector<Rat> levels;
        for (const Rat& ci : sL.gradings)
            for (const Rat& cj : sL.gradings) {
                Rat cd = ci - cj;
                Rat base = cd - Rat(rat_floor(cd * e), e);  // in [0, 1/e)
                for (int k = 0; k < e; ++k) {
                    Rat t = base + Rat(k, e);
                    if (std::find(levels.begin(), levels.end(), t) == levels.end())
                        levels.push_back(t);
                }
            }
        std::sort(levels.begin(), levels.end());
        bool ok = true;
        for (int i : I) {
            long suma = 0, sumb = 0;
            for (const Rat& t : levels) {
                int a = filtered_quotient_dim(chain[i], sL, sL, t);
                int b = filtered_quotient_dim(chain_p[i], sLp, sLp, t);
                if (a != b) ok = false;
                suma += a;
                sumb += b;
            }
            // one full period accounts for every F-dimension exactly once
            if (suma != (long)chain[i].size() || sumb != (long)chain_p[i].size()) ok = false;
        }
        rep.filtration_iso = ok;
    } catch (const std::exception& ex) {
        notes << "filtration: " << ex.what() << "; ";
    }

    // (2) the embedding (X, X') -> -wX + X'w is an isometry with orthogonal
    // factors, for the bracket forms against Gamma and -Gamma'
    try {
        Rng rng(0x5eedULL);
        auto rand_elt = [&]() {
            if (alg->dim_F() == 1) return alg->D->from_int(rng.uniform(-9, 9));
            return alg->from_coords_base({alg->F->from_int(rng.uniform(-9, 9)),
                                          alg->F->from_int(rng.uniform(-9, 9))});
        };
        auto rand_skew = [&](const SpacePtr& S) {
            Mat R = Mat::zero(alg, S->n, S->n);
            for (int i = 0; i < S->n; ++i)
                for (int j = 0; j < S->n; ++j) R.at(i, j) = rand_elt();
            return R.sub(S->adjoint(R));
        };
        bool ok = true;
        for (int trial = 0; trial < sample_budget + 2; ++trial) {
            Mat X1 = rand_skew(V), X2 = rand_skew(V);
            Mat Y1 = rand_skew(Vp), Y2 = rand_skew(Vp);
            Mat i1 = w.mul(X1).neg(), i2 = w.mul(X2).neg();
            Mat j1 = Y1.mul(w), j2 = Y2.mul(w);
            Elt lhs1 = result.ctx.pair_w(i1, i2);
            Elt rhs1 = V->trace_form(commutator(X1, X2), gm);
            Elt lhs2 = result.ctx.pair_w(j1, j2);
            Elt rhs2 = Vp->trace_form(commutator(Y1, Y2), result.gamma_p.neg());
            Elt cross = result.ctx.pair_w(i1, j1);
            if (!(lhs1 - rhs1).is_zero_at_precision()) ok = false;
            if (!(lhs2 - rhs2).is_zero_at_precision()) ok = false;
            if (!elt_zero(cross)) ok = false;
        }
        rep.isometry = ok;
    } catch (const std::exception& ex) {
        notes << "isometry: " << ex.what() << "; ";
    }

    // (3) radical of the residue form at level s
    GammaFormData gfd;
    bool have_form = false;
    try {
        gfd = gamma_form_internal(V, sL, gm, s);
        have_form = true;
        int q = gfd.Q.qdim();
        if (result.fac.case_two) {
            bool zero = true;
            for (const FqEl& x : gfd.form.a)
                if (!x.is_zero()) zero = false;
            rep.radical_match = zero && (int)gfd.radical.size() == q;
        } else {
            int want = filtered_quotient_dim(chain[d - 1], sL, sL, s);
            bool ok = ((int)gfd.radical.size() == want);
            if (want > 0) {
                HomFilt filt{&sL, &sL};
                auto Qc = make_quotient(chain[d - 1], filt, s);
                for (const Mat& Zc : Qc.reps)
                    for (const Mat& Zb : gfd.Q.reps) {
                        Elt v = V->trace_form(commutator(Zc, Zb), gm);
                        if (!residue_or_zero(v, fp).is_zero()) ok = false;
                    }
            }
            rep.radical_match = ok;
        }
    } catch (const std::exception& ex) {
        notes << "radical: " << ex.what() << "; ";
    }

    // (4) dim g_{x,s:s+} + dim g'_{x',s:s+} = dim of the level-0 quotient of
    // the Hom filtration
    try {
        int a = filtered_quotient_dim(g_full, sL, sL, s);
        int b = filtered_quotient_dim(gp_full, sLp, sLp, s);
        auto hom_units = unit_matrices(alg, Vp->n, V->n);
        int c = filtered_quotient_dim(hom_units, sLp, sL, Rat(0));
        rep.dimension_identity = (a + b == c);
    } catch (const std::exception& ex) {
        notes << "dimension: " << ex.what() << "; ";
    }

    // (5) the graph of d-alpha on each intermediate complement is maximal
    // totally isotropic at its own level
    try {
        Mat wi = w.inverse();
        auto dalpha = [&](const Mat& X) {
            Mat A = w.mul(X).mul(wi);
            return A.sub(Vp->adjoint(A)).scale(half);
        };
        bool ok = true, any = false;
        for (int i : I) {
            if (i < 1) continue;
            auto perp = orth_complement_basis(V, chain[i], chain[i - 1]);
            auto perp_p = orth_complement_basis(Vp, chain_p[i], chain_p[i - 1]);
            Rat si = result.fac.r[i - 1] / 2;
            auto Qg = make_quotient(perp, fg, si);
            auto Qp = make_quotient(perp_p, fgp, si);
            if (Qg.qdim() != Qp.qdim()) {
                ok = false;
                continue;
            }
            int q = Qg.qdim();
            if (q == 0) continue;
            any = true;
            std::vector<Mat> da;
            for (const Mat& X : Qg.reps) da.push_back(dalpha(X));
            for (int a = 0; a < q; ++a)
                for (int b = 0; b < q; ++b) {
                    Elt v = V->trace_form(commutator(Qg.reps[a], Qg.reps[b]), gam[i - 1]) +
                            Vp->trace_form(commutator(da[a], da[b]), gam_p[i - 1].neg());
                    if (!residue_or_zero(v, fp).is_zero()) ok = false;
                }
            FqMat coords = FqMat::zero(fp, q, q);
            for (int a = 0; a < q; ++a) {
                auto qc = Qp.reduce(da[a]);
                for (int i2 = 0; i2 < q; ++i2) coords.at(i2, a) = qc[i2];
            }
            if (coords.rank() != q) ok = false;
        }
        if (!any) notes << "isotropy: no intermediate levels, vacuous; ";
        rep.isotropic_diag = ok;
    } catch (const std::exception& ex) {
        notes << "isotropy: " << ex.what() << "; ";
    }

    // (6) determinants on the radical of sampled stabilizer elements are
    // squares in the residue field
    try {
        if (!have_form) throw std::runtime_error("residue form unavailable");
        int q = gfd.Q.qdim();
        int rho = (int)gfd.radical.size();
        if (rho == 0) {
            notes << "determinant: trivial radical, vacuous; ";
            rep.square_det = true;
        } else {
            auto gz = centralizer_basis(V, g_full, {gm});
            auto lat0 = lattice_coords(gz, fg, Rat(0));
            std::vector<Mat> Lmats;
            for (const auto& c : lat0) Lmats.push_back(combine(gz, c));
            std::vector<Mat> rad_lift;
            for (const auto& rv : gfd.radical) rad_lift.push_back(combine_residue(gfd.Q.reps, rv));
            FqMat radmat = FqMat::zero(fp, q, rho);
            for (int j = 0; j < rho; ++j)
                for (int i = 0; i < q; ++i) radmat.at(i, j) = gfd.radical[j][i];
            Rng rng(0xab1eULL);
            bool ok = true;
            int tested = 0;
            for (int trial = 0; trial < 4 * sample_budget && tested < sample_budget; ++trial) {
                Mat X = Mat::zero(alg, V->n, V->n);
                for (const Mat& L : Lmats)
                    X = X.add(L.scale(alg->D->from_int(rng.uniform(-2, 2))));
                Mat g;
                try {
                    Mat hx = X.scale(half);
                    Mat id = Mat::identity(alg, V->n);
                    g = id.add(hx).mul(id.sub(hx).inverse());
                } catch (const std::exception&) {
                    continue;
                }
                if (!moy_prasad_member(g, sL, Rat(0), MPMode::group)) continue;
                Mat gi = g.inverse();
                FqMat A = FqMat::zero(fp, rho, rho);
                bool usable = true;
                for (int c = 0; c < rho && usable; ++c) {
                    Mat Ad = g.mul(rad_lift[c]).mul(gi);
                    auto qc = gfd.Q.reduce(Ad);
                    std::vector<FqEl> rhs(qc.begin(), qc.end());
                    auto x = radmat.solve(rhs);
                    if (x.empty()) {
                        ok = false;
                        usable = false;
                        notes << "determinant: action leaves the radical; ";
                        break;
                    }
                    for (int i = 0; i < rho; ++i) A.at(i, c) = x[i];
                }
                if (!usable) break;
                if (fp->legendre(A.det()) != 1) ok = false;
                ++tested;
            }
            if (tested == 0) {
                ok = false;
                notes << "determinant: no stabilizer samples found; ";
            }
            rep.square_det = ok;
        }
    } catch (const std::exception& ex) {
        notes << "determinant: " << ex.what() << "; ";
    }

    rep.notes = notes.str();
    return rep;
}

}  // namespace theta
