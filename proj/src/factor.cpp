#include "theta/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace theta {

namespace {

bool elt_zero(const Elt& x) { return x.is_exact_zero() || x.is_zero_at_precision(); }

Mat blockdiag(const AlgebraPtr& alg, const std::vector<Mat>& blocks) {
    int n = 0;
    for (const auto& b : blocks) n += b.rows;
    Mat out = Mat::zero(alg, n, n);
    int off = 0;
    for (const auto& b : blocks) {
        if (b.rows != b.cols) throw std::invalid_argument("blockdiag: square blocks required");
        out.paste(off, off, b);
        off += b.rows;
    }
    return out;
}

long long lcm_ll(long long a, long long b) { return a / std::gcd(a, b) * b; }

// smallest k with p^k = 1 mod e (e coprime to p)
int mult_order_mod(long p, long long e) {
    if (e == 1) return 1;
    long long x = ((p % e) + e) % e;
    if (std::gcd(x, e) != 1) throw std::invalid_argument("splitting tower: wild ramification");
    long long c = x;
    int k = 1;
    while (c != 1) {
        c = (c * x) % e;
        if (++k > 10000) throw std::logic_error("splitting tower: order computation failed");
    }
    return k;
}

// a tame tower containing every block tower, normal over the base
TowerPtr common_splitting_tower(const AlgebraPtr& alg, const std::vector<SpectralBlock>& blocks) {
    long long f = alg->D->f, e = alg->D->e;
    for (const auto& b : blocks) {
        f = lcm_ll(f, b.E->f);
        e = lcm_ll(e, b.E->e);
    }
    f = lcm_ll(f, mult_order_mod(alg->D->p, e));
    return Tower::make(alg->D->p, (int)f, (int)e, alg->D->prec);
}

}  // namespace

// ---- tower embeddings and coordinates ----

std::vector<Elt> tower_f_coords(const Elt& x, const TowerPtr& F) {
    if (F->f != 1 || F->e != 1) throw std::invalid_argument("tower_f_coords: base tower required");
    TowerPtr T = x.tower();
    if (!T) throw std::invalid_argument("tower_f_coords: uninitialized element");
    int f = T->f, e = T->e;
    std::vector<Elt> out((size_t)f * e, F->zero());
    if (x.is_exact_zero()) return out;
    long long s = x.pi_shift();
    long long rel = x.rel_precision();
    if (x.is_zero_at_precision()) {
        for (int a = 0; a < f; ++a)
            for (int b = 0; b < e; ++b)
                out[(size_t)a * e + b] = F->unknown_below(rat_ceil(Rat(s + rel - b, e)));
        return out;
    }
    auto c = x.unit_coeffs();
    for (int a = 0; a < f; ++a)
        for (int b = 0; b < e; ++b) {
            long long v = c[(size_t)a * e + b];
            if (v == 0) continue;
            long long deg = s + b;
            long long b0 = ((deg % e) + e) % e;
            long long k = (deg - b0) / e;
            Elt y = F->from_int(v).mul_pi_power(k);
            long long knownf = rat_ceil(Rat(s + rel - b0, e));
            long long relf = knownf - y.pi_shift();
            Elt add = (relf <= 0) ? F->unknown_below(knownf)
                                  : y.truncated((int)std::min<long long>(relf, F->prec));
            size_t slot = (size_t)a * e + b0;
            out[slot] = out[slot].is_exact_zero() ? add : out[slot] + add;
        }
    return out;
}

Elt embed_tower(const Elt& x, const TowerPtr& big) {
    TowerPtr S = x.tower();
    if (!S) throw std::invalid_argument("embed_tower: uninitialized element");
    if (S.get() == big.get()) return x;
    if (S->p != big->p || big->f % S->f != 0 || big->e % S->e != 0)
        throw std::invalid_argument("embed_tower: target does not contain the source");
    long long scale = big->e / S->e;
    if (x.is_exact_zero()) return big->zero();
    long long known = ((long long)x.pi_shift() + x.rel_precision()) * scale;
    if (x.is_zero_at_precision()) return big->unknown_below(known);
    Elt wim = big->one();
    if (S->f > 1) {
        const FqPtr& R = big->residue;
        bool found = false;
        FqEl root = R->zero();
        for (long idx = 0; idx < R->q && !found; ++idx) {
            FqEl y = R->element(idx);
            FqEl acc = R->zero();
            const auto& mod = S->residue->modulus;
            for (int i = (int)mod.size() - 1; i >= 0; --i)
                acc = R->add(R->mul(acc, y), R->from_int(mod[i]));
            if (acc.is_zero()) {
                root = y;
                found = true;
            }
        }
        if (!found) throw std::logic_error("embed_tower: residue modulus has no root");
        wim = big->teichmuller(root);
    }
    auto c = x.unit_coeffs();
    Elt acc = big->zero();
    for (int a = 0; a < S->f; ++a)
        for (int b = 0; b < S->e; ++b) {
            long long v = c[(size_t)a * S->e + b];
            if (v == 0) continue;
            Elt term = big->from_int(v);
            if (a > 0) term = term * wim.pow(a);
            acc = acc + term.mul_pi_power((long long)b * scale);
        }
    acc = acc.mul_pi_power((long long)x.pi_shift() * scale);
    if (acc.is_exact_zero() || acc.is_zero_at_precision()) return big->unknown_below(known);
    long long relb = known - acc.pi_shift();
    if (relb <= 0) return big->unknown_below(known);
    return acc.truncated((int)std::min<long long>(relb, (long long)big->e * big->prec));
}

Mat regular_rep(const AlgebraPtr& alg, const TowerPtr& E, const Elt& gamma) {
    const TowerPtr& D = alg->D;
    if (E->p != D->p || E->f % D->f != 0 || E->e % D->e != 0)
        throw std::invalid_argument("regular_rep: tower does not contain the coefficient algebra");
    if (!gamma.is_exact_zero() && gamma.tower().get() != E.get())
        throw std::invalid_argument("regular_rep: eigen-element lives in the wrong tower");
    int fr = E->f / D->f, er = E->e / D->e;
    int n = fr * er;
    int dD = alg->dim_F();
    const TowerPtr& F = alg->F;
    std::vector<Elt> dpow = {E->one()};
    if (dD == 2)
        dpow.push_back(alg->kind == AlgKind::unram_quad ? embed_tower(alg->D->omega(), E)
                                                        : embed_tower(alg->D->uniformizer(), E));
    std::vector<Elt> m;
    m.reserve(n);
    for (int a = 0; a < fr; ++a)
        for (int b = 0; b < er; ++b) {
            Elt base = (a > 0) ? E->omega().pow(a) : E->one();
            m.push_back(base.mul_pi_power(b));
        }
    std::vector<std::vector<Elt>> cols;
    cols.reserve((size_t)n * dD);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < dD; ++j) cols.push_back(tower_f_coords(m[k] * dpow[j], F));
    Mat out = Mat::zero(alg, n, n);
    for (int k = 0; k < n; ++k) {
        Elt y = gamma.is_exact_zero() ? E->zero() : gamma * m[k];
        auto sol = base_solve(F, cols, tower_f_coords(y, F));
        if (sol.empty() && n > 0)
            throw std::runtime_error("regular_rep: coordinate solve failed");
        for (int kp = 0; kp < n; ++kp) {
            if (dD == 1)
                out.at(kp, k) = alg->from_coords_base({sol[kp]});
            else
                out.at(kp, k) = alg->from_coords_base({sol[(size_t)kp * 2], sol[(size_t)kp * 2 + 1]});
        }
    }
    return out;
}

std::vector<Elt> tower_conjugates(const Elt& gamma) {
    TowerPtr E = gamma.tower();
    if (!E) throw std::invalid_argument("tower_conjugates: uninitialized element");
    int f = E->f, e = E->e;
    Elt zeta = E->one();
    if (e > 1) {
        if ((E->residue->q - 1) % e != 0)
            throw std::invalid_argument("tower_conjugates: tower is not normal over the base");
        const FqPtr& R = E->residue;
        bool found = false;
        for (long idx = 1; idx < R->q && !found; ++idx) {
            FqEl y = R->element(idx);
            if (y.is_zero()) continue;
            FqEl c = y;
            int ord = 1;
            while (!(c == R->one()) && ord <= e) {
                c = R->mul(c, y);
                ++ord;
            }
            if (ord == e) {
                zeta = E->teichmuller(y);
                found = true;
            }
        }
        if (!found) throw std::logic_error("tower_conjugates: no residue element of order e");
    }
    std::vector<Elt> out;
    out.reserve((size_t)f * e);
    for (int b = 0; b < e; ++b) {
        Elt rot = gamma.rotate_uniformizer(zeta.pow(b));
        for (int a = 0; a < f; ++a) out.push_back(rot.frobenius(a));
    }
    return out;
}

// ---- certified semisimple elements ----

int SpectralBlock::dim(const AlgebraPtr& alg) const {
    return mult * (E->f * E->e) / (alg->D->f * alg->D->e);
}

SpectralElement SpectralElement::make(SpacePtr space, Mat gamma, Mat basis,
                                      std::vector<SpectralBlock> blocks) {
    const AlgebraPtr& alg = space->alg;
    int n = space->n;
    if (gamma.rows != n || gamma.cols != n || basis.rows != n || basis.cols != n)
        throw std::invalid_argument("spectral element: dimension mismatch");
    if (!space->in_unitary_lie(gamma))
        throw std::invalid_argument("spectral element: matrix is not skew-adjoint");
    int total = 0;
    for (const auto& b : blocks) total += b.dim(alg);
    if (total != n)
        throw std::invalid_argument("spectral element: block dimensions do not sum to dim V");
    if (n > 0) {
        Mat inner = mat_solve(basis, gamma.mul(basis));
        std::vector<Mat> bd;
        for (const auto& b : blocks) {
            Mat R = regular_rep(alg, b.E, b.gamma);
            for (int i = 0; i < b.mult; ++i) bd.push_back(R);
        }
        if (!inner.sub(blockdiag(alg, bd)).is_zero_at_precision())
            throw std::invalid_argument("spectral element: certificate does not reproduce the matrix");
    }
    if (!blocks.empty()) {
        TowerPtr E = common_splitting_tower(alg, blocks);
        std::vector<Elt> eig;
        for (const auto& b : blocks) {
            Elt g = embed_tower(b.gamma, E);
            auto conj = tower_conjugates(g);
            for (const auto& c : conj)
                for (int i = 0; i < b.mult; ++i) eig.push_back(c);
        }
        std::vector<char> used(eig.size(), 0);
        for (size_t i = 0; i < eig.size(); ++i) {
            if (used[i]) continue;
            bool matched = false;
            for (size_t j = 0; j < eig.size() && !matched; ++j) {
                if (j == i || used[j]) continue;
                if (elt_zero(eig[i] + eig[j])) {
                    used[i] = used[j] = 1;
                    matched = true;
                }
            }
            if (!matched && elt_zero(eig[i] + eig[i])) {
                used[i] = 1;
                matched = true;
            }
            if (!matched)
                throw std::invalid_argument(
                    "spectral element: eigenvalues not closed under negation");
        }
    }
    SpectralElement out;
    out.space = std::move(space);
    out.gamma = std::move(gamma);
    out.basis = std::move(basis);
    out.blocks = std::move(blocks);
    return out;
}

Val depth_of(const SpectralElement& G) {
    bool have = false, have_bound = false;
    Rat best(0), bound(0);
    for (const auto& b : G.blocks) {
        Val v = b.gamma.val();
        if (v.is_infinite()) continue;
        if (v.is_finite()) {
            if (!have || v.v < best) best = v.v;
            have = true;
        } else {
            if (!have_bound || v.v < bound) bound = v.v;
            have_bound = true;
        }
    }
    if (!have && !have_bound) return Val::infinite();
    if (have) {
        if (have_bound && bound < best)
            throw precision_exhausted("depth_of: a block bound falls below the minimum");
        return Val::finite(best);
    }
    return Val::at_least(bound);
}

Rat datum_depth(const SpectralElement& G) {
    Val d = depth_of(G);
    if (d.is_infinite()) return Rat(0);
    if (d.is_finite()) return d.v < Rat(0) ? -d.v : Rat(0);
    if (d.v >= Rat(0)) return Rat(0);
    throw precision_exhausted("datum_depth: depth not certified");
}

bool is_good(const SpectralElement& G) {
    Val dv = depth_of(G);
    if (dv.is_infinite()) return true;
    if (!dv.is_finite()) throw precision_exhausted("is_good: depth not certified");
    Rat depth = dv.v;
    TowerPtr E = common_splitting_tower(G.space->alg, G.blocks);
    std::vector<Elt> eig;
    for (const auto& b : G.blocks) {
        auto conj = tower_conjugates(embed_tower(b.gamma, E));
        eig.insert(eig.end(), conj.begin(), conj.end());
    }
    for (size_t i = 0; i < eig.size(); ++i)
        for (size_t j = i + 1; j < eig.size(); ++j) {
            Elt d = eig[i] - eig[j];
            Val v = d.val();
            if (v.is_infinite()) continue;
            if (v.is_finite()) {
                if (v.v != depth) return false;
                continue;
            }
            // zero at precision: indistinguishable from an exact zero root value
            if (v.v > depth) continue;
            throw precision_exhausted("is_good: root value undecidable at precision");
        }
    return true;
}

// ---- good factorizations ----

namespace {

// matrix of a per-block eigenvalue assignment in the certificate coordinates
Mat assemble_matrix(const SpectralElement& G, const std::vector<Elt>& vals) {
    const AlgebraPtr& alg = G.space->alg;
    std::vector<Mat> bd;
    for (size_t j = 0; j < G.blocks.size(); ++j) {
        Mat R = regular_rep(alg, G.blocks[j].E, vals[j]);
        for (int i = 0; i < G.blocks[j].mult; ++i) bd.push_back(R);
    }
    Mat M = blockdiag(alg, bd);
    return G.basis.mul(M).mul(G.basis.inverse());
}

SpectralElement assemble_term(const SpectralElement& G, const std::vector<Elt>& vals) {
    std::vector<SpectralBlock> tb;
    for (size_t j = 0; j < G.blocks.size(); ++j)
        tb.push_back({G.blocks[j].E, vals[j], G.blocks[j].mult});
    return SpectralElement::make(G.space, assemble_matrix(G, vals), G.basis, std::move(tb));
}

bool matrix_is_scalar(const Mat& M) {
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) {
            Elt d = (i == j) ? M.at(i, i) - M.at(0, 0) : M.at(i, j);
            if (!elt_zero(d)) return false;
        }
    return true;
}

}  // namespace

GoodFactorization howe_factorize(const SpectralElement& G) {
    size_t nb = G.blocks.size();
    std::vector<Elt> cur;
    cur.reserve(nb);
    for (const auto& b : G.blocks) cur.push_back(b.gamma);
    std::vector<std::vector<Elt>> betas;
    std::vector<Rat> beta_depth;
    for (int iter = 0;; ++iter) {
        if (iter > 200) throw std::runtime_error("howe_factorize: extraction did not terminate");
        bool have = false;
        Rat depth(0);
        for (size_t j = 0; j < nb; ++j) {
            Val v = cur[j].val();
            if (v.is_infinite()) continue;
            if (v.is_finite()) {
                if (!have || v.v < depth) depth = v.v;
                have = true;
            } else if (v.v < Rat(0)) {
                throw precision_exhausted("howe_factorize: block valuation not certified");
            }
        }
        if (!have || depth >= Rat(0)) break;
        long long k = depth.numerator();
        long long e = depth.denominator();
        std::vector<Elt> beta(nb);
        for (size_t j = 0; j < nb; ++j) {
            const TowerPtr& Ej = G.blocks[j].E;
            Val v = cur[j].val();
            if (v.is_finite() && v.v == depth) {
                Elt b = cur[j].pow(e).mul_pi_power(-k * Ej->e);
                Elt bh = Ej->teichmuller(b.residue_image());
                Elt root = Ej->hensel_root(e, bh * b.inv(), Ej->residue->one());
                beta[j] = cur[j] * root;
                cur[j] = cur[j] - beta[j];
            } else {
                beta[j] = Ej->zero();
            }
        }
        betas.push_back(std::move(beta));
        beta_depth.push_back(depth);
    }
    GoodFactorization out;
    out.space = G.space;
    out.case_two = !betas.empty() && matrix_is_scalar(assemble_matrix(G, betas[0]));
    int t = (int)betas.size();
    for (int i = t - 1; i >= 0; --i) {
        out.terms.push_back(assemble_term(G, betas[i]));
        out.r.push_back(-beta_depth[i]);
    }
    if (!out.case_two) {
        std::vector<Elt> z(nb);
        for (size_t j = 0; j < nb; ++j) z[j] = G.blocks[j].E->zero();
        out.terms.push_back(assemble_term(G, z));
        out.r.push_back(t > 0 ? out.r.back() : Rat(0));
    }
    out.remainder = assemble_term(G, cur);
    return out;
}

// ---- block decomposition and direct sums ----

std::vector<DatumSkeleton> block_decompose(const DatumSkeleton& datum) {
    const SpectralElement& G = datum.Gamma;
    const AlgebraPtr& alg = G.space->alg;
    size_t nb = G.blocks.size();
    std::vector<Rat> rclass(nb, Rat(0));
    for (size_t j = 0; j < nb; ++j) {
        Val v = G.blocks[j].gamma.val();
        if (v.is_finite() && v.v < Rat(0))
            rclass[j] = -v.v;
        else if (!v.is_infinite() && !v.is_finite() && v.v < Rat(0))
            throw precision_exhausted("block_decompose: block valuation not certified");
    }
    std::vector<Rat> classes;
    for (const auto& r : rclass)
        if (r > Rat(0) && std::find(classes.begin(), classes.end(), r) == classes.end())
            classes.push_back(r);
    std::sort(classes.begin(), classes.end(), std::greater<Rat>());
    classes.push_back(Rat(0));  // depth-zero class always present, last

    // offsets of the certificate blocks inside the block-diagonal coordinates
    std::vector<int> off(nb + 1, 0);
    for (size_t j = 0; j < nb; ++j) off[j + 1] = off[j] + G.blocks[j].dim(alg);
    int n = G.space->n;

    // x in certificate coordinates, one class assignment per column
    Mat Y = (n > 0) ? mat_solve(G.basis, datum.x.basis) : Mat::zero(alg, 0, 0);
    std::vector<int> col_class(n, -1);
    for (int c = 0; c < n; ++c) {
        int owner = -1;
        for (size_t j = 0; j < nb; ++j) {
            bool nz = false;
            for (int i = off[j]; i < off[j + 1] && !nz; ++i)
                if (!elt_zero(Y.at(i, c))) nz = true;
            if (!nz) continue;
            int cls = (int)(std::find(classes.begin(), classes.end(), rclass[j]) - classes.begin());
            if (owner == -1)
                owner = cls;
            else if (owner != cls)
                throw std::invalid_argument("block_decompose: x is not split by the block idempotents");
        }
        if (owner == -1)
            throw std::invalid_argument("block_decompose: degenerate column in the lattice basis");
        col_class[c] = owner;
    }

    std::vector<DatumSkeleton> out;
    std::vector<Mat> subs;  // per-class column submatrices of the basis
    for (size_t ci = 0; ci < classes.size(); ++ci) {
        std::vector<int> rows;
        std::vector<size_t> members;
        for (size_t j = 0; j < nb; ++j)
            if (rclass[j] == classes[ci]) {
                members.push_back(j);
                for (int i = off[j]; i < off[j + 1]; ++i) rows.push_back(i);
            }
        int nl = (int)rows.size();
        Mat P = Mat::zero(alg, n, nl);
        for (int c = 0; c < nl; ++c)
            for (int i = 0; i < n; ++i) P.at(i, c) = G.basis.at(i, rows[c]);
        subs.push_back(P);
        Mat gram_l = P.tau_transpose().mul(G.space->gram).mul(P);
        SpacePtr Vl = Space::make(alg, G.space->eps, gram_l);
        std::vector<SpectralBlock> bl;
        std::vector<Mat> bd;
        for (size_t j : members) {
            bl.push_back(G.blocks[j]);
            Mat R = regular_rep(alg, G.blocks[j].E, G.blocks[j].gamma);
            for (int i = 0; i < G.blocks[j].mult; ++i) bd.push_back(R);
        }
        SpectralElement Gl =
            SpectralElement::make(Vl, blockdiag(alg, bd), Mat::identity(alg, nl), bl);
        // x restricted to the class: the class rows of the assigned columns
        std::vector<int> cols;
        for (int c = 0; c < n; ++c)
            if (col_class[c] == (int)ci) cols.push_back(c);
        if ((int)cols.size() != nl)
            throw std::invalid_argument("block_decompose: x is not split by the block idempotents");
        Mat xb = Mat::zero(alg, nl, nl);
        std::vector<Rat> grads;
        for (int c = 0; c < nl; ++c) {
            for (int i = 0; i < nl; ++i) xb.at(i, c) = Y.at(rows[i], cols[c]);
            grads.push_back(datum.x.gradings[cols[c]]);
        }
        SplitLatticeFunction xl = SplitLatticeFunction::make(Vl, xb, grads, datum.x.m);
        DatumSkeleton blk;
        blk.x = std::move(xl);
        blk.Gamma = std::move(Gl);
        blk.phi_label = datum.phi_label;
        if (classes[ci] == Rat(0)) blk.rho_character = datum.rho_character;
        out.push_back(std::move(blk));
    }
    // orthogonality of the class subspaces
    for (size_t a = 0; a < subs.size(); ++a)
        for (size_t b = a + 1; b < subs.size(); ++b) {
            Mat pr = subs[a].tau_transpose().mul(G.space->gram).mul(subs[b]);
            if (!pr.is_zero_at_precision())
                throw std::invalid_argument("block_decompose: valuation classes are not orthogonal");
        }
    return out;
}

DatumSkeleton direct_sum_data(const std::vector<DatumSkeleton>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("direct_sum_data: no blocks");
    if (blocks.size() == 1) return blocks[0];
    const AlgebraPtr& alg = blocks[0].Gamma.space->alg;
    int eps = blocks[0].Gamma.space->eps;
    for (const auto& b : blocks) {
        if (b.Gamma.space->alg.get() != alg.get())
            throw std::invalid_argument("direct_sum_data: mixed coefficient algebras");
        if (b.Gamma.space->eps != eps)
            throw std::invalid_argument("direct_sum_data: sign mismatch");
    }
    for (size_t i = 0; i + 1 < blocks.size(); ++i) {
        Rat a = datum_depth(blocks[i].Gamma), b = datum_depth(blocks[i + 1].Gamma);
        if (a == b) throw std::invalid_argument("direct_sum_data: equal depths");
        if (a < b) throw std::invalid_argument("direct_sum_data: depths must strictly decrease");
        if (b == Rat(0) && i + 2 < blocks.size())
            throw std::invalid_argument("direct_sum_data: depth-zero block must come last");
    }
    int n = 0;
    for (const auto& b : blocks) n += b.Gamma.space->n;
    Mat gram = Mat::zero(alg, n, n), gmat = Mat::zero(alg, n, n), basis = Mat::zero(alg, n, n);
    Mat xb = Mat::zero(alg, n, n);
    std::vector<Rat> grads;
    std::vector<SpectralBlock> cert;
    long m = 1;
    int offp = 0;
    for (const auto& b : blocks) {
        gram.paste(offp, offp, b.Gamma.space->gram);
        gmat.paste(offp, offp, b.Gamma.gamma);
        basis.paste(offp, offp, b.Gamma.basis);
        xb.paste(offp, offp, b.x.basis);
        grads.insert(grads.end(), b.x.gradings.begin(), b.x.gradings.end());
        cert.insert(cert.end(), b.Gamma.blocks.begin(), b.Gamma.blocks.end());
        m = lcm_ll(m, b.x.m);
        offp += b.Gamma.space->n;
    }
    SpacePtr V = Space::make(alg, eps, gram);
    DatumSkeleton out;
    out.Gamma = SpectralElement::make(V, gmat, basis, cert);
    out.x = SplitLatticeFunction::make(V, xb, grads, m);
    std::vector<std::string> seen;
    for (const auto& b : blocks)
        if (std::find(seen.begin(), seen.end(), b.phi_label) == seen.end())
            seen.push_back(b.phi_label);
    for (const auto& s : seen) out.phi_label += (out.phi_label.empty() ? "" : "+") + s;
    for (const auto& b : blocks)
        out.rho_character.insert(out.rho_character.end(), b.rho_character.begin(),
                                 b.rho_character.end());
    return out;
}

bool check_equivalence_witness(const DatumSkeleton& a, const DatumSkeleton& b, const Mat& g) {
    const SpacePtr& V = a.Gamma.space;
    if (b.Gamma.space->n != V->n || b.Gamma.space->alg.get() != V->alg.get())
        throw std::invalid_argument("equivalence witness: skeletons live on different spaces");
    if (!V->in_unitary_group(g))
        throw std::invalid_argument("equivalence witness: g is not an isometry");
    // (a) transported lattice functions agree at every jump of one period
    std::vector<Rat> samples = a.x.jumps_in_period();
    for (const auto& t : b.x.jumps_in_period()) samples.push_back(t);
    for (const auto& t : samples)
        if (!lattice_equal(a.x.lattice_at(t), g.mul(b.x.lattice_at(t)))) return false;
    // (b) Ad_g moves the matrix into Gamma + depth-zero
    Mat ad = g.mul(b.Gamma.gamma).mul(g.inverse());
    if (!moy_prasad_member(ad.sub(a.Gamma.gamma), a.x, Rat(0), MPMode::algebra)) return false;
    // (c) character data
    if (a.phi_label != b.phi_label) return false;
    if (a.rho_character.size() != b.rho_character.size()) return false;
    for (size_t i = 0; i < a.rho_character.size(); ++i)
        if (std::abs(a.rho_character[i] - b.rho_character[i]) > 1e-9) return false;
    return true;
}

bool validate_prime_bound(long p, int n, int e_D) {
    long b1 = 2L * n + 1;
    long b2 = (long)e_D * n + 2;
    return p >= std::max(b1, b2);
}

}  // namespace theta
