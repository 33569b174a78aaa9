#include <complex>

#include "doctest.h"
#include "theta/fweil.hpp"

using namespace theta;

namespace {

FqMat alt2(const FqPtr& F) {
    FqMat J = FqMat::zero(F, 2, 2);
    J.at(0, 1) = F->one();
    J.at(1, 0) = F->neg(F->one());
    return J;
}

double op_dist(const CMat& a, const CMat& b) { return (a - b).cwiseAbs().maxCoeff(); }

long count_deg(const FiniteGroupRepTable& t, long d, int cusp = -1) {
    long n = 0;
    for (size_t i = 0; i < t.degrees.size(); ++i)
        if (t.degrees[i] == d && (cusp < 0 || t.cuspidal[i] == cusp)) ++n;
    return n;
}

}  // namespace

TEST_CASE("schrodinger model obeys the heisenberg relations") {
    auto F3 = Fq::make(3, 1);
    auto W = FiniteSymplecticSpace::make(F3, alt2(F3));
    auto R = build_weil(W);
    CHECK(R.dim == 3);
    CHECK(R.n == 1);

    for (long a = 0; a < 9; ++a)
        for (long b = 0; b < 9; ++b) {
            HeisEl x{{F3->element(a % 3), F3->element(a / 3)}, F3->zero()};
            HeisEl y{{F3->element(b % 3), F3->element(b / 3)}, F3->one()};
            HeisEl z = heis_mul(W, x, y);
            CMat lhs = R.heisenberg(x.w, x.t) * R.heisenberg(y.w, y.t);
            CHECK(op_dist(lhs, R.heisenberg(z.w, z.t)) < 1e-9);
        }
    // the center acts by the additive character
    CMat c = R.heisenberg({F3->zero(), F3->zero()}, F3->one());
    CHECK(op_dist(c, W.psi(F3->one()) * CMat::Identity(3, 3)) < 1e-12);
}

TEST_CASE("metaplectic operators form a linear representation") {
    auto F3 = Fq::make(3, 1);
    auto W = FiniteSymplecticSpace::make(F3, alt2(F3));
    auto R = build_weil(W);
    FiniteHermitianSpace sp2{F3, false, -1, alt2(F3)};
    auto G = isometry_group(sp2);
    REQUIRE(G.size() == 24);

    CHECK(op_dist(R.weil(FqMat::identity(F3, 2)), CMat::Identity(3, 3)) < 1e-12);
    for (const auto& g : G)
        for (const auto& h : G)
            CHECK(op_dist(R.weil(g) * R.weil(h), R.weil(g.mul(h))) < 1e-9);

    // conjugation moves Heisenberg operators along the linear action
    for (const auto& g : G)
        for (long a = 0; a < 9; ++a) {
            std::vector<FqEl> w{F3->element(a % 3), F3->element(a / 3)};
            std::vector<FqEl> gw(2, F3->zero());
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    gw[(size_t)i] = F3->add(gw[(size_t)i], F3->mul(g.at(i, j), w[(size_t)j]));
            CMat lhs = R.weil(g) * R.heisenberg(w, F3->zero()) * R.weil(g).adjoint();
            CHECK(op_dist(lhs, R.heisenberg(gw, F3->zero())) < 1e-9);
        }
}

TEST_CASE("parabolic determinant character and translation invariants") {
    auto F3 = Fq::make(3, 1);
    auto W = FiniteSymplecticSpace::make(F3, alt2(F3));
    auto R = build_weil(W);

    FqMat m = FqMat::identity(F3, 2);
    m.at(0, 0) = F3->from_int(2);
    m.at(1, 1) = F3->inv(F3->from_int(2));
    CHECK(chi_parabolic(R, m) == -1);
    CHECK(chi_parabolic(R, FqMat::identity(F3, 2)) == 1);
    FqMat low = FqMat::identity(F3, 2);
    low.at(1, 0) = F3->one();
    CHECK_THROWS_AS(chi_parabolic(R, low), std::invalid_argument);

    // averaging the positive-half translations projects onto a line, and
    // Levi elements act there by the determinant character
    CMat P = CMat::Zero(R.dim, R.dim);
    for (long a = 0; a < 3; ++a) P += R.heisenberg({F3->element(a), F3->zero()}, F3->zero());
    P /= 3.0;
    CHECK(std::abs(P.trace().real() - 1.0) < 1e-9);
    CMat v = P.col(0) / P.col(0).norm();
    std::complex<double> scal = (v.adjoint() * R.weil(m) * v)(0, 0);
    CHECK(std::abs(scal - (double)chi_parabolic(R, m)) < 1e-9);
}

TEST_CASE("invariants of a partial polarization carry the smaller model") {
    // dim 4 over f_3: W+ = span(e1); invariants are the functions supported
    // on y1 = 0 and transform under the W0 = span(e2, f2) operators
    auto F3 = Fq::make(3, 1);
    int n = 2;
    FqMat J = FqMat::zero(F3, 4, 4);
    for (int i = 0; i < n; ++i) {
        J.at(i, n + i) = F3->one();
        J.at(n + i, i) = F3->neg(F3->one());
    }
    auto W = FiniteSymplecticSpace::make(F3, J);
    auto R = build_weil(W);
    REQUIRE(R.dim == 9);
    auto W0 = FiniteSymplecticSpace::make(F3, alt2(F3));
    auto R0 = build_weil(W0);

    // embedding of the y1 = 0 functions
    auto emb = [&](long long small_idx) {
        std::vector<FqEl> y0 = R0.point(small_idx);
        return R.index({F3->zero(), y0[0]});
    };
    // Sp(W0) embedded as the identity on the e1/f1 pair
    FiniteHermitianSpace sp2{F3, false, -1, alt2(F3)};
    for (const auto& h : isometry_group(sp2)) {
        FqMat g = FqMat::identity(F3, 4);
        // h acts on coordinates (e2, f2) = rows/cols {1, 3}
        g.at(1, 1) = h.at(0, 0);
        g.at(1, 3) = h.at(0, 1);
        g.at(3, 1) = h.at(1, 0);
        g.at(3, 3) = h.at(1, 1);
        CMat big = R.weil(g), small = R0.weil(h);
        for (long long i = 0; i < R0.dim; ++i)
            for (long long j = 0; j < R0.dim; ++j)
                CHECK(std::abs(big(emb(i), emb(j)) - small(i, j)) < 1e-9);
    }
    // Levi element scaling W+ only: acts on the invariants by the character
    FqMat g = FqMat::identity(F3, 4);
    g.at(0, 0) = F3->from_int(2);
    g.at(2, 2) = F3->inv(F3->from_int(2));
    CMat big = R.weil(g);
    for (long long i = 0; i < R0.dim; ++i)
        for (long long j = 0; j < R0.dim; ++j) {
            double want = (i == j) ? -1.0 : 0.0;  // legendre(2) = -1
            CHECK(std::abs(big(emb(i), emb(j)) - want) < 1e-9);
        }
}

TEST_CASE("special morphism respects the graded commutator law") {
    // graded sp4 lattice with a shallow two-eigenvalue element; the level
    // s = 1/2 residue quotient is a nondegenerate 4-dimensional space
    auto sp = Algebra::make(AlgKind::split, 5, 10);
    auto F = sp->F;
    Mat I2 = Mat::identity(sp, 2);
    Mat gram = Mat::zero(sp, 4, 4);
    gram.paste(0, 2, I2);
    gram.paste(2, 0, I2.neg());
    SpacePtr V = Space::make(sp, -1, gram);
    std::vector<Rat> grads{Rat(0), Rat(1, 2), Rat(0), Rat(-1, 2)};
    auto x = SplitLatticeFunction::make(V, Mat::identity(sp, 4), grads, 2);
    Mat G = Mat::zero(sp, 4, 4);
    G.at(0, 2) = F->from_rational(1, 5);
    G.at(2, 0) = F->from_rational(1, 5);
    G.at(1, 3) = F->from_rational(9, 25);
    G.at(3, 1) = F->one();
    auto rsd = gamma_residue_form(V, x, G, Rat(1, 2));
    REQUIRE(rsd.basis.size() == 4);
    REQUIRE(rsd.radical.empty());
    auto W = residue_heisenberg_space(rsd);
    CHECK(W.dim == 4);

    Rng rng(20260825);
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<FqEl> cx, cy;
        for (int k = 0; k < 4; ++k) {
            cx.push_back(rsd.fld->element(rng.uniform(0, 4)));
            cy.push_back(rsd.fld->element(rng.uniform(0, 4)));
        }
        HeisEl hx = special_morphism_residue(V, rsd, G, cx);
        HeisEl hy = special_morphism_residue(V, rsd, G, cy);
        HeisEl prod = heis_mul(W, hx, hy);

        // independent side: B(X + Y + [X,Y]/2, Gamma) from matrix arithmetic
        auto lift = [&](const std::vector<FqEl>& c) {
            Mat X = Mat::zero(sp, 4, 4);
            for (size_t k = 0; k < c.size(); ++k)
                X = X.add(rsd.basis[k].scale(sp->D->from_int(rsd.fld->index_of(c[k]))));
            return X;
        };
        Mat X = lift(cx), Y = lift(cy);
        Mat bch = X.add(Y).add(X.mul(Y).sub(Y.mul(X)).scale(sp->D->from_rational(1, 2)));
        FqEl want = V->trace_form(bch, G).residue_image();
        CHECK(rsd.fld->index_of(prod.t) == want.fld->index_of(want));
        for (int k = 0; k < 4; ++k)
            CHECK(prod.w[(size_t)k] == rsd.fld->add(cx[(size_t)k], cy[(size_t)k]));
    }
}

TEST_CASE("character tables of the small residue groups") {
    auto F3 = Fq::make(3, 1);
    FiniteHermitianSpace sp2{F3, false, -1, alt2(F3)};
    auto tab = character_table(sp2);
    CHECK(tab.order() == 24);
    REQUIRE(tab.classes() == 7);
    CHECK(count_deg(tab, 1) == 3);
    CHECK(count_deg(tab, 2) == 3);
    CHECK(count_deg(tab, 3) == 1);
    // cuspidal: the two nontrivial linear characters and one of the three
    // two-dimensional representations
    CHECK(count_deg(tab, 1, 1) == 2);
    CHECK(count_deg(tab, 2, 1) == 1);
    CHECK(count_deg(tab, 3, 1) == 0);
    CHECK(tab.cuspidal[(size_t)tab.trivial_char()] == 0);
    for (int i = 0; i < (int)tab.chars.size(); ++i)
        for (int j = 0; j < (int)tab.chars.size(); ++j)
            CHECK(std::abs(tab.inner(i, j) - (i == j ? 1.0 : 0.0)) < 1e-6);

    auto F9 = Fq::make(3, 2);
    FiniteHermitianSpace u1{F9, true, 1, FqMat::identity(F9, 1)};
    auto tab_u1 = character_table(u1);
    CHECK(tab_u1.order() == 4);
    CHECK(count_deg(tab_u1, 1, 1) == 4);  // anisotropic: all cuspidal

    FqMat H = FqMat::zero(F3, 2, 2);
    H.at(0, 1) = F3->one();
    H.at(1, 0) = F3->one();
    FiniteHermitianSpace o2p{F3, false, 1, H};
    CHECK(witt_index_f(o2p) == 1);
    CHECK(character_table(o2p).order() == 4);

    // mismatched gram and sign is rejected
    FiniteHermitianSpace bad{F3, false, -1, H};
    CHECK_THROWS_AS(isometry_group(bad), std::invalid_argument);
}

TEST_CASE("theta decomposition of the unitary circle pair") {
    auto F9 = Fq::make(3, 2);
    FiniteHermitianSpace u1{F9, true, 1, FqMat::identity(F9, 1)};
    FqEl delta = F9->sqrt(F9->neg(F9->one()));
    FqMat skew = FqMat::identity(F9, 1);
    skew.at(0, 0) = delta;
    FiniteHermitianSpace u1m{F9, true, -1, skew};

    auto pair = make_dual_pair(u1, u1m);
    CHECK(pair.W.dim == 2);
    CHECK(pair.rep.dim == 3);
    auto tab = character_table(u1);
    auto tab_m = character_table(u1m);

    // the two embedded actions commute
    CMat A = pair.rep.weil(pair.embed_left(tab.elements[1]));
    CMat B = pair.rep.weil(pair.embed_right(tab_m.elements[1]));
    CHECK(op_dist(A * B, B * A) < 1e-9);

    long total = 0;
    int matched = 0;
    for (int r = 0; r < (int)tab.chars.size(); ++r) {
        auto dec = theta_decompose(pair, tab, r, tab_m);
        CHECK(dec.size() <= 1);  // all circle characters are cuspidal
        for (auto& pr : dec) {
            total += pr.second * tab.degrees[(size_t)r] * tab_m.degrees[(size_t)pr.first];
            ++matched;
        }
    }
    CHECK(total == pair.rep.dim);
    CHECK(matched == 3);  // one character has no partner on this side

    // cross-check against isotypic projectors
    auto proj = [&](const FiniteGroupRepTable& t, int r, bool leftside) -> CMat {
        CMat P = CMat::Zero(pair.rep.dim, pair.rep.dim);
        for (size_t i = 0; i < t.elements.size(); ++i)
            P += std::conj(t.chars[(size_t)r][(size_t)t.class_of[i]]) *
                 pair.rep.weil(leftside ? pair.embed_left(t.elements[i])
                                        : pair.embed_right(t.elements[i]));
        return P * (1.0 / (double)t.order());
    };
    for (int r = 0; r < (int)tab.chars.size(); ++r) {
        auto dec = theta_decompose(pair, tab, r, tab_m);
        for (int s = 0; s < (int)tab_m.chars.size(); ++s) {
            double tr = (proj(tab, r, true) * proj(tab_m, s, false)).trace().real();
            long want = 0;
            for (auto& pr : dec)
                if (pr.first == s) want = pr.second;
            CHECK(std::abs(tr - (double)want) < 1e-6);
        }
    }

    // sign compatibility is enforced
    CHECK_THROWS_AS(make_dual_pair(u1, u1), std::invalid_argument);
}

TEST_CASE("zero-dimensional member of a dual pair tower") {
    auto F3 = Fq::make(3, 1);
    FiniteHermitianSpace zero_o{F3, false, 1, FqMat::zero(F3, 0, 0)};
    FiniteHermitianSpace sp2{F3, false, -1, alt2(F3)};
    auto pair = make_dual_pair(zero_o, sp2);
    CHECK(pair.W.dim == 0);
    CHECK(pair.rep.dim == 1);
    auto tab0 = character_table(zero_o);
    CHECK(tab0.order() == 1);
    auto tab = character_table(sp2);
    auto dec = theta_decompose(pair, tab0, 0, tab);
    REQUIRE(dec.size() == 1);
    CHECK(dec[0].first == tab.trivial_char());
    CHECK(dec[0].second == 1);
}

TEST_CASE("first occurrence walks both orthogonal towers") {
    auto F3 = Fq::make(3, 1);
    FiniteHermitianSpace sp2{F3, false, -1, alt2(F3)};
    auto tab = character_table(sp2);
    FiniteHermitianSpace split_o{F3, false, 1, FqMat::zero(F3, 0, 0)};
    FqMat an = FqMat::identity(F3, 2);
    an.at(1, 1) = F3->nonsquare();
    FiniteHermitianSpace aniso_o{F3, false, 1, an};

    // trivial character appears immediately at the base of the split tower
    auto fo_triv = first_occurrence(sp2, tab, tab.trivial_char(), split_o, 2);
    CHECK(fo_triv.found);
    CHECK(fo_triv.planes == 0);

    for (int r = 0; r < (int)tab.chars.size(); ++r) {
        if (tab.cuspidal[(size_t)r] != 1 || tab.degrees[(size_t)r] != 2) continue;
        auto split = first_occurrence(sp2, tab, r, split_o, 2);
        auto other = first_occurrence(sp2, tab, r, aniso_o, 1);
        CHECK(split.found);
        CHECK(split.planes == 2);  // first partner lives on the 4-dim split form
        CHECK(other.found);
        CHECK(other.planes == 1);  // and appears one plane up the other tower
        // the partner picked up at first occurrence is itself cuspidal
        CHECK(split.tab_p.cuspidal[(size_t)split.rho_p] == 1);
    }
}

TEST_CASE("depth-zero data lift through the residue correspondence") {
    auto sp = Algebra::make(AlgKind::split, 3, 8);
    auto F = sp->F;
    Mat gram = Mat::zero(sp, 2, 2);
    gram.at(0, 1) = F->one();
    gram.at(1, 0) = F->from_int(-1);
    SpacePtr V = Space::make(sp, -1, gram);
    std::vector<Rat> grads{Rat(0), Rat(0)};
    auto x = SplitLatticeFunction::make(V, Mat::identity(sp, 2), grads, 1);
    SpectralElement zeroG = SpectralElement::make(V, Mat::zero(sp, 2, 2), Mat::identity(sp, 2),
                                                  {{sp->D, sp->D->zero(), 2}});
    DatumSkeleton datum{x, zeroG, "phi0", {}};

    auto res = good_lattice_residues(x);
    REQUIRE(res.dim_l == 0);
    REQUIRE(res.dim_lstar == 2);
    auto tab = character_table(
        FiniteHermitianSpace{res.fld, res.conj, res.eps_lstar, res.form_lstar});
    int rho = -1;
    for (int r = 0; r < (int)tab.chars.size(); ++r)
        if (tab.cuspidal[(size_t)r] == 1 && tab.degrees[(size_t)r] == 2) rho = r;
    REQUIRE(rho >= 0);

    WittClass triv;
    triv.kind = AlgKind::split;
    triv.eps = 1;
    triv.p = 3;
    auto lift = lift_depth_zero_datum(datum, 0, rho, triv, 2);
    CHECK(lift.cuspidal);
    CHECK(lift.target.space->n == 4);
    CHECK(lift.lp.dim() == 4);
    CHECK(lift.lpstar.dim() == 0);
    CHECK(lift.lp.dim() + lift.lpstar.dim() == lift.target.space->n);
    CHECK(is_self_dual(lift.target.fn));
    CHECK(depth_of(lift.lifted.Gamma).is_infinite());
    CHECK(witt_invariants(lift.target.space) == triv);

    WittClass aniso = triv;
    aniso.aniso_dim = 2;
    aniso.disc = square_class_of_int(1, 3);
    aniso.hasse = 1;
    auto lift2 = lift_depth_zero_datum(datum, 0, rho, aniso, 2);
    CHECK(lift2.target.space->n == 6);
    CHECK(lift2.lp.dim() == 4);
    CHECK(lift2.lpstar.dim() == 2);
    CHECK(witt_invariants(lift2.target.space) == aniso);

    // non-cuspidal input is flagged, not rejected
    auto lift3 = lift_depth_zero_datum(datum, 0, tab.trivial_char(), aniso, 2);
    CHECK_FALSE(lift3.cuspidal);
    CHECK(lift3.target.space->n == 2);

    // a positive-depth certificate is rejected
    Mat Gpos = Mat::zero(sp, 2, 2);
    Gpos.at(0, 1) = F->from_rational(1, 3);
    Gpos.at(1, 0) = F->from_rational(4, 3);
    Mat P = Mat::zero(sp, 2, 2);
    P.at(0, 0) = F->one();
    P.at(1, 0) = F->from_int(2);
    P.at(0, 1) = F->one();
    P.at(1, 1) = F->from_int(-2);
    Elt lam = F->from_rational(2, 3);
    auto Spos = SpectralElement::make(V, Gpos, P, {{F, lam, 1}, {F, -lam, 1}});
    DatumSkeleton bad{x, Spos, "phi0", {}};
    CHECK_THROWS_AS(lift_depth_zero_datum(bad, 0, rho, triv, 2), std::invalid_argument);

    // mismatched target tower sign is rejected
    WittClass wrong = triv;
    wrong.eps = -1;
    CHECK_THROWS_AS(lift_depth_zero_datum(datum, 0, rho, wrong, 2), std::invalid_argument);
}

TEST_CASE("metaplectic normalization holds beyond the smallest prime") {
    // the Weyl-element scalar carries a quadratic symbol of -2; without it the
    // big-cell operators for p = 5 and p = 7 are only projective
    for (long p : {5L, 7L}) {
        auto F = Fq::make(p, 1);
        FqMat J = FqMat::zero(F, 2, 2);
        J.at(0, 1) = F->one();
        J.at(1, 0) = F->neg(F->one());
        auto W = FiniteSymplecticSpace::make(F, J);
        auto R = build_weil(W);
        FiniteHermitianSpace sp2{F, false, -1, J};
        auto G = isometry_group(sp2, 200000);
        Rng rng(0xfeedULL + (unsigned long long)p);
        for (int t = 0; t < 40; ++t) {
            const FqMat& g = G[(size_t)rng.uniform(0, (long long)G.size() - 1)];
            const FqMat& h = G[(size_t)rng.uniform(0, (long long)G.size() - 1)];
            CMat lhs = R.weil(g) * R.weil(h);
            CMat rhs = R.weil(g.mul(h));
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
        }
        // unitarity of a sampled operator
        const FqMat& g = G[(size_t)rng.uniform(0, (long long)G.size() - 1)];
        CMat U = R.weil(g);
        CHECK((U * U.adjoint() - CMat::Identity(R.dim, R.dim)).cwiseAbs().maxCoeff() < 1e-9);
    }
}
