#pragma once

#include <complex>
#include <string>

#include "theta/lattice.hpp"

namespace theta {

// ---- tower embeddings and coordinates ----

// Coordinates of x on the F-basis {w^a pi^b : a < f, b < e} of its tower,
// index a*e + b, with per-slot capped precision.
std::vector<Elt> tower_f_coords(const Elt& x, const TowerPtr& F);

// Embed x into a larger tame tower: the unramified generator goes to the
// Teichmueller lift of the smallest-index root of its residue modulus, and
// pi goes to pi_big^(e_big/e_small).  Requires f | f_big and e | e_big.
Elt embed_tower(const Elt& x, const TowerPtr& big);

// Matrix over D of multiplication by gamma on E, for the D-basis
// {w_E^a pi_E^b : a < f_E/f_D, b < e_E/e_D} of E (index a*(e_E/e_D) + b).
Mat regular_rep(const AlgebraPtr& alg, const TowerPtr& E, const Elt& gamma);

// All Galois conjugates of gamma over the base field: Frobenius powers
// composed with pi -> zeta pi rotations.  Requires e | q - 1 (normality).
std::vector<Elt> tower_conjugates(const Elt& gamma);

// ---- certified semisimple elements ----

// A skew-adjoint matrix together with a spectral certificate: a basis P and
// blocks (E_j, gamma_j, mult_j) such that P^-1 Gamma P is the block diagonal
// of mult_j copies of the regular representation of gamma_j on E_j over D.
struct SpectralBlock {
    TowerPtr E;
    Elt gamma;
    int mult = 1;
    int dim(const AlgebraPtr& alg) const;  // mult * [E : D]
};

struct SpectralElement {
    SpacePtr space;
    Mat gamma;
    Mat basis;
    std::vector<SpectralBlock> blocks;

    // Validates: gamma skew-adjoint, basis invertible, certificate
    // reproduces gamma, eigenvalue multiset closed under negation.
    static SpectralElement make(SpacePtr space, Mat gamma, Mat basis,
                                std::vector<SpectralBlock> blocks);
};

// Minimum of val(gamma_j) over the blocks; infinite when all blocks vanish.
Val depth_of(const SpectralElement& G);
// max(-depth, 0): the depth of a datum built on G.
Rat datum_depth(const SpectralElement& G);
// True iff every difference of eigenvalues over a common splitting tower is
// zero or has valuation equal to the depth.
bool is_good(const SpectralElement& G);

// ---- good factorizations ----

// Gamma = sum of terms Gamma_0 .. Gamma_d plus a remainder Gamma_{-1} of
// depth >= 0: terms commute, the positive-depth terms are good with depths
// -r_{d-1} < ... < -r_0 < 0 (case I, Gamma_d = 0) or -r_d < ... < -r_0
// (case II, Gamma_d a nonzero central scalar).
struct GoodFactorization {
    SpacePtr space;
    std::vector<SpectralElement> terms;  // Gamma_0 .. Gamma_d
    std::vector<Rat> r;                  // r_i = -depth(Gamma_i); r[d] per case
    SpectralElement remainder;           // Gamma_{-1}
    bool case_two = false;
    int d() const { return (int)terms.size() - 1; }
};

// Constructive factorization: repeatedly extract the leading good term at
// the current minimal valuation k/e (reduced) by snapping b = p^{-k} g^e to
// the root of unity in its residue disc and solving for the e-th root.
GoodFactorization howe_factorize(const SpectralElement& G);

// ---- data skeletons, block decomposition, direct sums ----

struct DatumSkeleton {
    SplitLatticeFunction x;  // self-dual lattice function on Gamma's space
    SpectralElement Gamma;
    std::string phi_label;   // opaque character handle
    std::vector<std::complex<double>> rho_character;  // residue-group character
};

// Splits a skeleton along the valuation classes of the certificate blocks:
// returns the positive-depth blocks in decreasing depth followed by the
// depth-zero block (possibly zero-dimensional).  The underlying subspaces
// must be orthogonal and x must be adapted to the class idempotents.
std::vector<DatumSkeleton> block_decompose(const DatumSkeleton& datum);

// Orthogonal direct sum; requires strictly decreasing positive depths with
// an optional depth-zero block last.
DatumSkeleton direct_sum_data(const std::vector<DatumSkeleton>& blocks);

// Witness checker for equivalence of skeletons under g in U(V): transported
// lattice function, Ad_g remainder membership in depth zero, and matching
// character data.
bool check_equivalence_witness(const DatumSkeleton& a, const DatumSkeleton& b, const Mat& g);

// p >= max{2n + 1, e_D n + 2}; callers warn rather than error when false.
bool validate_prime_bound(long p, int n, int e_D);

}  // namespace theta
