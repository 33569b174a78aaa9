#pragma once

#include "theta/factor.hpp"

namespace theta {

// ---- dual pair contexts and moment maps ----

// A type-I dual pair: V (sign eps) and V' (sign -eps) over the same algebra.
// W = Hom_D(V, V') carries the symplectic pairing <w1, w2> = tr_F(w1* w2),
// where w* = gram_V^-1 tau(w)^T gram_V' is the star-adjoint.
struct DualPairContext {
    SpacePtr V, Vp;

    static DualPairContext make(SpacePtr V, SpacePtr Vp);

    Mat star(const Mat& w) const;      // w* : V' -> V
    Mat moment(const Mat& w) const;    // M(w) = w* w in u(V)
    Mat moment_p(const Mat& w) const;  // M'(w) = w w* in u(V')
    Elt pair_w(const Mat& w1, const Mat& w2) const;  // tr_F(w1* w2), base field
};

// V_Gamma: the twisted space carrying the unique isometry class of targets
// admitting w with M(w) = Gamma (Gamma good, invertible, skew-adjoint).
SpacePtr gamma_class_space(const SpacePtr& V, const Mat& gamma);

// ---- filtration utilities on Hom spaces ----

// Membership of X in the level-t filtration of Hom(V_src, V_tgt) induced by
// two split lattice functions: X sL_u <= sL'_{u+t} for all u.
bool hom_filtration_member(const Mat& X, const SplitLatticeFunction& tgt,
                           const SplitLatticeFunction& src, const Rat& t);

// An F-basis of the unitary Lie algebra u(V) inside gl(V).
std::vector<Mat> lie_basis(const SpacePtr& V);
// F-basis of the elements of `span` commuting with every matrix in gammas.
std::vector<Mat> centralizer_basis(const SpacePtr& V, const std::vector<Mat>& span,
                                   const std::vector<Mat>& gammas);
// F-basis of the orthogonal complement of `small` inside `big` under the
// invariant trace form.
std::vector<Mat> orth_complement_basis(const SpacePtr& V, const std::vector<Mat>& big,
                                       const std::vector<Mat>& small);

// Dimension over the prime residue field of (S cap Hom_t)/(S cap Hom_{t+})
// for the F-span S of the given matrices.
int filtered_quotient_dim(const std::vector<Mat>& span, const SplitLatticeFunction& tgt,
                          const SplitLatticeFunction& src, const Rat& t);

// ---- transported lattice functions and the coset solver ----

// sL'_t = w sL_{t+s} on the target space; jumps shift by -s and the result
// is self-dual (validated; throws when the input data violate this).
SplitLatticeFunction transported_lattice(const SpacePtr& Vp, const SplitLatticeFunction& sL,
                                         const Mat& w, const Rat& s);

// Successive approximation along the jump filtration: starting from w0 with
// gamma - M(w0) in g_{x,-s+t0} (s = r/2), returns w with M(w) = gamma at
// precision.  gamma_check is a good element in M(w0) + g_{x,-r+} used to
// split each linear step into its centralizer and complement parts.  When
// iters is supplied it receives the number of correction steps taken.
Mat solve_moment(const DualPairContext& ctx, const Mat& w0, const Mat& gamma,
                 const SplitLatticeFunction& sL, const Rat& r, const Mat& gamma_check,
                 const Rat& t0, int* iters = nullptr);

// Conjugate a good factorization along a solved w (requires M(w) equal to
// the factorization's sum); every transported term is certified on V'.
GoodFactorization transport_factorization(const DualPairContext& ctx,
                                          const GoodFactorization& fac, const Mat& w);

// ---- the positive-depth lift ----

struct TransportResult {
    DualPairContext ctx;
    Mat w;
    Rat r, s;
    SplitLatticeFunction xp;    // transported lattice function on V'
    Mat gamma_p;                // Gamma' = M'(w) = w Gamma w^-1
    GoodFactorization fac;      // factorization of Gamma on V
    GoodFactorization fac_p;    // transported factorization on V'
    DatumSkeleton lifted;       // (x', -Gamma', transported labels)
};

// Lift of a single positive-depth block: w = iota into V_Gamma (M(iota) =
// Gamma exactly), transported lattice, factorization transport, and the
// lifted skeleton.
TransportResult lift_positive_block(const DatumSkeleton& datum);
// Same pipeline along a caller-supplied w with M(w) = Gamma.
TransportResult lift_positive_block_with(const DatumSkeleton& datum, const SpacePtr& Vp,
                                         const Mat& w);

// ---- residue symplectic data and structural predicates ----

// The residue symplectic space g_{x,s:s+} with form <X1,X2> = residue of
// B([X1,X2], Gamma), its pairing matrix, and a basis of the radical
// (coordinates in `basis`).
struct ResidueSymplecticData {
    FqPtr fld;               // prime residue field
    std::vector<Mat> basis;  // representatives of a basis of g_{x,s:s+}
    FqMat form;
    std::vector<std::vector<FqEl>> radical;
};
ResidueSymplecticData gamma_residue_form(const SpacePtr& V, const SplitLatticeFunction& sL,
                                         const Mat& gamma, const Rat& s);

struct OrbitStructureReport {
    bool filtration_iso = false;     // residue dims of g^i and g'^i levels agree
    bool isometry = false;           // iota is an isometry with orthogonal factors
    bool radical_match = false;      // radical of the residue form as predicted
    bool dimension_identity = false; // dim g + dim g' = dim b at the s-level
    bool isotropic_diag = false;     // graph of d-alpha is maximal isotropic
    bool square_det = false;         // det of sampled G^0_x elements on the radical
    std::string notes;
    bool all() const {
        return filtration_iso && isometry && radical_match && dimension_identity &&
               isotropic_diag && square_det;
    }
};

OrbitStructureReport verify_orbit_structure(const DatumSkeleton& datum,
                                            const TransportResult& result, int sample_budget);

}  // namespace theta
