#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "theta/moment.hpp"

namespace theta {

using Cx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

// ---- finite symplectic spaces ----

// A nondegenerate alternating space over F_q (odd q) together with the
// additive character used by every Weil-representation construction.
// psi_p lists the values of the character on the prime field; the character
// of F_q is x -> psi_p[Tr(x)].
struct FiniteSymplecticSpace {
    FqPtr fld;
    int dim = 0;
    FqMat form;
    std::vector<Cx> psi_p;

    static FiniteSymplecticSpace make(FqPtr fld, FqMat form);
    static FiniteSymplecticSpace make_with(FqPtr fld, FqMat form, std::vector<Cx> psi_p);
    Cx psi(const FqEl& x) const;
};

// A symplectic basis e_1..e_n, f_1..f_n (columns) with <e_i, f_j> = delta.
FqMat symplectic_basis(const FiniteSymplecticSpace& W);

// ---- the Weil representation (Schroedinger model) ----

// Model on complex functions on Y = span(f_1..f_n); operators are q^n x q^n.
// Group elements of Sp(W) are evaluated through their Bruhat factorization
// with the Gauss-sum-normalized Fourier transform at the Weyl element, which
// makes the representation linear (not just projective) for odd q.
struct FiniteWeilRep {
    FiniteSymplecticSpace W;
    int n = 0;
    long long dim = 1;  // q^n
    FqMat std_basis, std_basis_inv;
    Cx gauss_norm;  // (legendre(-2) * conj G(psi) / q)^n

    // Heisenberg operator of (w, t), w in W's own coordinates.
    CMat heisenberg(const std::vector<FqEl>& w, const FqEl& t) const;
    // Weil operator of g in Sp(W), in W's own coordinates.
    CMat weil(const FqMat& g) const;
    // Same for g already in standard symplectic coordinates.
    CMat weil_std(const FqMat& g) const;

    // tuple indexing of the model space: functions on Y = F_q^n
    std::vector<FqEl> point(long long idx) const;
    long long index(const std::vector<FqEl>& y) const;
};

FiniteWeilRep build_weil(const FiniteSymplecticSpace& W, long long op_budget = 729);

// det(g|_{W_+})^((q-1)/2) in {+1,-1} for g (standard coordinates) in the
// Siegel parabolic stabilizing W_+ = span(e_1..e_n); throws otherwise.
int chi_parabolic(const FiniteWeilRep& R, const FqMat& g_std);

// ---- Heisenberg group of a residue symplectic space ----

struct HeisEl {
    std::vector<FqEl> w;
    FqEl t;
};
HeisEl heis_mul(const FiniteSymplecticSpace& W, const HeisEl& a, const HeisEl& b);

// The residue quotient as a finite symplectic space over the prime field;
// throws when the supplied pairing is degenerate.
FiniteSymplecticSpace residue_heisenberg_space(const ResidueSymplecticData& rsd);

// zeta(exp X) = (class of X, residue of B(X, gamma)) for the lift
// X = sum coords_k * basis_k of a residue class.
HeisEl special_morphism_residue(const SpacePtr& V, const ResidueSymplecticData& rsd,
                                const Mat& gamma, const std::vector<FqEl>& coords);

// ---- finite hermitian spaces ----

// An eps-hermitian space over F_q; when conj is set the form is sesquilinear
// with respect to x -> x^p (requires q = p^2), semilinear in the first slot.
struct FiniteHermitianSpace {
    FqPtr fld;
    bool conj = false;
    int eps = 1;
    FqMat gram;
    int dim() const { return gram.rows; }
};

FqEl fq_tau(const FiniteHermitianSpace& l, const FqEl& x);
// Full isometry group by pruned column-by-column enumeration.
std::vector<FqMat> isometry_group(const FiniteHermitianSpace& l, long cap = 50000);
int witt_index_f(const FiniteHermitianSpace& l);
// l + one hyperbolic plane (new coordinates appended).
FiniteHermitianSpace add_hyperbolic(const FiniteHermitianSpace& l);

// ---- character tables ----

struct FiniteGroupRepTable {
    std::vector<FqMat> elements;
    std::vector<int> class_of;            // element index -> class index
    std::vector<int> class_rep;           // class index -> element index
    std::vector<long> class_size;
    std::vector<std::vector<Cx>> chars;   // chars[irrep][class]
    std::vector<long> degrees;
    std::vector<int> cuspidal;            // 1 yes / 0 no / -1 unknown

    int classes() const { return (int)class_rep.size(); }
    long order() const { return (long)elements.size(); }
    int index_of_element(const FqMat& g) const;  // -1 when absent
    int trivial_char() const;
    // class inner product <chi_i, chi_j>
    Cx inner(int i, int j) const;
};

// Burnside-Dixon table on an explicit element list; cuspidality from the
// supplied unipotent radical subgroups (empty list = anisotropic convention,
// every character cuspidal).
FiniteGroupRepTable character_table_of(std::vector<FqMat> elements,
                                       const std::vector<std::vector<FqMat>>& radicals);
// Convenience: isometry group of l with radicals derived from one isotropic
// subspace of each dimension up to the Witt index.
FiniteGroupRepTable character_table(const FiniteHermitianSpace& l, long cap = 50000);

// ---- finite theta correspondence ----

// Dual pair (U(l), U(l')) inside Sp(l (x) l') over the prime field; requires
// the tensor pairing Tr(<,>_l tau(<,>_l')) to be alternating.
struct FiniteDualPair {
    FiniteHermitianSpace l, lp;
    FiniteSymplecticSpace W;  // over F_p
    FiniteWeilRep rep;
    FqMat embed_left(const FqMat& g) const;
    FqMat embed_right(const FqMat& gp) const;
};
FiniteDualPair make_dual_pair(const FiniteHermitianSpace& l, const FiniteHermitianSpace& lp,
                              long long op_budget = 729);

// Multiplicities <omega, rho (x) rho'> for every rho' in tab_p; returns the
// pairs with positive multiplicity.
std::vector<std::pair<int, long>> theta_decompose(const FiniteDualPair& pair,
                                                  const FiniteGroupRepTable& tab, int rho,
                                                  const FiniteGroupRepTable& tab_p);

struct FirstOccurrence {
    bool found = false;
    int planes = 0;  // hyperbolic planes added to the anisotropic kernel
    FiniteHermitianSpace lp;
    FiniteGroupRepTable tab_p;
    int rho_p = -1;
};
// Walk the Witt tower of `aniso`, lifting rho at each member until the theta
// multiplicity is nonzero.
FirstOccurrence first_occurrence(const FiniteHermitianSpace& l, const FiniteGroupRepTable& tab,
                                 int rho, const FiniteHermitianSpace& aniso, int tower_cap = 3,
                                 long long op_budget = 729);

// ---- depth-zero lift ----

struct DepthZeroLift {
    GoodLatticeResidues res;  // residues of the input vertex
    FiniteHermitianSpace l, lstar, lp, lpstar;
    FiniteGroupRepTable tab_l, tab_lstar, tab_lp, tab_lpstar;
    int rho_lp = -1, rho_lpstar = -1;
    UpsilonResult target;  // V' with its vertex lattice function
    DatumSkeleton lifted;
    bool cuspidal = false;
};

// Depth-zero lift along the Witt class Tp of the target tower: rho_l lifts
// at first occurrence in the l'*-tower, rho_lstar in the l'-tower, and the
// result is assembled on V' = Upsilon'(l', l'*).  Non-cuspidal inputs are
// flagged, not rejected.  Ramified-quadratic algebras are unsupported (their
// residue pairs need the doubled model) and throw.
DepthZeroLift lift_depth_zero_datum(const DatumSkeleton& datum, int rho_l, int rho_lstar,
                                    const WittClass& Tp, int tower_cap = 3,
                                    long long op_budget = 729);

}  // namespace theta
