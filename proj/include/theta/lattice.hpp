#pragma once

#include "theta/hermitian.hpp"

namespace theta {

// ---- o_D-lattice utilities (matrices of column generators) ----

// Column basis of the o_D-module spanned by the columns of gens (DVR column
// echelon; zero-at-precision columns dropped).
Mat lattice_column_basis(const Mat& gens);
// Membership of w in the full-rank lattice with basis matrix B.
bool lattice_contains(const Mat& basis, const Mat& w);
// Inclusion of lattices: every column of the second lies in the first.
bool lattice_includes(const Mat& basis, const Mat& sub);
bool lattice_equal(const Mat& b1, const Mat& b2);
Mat lattice_sum(const Mat& a, const Mat& b);
Mat lattice_intersect(const Mat& a, const Mat& b);
// Form-dual L* = {v : <v, L> in p_D} of a full-rank lattice on the space.
Mat lattice_form_dual(const SpacePtr& V, const Mat& basis);
// Kronecker product (used by tensor lattices).
Mat kron(const Mat& A, const Mat& B);

// ---- split lattice functions ----

// sL_t = direct sum of v_i varpi_D^{ceil(e_D (t - c_i))} for the adapted
// basis v_i (columns of `basis`) with gradings c_i in (1/m)Z.  Decreasing,
// left-continuous, periodic with sL_{t + 1/e_D} = sL_t varpi_D.
struct SplitLatticeFunction {
    SpacePtr space;
    Mat basis;
    std::vector<Rat> gradings;
    long m = 1;

    static SplitLatticeFunction make(SpacePtr space, Mat basis, std::vector<Rat> gradings,
                                     long m);

    long long pi_exp(int i, const Rat& t) const;  // ceil(e_D (t - c_i))
    Mat lattice_at(const Rat& t) const;           // basis matrix of sL_t
    Mat lattice_just_after(const Rat& t) const;   // sL_{t+}
    // distinct jump points in the fundamental window (0, 1/e_D]
    std::vector<Rat> jumps_in_period() const;
};

SplitLatticeFunction dual_lattice_function(const SplitLatticeFunction& sL);
// (sL_t)* = sL_{-t+} at every sample (plus all jumps of one period).
bool is_self_dual(const SplitLatticeFunction& sL, const std::vector<Rat>& samples = {});

// Tensor of two split functions: the induced function on V (x) V' with
// adapted basis the Kronecker basis and gradings c_i + c'_j.
struct TensorLattice {
    SplitLatticeFunction left, right;
    SpacePtr tensor_space;       // sign eps * eps', gram = kron
    SplitLatticeFunction fn;     // induced function on the tensor space
};
TensorLattice tensor_lattice(const SplitLatticeFunction& sL, const SplitLatticeFunction& sLp);

// Moy-Prasad membership at depth t.  Algebra mode: X sL_u <= sL_{u+t} for
// all u.  Group mode (t > 0): g - 1 in depth t and g in U(V); at t = 0 the
// stabilizer condition g sL_u = sL_u.
enum class MPMode { algebra, group };
bool moy_prasad_member(const Mat& X, const SplitLatticeFunction& sL, const Rat& t, MPMode mode);
// The grade of the leading coefficient: largest t with X in depth t (over
// the value group (1/(e_D m))Z); throws if X vanishes at precision.
Rat moy_prasad_grade(const Mat& X, const SplitLatticeFunction& sL);

// ---- good lattices and residue forms ----

// L = sL_{0+} with L* varpi_D <= L <= L*; residue spaces ell = L / L* varpi_D
// (form: residue of varpi_D^{-1}<,>) and ell* = L* / L (form: residue of
// <,>), both over the residue field of D.
struct GoodLatticeResidues {
    AlgebraPtr alg;
    Mat L, Lstar;            // basis matrices
    FqPtr fld;
    bool conj;               // residue forms are conjugate-sesquilinear (f_D = p^2)
    int dim_l = 0, dim_lstar = 0;
    FqMat form_l, form_lstar;
    Mat lifts_l, lifts_lstar;  // columns of V lifting the residue bases
    int eps_l, eps_lstar;      // eps_D * eps and eps
};
GoodLatticeResidues good_lattice_residues(const SplitLatticeFunction& sL);

// Build a space in the tower of (alg, eps) with a vertex lattice function
// whose residues realize the given pair of nondegenerate forms: ell* slots
// carry unit Gram entries at grading 0, ell slots carry varpi_D * unit at
// grading 1/(2 e_D).
struct UpsilonResult {
    SpacePtr space;
    SplitLatticeFunction fn;
};
UpsilonResult upsilon(const AlgebraPtr& alg, int eps, const FqMat& l_form,
                      const FqMat& lstar_form);

// ---- o_D-module functions and the self-dual hull ----

// A decreasing, left-continuous, periodic family of o_D-submodules given on
// the jumps of one fundamental window (0, 1/e_D]; value between jumps is the
// value at the next jump, and N_{t + 1/e_D} = N_t varpi_D.
struct ModuleFunction {
    SpacePtr space;
    long m = 1;  // jumps lie in (1/(2m))Z
    std::vector<Rat> jumps;  // increasing, inside (0, 1/e_D]
    std::vector<Mat> gens;   // generators of N at the corresponding jump
    Mat at(const Rat& t) const;  // generators of N_t (varpi-shifted)
};

// Checks the pairing hypothesis <N_{t1}, N_{t2}> <= p_D^{ceil(t1+t2+1/m)} on
// all pairs of jumps across two periods.
bool module_pairing_bound(const ModuleFunction& N);

// Self-dual lattice function sL with jumps in (1/2m)Z and N_t <= sL_{t+1/2m},
// built from a good lattice R containing N_0 (the smallest good lattice
// diagonal in ref_basis) by the two-branch reflection formula.
SplitLatticeFunction selfdual_from_module_function(const ModuleFunction& N, const Mat& ref_basis);

}  // namespace theta
