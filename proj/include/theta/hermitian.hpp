#pragma once

#include <memory>
#include <vector>

#include "theta/algebra.hpp"

namespace theta {

class Space;
using SpacePtr = std::shared_ptr<const Space>;

// An eps-Hermitian space over the algebra's D: a free module of rank n with
// form <u, v> = tau(u)^T gram v (semilinear in the first argument), where
// gram satisfies tau(gram)^T = eps * gram.
class Space : public std::enable_shared_from_this<Space> {
public:
    static SpacePtr make(AlgebraPtr alg, int eps, Mat gram);

    AlgebraPtr alg;
    int eps;
    int n;
    Mat gram;
    Mat gram_inv;

    // pairing of coordinate column vectors (n x 1 matrices)
    Elt pair(const Mat& u, const Mat& v) const;
    // X* with <Xu, v> = <u, X* v>
    Mat adjoint(const Mat& X) const;
    bool in_unitary_lie(const Mat& X) const;    // X + X* = 0 at precision
    bool in_unitary_group(const Mat& g) const;  // g* g = 1 at precision
    // invariant form B(X, Y) = 1/2 tr_F(XY) on endomorphisms
    Elt trace_form(const Mat& X, const Mat& Y) const;
};

// The twisted space V_Gamma: same module, gram' = gram * Gamma, sign -eps.
SpacePtr twist_space(const SpacePtr& V, const Mat& gamma);

// Square-class of a nonzero base-field element: (valuation mod 2, Legendre
// of the unit part).  Acts as the group Q_p^x / squares of order 4.
struct SquareClass {
    int vp = 0;    // 0 or 1
    int sq = 1;    // +-1
    bool operator==(const SquareClass& o) const { return vp == o.vp && sq == o.sq; }
};

SquareClass square_class(const Elt& x);                  // base tower element
SquareClass square_class_mul(SquareClass a, SquareClass b, long p);
SquareClass square_class_of_int(long long n, long p);
int hilbert_classes(SquareClass a, SquareClass b, long p);
long long square_class_rep(SquareClass c, long p);       // {1, u, p, up}

// Witt-group element for the supported kinds.  For symmetric forms over Q_p
// the tuple is (anisotropic dimension, discriminant square-class, Hasse
// symbol of the anisotropic kernel); for Hermitian forms over quadratic D
// it is (anisotropic dimension, norm-class of the discriminant); symplectic
// classes are trivial.
struct WittClass {
    AlgKind kind = AlgKind::split;
    int eps = 1;
    long p = 0;
    int aniso_dim = 0;
    SquareClass disc;   // symmetric case
    int hasse = 1;      // symmetric case
    int disc_norm = 1;  // Hermitian case: +1 iff disc is a norm from D

    bool operator==(const WittClass& o) const;
    bool is_trivial() const { return aniso_dim == 0; }
};

WittClass witt_invariants(const SpacePtr& V);
WittClass witt_add(const WittClass& a, const WittClass& b, int prec);
WittClass witt_subtract(const WittClass& a, const WittClass& b, int prec);
WittClass witt_negate(const WittClass& a, int prec);
// Anisotropic diagonal representative (dimension aniso_dim) from the fixed
// dictionary; the zero-dimensional space for the trivial class.
SpacePtr witt_representative(const WittClass& c, int prec);
bool isometric(const SpacePtr& V1, const SpacePtr& V2);

}  // namespace theta
