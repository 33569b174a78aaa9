#pragma once

#include <memory>
#include <vector>

#include "theta/tower.hpp"

namespace theta {

enum class AlgKind { split, unram_quad, ram_quad };

class Algebra;
using AlgebraPtr = std::shared_ptr<const Algebra>;

// A base field F = Q_p together with a coefficient algebra D of degree at
// most 2 and an involution tau fixing F: D = F (tau = id), the unramified
// quadratic extension (tau = Frobenius), or the ramified quadratic
// extension pi^2 = p (tau(pi) = -pi).  The distinguished uniformizer
// varpi_D satisfies tau(varpi_D) = eps_D * varpi_D.
class Algebra : public std::enable_shared_from_this<Algebra> {
public:
    static AlgebraPtr make(AlgKind kind, long p, int prec);

    AlgKind kind;
    TowerPtr D;   // tower carrying D
    TowerPtr F;   // base tower (p, 1, 1)
    int e_D;      // ramification degree of D over F
    int f_D;      // residue degree of D over F
    int eps_D;    // sign in tau(varpi_D) = eps_D varpi_D

    Elt tau(const Elt& x) const;
    Elt uniformizer() const;              // varpi_D
    int dim_F() const { return e_D * f_D; }
    FqPtr residue_field() const { return D->residue; }

    Elt embed_base(const Elt& fx) const;  // F -> D
    // F-coordinates of x in the basis {1} or {1, delta} with delta the
    // tower generator (omega resp. pi).
    std::vector<Elt> coords_base(const Elt& x) const;
    Elt from_coords_base(const std::vector<Elt>& c) const;
    Elt trace_to_base(const Elt& x) const;  // x (split) or x + tau(x)
    // Residue image in f_D for val(x) >= 0 elements, after scaling by
    // varpi_D^{-k}: residue of x * varpi_D^{-k}.
    FqEl scaled_residue(const Elt& x, long long k) const;
};

// Dense matrix over the D-tower of a fixed algebra.
struct Mat {
    AlgebraPtr alg;
    int rows = 0, cols = 0;
    std::vector<Elt> a;

    static Mat zero(AlgebraPtr A, int r, int c);
    static Mat identity(AlgebraPtr A, int n);
    static Mat scalar(AlgebraPtr A, int n, const Elt& s);

    Elt& at(int i, int j) { return a[(size_t)i * cols + j]; }
    const Elt& at(int i, int j) const { return a[(size_t)i * cols + j]; }

    Mat add(const Mat& o) const;
    Mat sub(const Mat& o) const;
    Mat neg() const;
    Mat mul(const Mat& o) const;
    Mat scale(const Elt& s) const;
    Mat mul_pi_power(long long k) const;
    Mat transpose() const;
    Mat tau_transpose() const;  // entrywise tau, then transpose
    Mat inverse() const;        // Gauss with smallest-valuation pivoting
    Elt trace() const;
    Elt det() const;

    bool is_zero_at_precision() const;
    // entrywise val >= t certified
    bool val_at_least(const Rat& t) const;
    bool congruent(const Mat& o, const Rat& t) const;

    // Flatten to F-coordinates (row-major, each entry contributing
    // alg->dim_F() consecutive base-tower elements) and back.
    std::vector<Elt> flatten() const;
    static Mat unflatten(AlgebraPtr A, int rows, int cols, const std::vector<Elt>& v);

    Mat submatrix(int r0, int c0, int nr, int nc) const;
    void paste(int r0, int c0, const Mat& block);
};

// Solve A X = B over the tower (A square, invertible at precision).
Mat mat_solve(const Mat& A, const Mat& B);

// Linear algebra over the base tower on vectors of base elements.
// Vectors are columns of the matrix `cols`.  Entries that are zero at
// precision are treated as zero.
struct BaseSpan {
    TowerPtr F;
    std::vector<std::vector<Elt>> cols;
};

// Basis of the right kernel of the matrix whose columns are `cols` applied
// to unknown coefficients: returns independent coefficient vectors v with
// sum_j v_j * cols[j] = 0 at precision.
std::vector<std::vector<Elt>> base_kernel(TowerPtr F, const std::vector<std::vector<Elt>>& cols);

// Reduce `vecs` to a maximal independent subset (indices returned).
std::vector<int> base_independent(TowerPtr F, const std::vector<std::vector<Elt>>& vecs);

// Solve sum_j x_j * cols[j] = rhs; returns empty on failure/inconsistency.
std::vector<Elt> base_solve(TowerPtr F, const std::vector<std::vector<Elt>>& cols,
                            const std::vector<Elt>& rhs);

}  // namespace theta
