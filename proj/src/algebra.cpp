#include "theta/algebra.hpp"

#include <algorithm>

namespace theta {

AlgebraPtr Algebra::make(AlgKind kind, long p, int prec) {
    auto A = std::make_shared<Algebra>();
    A->kind = kind;
    A->F = Tower::make(p, 1, 1, prec);
    switch (kind) {
        case AlgKind::split:
            A->D = A->F;
            A->e_D = 1;
            A->f_D = 1;
            A->eps_D = 1;
            break;
        case AlgKind::unram_quad:
            A->D = Tower::make(p, 2, 1, prec);
            A->e_D = 1;
            A->f_D = 2;
            A->eps_D = 1;
            break;
        case AlgKind::ram_quad:
            A->D = Tower::make(p, 1, 2, prec);
            A->e_D = 2;
            A->f_D = 1;
            A->eps_D = -1;
            break;
    }
    return A;
}

Elt Algebra::tau(const Elt& x) const {
    switch (kind) {
        case AlgKind::split:
            return x;
        case AlgKind::unram_quad:
            return x.frobenius(1);
        case AlgKind::ram_quad: {
            // pi -> -pi: negate odd pi-degrees, including the shift prefactor
            if (x.is_exact_zero() || x.is_zero_at_precision()) return x;
            auto c = x.unit_coeffs();  // f=1, e=2: indices are pi-degrees
            std::vector<long long> nc(c.size());
            for (size_t b = 0; b < c.size(); ++b) nc[b] = (b % 2 == 1) ? -c[b] : c[b];
            Elt r = D->from_unit_coeffs(nc, x.pi_shift()).truncated(x.rel_precision());
            if (((x.pi_shift() % 2) + 2) % 2 == 1) r = -r;
            return r;
        }
    }
    throw std::logic_error("tau: unreachable");
}

Elt Algebra::uniformizer() const { return D->uniformizer(); }

Elt Algebra::embed_base(const Elt& fx) const {
    if (fx.tower().get() != F.get()) throw std::invalid_argument("embed_base: base element required");
    if (kind == AlgKind::split) return fx;
    if (fx.is_exact_zero()) return D->zero();
    if (fx.is_zero_at_precision())
        return D->unknown_below((long long)e_D * (fx.pi_shift() + fx.rel_precision()));
    std::vector<long long> c((size_t)D->f * D->e, 0);
    c[0] = fx.unit_coeffs()[0];
    Elt r = D->from_unit_coeffs(c, e_D * fx.pi_shift());
    return r.truncated(e_D * fx.rel_precision());
}

std::vector<Elt> Algebra::coords_base(const Elt& x) const {
    if (x.tower().get() != D.get()) throw std::invalid_argument("coords_base: algebra element required");
    if (kind == AlgKind::split) return {x};
    int dim = 2;
    std::vector<Elt> out(dim, F->zero());
    if (x.is_exact_zero()) return out;
    if (x.is_zero_at_precision()) {
        // the bound pi^known splits into per-coordinate p-digit bounds
        long long known = x.pi_shift() + x.rel_precision();
        for (int i = 0; i < dim; ++i) {
            long long off = (kind == AlgKind::ram_quad) ? i : 0;
            out[i] = F->unknown_below(rat_ceil(Rat(known - off, e_D)));
        }
        return out;
    }
    auto c = x.unit_coeffs();
    int s = x.pi_shift();
    int rel = x.rel_precision();
    if (kind == AlgKind::unram_quad) {
        for (int a = 0; a < 2; ++a) {
            if (c[a] == 0) continue;
            Elt y = F->from_int(c[a]).mul_pi_power(s);
            long long relf = (long long)s + rel - y.pi_shift();
            out[a] = (relf <= 0) ? F->unknown_below(s + rel)
                                 : y.truncated((int)std::min<long long>(relf, F->prec));
        }
    } else {  // ram_quad: coefficient of pi^b sits at absolute pi-degree s+b
        for (int b = 0; b < 2; ++b) {
            if (c[b] == 0) continue;
            long long deg = s + b;                 // absolute pi-degree
            int slot = (int)(((deg % 2) + 2) % 2);  // 0 -> coord of 1, 1 -> coord of pi
            long long ppow = (deg - slot) / 2;      // remaining power of p
            Elt y = F->from_int(c[b]).mul_pi_power(ppow);
            // known modulo pi^{s+rel}: coordinate known modulo p^{ceil((s+rel-slot)/2)}
            long long knownf = rat_ceil(Rat((long long)s + rel - slot, 2));
            long long relf = knownf - y.pi_shift();
            Elt add = (relf <= 0) ? F->unknown_below(knownf)
                                  : y.truncated((int)std::min<long long>(relf, F->prec));
            out[slot] = out[slot].is_exact_zero() ? add : out[slot] + add;
        }
    }
    return out;
}

Elt Algebra::from_coords_base(const std::vector<Elt>& c) const {
    if (kind == AlgKind::split) return c.at(0);
    Elt delta = (kind == AlgKind::unram_quad) ? D->omega() : D->uniformizer();
    return embed_base(c.at(0)) + embed_base(c.at(1)) * delta;
}

Elt Algebra::trace_to_base(const Elt& x) const {
    if (kind == AlgKind::split) return x;
    Elt t = x + tau(x);
    auto c = coords_base(t);
    return c[0];
}

FqEl Algebra::scaled_residue(const Elt& x, long long k) const {
    return x.mul_pi_power(-k).residue_image();
}

// ---- Mat ----

Mat Mat::zero(AlgebraPtr A, int r, int c) {
    Mat m;
    m.alg = A;
    m.rows = r;
    m.cols = c;
    m.a.assign((size_t)r * c, A->D->zero());
    return m;
}

Mat Mat::identity(AlgebraPtr A, int n) {
    Mat m = zero(A, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = A->D->one();
    return m;
}

Mat Mat::scalar(AlgebraPtr A, int n, const Elt& s) {
    Mat m = zero(A, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = s;
    return m;
}

Mat Mat::add(const Mat& o) const {
    Mat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] + o.a[i];
    return r;
}

Mat Mat::sub(const Mat& o) const {
    Mat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] - o.a[i];
    return r;
}

Mat Mat::neg() const {
    Mat r = *this;
    for (auto& x : r.a) x = -x;
    return r;
}

Mat Mat::mul(const Mat& o) const {
    if (cols != o.rows) throw std::invalid_argument("Mat: shape mismatch");
    Mat r = zero(alg, rows, o.cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            const Elt& x = at(i, k);
            if (x.is_exact_zero()) continue;
            for (int j = 0; j < o.cols; ++j)
                r.at(i, j) = r.at(i, j) + x * o.at(k, j);
        }
    return r;
}

Mat Mat::scale(const Elt& s) const {
    Mat r = *this;
    for (auto& x : r.a) x = x * s;
    return r;
}

Mat Mat::mul_pi_power(long long k) const {
    Mat r = *this;
    for (auto& x : r.a) x = x.mul_pi_power(k);
    return r;
}

Mat Mat::transpose() const {
    Mat r = zero(alg, cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

Mat Mat::tau_transpose() const {
    Mat r = zero(alg, cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r.at(j, i) = alg->tau(at(i, j));
    return r;
}

Elt Mat::trace() const {
    Elt t = alg->D->zero();
    for (int i = 0; i < std::min(rows, cols); ++i) t = t + at(i, i);
    return t;
}

bool Mat::is_zero_at_precision() const {
    for (const auto& x : a)
        if (!x.is_zero_at_precision()) return false;
    return true;
}

bool Mat::val_at_least(const Rat& t) const {
    for (const auto& x : a)
        if (!x.val_at_least(t)) return false;
    return true;
}

bool Mat::congruent(const Mat& o, const Rat& t) const {
    return sub(o).val_at_least(t);
}

namespace {

// pick the row >= from with the smallest finite valuation in column col
int pivot_row(const Mat& A, int col, int from) {
    int best = -1;
    Rat bestv(0);
    for (int r = from; r < A.rows; ++r) {
        const Elt& x = A.at(r, col);
        if (x.is_zero_at_precision()) continue;
        Rat v = x.val().v;
        if (best < 0 || v < bestv) {
            best = r;
            bestv = v;
        }
    }
    return best;
}

}  // namespace

Mat mat_solve(const Mat& A0, const Mat& B0) {
    if (A0.rows != A0.cols || A0.rows != B0.rows)
        throw std::invalid_argument("mat_solve: shape mismatch");
    Mat A = A0;
    Mat B = B0;
    int n = A.rows;
    for (int col = 0; col < n; ++col) {
        int piv = pivot_row(A, col, col);
        if (piv < 0) throw std::domain_error("mat_solve: singular at precision");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A.at(piv, j), A.at(col, j));
            for (int j = 0; j < B.cols; ++j) std::swap(B.at(piv, j), B.at(col, j));
        }
        Elt inv = A.at(col, col).inv();
        for (int j = 0; j < n; ++j) A.at(col, j) = A.at(col, j) * inv;
        for (int j = 0; j < B.cols; ++j) B.at(col, j) = B.at(col, j) * inv;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const Elt m = A.at(r, col);
            if (m.is_exact_zero() || m.is_zero_at_precision()) continue;
            for (int j = 0; j < n; ++j) A.at(r, j) = A.at(r, j) - m * A.at(col, j);
            for (int j = 0; j < B.cols; ++j) B.at(r, j) = B.at(r, j) - m * B.at(col, j);
        }
    }
    return B;
}

Mat Mat::inverse() const {
    if (rows != cols) throw std::invalid_argument("Mat: inverse of non-square");
    return mat_solve(*this, identity(alg, rows));
}

Elt Mat::det() const {
    if (rows != cols) throw std::invalid_argument("Mat: det of non-square");
    Mat A = *this;
    int n = rows;
    Elt d = alg->D->one();
    for (int col = 0; col < n; ++col) {
        int piv = pivot_row(A, col, col);
        if (piv < 0) return alg->D->zero();
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A.at(piv, j), A.at(col, j));
            d = -d;
        }
        d = d * A.at(col, col);
        Elt inv = A.at(col, col).inv();
        for (int r = col + 1; r < n; ++r) {
            const Elt m = A.at(r, col) * inv;
            if (m.is_exact_zero() || m.is_zero_at_precision()) continue;
            for (int j = col; j < n; ++j) A.at(r, j) = A.at(r, j) - m * A.at(col, j);
        }
    }
    return d;
}

std::vector<Elt> Mat::flatten() const {
    std::vector<Elt> out;
    out.reserve(a.size() * alg->dim_F());
    for (const auto& x : a) {
        auto c = alg->coords_base(x);
        for (auto& y : c) out.push_back(std::move(y));
    }
    return out;
}

Mat Mat::unflatten(AlgebraPtr A, int rows, int cols, const std::vector<Elt>& v) {
    int d = A->dim_F();
    if ((int)v.size() != rows * cols * d) throw std::invalid_argument("unflatten: size");
    Mat m = zero(A, rows, cols);
    for (int i = 0; i < rows * cols; ++i) {
        std::vector<Elt> c(v.begin() + (size_t)i * d, v.begin() + (size_t)(i + 1) * d);
        m.a[i] = A->from_coords_base(c);
    }
    return m;
}

Mat Mat::submatrix(int r0, int c0, int nr, int nc) const {
    Mat m = zero(alg, nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) m.at(i, j) = at(r0 + i, c0 + j);
    return m;
}

void Mat::paste(int r0, int c0, const Mat& block) {
    for (int i = 0; i < block.rows; ++i)
        for (int j = 0; j < block.cols; ++j) at(r0 + i, c0 + j) = block.at(i, j);
}

// ---- base-field linear algebra on coefficient vectors ----

namespace {

struct Echelon {
    std::vector<std::vector<Elt>> mat;  // row-major, reduced
    std::vector<int> pivot_col;
    int rows, cols;
};

// reduced row echelon form with smallest-valuation pivoting
Echelon rref(TowerPtr F, std::vector<std::vector<Elt>> rowsv) {
    Echelon E;
    E.rows = (int)rowsv.size();
    E.cols = E.rows ? (int)rowsv[0].size() : 0;
    E.mat = std::move(rowsv);
    int rk = 0;
    for (int col = 0; col < E.cols && rk < E.rows; ++col) {
        int best = -1;
        Rat bestv(0);
        for (int r = rk; r < E.rows; ++r) {
            const Elt& x = E.mat[r][col];
            if (x.is_zero_at_precision()) continue;
            Rat v = x.val().v;
            if (best < 0 || v < bestv) {
                best = r;
                bestv = v;
            }
        }
        if (best < 0) continue;
        std::swap(E.mat[best], E.mat[rk]);
        Elt inv = E.mat[rk][col].inv();
        for (int j = 0; j < E.cols; ++j) E.mat[rk][j] = E.mat[rk][j] * inv;
        for (int r = 0; r < E.rows; ++r) {
            if (r == rk) continue;
            const Elt m = E.mat[r][col];
            if (m.is_exact_zero() || m.is_zero_at_precision()) continue;
            for (int j = 0; j < E.cols; ++j) E.mat[r][j] = E.mat[r][j] - m * E.mat[rk][j];
        }
        E.pivot_col.push_back(col);
        ++rk;
    }
    (void)F;
    return E;
}

}  // namespace

std::vector<std::vector<Elt>> base_kernel(TowerPtr F, const std::vector<std::vector<Elt>>& cols) {
    if (cols.empty()) return {};
    int dim = (int)cols[0].size();
    int n = (int)cols.size();
    std::vector<std::vector<Elt>> rowsv((size_t)dim, std::vector<Elt>((size_t)n, F->zero()));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) rowsv[i][j] = cols[j][i];
    Echelon E = rref(F, std::move(rowsv));
    std::vector<bool> is_pivot(n, false);
    for (int c : E.pivot_col) is_pivot[c] = true;
    std::vector<std::vector<Elt>> basis;
    for (int freec = 0; freec < n; ++freec) {
        if (is_pivot[freec]) continue;
        std::vector<Elt> v((size_t)n, F->zero());
        v[freec] = F->one();
        for (size_t r = 0; r < E.pivot_col.size(); ++r)
            v[E.pivot_col[r]] = -E.mat[r][freec];
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<int> base_independent(TowerPtr F, const std::vector<std::vector<Elt>>& vecs) {
    if (vecs.empty()) return {};
    int dim = (int)vecs[0].size();
    int n = (int)vecs.size();
    std::vector<std::vector<Elt>> rowsv((size_t)dim, std::vector<Elt>((size_t)n, F->zero()));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) rowsv[i][j] = vecs[j][i];
    Echelon E = rref(F, std::move(rowsv));
    return E.pivot_col;
}

std::vector<Elt> base_solve(TowerPtr F, const std::vector<std::vector<Elt>>& cols,
                            const std::vector<Elt>& rhs) {
    if (cols.empty()) return {};
    int dim = (int)cols[0].size();
    int n = (int)cols.size();
    std::vector<std::vector<Elt>> rowsv((size_t)dim, std::vector<Elt>((size_t)n + 1, F->zero()));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) rowsv[i][j] = cols[j][i];
    for (int i = 0; i < dim; ++i) rowsv[i][n] = rhs[i];
    Echelon E = rref(F, std::move(rowsv));
    // a pivot in the rhs column means inconsistency
    std::vector<Elt> x((size_t)n, F->zero());
    for (size_t r = 0; r < E.pivot_col.size(); ++r) {
        if (E.pivot_col[r] == n) return {};
        x[E.pivot_col[r]] = E.mat[r][n];
    }
    return x;
}

}  // namespace theta
