#pragma once

#include <complex>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace levlab {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Sized for small systems (N up to a few dozen).
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    cplx& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    std::span<cplx> row(std::size_t r) { return {a_.data() + r * cols_, cols_}; }
    std::span<const cplx> row(std::size_t r) const { return {a_.data() + r * cols_, cols_}; }

    std::vector<cplx> col(std::size_t c) const {
        std::vector<cplx> v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
        return v;
    }
    void set_col(std::size_t c, std::span<const cplx> v) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
    }
    void set_row(std::size_t r, std::span<const cplx> v) {
        for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = v[c];
    }

    std::span<cplx> data() { return a_; }
    std::span<const cplx> data() const { return a_; }

    friend bool operator==(const CMatrix& x, const CMatrix& y) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

CMatrix operator*(const CMatrix& x, const CMatrix& y);
std::vector<cplx> operator*(const CMatrix& x, std::span<const cplx> v);

/// max_ij |a_ij|
double max_abs(const CMatrix& a);
double norm_fro(const CMatrix& a);
bool all_finite(const CMatrix& a);

/// Bilinear pairing sum_i a_i b_i (no conjugation): <L|R> when `a` holds bra components.
cplx bilinear(std::span<const cplx> a, std::span<const cplx> b);
/// Hermitian inner product sum_i conj(a_i) b_i.
cplx hdot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> v);
/// |<a,b>| / (|a| |b|) in [0,1]; 0 if either vector vanishes.
double alignment(std::span<const cplx> a, std::span<const cplx> b);

/// Square complex matrix in rad/s with a free-form provenance label.
struct Hamiltonian {
    CMatrix m;
    std::string label;

    Hamiltonian() = default;
    explicit Hamiltonian(CMatrix mat, std::string lab = {});

    std::size_t dim() const { return m.rows(); }
};

}  // namespace levlab
