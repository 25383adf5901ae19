#include "levlab/types.hpp"

#include <stdexcept>

namespace levlab {

CMatrix operator*(const CMatrix& x, const CMatrix& y) {
    CMatrix out(x.rows(), y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const cplx xik = x(i, k);
            if (xik == cplx{}) continue;
            for (std::size_t j = 0; j < y.cols(); ++j) out(i, j) += xik * y(k, j);
        }
    }
    return out;
}

std::vector<cplx> operator*(const CMatrix& x, std::span<const cplx> v) {
    std::vector<cplx> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = bilinear(x.row(i), v);
    return out;
}

double max_abs(const CMatrix& a) {
    double m = 0.0;
    for (const cplx& z : a.data()) m = std::max(m, std::abs(z));
    return m;
}

double norm_fro(const CMatrix& a) {
    double s = 0.0;
    for (const cplx& z : a.data()) s += std::norm(z);
    return std::sqrt(s);
}

bool all_finite(const CMatrix& a) {
    for (const cplx& z : a.data())
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

cplx bilinear(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

cplx hdot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

double alignment(std::span<const cplx> a, std::span<const cplx> b) {
    const double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(hdot(a, b)) / (na * nb);
}

Hamiltonian::Hamiltonian(CMatrix mat, std::string lab) : m(std::move(mat)), label(std::move(lab)) {
    if (m.rows() == 0 || m.rows() != m.cols()) throw std::invalid_argument("Hamiltonian: matrix must be square and non-empty");
    if (!all_finite(m)) throw std::invalid_argument("Hamiltonian: entries must be finite");
}

}  // namespace levlab
