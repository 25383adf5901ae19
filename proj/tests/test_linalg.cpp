#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "levlab/errors.hpp"
#include "levlab/linalg.hpp"

using namespace levlab;

namespace {

CMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
    CMatrix m(2, 2);
    m(0, 0) = a; m(0, 1) = b; m(1, 0) = c; m(1, 1) = d;
    return m;
}

CMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix m(n, n);
    for (auto& z : m.data()) z = cplx{u(rng), u(rng)};
    return m;
}

// Diagonalizable test matrix with prescribed eigenvalues and a well-conditioned
// eigenbasis, built as V diag V^{-1}.
Hamiltonian random_diagonalizable(std::size_t n, std::mt19937_64& rng, std::vector<cplx>* evs_out = nullptr) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> evs(n);
    for (std::size_t i = 0; i < n; ++i)
        evs[i] = cplx{10.0 * static_cast<double>(i) + u(rng), -1.0 - 0.5 * std::abs(u(rng))};
    while (true) {
        CMatrix v = random_matrix(n, rng);
        LuFactors f = lu_factor(v);
        if (lu_singular(f, 1e-6)) continue;
        CMatrix vinv = lu_inverse(f);
        if (condition_fro(v, vinv) > 100.0 * static_cast<double>(n)) continue;
        CMatrix d(n, n);
        for (std::size_t i = 0; i < n; ++i) d(i, i) = evs[i];
        if (evs_out) *evs_out = evs;
        return Hamiltonian(v * d * vinv, "random");
    }
}

double residual_right(const Hamiltonian& h, const EigenSystem& es) {
    double worst = 0.0;
    const std::size_t n = h.dim();
    for (std::size_t k = 0; k < n; ++k) {
        auto col = es.rev.col(k);
        auto hv = h.m * std::span<const cplx>(col);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(hv[i] - es.eigenvalues[k] * col[i]));
    }
    return worst;
}

double residual_left(const Hamiltonian& h, const EigenSystem& es) {
    double worst = 0.0;
    const std::size_t n = h.dim();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{};
            for (std::size_t i = 0; i < n; ++i) s += es.lev(k, i) * h.m(i, j);
            worst = std::max(worst, std::abs(s - es.eigenvalues[k] * es.lev(k, j)));
        }
    }
    return worst;
}

double biorth_residual(const EigenSystem& es) {
    CMatrix p = es.lev * es.rev;
    const std::size_t n = p.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(p(i, j) - (i == j ? cplx{1.0} : cplx{})));
    return worst;
}

}  // namespace

TEST_CASE("eig: diagonal matrix is its own eigensystem") {
    Hamiltonian h(mat2(2.0, 0.0, 0.0, 5.0));
    EigenSystem es = eig(h);
    CHECK(es.eigenvalues[0] == cplx{2.0});
    CHECK(es.eigenvalues[1] == cplx{5.0});
    CHECK(std::abs(es.rev(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(es.rev(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(es.rev(0, 1)) < 1e-15);
    CHECK(std::abs(es.lev(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(es.lev(1, 0)) < 1e-15);
}

TEST_CASE("eig: symmetric coupling gives lev = transpose(rev)") {
    const double t = 3.0;
    Hamiltonian h(mat2(0.0, t, t, 0.0));
    EigenSystem es = eig(h);
    CHECK(es.eigenvalues[0].real() == doctest::Approx(-t).epsilon(1e-14));
    CHECK(es.eigenvalues[1].real() == doctest::Approx(t).epsilon(1e-14));
    for (std::size_t k = 0; k < 2; ++k) {
        auto col = es.rev.col(k);
        CHECK(alignment(es.lev.row(k), col) > 1.0 - 1e-12);
    }
}

TEST_CASE("eig: asymmetric 2x2 against hand-solved null spaces") {
    // [[0,1],[4,0]]: eigenvalues -2, 2; REV(+2) ~ (1,2), LEV(+2) ~ (2,1) with <L|R> = 1
    Hamiltonian h(mat2(0.0, 1.0, 4.0, 0.0));
    EigenSystem es = eig(h);
    CHECK(std::abs(es.eigenvalues[0] - cplx{-2.0}) < 1e-14);
    CHECK(std::abs(es.eigenvalues[1] - cplx{2.0}) < 1e-14);
    const double s5 = std::sqrt(5.0);
    CHECK(std::abs(es.rev(0, 1) - 1.0 / s5) < 1e-14);
    CHECK(std::abs(es.rev(1, 1) - 2.0 / s5) < 1e-14);
    CHECK(std::abs(es.lev(1, 0) - 2.0 * s5 / 4.0) < 1e-14);
    CHECK(std::abs(es.lev(1, 1) - s5 / 4.0) < 1e-14);
    CHECK(std::abs(bilinear(es.lev.row(1), es.rev.col(1)) - cplx{1.0}) < 1e-14);
}

TEST_CASE("eig: gauge convention rotates largest entry real-positive") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        Hamiltonian h = random_diagonalizable(5, rng);
        EigenSystem es = eig(h);
        for (std::size_t k = 0; k < 5; ++k) {
            auto col = es.rev.col(k);
            CHECK(norm2(col) == doctest::Approx(1.0).epsilon(1e-12));
            std::size_t imax = 0;
            for (std::size_t i = 1; i < 5; ++i)
                if (std::abs(col[i]) > std::abs(col[imax])) imax = i;
            CHECK(col[imax].real() > 0.0);
            CHECK(std::abs(col[imax].imag()) < 1e-12 * std::abs(col[imax]));
        }
    }
}

TEST_CASE("eig: defective matrix is rejected") {
    CHECK_THROWS_AS(eig(Hamiltonian(mat2(0.0, 1.0, 0.0, 0.0))), DefectiveMatrix);
    // 3x3 Jordan-like block
    CMatrix j(3, 3);
    j(0, 1) = 1.0;
    j(1, 2) = 1.0;
    j(0, 2) = 0.5;
    CHECK_THROWS_AS(eig(Hamiltonian(std::move(j))), DefectiveMatrix);
}

TEST_CASE("eig: scalar multiples of identity stay clean") {
    CMatrix m(3, 3);
    for (int i = 0; i < 3; ++i) m(i, i) = cplx{5.0, -1.0};
    EigenSystem es = eig(Hamiltonian(std::move(m)));
    CHECK(biorth_residual(es) < 1e-14);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(es.eigenvalues[k] - cplx{5.0, -1.0}) < 1e-14);
}

TEST_CASE("eig: random diagonalizable systems satisfy all invariants") {
    std::mt19937_64 rng(42);
    for (std::size_t n = 2; n <= 12; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            std::vector<cplx> want;
            Hamiltonian h = random_diagonalizable(n, rng, &want);
            EigenSystem es = eig(h);
            const double scale = norm_fro(h.m);
            CHECK(residual_right(h, es) < 1e-10 * scale);
            CHECK(residual_left(h, es) < 1e-10 * scale);
            CHECK(biorth_residual(es) < 1e-9);
            // eigenvalues sorted and matching construction
            std::sort(want.begin(), want.end(), [](cplx a, cplx b) {
                return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            });
            for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(es.eigenvalues[k] - want[k]) < 1e-8 * scale);
            for (std::size_t k = 0; k + 1 < n; ++k) {
                const bool ordered = es.eigenvalues[k].real() < es.eigenvalues[k + 1].real() ||
                                     (es.eigenvalues[k].real() == es.eigenvalues[k + 1].real() &&
                                      es.eigenvalues[k].imag() <= es.eigenvalues[k + 1].imag());
                CHECK(ordered);
            }
        }
    }
}

TEST_CASE("eig: transpose duality for complex symmetric matrices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 2 + rep % 5;
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                m(i, j) = cplx{u(rng), 0.3 * u(rng)} + (i == j ? cplx{3.0 * static_cast<double>(i), 0.0} : cplx{});
                m(j, i) = m(i, j);
            }
        EigenSystem es = eig(Hamiltonian(std::move(m)));
        for (std::size_t k = 0; k < n; ++k) {
            auto col = es.rev.col(k);
            CHECK(alignment(es.lev.row(k), col) > 1.0 - 1e-10);
        }
    }
}

TEST_CASE("eig: lev rows coincide with conjugated REVs of the adjoint system") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rep % 4;
        Hamiltonian h = random_diagonalizable(n, rng);
        CMatrix adj(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) adj(i, j) = std::conj(h.m(j, i));
        EigenSystem es = eig(h);
        EigenSystem esd = eig(Hamiltonian(std::move(adj)));
        for (std::size_t k = 0; k < n; ++k) {
            // find the adjoint mode with eigenvalue conj(omega_k)
            std::size_t match = 0;
            double best = 1e300;
            for (std::size_t j = 0; j < n; ++j) {
                const double d = std::abs(esd.eigenvalues[j] - std::conj(es.eigenvalues[k]));
                if (d < best) { best = d; match = j; }
            }
            auto adj_col = esd.rev.col(match);
            std::vector<cplx> conj_col(n);
            for (std::size_t i = 0; i < n; ++i) conj_col[i] = std::conj(adj_col[i]);
            CHECK(alignment(conj_col, std::vector<cplx>(es.lev.row(k).begin(), es.lev.row(k).end())) > 1.0 - 1e-9);
        }
    }
}

TEST_CASE("resolvent: scalar case") {
    CMatrix m(1, 1);
    m(0, 0) = 9016.0;
    CMatrix g = resolvent(Hamiltonian(std::move(m)), 9020.0);
    CHECK(g(0, 0).real() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g(0, 0).imag() == 0.0);
}

TEST_CASE("resolvent: defining identity and spectral sum") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        Hamiltonian h = random_diagonalizable(4, rng);
        const double omega = 200.0 + 7.0 * rep;  // far from all eigenvalues (Re in [0, 40])
        CMatrix g = resolvent(h, omega);
        const std::size_t n = 4;
        CMatrix shifted(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) shifted(i, j) = (i == j ? cplx{omega} : cplx{}) - h.m(i, j);
        CMatrix prod = shifted * g;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(std::abs(prod(i, j) - (i == j ? cplx{1.0} : cplx{})) < 1e-10);

        // spectral sum over modes from eig
        EigenSystem es = eig(h);
        CMatrix sum(n, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    sum(i, j) += es.rev(i, k) * es.lev(k, j) / (omega - es.eigenvalues[k]);
        const double scale = max_abs(g);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(sum(i, j) - g(i, j)) < 1e-8 * scale);
    }
}

TEST_CASE("resolvent: singular exactly at a real eigenvalue") {
    CHECK_THROWS_AS(resolvent(Hamiltonian(mat2(2.0, 0.0, 0.0, 5.0)), 2.0), SingularAtResonance);
}

TEST_CASE("resolvent: symmetric for real-symmetric H") {
    CMatrix m(3, 3);
    m(0, 0) = 1.0; m(1, 1) = 4.0; m(2, 2) = 9.0;
    m(0, 1) = m(1, 0) = 0.7;
    m(1, 2) = m(2, 1) = -1.3;
    CMatrix g = resolvent(Hamiltonian(std::move(m)), 20.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(g(i, j) - g(j, i)) < 1e-14);
}

TEST_CASE("biorthonormalize: identity passes through and gauge is invariant") {
    CMatrix id = CMatrix::identity(3);
    auto [r, l] = biorthonormalize(id, id);
    CHECK(r == id);
    CHECK(l == id);

    Hamiltonian h(mat2(0.0, 1.0, 4.0, 0.0));
    EigenSystem es = eig(h);
    CMatrix scaled = es.rev;
    const cplx factor = 3.0 * std::exp(cplx{0.0, M_PI / 4.0});
    for (std::size_t i = 0; i < 2; ++i) scaled(i, 0) *= factor;
    auto [r1, l1] = biorthonormalize(es.rev, es.lev);
    auto [r2, l2] = biorthonormalize(scaled, es.lev);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(r1(i, j) - r2(i, j)) < 1e-14);
            CHECK(std::abs(l1(i, j) - l2(i, j)) < 1e-14);
        }
    // diagonal overlaps exactly one
    for (std::size_t k = 0; k < 2; ++k) {
        auto col = r1.col(k);
        CHECK(std::abs(bilinear(l1.row(k), col) - cplx{1.0}) < 1e-15);
    }
}

TEST_CASE("biorthonormalize: vanishing overlap is rejected") {
    CMatrix rev = CMatrix::identity(2);
    CMatrix lev(2, 2);
    lev(0, 1) = 1.0;  // row 0 orthogonal to column 0
    lev(1, 0) = 1.0;
    CHECK_THROWS_AS(biorthonormalize(rev, lev), SingularOverlap);
}
