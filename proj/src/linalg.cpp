#include "levlab/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

LuFactors lu_factor(CMatrix a) {
    const std::size_t n = a.rows();
    LuFactors f;
    f.scale = max_abs(a);
    f.piv.resize(n);
    std::iota(f.piv.begin(), f.piv.end(), 0);
    f.min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(f.piv[k], f.piv[p]);
        }
        f.min_pivot = std::min(f.min_pivot, std::abs(a(k, k)));
        if (a(k, k) == cplx{}) continue;  // leave the zero pivot; callers decide
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx m = a(i, k) / a(k, k);
            a(i, k) = m;
            if (m == cplx{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
        }
    }
    if (n == 0) f.min_pivot = 0.0;
    f.a = std::move(a);
    return f;
}

bool lu_singular(const LuFactors& f, double rel_tol) {
    const double floor = f.scale > 0.0 ? f.scale * rel_tol : rel_tol;
    return f.min_pivot <= floor;
}

namespace {

void lu_solve_impl(const LuFactors& f, std::span<cplx> b, bool perturb_pivots) {
    const std::size_t n = f.a.rows();
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.piv[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.a(i, j) * x[j];
    const double tiny = std::max(f.scale, 1.0) * kEps;
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.a(ii, j) * x[j];
        cplx d = f.a(ii, ii);
        if (perturb_pivots && std::abs(d) < tiny) d = tiny;
        x[ii] /= d;
    }
    std::copy(x.begin(), x.end(), b.begin());
}

}  // namespace

void lu_solve(const LuFactors& f, std::span<cplx> b) { lu_solve_impl(f, b, false); }
void lu_solve_perturbed(const LuFactors& f, std::span<cplx> b) { lu_solve_impl(f, b, true); }

CMatrix lu_inverse(const LuFactors& f) {
    const std::size_t n = f.a.rows();
    CMatrix inv(n, n);
    std::vector<cplx> e(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), cplx{});
        e[c] = 1.0;
        lu_solve(f, e);
        inv.set_col(c, e);
    }
    return inv;
}

void gauge_fix(std::span<cplx> v) {
    const double nrm = norm2(v);
    if (nrm == 0.0) return;
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > amax) { amax = a; imax = i; }
    }
    const cplx rot = std::abs(v[imax]) / (v[imax] * nrm);
    for (cplx& z : v) z *= rot;
}

double condition_fro(const CMatrix& a, const CMatrix& a_inv) {
    return norm_fro(a) * norm_fro(a_inv);
}

// ---------------------------------------------------------------------------
// Resolvent
// ---------------------------------------------------------------------------

CMatrix resolvent(const Hamiltonian& h, double omega) {
    const std::size_t n = h.dim();
    CMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? cplx{omega} : cplx{}) - h.m(i, j);
    LuFactors f = lu_factor(std::move(a));
    if (lu_singular(f, static_cast<double>(n) * kEps))
        throw SingularAtResonance("resolvent: omega = " + std::to_string(omega) + " hits a resonance of '" + h.label + "'");
    return lu_inverse(f);
}

// ---------------------------------------------------------------------------
// Biorthonormalization
// ---------------------------------------------------------------------------

std::pair<CMatrix, CMatrix> biorthonormalize(const CMatrix& rev, const CMatrix& lev) {
    const std::size_t n = rev.rows();
    if (rev.cols() != n || lev.rows() != n || lev.cols() != n)
        throw std::invalid_argument("biorthonormalize: square matrices of equal size required");
    CMatrix r = rev, l = lev;
    for (std::size_t k = 0; k < n; ++k) {
        auto col = r.col(k);
        gauge_fix(col);
        r.set_col(k, col);

        std::vector<cplx> row(lev.row(k).begin(), lev.row(k).end());
        const double lnrm = norm2(row);
        const cplx overlap = bilinear(row, col);
        if (lnrm == 0.0 || std::abs(overlap) / lnrm < 1e-14)
            throw SingularOverlap("biorthonormalize: diagonal overlap of mode " + std::to_string(k + 1) + " vanishes (EP degeneracy)");
        for (cplx& z : row) z /= overlap;
        l.set_row(k, row);
    }
    return {std::move(r), std::move(l)};
}

// ---------------------------------------------------------------------------
// Eigendecomposition
// ---------------------------------------------------------------------------

namespace {

// Connected components of the symmetrized sparsity graph. Exactly-zero couplings
// both ways mean the sites never mix, so each block is solved on its own; this
// keeps structurally decoupled degeneracies (e.g. an isolated site sharing a
// frequency with a lattice mode) from contaminating each other's eigenvectors.
std::vector<std::vector<std::size_t>> connected_components(const CMatrix& a) {
    const std::size_t n = a.rows();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s}, members;
        comp[s] = static_cast<int>(out.size());
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            members.push_back(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (comp[j] >= 0 || i == j) continue;
                if (a(i, j) != cplx{} || a(j, i) != cplx{}) {
                    comp[j] = comp[i];
                    stack.push_back(j);
                }
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

// Diagonal similarity scaling (balancing without permutations; components are
// already split off). Powers of 2 only, so the transform is exact.
std::vector<double> balance_scale(CMatrix& a) {
    const std::size_t n = a.rows();
    std::vector<double> d(n, 1.0);
    constexpr double radix = 2.0;
    bool again = true;
    int sweeps = 0;
    while (again && sweeps++ < 50) {
        again = false;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                r += std::abs(a(i, j));
                c += std::abs(a(j, i));
            }
            if (r == 0.0 || c == 0.0) continue;
            double f = 1.0;
            const double s = r + c;
            while (c < r / radix) { c *= radix; r /= radix; f *= radix; }
            while (c >= r * radix) { c /= radix; r *= radix; f /= radix; }
            if ((r + c) < 0.95 * s) {
                again = true;
                d[i] *= f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) /= f;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
    return d;
}

// Reduce to upper Hessenberg form by stabilized elementary similarity transforms.
void hessenberg(CMatrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    for (std::size_t r = 1; r + 1 < n; ++r) {
        std::size_t p = r;
        double best = std::abs(a(r, r - 1));
        for (std::size_t i = r + 1; i < n; ++i) {
            const double v = std::abs(a(i, r - 1));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) continue;
        if (p != r) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(r, j), a(p, j));
            for (std::size_t i = 0; i < n; ++i) std::swap(a(i, r), a(i, p));
        }
        for (std::size_t i = r + 1; i < n; ++i) {
            const cplx t = a(i, r - 1) / a(r, r - 1);
            if (t != cplx{}) {
                for (std::size_t j = r; j < n; ++j) a(i, j) -= t * a(r, j);
                for (std::size_t k = 0; k < n; ++k) a(k, r) += t * a(k, i);
            }
            a(i, r - 1) = 0.0;
        }
    }
}

// Eigenvalues of [[p, b],[c, -p]] + m*I, split so the discriminant is formed
// from shifted quantities (no large-diagonal cancellation).
std::pair<cplx, cplx> eig2_values(cplx h00, cplx h01, cplx h10, cplx h11) {
    const cplx m = 0.5 * (h00 + h11);
    const cplx p = 0.5 * (h00 - h11);
    const cplx disc = p * p + h01 * h10;
    const cplx s = std::sqrt(disc);
    return {m - s, m + s};
}

struct QrWork {
    std::vector<double> rc;  // Givens cosines (real)
    std::vector<cplx> rs;    // Givens sines
};

// One explicit shifted QR sweep on the Hessenberg block [l..e].
void qr_step(CMatrix& h, std::size_t l, std::size_t e, cplx sigma, QrWork& w) {
    for (std::size_t i = l; i <= e; ++i) h(i, i) -= sigma;
    w.rc.assign(e - l, 0.0);
    w.rs.assign(e - l, cplx{});
    for (std::size_t i = l; i < e; ++i) {
        const cplx f = h(i, i), g = h(i + 1, i);
        const double d = std::sqrt(std::norm(f) + std::norm(g));
        double c;
        cplx s;
        if (d == 0.0) {
            c = 1.0;
            s = cplx{};
        } else if (f == cplx{}) {
            c = 0.0;
            s = std::conj(g) / std::abs(g);
        } else {
            const cplx alpha = f / std::abs(f);
            c = std::abs(f) / d;
            s = alpha * std::conj(g) / d;
        }
        w.rc[i - l] = c;
        w.rs[i - l] = s;
        for (std::size_t j = i; j <= e; ++j) {
            const cplx t0 = h(i, j), t1 = h(i + 1, j);
            h(i, j) = c * t0 + s * t1;
            h(i + 1, j) = -std::conj(s) * t0 + c * t1;
        }
    }
    for (std::size_t i = l; i < e; ++i) {
        const double c = w.rc[i - l];
        const cplx s = w.rs[i - l];
        const std::size_t jmax = std::min(i + 1, e);
        for (std::size_t j = l; j <= jmax; ++j) {
            const cplx t0 = h(j, i), t1 = h(j, i + 1);
            h(j, i) = c * t0 + std::conj(s) * t1;
            h(j, i + 1) = -s * t0 + c * t1;
        }
    }
    for (std::size_t i = l; i <= e; ++i) h(i, i) += sigma;
}

// Eigenvalues of a (balanced) dense complex matrix via Hessenberg + shifted QR.
std::vector<cplx> qr_eigenvalues(CMatrix a, const std::string& label) {
    const std::size_t n = a.rows();
    std::vector<cplx> ev(n);
    if (n == 1) { ev[0] = a(0, 0); return ev; }
    hessenberg(a);
    const double anorm = std::max(norm_fro(a), kEps);
    auto negligible = [&](std::size_t i) {
        const double bound = kEps * (std::abs(a(i - 1, i - 1)) + std::abs(a(i, i)));
        return std::abs(a(i, i - 1)) <= std::max(bound, kEps * anorm * 1e-2);
    };
    QrWork work;
    std::size_t e = n - 1;
    long total_it = 0, block_it = 0;
    while (true) {
        std::size_t l = e;
        while (l > 0 && !negligible(l)) --l;
        if (l > 0) a(l, l - 1) = 0.0;
        if (l == e) {
            ev[e] = a(e, e);
            if (e == 0) break;
            --e;
            block_it = 0;
            continue;
        }
        if (l + 1 == e) {
            auto [w1, w2] = eig2_values(a(l, l), a(l, e), a(e, l), a(e, e));
            ev[l] = w1;
            ev[e] = w2;
            if (l == 0) break;
            e = l - 1;
            block_it = 0;
            continue;
        }
        if (++total_it > 40 * static_cast<long>(n))
            throw DefectiveMatrix("eig: QR iteration failed to converge for '" + label + "'");
        cplx sigma;
        if (++block_it % 10 == 0) {
            sigma = a(e, e) + 1.5 * (std::abs(a(e, e - 1)) + std::abs(a(e - 1, e - 2)));
        } else {
            auto [w1, w2] = eig2_values(a(e - 1, e - 1), a(e - 1, e), a(e, e - 1), a(e, e));
            sigma = std::abs(w1 - a(e, e)) < std::abs(w2 - a(e, e)) ? w1 : w2;
        }
        qr_step(a, l, e, sigma, work);
    }
    return ev;
}

// Right eigenvector by inverse iteration on the balanced block. Shifts inside an
// exact-degeneracy cluster are spread apart and start vectors orthogonalized
// against earlier cluster members so the computed set stays independent.
std::vector<cplx> inverse_iteration(const CMatrix& b, cplx lambda,
                                    const std::vector<std::vector<cplx>>& cluster_prev) {
    const std::size_t m = b.rows();
    const double bnorm = std::max(norm_fro(b), 1.0);
    const double sep = 100.0 * kEps * bnorm;
    cplx shift = lambda + static_cast<double>(cluster_prev.size()) * sep * cplx{1.0, 1.0};

    CMatrix s(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) s(i, j) = b(i, j) - (i == j ? shift : cplx{});
    const LuFactors f = lu_factor(std::move(s));

    std::vector<cplx> v(m, cplx{1.0 / std::sqrt(static_cast<double>(m)), 0.0});
    for (const auto& prev : cluster_prev) {
        const cplx c = hdot(prev, v);
        for (std::size_t i = 0; i < m; ++i) v[i] -= c * prev[i];
    }
    if (norm2(v) < 1e-3) {  // start vector swallowed by the cluster; use a shifted ramp
        for (std::size_t i = 0; i < m; ++i) v[i] = cplx{1.0 + static_cast<double>(i), 0.5};
    }

    double growth = 0.0;
    for (int it = 0; it < 4; ++it) {
        double nv = norm2(v);
        for (cplx& z : v) z /= nv;
        lu_solve_perturbed(f, v);
        growth = norm2(v);
        if (growth > 0.1 / (kEps * bnorm)) break;
    }
    const double nv = norm2(v);
    for (cplx& z : v) z /= nv;
    return v;
}

struct Mode {
    cplx omega;
    std::vector<cplx> vec;  // full-dimension right eigenvector
};

}  // namespace

std::vector<cplx> eigenvalues_only(const CMatrix& a) {
    if (a.rows() != a.cols() || a.empty()) throw std::invalid_argument("eigenvalues_only: square matrix required");
    CMatrix b = a;
    balance_scale(b);
    return qr_eigenvalues(std::move(b), "eigenvalues_only");
}

EigenSystem eig(const Hamiltonian& h, const EigOptions& opt) {
    const std::size_t n = h.dim();
    std::vector<Mode> modes;
    modes.reserve(n);

    for (const auto& comp : connected_components(h.m)) {
        const std::size_t m = comp.size();
        if (m == 1) {
            Mode md;
            md.omega = h.m(comp[0], comp[0]);
            md.vec.assign(n, cplx{});
            md.vec[comp[0]] = 1.0;
            modes.push_back(std::move(md));
            continue;
        }

        CMatrix b(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) b(i, j) = h.m(comp[i], comp[j]);

        std::vector<cplx> evs;
        std::vector<std::vector<cplx>> vecs(m);
        if (m == 2) {
            auto [w1, w2] = eig2_values(b(0, 0), b(0, 1), b(1, 0), b(1, 1));
            evs = {w1, w2};
            const cplx p = 0.5 * (b(0, 0) - b(1, 1));
            const double scale = std::max({std::abs(b(0, 1)), std::abs(b(1, 0)), std::abs(p), kEps});
            for (int k = 0; k < 2; ++k) {
                const cplx s = (k == 0) ? -(w2 - w1) * 0.5 : (w2 - w1) * 0.5;
                // candidates from the two rows of (B - lambda I)
                const std::vector<cplx> c1{b(0, 1), s - p};
                const std::vector<cplx> c2{p + s, b(1, 0)};
                std::vector<cplx> v = norm2(c1) >= norm2(c2) ? c1 : c2;
                if (norm2(v) <= 10.0 * kEps * scale) v = (k == 0) ? std::vector<cplx>{1.0, 0.0} : std::vector<cplx>{0.0, 1.0};
                vecs[k] = std::move(v);
            }
        } else {
            CMatrix bal = b;
            const std::vector<double> d = balance_scale(bal);
            evs = qr_eigenvalues(bal, h.label);
            std::sort(evs.begin(), evs.end(), [](cplx x, cplx y) {
                return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
            });
            const double cluster_tol = 1e3 * kEps * std::max(norm_fro(bal), 1.0);
            std::vector<std::vector<cplx>> cluster;
            for (std::size_t k = 0; k < m; ++k) {
                if (k > 0 && std::abs(evs[k] - evs[k - 1]) > cluster_tol) cluster.clear();
                std::vector<cplx> v = inverse_iteration(bal, evs[k], cluster);
                cluster.push_back(v);
                for (std::size_t i = 0; i < m; ++i) v[i] *= d[i];  // undo balancing
                vecs[k] = std::move(v);
            }
        }

        for (std::size_t k = 0; k < m; ++k) {
            Mode md;
            md.omega = evs[k];
            md.vec.assign(n, cplx{});
            for (std::size_t i = 0; i < m; ++i) md.vec[comp[i]] = vecs[k][i];
            modes.push_back(std::move(md));
        }
    }

    std::stable_sort(modes.begin(), modes.end(), [](const Mode& x, const Mode& y) {
        return x.omega.real() != y.omega.real() ? x.omega.real() < y.omega.real()
                                                : x.omega.imag() < y.omega.imag();
    });

    EigenSystem es;
    es.eigenvalues.resize(n);
    es.rev = CMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        es.eigenvalues[k] = modes[k].omega;
        gauge_fix(modes[k].vec);
        es.rev.set_col(k, modes[k].vec);
    }

    LuFactors f = lu_factor(es.rev);
    if (lu_singular(f, static_cast<double>(n) * kEps))
        throw DefectiveMatrix("eig: eigenvector matrix of '" + h.label + "' is numerically singular (EP)");
    es.lev = lu_inverse(f);
    const double cond = condition_fro(es.rev, es.lev);
    if (cond > opt.condition_cap)
        throw DefectiveMatrix("eig: eigenvector condition " + std::to_string(cond) + " exceeds cap for '" + h.label + "'");

    es.condition.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        es.condition[k] = norm2(es.lev.row(k)) * norm2(es.rev.col(k));
    return es;
}

}  // namespace levlab
