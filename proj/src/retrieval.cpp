#include "levlab/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "levlab/errors.hpp"
#include "levlab/linalg.hpp"

namespace levlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::vector<double> magnitudes(const ResponseSpectrum& s) {
    std::vector<double> m(s.amplitudes.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(s.amplitudes[i]);
    return m;
}

std::size_t nearest_index(const std::vector<double>& grid, double omega) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), omega);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    return (omega - grid[hi - 1] <= grid[hi] - omega) ? hi - 1 : hi;
}

void validate_campaign(const Campaign& c) {
    if (c.spectra.empty()) throw std::invalid_argument("campaign is empty");
    const std::size_t n = c.spectra.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = c.spectra[k];
        if (s.omega_grid.size() != s.amplitudes.size() || s.omega_grid.empty())
            throw std::invalid_argument("campaign spectrum has inconsistent grid");
        const int moving = c.mode == CampaignMode::Lev ? s.source_idx : s.probe_idx;
        const int fixed = c.mode == CampaignMode::Lev ? s.probe_idx : s.source_idx;
        if (moving != static_cast<int>(k) + 1 || fixed != c.fixed_idx)
            throw std::invalid_argument("campaign does not cover each site exactly once");
    }
}

bool shared_grid(const Campaign& c) {
    for (std::size_t k = 1; k < c.spectra.size(); ++k)
        if (c.spectra[k].omega_grid != c.spectra[0].omega_grid) return false;
    return true;
}

double campaign_peak_amplitude(const Campaign& c) {
    double peak = 0.0;
    for (const auto& s : c.spectra)
        for (const cplx& z : s.amplitudes) peak = std::max(peak, std::abs(z));
    return peak;
}

// ---------------------------------------------------------------------------
// Variable-projection fitter: residues are linear and solved exactly at each
// pole configuration; a damped Gauss-Newton step moves the shared poles.
// ---------------------------------------------------------------------------

struct VarProState {
    std::vector<cplx> poles;
    CMatrix residues;  // M x J
    double cost = 0.0;
    std::vector<std::vector<cplx>> resid;  // per spectrum
};

struct ResidualHotspot {
    double omega = 0.0;
    double magnitude = 0.0;
};

class VarPro {
public:
    VarPro(const Campaign& c, std::size_t n_modes)
        : c_(c), m_(n_modes), j_(c.spectra.size()), common_(shared_grid(c)) {}

    // Solve residues and residuals for a pole set; returns false on non-finite data.
    bool evaluate(VarProState& st) const {
        st.residues = CMatrix(m_, j_);
        st.resid.assign(j_, {});
        st.cost = 0.0;
        LuFactors fac;
        CMatrix g;
        for (std::size_t j = 0; j < j_; ++j) {
            const auto& grid = c_.spectra[j].omega_grid;
            const std::size_t p = grid.size();
            if (j == 0 || !common_) {
                g = CMatrix(p, m_);
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t n = 0; n < m_; ++n) g(i, n) = 1.0 / (grid[i] - st.poles[n]);
                CMatrix s(m_, m_);
                for (std::size_t a = 0; a < m_; ++a)
                    for (std::size_t b = 0; b < m_; ++b) {
                        cplx acc{};
                        for (std::size_t i = 0; i < p; ++i) acc += std::conj(g(i, a)) * g(i, b);
                        s(a, b) = acc;
                    }
                double tr = 0.0;
                for (std::size_t a = 0; a < m_; ++a) tr += std::abs(s(a, a));
                const double ridge = std::max(1e-13 * tr / static_cast<double>(m_), 1e-300);
                for (std::size_t a = 0; a < m_; ++a) s(a, a) += ridge;
                fac = lu_factor(std::move(s));
            }
            std::vector<cplx> rhs(m_);
            for (std::size_t n = 0; n < m_; ++n) {
                cplx acc{};
                for (std::size_t i = 0; i < p; ++i) acc += std::conj(g(i, n)) * c_.spectra[j].amplitudes[i];
                rhs[n] = acc;
            }
            lu_solve(fac, rhs);
            for (std::size_t n = 0; n < m_; ++n) st.residues(n, j) = rhs[n];
            auto& r = st.resid[j];
            r.resize(p);
            for (std::size_t i = 0; i < p; ++i) {
                cplx model{};
                for (std::size_t n = 0; n < m_; ++n) model += rhs[n] * g(i, n);
                r[i] = model - c_.spectra[j].amplitudes[i];
                st.cost += std::norm(r[i]);
            }
        }
        return std::isfinite(st.cost);
    }

    // Gauss-Newton normal matrix and gradient for the pole parameters
    // (d model / d omega_n = c_{n,j} / (omega - omega_n)^2).
    void normal_system(const VarProState& st, std::vector<double>& nmat, std::vector<double>& grad) const {
        CMatrix t(m_, m_);  // sum_i conj(h_a) h_b over one grid (recomputed when grids differ)
        std::vector<cplx> v(m_, cplx{});
        CMatrix gram(m_, m_);
        CMatrix h;
        for (std::size_t j = 0; j < j_; ++j) {
            const auto& grid = c_.spectra[j].omega_grid;
            const std::size_t p = grid.size();
            if (j == 0 || !common_) {
                h = CMatrix(p, m_);
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t n = 0; n < m_; ++n) {
                        const cplx g = 1.0 / (grid[i] - st.poles[n]);
                        h(i, n) = g * g;
                    }
                for (std::size_t a = 0; a < m_; ++a)
                    for (std::size_t b = 0; b < m_; ++b) {
                        cplx acc{};
                        for (std::size_t i = 0; i < p; ++i) acc += std::conj(h(i, a)) * h(i, b);
                        t(a, b) = acc;
                    }
            }
            for (std::size_t a = 0; a < m_; ++a)
                for (std::size_t b = 0; b < m_; ++b)
                    gram(a, b) += std::conj(st.residues(a, j)) * st.residues(b, j) * t(a, b);
            for (std::size_t n = 0; n < m_; ++n) {
                cplx acc{};
                for (std::size_t i = 0; i < p; ++i) acc += std::conj(h(i, n)) * st.resid[j][i];
                v[n] += std::conj(st.residues(n, j)) * acc;
            }
        }
        const std::size_t dim = 2 * m_;
        nmat.assign(dim * dim, 0.0);
        grad.assign(dim, 0.0);
        for (std::size_t a = 0; a < m_; ++a) {
            for (std::size_t b = 0; b < m_; ++b) {
                const cplx gab = gram(a, b);
                nmat[(2 * a) * dim + 2 * b] = gab.real();
                nmat[(2 * a) * dim + 2 * b + 1] = -gab.imag();
                nmat[(2 * a + 1) * dim + 2 * b] = gab.imag();
                nmat[(2 * a + 1) * dim + 2 * b + 1] = gab.real();
            }
            grad[2 * a] = v[a].real();
            grad[2 * a + 1] = v[a].imag();
        }
    }

private:
    const Campaign& c_;
    std::size_t m_, j_;
    bool common_;
};

// Dense real solve (tiny systems), partial pivoting.
bool solve_real(std::vector<double> a, std::vector<double> b, std::size_t n, std::vector<double>& x) {
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
        if (a[p * n + k] == 0.0) return false;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] / a[k * n + k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * x[j];
        x[ii] = s / a[ii * n + ii];
    }
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

struct GridStats {
    double lo, hi, step;
};

GridStats campaign_grid_stats(const Campaign& c) {
    double lo = 1e300, hi = -1e300, step = 1e300;
    for (const auto& s : c.spectra) {
        lo = std::min(lo, s.omega_grid.front());
        hi = std::max(hi, s.omega_grid.back());
        for (std::size_t i = 1; i < s.omega_grid.size(); ++i)
            step = std::min(step, s.omega_grid[i] - s.omega_grid[i - 1]);
    }
    if (step == 1e300) step = 1.0;
    return {lo, hi, step};
}

// Peaks of the campaign: aggregate magnitude on a shared grid, pooled
// per-spectrum peaks otherwise.
std::vector<Peak> campaign_peaks(const Campaign& c, int max_peaks) {
    if (shared_grid(c)) {
        const auto& grid = c.spectra[0].omega_grid;
        std::vector<double> agg(grid.size(), 0.0);
        for (const auto& s : c.spectra)
            for (std::size_t i = 0; i < grid.size(); ++i) agg[i] += std::abs(s.amplitudes[i]);
        return pick_peaks(grid, agg, max_peaks);
    }
    std::vector<Peak> pool;
    for (const auto& s : c.spectra) {
        try {
            auto ps = pick_peaks(s, max_peaks);
            pool.insert(pool.end(), ps.begin(), ps.end());
        } catch (const NoPeaks&) {
        }
    }
    if (pool.empty()) throw NoPeaks("campaign_peaks: no resonant structure in any spectrum");
    std::sort(pool.begin(), pool.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    std::vector<Peak> out;
    for (const Peak& p : pool) {
        bool dup = false;
        for (const Peak& q : out)
            if (std::abs(p.omega - q.omega) < std::max(p.half_width, q.half_width)) dup = true;
        if (!dup) out.push_back(p);
        if (static_cast<int>(out.size()) >= max_peaks) break;
    }
    std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.omega < b.omega; });
    return out;
}

std::vector<cplx> initial_poles(const Campaign& c, std::size_t n_modes) {
    const GridStats gs = campaign_grid_stats(c);
    std::vector<cplx> poles;
    try {
        for (const Peak& p : campaign_peaks(c, static_cast<int>(n_modes)))
            poles.emplace_back(p.omega, -std::max(p.half_width, gs.step));
    } catch (const NoPeaks&) {
    }
    const std::size_t missing = n_modes - std::min(n_modes, poles.size());
    const double span = std::max(gs.hi - gs.lo, gs.step);
    for (std::size_t r = 0; r < missing; ++r) {
        const double frac = (static_cast<double>(r) + 0.5) / static_cast<double>(missing);
        poles.emplace_back(gs.lo + frac * span, -span / 20.0);
    }
    return poles;
}

void sort_modes(FitModel& fm) {
    const std::size_t m = fm.poles.size(), j = fm.residues.cols();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fm.poles[a].real() != fm.poles[b].real() ? fm.poles[a].real() < fm.poles[b].real()
                                                        : fm.poles[a].imag() < fm.poles[b].imag();
    });
    std::vector<cplx> poles(m);
    CMatrix res(m, j);
    for (std::size_t k = 0; k < m; ++k) {
        poles[k] = fm.poles[order[k]];
        for (std::size_t s = 0; s < j; ++s) res(k, s) = fm.residues(order[k], s);
    }
    fm.poles = std::move(poles);
    fm.residues = std::move(res);
}

}  // namespace

cplx FitModel::eval(std::size_t spectrum, double omega) const {
    cplx out{};
    for (std::size_t n = 0; n < poles.size(); ++n) out += residues(n, spectrum) / (omega - poles[n]);
    return out;
}

std::vector<Peak> pick_peaks(const std::vector<double>& omega, const std::vector<double>& magnitude,
                             int max_peaks, double prominence_rel) {
    if (omega.size() < 3) throw std::invalid_argument("pick_peaks: need at least 3 grid points");
    if (omega.size() != magnitude.size()) throw std::invalid_argument("pick_peaks: length mismatch");
    if (max_peaks < 1) throw std::invalid_argument("pick_peaks: max_peaks must be >= 1");
    const double global = *std::max_element(magnitude.begin(), magnitude.end());
    std::vector<Peak> peaks;
    const std::size_t n = omega.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = magnitude[i];
        if (!(a > magnitude[i - 1] && a > magnitude[i + 1])) continue;
        // prominence: drop to the highest valley separating this peak from higher ground
        double left_base = a, right_base = a;
        {
            double valley = a;
            for (std::size_t k = i; k-- > 0;) {
                valley = std::min(valley, magnitude[k]);
                if (magnitude[k] > a) break;
            }
            left_base = valley;
        }
        {
            double valley = a;
            for (std::size_t k = i + 1; k < n; ++k) {
                valley = std::min(valley, magnitude[k]);
                if (magnitude[k] > a) break;
            }
            right_base = valley;
        }
        const double prom = a - std::max(left_base, right_base);
        if (prom < prominence_rel * global) continue;
        // half width at 1/sqrt(2) of the peak height
        const double thresh = a * 0x1.6a09e667f3bcdp-1;
        double wl = omega[i] - omega[i == 0 ? 0 : i - 1], wr = wl;
        for (std::size_t k = i; k-- > 0;)
            if (magnitude[k] <= thresh) { wl = omega[i] - omega[k]; break; }
        for (std::size_t k = i + 1; k < n; ++k)
            if (magnitude[k] <= thresh) { wr = omega[k] - omega[i]; break; }
        peaks.push_back({omega[i], a, prom, 0.5 * (wl + wr)});
    }
    if (peaks.empty()) throw NoPeaks("pick_peaks: no local maximum above the prominence threshold");
    if (static_cast<int>(peaks.size()) > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

std::vector<Peak> pick_peaks(const ResponseSpectrum& s, int max_peaks, double prominence_rel) {
    return pick_peaks(s.omega_grid, magnitudes(s), max_peaks, prominence_rel);
}

RetrievedMode extract_peak_entries(const Campaign& c, double omega_peak) {
    validate_campaign(c);
    RetrievedMode out;
    out.kind = c.mode == CampaignMode::Lev ? VectorKind::Lev : VectorKind::Rev;
    out.method = RetrievalMethod::PeakSample;
    out.entries.resize(c.spectra.size());
    double omega_used = omega_peak;
    for (std::size_t k = 0; k < c.spectra.size(); ++k) {
        const auto& s = c.spectra[k];
        if (omega_peak < s.omega_grid.front() || omega_peak > s.omega_grid.back())
            throw std::invalid_argument("extract_peak_entries: omega_peak outside a spectrum grid");
        const std::size_t i = nearest_index(s.omega_grid, omega_peak);
        out.entries[k] = s.amplitudes[i];
        if (k == 0) omega_used = s.omega_grid[i];
    }
    out.omega_n = cplx{omega_used, 0.0};
    return out;
}

// Damped Gauss-Newton on the shared poles, residues re-solved at every step.
// Converged when relative cost gains reach round-off against the residual floor
// or the poles stop moving on the linewidth scale; noise puts the floor far
// above zero, so both tests must be relative.
void levenberg_loop(const VarPro& vp, VarProState& st, std::size_t m, double im_cap, int max_iter) {
    double lambda = 1e-3;
    int stall = 0;
    std::vector<double> nmat, grad, delta;
    double width = 0.0;
    for (const cplx& p : st.poles) width = std::max(width, std::abs(p.imag()));
    const double move_floor = 1e-7 * std::max(width, 1e-12);
    for (int it = 0; it < max_iter && stall < 3; ++it) {
        vp.normal_system(st, nmat, grad);
        const std::size_t dim = 2 * m;
        double diag_floor = 0.0;
        for (std::size_t d = 0; d < dim; ++d) diag_floor += nmat[d * dim + d];
        diag_floor = std::max(diag_floor * 1e-14 / static_cast<double>(dim), 1e-300);

        bool accepted = false;
        for (int inner = 0; inner < 16 && !accepted; ++inner) {
            std::vector<double> damped = nmat;
            for (std::size_t d = 0; d < dim; ++d)
                damped[d * dim + d] += lambda * std::max(nmat[d * dim + d], diag_floor);
            std::vector<double> rhs(dim);
            for (std::size_t d = 0; d < dim; ++d) rhs[d] = -grad[d];
            VarProState trial = st;
            if (solve_real(std::move(damped), std::move(rhs), dim, delta)) {
                double moved = 0.0;
                for (std::size_t n = 0; n < m; ++n) {
                    cplx p = st.poles[n] + cplx{delta[2 * n], delta[2 * n + 1]};
                    if (p.imag() > im_cap) p = cplx{p.real(), im_cap};
                    moved = std::max(moved, std::abs(p - st.poles[n]));
                    trial.poles[n] = p;
                }
                if (vp.evaluate(trial) && trial.cost < st.cost) {
                    const double rel_gain = (st.cost - trial.cost) / std::max(st.cost, 1e-300);
                    st = std::move(trial);
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    stall = (rel_gain < 1e-10 || moved < move_floor) ? stall + 1 : 0;
                }
            }
            if (!accepted) lambda *= 4.0;
        }
        if (!accepted) break;
    }
}

// One barycentric pole-relocation round: fit A_j(w) (1 + sum_n d_n/(w - p_n)) =
// sum_n c_{n,j}/(w - p_n) in joint least squares and move the poles to the zeros
// of the shared denominator. Rational data pulls the poles onto the true ones in
// a handful of rounds, which gives the Gauss-Newton stage a basin it can finish.
bool relocate_poles(const Campaign& c, std::vector<cplx>& poles) {
    const std::size_t m = poles.size();
    const std::size_t nj = c.spectra.size();
    const bool common = shared_grid(c);
    CMatrix s(m, m), acc(m, m);
    std::vector<cplx> rhs(m, cplx{});
    LuFactors sfac;
    CMatrix g;
    for (std::size_t j = 0; j < nj; ++j) {
        const auto& grid = c.spectra[j].omega_grid;
        const auto& amp = c.spectra[j].amplitudes;
        const std::size_t p = grid.size();
        if (j == 0 || !common) {
            g = CMatrix(p, m);
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t n = 0; n < m; ++n) g(i, n) = 1.0 / (grid[i] - poles[n]);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b) {
                    cplx z{};
                    for (std::size_t i = 0; i < p; ++i) z += std::conj(g(i, a)) * g(i, b);
                    s(a, b) = z;
                }
            double tr = 0.0;
            for (std::size_t a = 0; a < m; ++a) tr += std::abs(s(a, a));
            for (std::size_t a = 0; a < m; ++a) s(a, a) += std::max(1e-13 * tr / static_cast<double>(m), 1e-300);
            sfac = lu_factor(s);
        }
        CMatrix t(m, m), u(m, m);
        std::vector<cplx> b(m, cplx{}), w(m, cplx{});
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t bb = 0; bb < m; ++bb) {
                cplx zt{}, zu{};
                for (std::size_t i = 0; i < p; ++i) {
                    const cplx ga = std::conj(g(i, a));
                    zt += ga * amp[i] * g(i, bb);
                    zu += ga * std::norm(amp[i]) * g(i, bb);
                }
                t(a, bb) = zt;
                u(a, bb) = zu;
            }
        for (std::size_t a = 0; a < m; ++a) {
            cplx zb{}, zw{};
            for (std::size_t i = 0; i < p; ++i) {
                zb += std::conj(g(i, a)) * amp[i];
                zw += std::conj(g(i, a)) * std::norm(amp[i]);
            }
            b[a] = zb;
            w[a] = zw;
        }
        // Schur complement on the shared denominator coefficients:
        // sum_j (U_j - T_j^H S^{-1} T_j) d = sum_j (T_j^H S^{-1} b_j - w_j)
        CMatrix sinv_t(m, m);
        std::vector<cplx> col(m);
        for (std::size_t cc = 0; cc < m; ++cc) {
            for (std::size_t a = 0; a < m; ++a) col[a] = t(a, cc);
            lu_solve(sfac, col);
            for (std::size_t a = 0; a < m; ++a) sinv_t(a, cc) = col[a];
        }
        std::vector<cplx> sinv_b(b);
        lu_solve(sfac, sinv_b);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t bb = 0; bb < m; ++bb) {
                cplx th_sinv_t{};
                for (std::size_t k = 0; k < m; ++k) th_sinv_t += std::conj(t(k, a)) * sinv_t(k, bb);
                acc(a, bb) += u(a, bb) - th_sinv_t;
            }
            cplx th_b{};
            for (std::size_t k = 0; k < m; ++k) th_b += std::conj(t(k, a)) * sinv_b[k];
            rhs[a] += th_b - w[a];
        }
    }
    double tr = 0.0;
    for (std::size_t a = 0; a < m; ++a) tr += std::abs(acc(a, a));
    for (std::size_t a = 0; a < m; ++a) acc(a, a) += std::max(1e-13 * tr / static_cast<double>(m), 1e-300);
    LuFactors afac = lu_factor(std::move(acc));
    lu_solve(afac, rhs);  // rhs now holds the denominator coefficients d
    for (const cplx& d : rhs)
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag())) return false;

    // zeros of 1 + sum d_n/(w - p_n) = eigenvalues of diag(p) - ones * d^T
    CMatrix hm(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t bb = 0; bb < m; ++bb) hm(a, bb) = (a == bb ? poles[a] : cplx{}) - rhs[bb];
    std::vector<cplx> znew;
    try {
        znew = eigenvalues_only(hm);
    } catch (const Error&) {
        return false;
    }
    double moved = 0.0;
    GridStats gs = campaign_grid_stats(c);
    const double span = std::max(gs.hi - gs.lo, gs.step);
    for (std::size_t n = 0; n < m; ++n) {
        cplx z = znew[n];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        z = cplx{std::clamp(z.real(), gs.lo - 0.5 * span, gs.hi + 0.5 * span),
                 std::clamp(z.imag() > 0.0 ? -z.imag() : z.imag(), -span, -1e-12 * span)};
        moved = std::max(moved, std::abs(z - poles[n]));
        poles[n] = z;
    }
    std::sort(poles.begin(), poles.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return moved > 1e-8 * span;
}

ResidualHotspot worst_residual(const Campaign& c, const VarProState& st) {
    ResidualHotspot hot;
    for (std::size_t j = 0; j < c.spectra.size(); ++j)
        for (std::size_t i = 0; i < st.resid[j].size(); ++i) {
            const double a = std::abs(st.resid[j][i]);
            if (a > hot.magnitude) {
                hot.magnitude = a;
                hot.omega = c.spectra[j].omega_grid[i];
            }
        }
    return hot;
}

double median_width(const std::vector<cplx>& poles) {
    std::vector<double> w;
    for (const cplx& p : poles) w.push_back(std::abs(p.imag()));
    std::sort(w.begin(), w.end());
    return std::max(w[w.size() / 2], 1e-12);
}

// The pole landscape is multimodal when resonances overlap; after each
// converged pass, merge pole pairs much closer than their widths and respawn
// dead or redundant poles at the worst-residual frequency. Keep a change only
// when it lowers the cost.
bool refine_poles(const Campaign& c, const VarPro& vp, VarProState& st, double im_cap, int max_iter) {
    const std::size_t m = st.poles.size();
    const ResidualHotspot hot = worst_residual(c, st);
    const double width = median_width(st.poles);

    double residue_max = 0.0;
    std::vector<double> pole_weight(m, 0.0);
    for (std::size_t n = 0; n < m; ++n) {
        for (std::size_t j = 0; j < c.spectra.size(); ++j)
            pole_weight[n] = std::max(pole_weight[n], std::abs(st.residues(n, j)));
        residue_max = std::max(residue_max, pole_weight[n]);
    }

    std::vector<std::size_t> respawn;
    std::vector<bool> merged(m, false);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            if (merged[a] || merged[b]) continue;
            const double sep = std::abs(st.poles[a] - st.poles[b]);
            const double wmin = std::min(std::abs(st.poles[a].imag()), std::abs(st.poles[b].imag()));
            if (sep < 0.5 * wmin) {
                merged[b] = true;
                respawn.push_back(b);
            }
        }
    for (std::size_t n = 0; n < m; ++n)
        if (!merged[n] && pole_weight[n] < 1e-9 * residue_max) respawn.push_back(n);
    if (respawn.empty() || hot.magnitude == 0.0) return false;

    VarProState trial = st;
    double offset = 0.0;
    for (std::size_t n : respawn) {
        trial.poles[n] = cplx{hot.omega + offset, -width};
        offset += 0.25 * width;  // spread multiple respawns around the hotspot
    }
    if (!vp.evaluate(trial)) return false;
    levenberg_loop(vp, trial, m, im_cap, max_iter);
    // continue refining only for a substantial gain; noise floors otherwise
    // keep producing marginal improvements forever
    if (trial.cost < st.cost * (1.0 - 1e-3)) {
        st = std::move(trial);
        return true;
    }
    if (trial.cost < st.cost) st = std::move(trial);
    return false;
}

std::pair<FitModel, std::vector<RetrievedMode>> fit_modes(const Campaign& c, int n_modes, const FitOptions& opt) {
    validate_campaign(c);
    if (n_modes < 1) throw std::invalid_argument("fit_modes: n_modes must be >= 1");
    const std::size_t m = static_cast<std::size_t>(n_modes);
    const std::size_t j = c.spectra.size();
    std::size_t points = 0;
    for (const auto& s : c.spectra) points += s.omega_grid.size();
    if (2 * points < 2 * m + 2 * m * j)
        throw RankDeficient("fit_modes: " + std::to_string(n_modes) + " modes exceed what " +
                            std::to_string(points) + " data points support");

    const GridStats gs = campaign_grid_stats(c);
    const double span = std::max(gs.hi - gs.lo, gs.step);
    const double im_cap = opt.allow_growing_poles ? 1e300 : -1e-12 * span;

    VarPro vp(c, m);
    VarProState st;
    if (opt.init) {
        if (opt.init->poles.size() != m) throw std::invalid_argument("fit_modes: init pole count mismatch");
        st.poles = opt.init->poles;
    } else {
        st.poles = initial_poles(c, m);
        for (int round = 0; round < 15; ++round)
            if (!relocate_poles(c, st.poles)) break;
    }
    for (cplx& p : st.poles)
        if (p.imag() > im_cap) p = cplx{p.real(), im_cap};

    if (!vp.evaluate(st)) throw FitDiverged("fit_modes: non-finite model at the initial pole set");

    const double peak0 = campaign_peak_amplitude(c);
    const double target_cost = std::pow(1e-10 * peak0, 2) * static_cast<double>(points);
    levenberg_loop(vp, st, m, im_cap, opt.max_iter);
    for (int round = 0; round < opt.restarts && st.cost > target_cost; ++round)
        if (!refine_poles(c, vp, st, im_cap, opt.max_iter)) break;

    FitModel fm;
    fm.poles = st.poles;
    fm.residues = st.residues;
    sort_modes(fm);
    double sq = 0.0;
    for (std::size_t s = 0; s < j; ++s)
        for (std::size_t i = 0; i < c.spectra[s].omega_grid.size(); ++i)
            sq += std::norm(fm.eval(s, c.spectra[s].omega_grid[i]) - c.spectra[s].amplitudes[i]);
    fm.quality = peak0 > 0.0 ? std::sqrt(sq / static_cast<double>(points)) / peak0 : 0.0;
    if (!std::isfinite(fm.quality) || fm.quality > opt.diverged_rms)
        throw FitDiverged("fit_modes: relative residual " + std::to_string(fm.quality) + " exceeds " +
                          std::to_string(opt.diverged_rms));

    std::vector<RetrievedMode> modes(m);
    for (std::size_t n = 0; n < m; ++n) {
        RetrievedMode& md = modes[n];
        md.mode_idx = static_cast<int>(n);
        md.omega_n = fm.poles[n];
        md.kind = c.mode == CampaignMode::Lev ? VectorKind::Lev : VectorKind::Rev;
        md.method = RetrievalMethod::Fit;
        md.quality = fm.quality;
        md.entries.resize(j);
        for (std::size_t s = 0; s < j; ++s) md.entries[s] = fm.residues(n, s);
    }
    return {std::move(fm), std::move(modes)};
}

RetrievedMode retrieve_eigvec(const Campaign& c, const ModeSelector& target, const RetrieveOptions& opt) {
    validate_campaign(c);
    const std::size_t dim = c.spectra.size();
    const int n_modes = opt.n_modes > 0 ? opt.n_modes : static_cast<int>(dim);
    const GridStats gs = campaign_grid_stats(c);

    bool use_fit = opt.method == RetrieveOptions::Method::FitOnly;
    std::vector<Peak> peaks;
    if (opt.method != RetrieveOptions::Method::FitOnly) {
        peaks = campaign_peaks(c, n_modes);
        if (opt.method == RetrieveOptions::Method::Auto) {
            if (static_cast<int>(peaks.size()) < n_modes) {
                use_fit = true;
            } else {
                double max_hw = 0.0, min_gap = 1e300;
                for (const Peak& p : peaks) max_hw = std::max(max_hw, p.half_width);
                for (std::size_t i = 1; i < peaks.size(); ++i)
                    min_gap = std::min(min_gap, peaks[i].omega - peaks[i - 1].omega);
                use_fit = min_gap < opt.overlap_linewidths * max_hw;
            }
        }
    }

    RetrievedMode out;
    if (!use_fit) {
        std::size_t pick = 0;
        if (target.kind == ModeSelector::Kind::Index) {
            if (target.index < 0 || target.index >= static_cast<int>(peaks.size()))
                throw WeakPrefactor("retrieve_eigvec: requested mode has no visible peak");
            pick = static_cast<std::size_t>(target.index);
        } else {
            double best = 1e300;
            for (std::size_t i = 0; i < peaks.size(); ++i) {
                const double d = std::abs(peaks[i].omega - target.omega);
                if (d < best) { best = d; pick = i; }
            }
            const double window = std::max(3.0 * peaks[pick].half_width, 2.0 * gs.step);
            if (best > window)
                throw WeakPrefactor("retrieve_eigvec: no resonance near the requested frequency");
        }
        out = extract_peak_entries(c, peaks[pick].omega);
        out.mode_idx = static_cast<int>(pick);
    } else {
        FitOptions fopt = opt.fit;
        auto [fm, modes] = fit_modes(c, n_modes, fopt);
        std::size_t pick = 0;
        if (target.kind == ModeSelector::Kind::Index) {
            if (target.index < 0 || target.index >= static_cast<int>(modes.size()))
                throw std::invalid_argument("retrieve_eigvec: mode index out of range");
            pick = static_cast<std::size_t>(target.index);
        } else {
            // a converged pole for the requested mode lands well inside one
            // linewidth of the target; anything farther means the mode left no
            // signature in this campaign
            const double window = std::max(median_width(fm.poles), 2.0 * gs.step);
            double best_norm = -1.0;
            bool found = false;
            for (std::size_t n = 0; n < modes.size(); ++n) {
                if (std::abs(fm.poles[n].real() - target.omega) > window) continue;
                double nn = 0.0;
                for (const cplx& e : modes[n].entries) nn = std::max(nn, std::abs(e));
                if (nn > best_norm) { best_norm = nn; pick = n; found = true; }
            }
            if (!found)
                throw WeakPrefactor("retrieve_eigvec: no fitted mode near the requested frequency");
        }
        out = std::move(modes[pick]);

        // visibility across modes: the target must carry non-negligible residues
        double target_max = 0.0, global_max = 0.0;
        for (std::size_t n = 0; n < fm.poles.size(); ++n)
            for (std::size_t s = 0; s < dim; ++s) {
                const double a = std::abs(fm.residues(n, s));
                global_max = std::max(global_max, a);
                if (n == static_cast<std::size_t>(out.mode_idx)) target_max = std::max(target_max, a);
            }
        if (target_max < opt.weak_rel * global_max)
            throw WeakPrefactor("retrieve_eigvec: target mode is invisible from this fixed site");
    }

    // fixed-site entry carries the prefactor r_n^p (or l_n^p); if it vanishes the
    // mode cannot be excited/observed from this site
    double emax = 0.0;
    for (const cplx& e : out.entries) emax = std::max(emax, std::abs(e));
    const double efixed = std::abs(out.entries[static_cast<std::size_t>(c.fixed_idx - 1)]);
    if (emax == 0.0 || efixed < opt.weak_rel * emax)
        throw WeakPrefactor("retrieve_eigvec: fixed-site amplitude vanishes for the target mode");

    gauge_fix(out.entries);
    return out;
}

}  // namespace levlab
