#include "levlab/response.hpp"

#include <limits>
#include <stdexcept>

#include "levlab/errors.hpp"
#include "levlab/linalg.hpp"
#include "levlab/rng.hpp"

namespace levlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_site(const Hamiltonian& h, int idx, const char* what) {
    if (idx < 1 || static_cast<std::size_t>(idx) > h.dim())
        throw std::invalid_argument(std::string("response: ") + what + " index out of range");
}

// Amplitude at one grid point: solve (omega I - H) x = e_source, read x[probe].
cplx point_response(const Hamiltonian& h, double omega, int source_idx, int probe_idx, cplx a0) {
    const std::size_t n = h.dim();
    CMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? cplx{omega} : cplx{}) - h.m(i, j);
    LuFactors f = lu_factor(std::move(a));
    if (lu_singular(f, static_cast<double>(n) * kEps))
        throw SingularAtResonance("response: omega = " + std::to_string(omega) + " hits a resonance");
    std::vector<cplx> b(n);
    b[source_idx - 1] = 1.0;
    lu_solve(f, b);
    return a0 * b[probe_idx - 1];
}

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty frequency grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("sweep: grid must be strictly ascending");
}

ResponseSpectrum sweep_impl(const Hamiltonian& h, std::vector<double> grid, int source_idx, int probe_idx,
                            cplx a0, bool parallel) {
    check_site(h, source_idx, "source");
    check_site(h, probe_idx, "probe");
    validate_grid(grid);
    ResponseSpectrum s;
    s.source_idx = source_idx;
    s.probe_idx = probe_idx;
    s.a0 = a0;
    s.amplitudes.resize(grid.size());
    const std::int64_t np = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static) if (parallel && np > 64)
    for (std::int64_t i = 0; i < np; ++i)
        s.amplitudes[i] = point_response(h, grid[i], source_idx, probe_idx, a0);
    s.omega_grid = std::move(grid);
    return s;
}

Campaign campaign_impl(const Hamiltonian& h, const std::vector<double>& grid, CampaignMode mode, int fixed_idx,
                       cplx a0, const std::optional<NoiseSpec>& noise, bool parallel) {
    check_site(h, fixed_idx, "fixed");
    validate_grid(grid);
    const std::size_t n = h.dim();
    Campaign c;
    c.mode = mode;
    c.fixed_idx = fixed_idx;
    c.spectra.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        ResponseSpectrum& s = c.spectra[k];
        s.omega_grid = grid;
        s.amplitudes.resize(grid.size());
        s.a0 = a0;
        const int moving = static_cast<int>(k) + 1;
        s.source_idx = mode == CampaignMode::Lev ? moving : fixed_idx;
        s.probe_idx = mode == CampaignMode::Lev ? fixed_idx : moving;
    }
    const std::int64_t total = static_cast<std::int64_t>(n * grid.size());
#pragma omp parallel for schedule(static) if (parallel && total > 64)
    for (std::int64_t t = 0; t < total; ++t) {
        const std::size_t k = static_cast<std::size_t>(t) / grid.size();
        const std::size_t i = static_cast<std::size_t>(t) % grid.size();
        ResponseSpectrum& s = c.spectra[k];
        s.amplitudes[i] = point_response(h, grid[i], s.source_idx, s.probe_idx, a0);
    }
    if (noise && noise->sigma_rel > 0.0)
        for (std::size_t k = 0; k < n; ++k) c.spectra[k] = add_noise(c.spectra[k], noise->sigma_rel, noise->seed);
    return c;
}

}  // namespace

cplx response(const Hamiltonian& h, double omega, int source_idx, int probe_idx, cplx a0) {
    check_site(h, source_idx, "source");
    check_site(h, probe_idx, "probe");
    return point_response(h, omega, source_idx, probe_idx, a0);
}

std::vector<double> default_grid(double omega_center, double half_span, int points) {
    if (points < 1 || half_span <= 0.0) throw std::invalid_argument("default_grid: bad parameters");
    std::vector<double> g(points);
    if (points == 1) { g[0] = omega_center; return g; }
    for (int i = 0; i < points; ++i)
        g[i] = omega_center - half_span + 2.0 * half_span * i / (points - 1);
    return g;
}

ResponseSpectrum sweep(const Hamiltonian& h, std::vector<double> grid, int source_idx, int probe_idx, cplx a0) {
    return sweep_impl(h, std::move(grid), source_idx, probe_idx, a0, true);
}

ResponseSpectrum sweep_serial(const Hamiltonian& h, std::vector<double> grid, int source_idx, int probe_idx,
                              cplx a0) {
    return sweep_impl(h, std::move(grid), source_idx, probe_idx, a0, false);
}

ResponseSpectrum add_noise(const ResponseSpectrum& s, double sigma_rel, std::uint64_t seed) {
    if (sigma_rel < 0.0) throw std::invalid_argument("add_noise: sigma_rel must be >= 0");
    ResponseSpectrum out = s;
    if (sigma_rel == 0.0) return out;
    double peak = 0.0;
    for (const cplx& z : s.amplitudes) peak = std::max(peak, std::abs(z));
    const double sigma = sigma_rel * peak;
    const std::uint64_t pair_key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.source_idx)) << 32) |
        static_cast<std::uint32_t>(s.probe_idx);
    for (std::size_t i = 0; i < out.amplitudes.size(); ++i)
        out.amplitudes[i] += sigma * gaussian_cplx(seed, pair_key, i);
    return out;
}

Campaign run_campaign(const Hamiltonian& h, const std::vector<double>& grid, CampaignMode mode, int fixed_idx,
                      cplx a0, const std::optional<NoiseSpec>& noise) {
    return campaign_impl(h, grid, mode, fixed_idx, a0, noise, true);
}

Campaign run_campaign_serial(const Hamiltonian& h, const std::vector<double>& grid, CampaignMode mode,
                             int fixed_idx, cplx a0, const std::optional<NoiseSpec>& noise) {
    return campaign_impl(h, grid, mode, fixed_idx, a0, noise, false);
}

}  // namespace levlab
