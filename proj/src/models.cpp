#include "levlab/models.hpp"

#include <cmath>
#include <sstream>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
}

// f(phi) = 4 phi (phi + gamma2) - gamma1^2, evaluated with compensated products so
// Newton polishing lands on the correctly rounded root.
double ep_discriminant(double phi, double gamma1, double gamma2) {
    double eb = 0.0;
    const double b = two_sum(phi, gamma2, eb);
    const double g2h = gamma1 * gamma1;
    const double g2l = std::fma(gamma1, gamma1, -g2h);
    const double t = std::fma(4.0 * phi, b, -g2h);
    return t - g2l + 4.0 * phi * eb;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

Hamiltonian build_h1(const TwoLevelParams& p) {
    CMatrix m(2, 2);
    const cplx diag{p.omega0, p.gamma0};
    m(0, 0) = diag + cplx{0.0, p.gamma1};
    m(0, 1) = p.phi_x;
    m(1, 0) = p.phi_x + p.gamma2;
    m(1, 1) = diag + p.phi_y;
    return Hamiltonian(std::move(m), "two-level(omega0=" + fmt(p.omega0) + ",gamma0=" + fmt(p.gamma0) +
                                         ",gamma1=" + fmt(p.gamma1) + ",gamma2=" + fmt(p.gamma2) +
                                         ",phi_x=" + fmt(p.phi_x) + ",phi_y=" + fmt(p.phi_y) + ")");
}

EpLocations ep_locations(double gamma1, double gamma2) {
    if (gamma1 == 0.0 && gamma2 == 0.0)
        throw HermitianDegenerate("ep_locations: gamma1 = gamma2 = 0 gives a Dirac point, not EPs");
    const double root = std::sqrt(gamma1 * gamma1 + gamma2 * gamma2);
    double lo = 0.5 * (-gamma2 - root);
    double hi = 0.5 * (-gamma2 + root);
    for (int it = 0; it < 3; ++it) {  // polish both roots of the discriminant
        const double dlo = 8.0 * lo + 4.0 * gamma2;
        const double dhi = 8.0 * hi + 4.0 * gamma2;
        if (dlo != 0.0) lo -= ep_discriminant(lo, gamma1, gamma2) / dlo;
        if (dhi != 0.0) hi -= ep_discriminant(hi, gamma1, gamma2) / dhi;
    }
    EpLocations out;
    out.phi_x_low = lo;
    out.phi_x_high = hi;
    out.phi_y = 0.0;
    out.branch_cut = {lo, hi};
    return out;
}

Hamiltonian build_ssh_obc(const SshParams& p) {
    if (p.m_cells < 2) throw std::invalid_argument("build_ssh_obc: m_cells must be >= 2");
    const std::size_t m = static_cast<std::size_t>(p.m_cells);
    const std::size_t n = 2 * m;
    CMatrix h(n, n);
    const cplx diag{p.onsite, p.gamma0};
    for (std::size_t i = 0; i < n; ++i) h(i, i) = diag;
    const auto a_site = [](std::size_t cell) { return 2 * cell; };      // cell = 0..M-1
    const auto b_site = [](std::size_t cell) { return 2 * cell + 1; };
    for (std::size_t cell = 0; cell + 1 < m; ++cell) {
        h(a_site(cell), b_site(cell)) = p.v;            // <A_m|H|B_m>
        h(b_site(cell), a_site(cell)) = p.v + p.delta;  // <B_m|H|A_m>
        h(a_site(cell + 1), b_site(cell)) = p.w;
        h(b_site(cell), a_site(cell + 1)) = p.w;
    }
    return Hamiltonian(std::move(h), "ssh-obc(v=" + fmt(p.v) + ",w=" + fmt(p.w) + ",delta=" + fmt(p.delta) +
                                         ",M=" + fmt(p.m_cells) + ",onsite=" + fmt(p.onsite) + ")");
}

Hamiltonian build_ssh_bloch(const SshParams& p, double k) {
    CMatrix h(2, 2);
    const cplx diag{p.onsite, p.gamma0};
    h(0, 0) = diag;
    h(1, 1) = diag;
    h(0, 1) = p.v + p.w * std::exp(cplx{0.0, -k});
    h(1, 0) = (p.v + p.delta) + p.w * std::exp(cplx{0.0, k});
    return Hamiltonian(std::move(h), "ssh-bloch(v=" + fmt(p.v) + ",w=" + fmt(p.w) + ",delta=" + fmt(p.delta) +
                                         ",k=" + fmt(k) + ")");
}

TzmProfile tzm_profile(const SshParams& p) {
    if (!(std::abs(p.v) < std::abs(p.w)))
        throw TrivialPhase("tzm_profile: |v| >= |w| has no topological zero mode");
    const std::size_t m = static_cast<std::size_t>(p.m_cells);
    const double rl = -p.v / p.w;
    const double rr = -(p.v + p.delta) / p.w;
    TzmProfile t;
    t.lev_a.resize(m);
    t.rev_a.resize(m);
    double lm = 1.0, rm = 1.0, overlap = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        lm *= rl;
        rm *= rr;
        t.lev_a[i] = lm;
        t.rev_a[i] = rm;
        overlap += lm * rm;
    }
    if (std::abs(overlap) < 1e-14 * static_cast<double>(m))
        throw SingularOverlap("tzm_profile: biorthogonal normalization sum vanishes");
    // biorthonormal: c_L c_R = 1/overlap; keep c_L real-positive and symmetric when possible
    const double cl = std::sqrt(std::abs(1.0 / overlap));
    const double cr = (1.0 / overlap) / cl;
    for (std::size_t i = 0; i < m; ++i) {
        t.lev_a[i] *= cl;
        t.rev_a[i] *= cr;
    }
    return t;
}

std::pair<std::vector<cplx>, std::vector<cplx>> tzm_embedded(const TzmProfile& t) {
    const std::size_t m = t.lev_a.size();
    std::vector<cplx> lev(2 * m), rev(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        lev[2 * i] = t.lev_a[i];
        rev[2 * i] = t.rev_a[i];
    }
    return {std::move(lev), std::move(rev)};
}

}  // namespace levlab
