#pragma once

#include <utility>

#include "levlab/types.hpp"

namespace levlab {

/// Two coupled lossy resonators with non-reciprocal coupling. All rates in rad/s.
/// Tunable ranges used in the experiments (phi_x within +-92.3, phi_y within
/// +-94.2 rad/s) are advisory only.
struct TwoLevelParams {
    double omega0 = 0.0;  ///< bare resonance
    double gamma0 = 0.0;  ///< uniform dissipation (enters as i*gamma0 on both sites)
    double gamma1 = 0.0;  ///< extra on-site loss on site 1 (enters as i*gamma1)
    double gamma2 = 0.0;  ///< non-reciprocal coupling offset
    double phi_x = 0.0;
    double phi_y = 0.0;
};

/// Non-reciprocal SSH chain, M unit cells of (A, B) sites. All rates in rad/s.
struct SshParams {
    double v = 0.0;      ///< intracell hop (B -> A direction carries v, A -> B carries v+delta)
    double w = 0.0;      ///< intercell hop (reciprocal)
    double delta = 0.0;  ///< non-reciprocal offset
    int m_cells = 2;
    double onsite = 0.0;  ///< common on-site frequency on the diagonal
    double gamma0 = 0.0;  ///< uniform on-site dissipation i*gamma0 (0 = lossless)
};

/// Analytic zero-mode amplitudes per unit cell; B-sublattice entries vanish identically.
struct TzmProfile {
    std::vector<cplx> lev_a;  ///< Psi^L_{m,A} = c_L (-v/w)^m, m = 1..M
    std::vector<cplx> rev_a;  ///< Psi^R_{m,A} = c_R (-(v+delta)/w)^m
};

struct EpLocations {
    double phi_x_low = 0.0;   ///< smaller root
    double phi_x_high = 0.0;  ///< larger root
    double phi_y = 0.0;
    std::pair<double, double> branch_cut;  ///< phi_x interval connecting the EPs at phi_y = 0
};

Hamiltonian build_h1(const TwoLevelParams& p);

/// Both order-2 EP positions of the two-level model. Throws HermitianDegenerate
/// when gamma1 = gamma2 = 0 (Dirac point, not EPs).
EpLocations ep_locations(double gamma1, double gamma2);

/// Open chain, basis ordered (A1, B1, A2, B2, ...). Bonds follow the lattice sum
/// over cells m = 1..M-1, so site B_M carries no coupling and the zero mode is
/// exact ("odd" count of coupled sites).
Hamiltonian build_ssh_obc(const SshParams& p);

/// 2x2 Bloch Hamiltonian at dimensionless momentum k in [-pi, pi].
Hamiltonian build_ssh_bloch(const SshParams& p, double k);

/// Analytic topological-zero-mode profile; requires |v| < |w| (else TrivialPhase).
/// Normalized so sum_m Psi^L_m Psi^R_m = 1.
TzmProfile tzm_profile(const SshParams& p);

/// Embed a profile into full 2M-dimensional (lev, rev) vectors (B entries zero).
std::pair<std::vector<cplx>, std::vector<cplx>> tzm_embedded(const TzmProfile& t);

}  // namespace levlab
