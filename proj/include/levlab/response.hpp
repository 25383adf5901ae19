#pragma once

#include <cstdint>
#include <optional>

#include "levlab/types.hpp"

namespace levlab {

/// Steady-state amplitudes A(omega) for one (source, probe) pair. Site indices
/// are 1-based. a0 is the source/probe calibration constant.
struct ResponseSpectrum {
    std::vector<double> omega_grid;  ///< strictly ascending, rad/s
    std::vector<cplx> amplitudes;
    int source_idx = 1;
    int probe_idx = 1;
    cplx a0{1.0, 0.0};
};

enum class CampaignMode { Lev, Rev };

/// LEV campaign: probe fixed at fixed_idx, source visits every site once.
/// REV campaign: source fixed, probe visits every site.
struct Campaign {
    std::vector<ResponseSpectrum> spectra;  ///< ordered by the moving site index
    CampaignMode mode = CampaignMode::Lev;
    int fixed_idx = 1;
};

struct NoiseSpec {
    double sigma_rel = 0.0;
    std::uint64_t seed = 1;
};

/// a0 * [ (omega I - H)^{-1} ]_{probe, source}
cplx response(const Hamiltonian& h, double omega, int source_idx, int probe_idx, cplx a0 = {1.0, 0.0});

/// 2001 points spanning omega_center +- 250 rad/s unless overridden.
std::vector<double> default_grid(double omega_center, double half_span = 250.0, int points = 2001);

ResponseSpectrum sweep(const Hamiltonian& h, std::vector<double> grid, int source_idx, int probe_idx,
                       cplx a0 = {1.0, 0.0});
/// Reference single-thread implementation; must agree bit-for-bit with sweep().
ResponseSpectrum sweep_serial(const Hamiltonian& h, std::vector<double> grid, int source_idx, int probe_idx,
                              cplx a0 = {1.0, 0.0});

/// Additive complex Gaussian noise, std sigma_rel * max|A| per point. The stream
/// is keyed on (seed, source, probe, point) so results do not depend on
/// evaluation order.
ResponseSpectrum add_noise(const ResponseSpectrum& s, double sigma_rel, std::uint64_t seed);

Campaign run_campaign(const Hamiltonian& h, const std::vector<double>& grid, CampaignMode mode, int fixed_idx,
                      cplx a0 = {1.0, 0.0}, const std::optional<NoiseSpec>& noise = std::nullopt);
Campaign run_campaign_serial(const Hamiltonian& h, const std::vector<double>& grid, CampaignMode mode,
                             int fixed_idx, cplx a0 = {1.0, 0.0},
                             const std::optional<NoiseSpec>& noise = std::nullopt);

}  // namespace levlab
