// Compares the OpenMP kernels against their serial references: frequency
// sweeps, full campaigns, and batched diagonalization along a parameter loop.
#include <chrono>
#include <cstdio>

#include "levlab/geometry.hpp"
#include "levlab/models.hpp"
#include "levlab/response.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace levlab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename F>
double timed(const char* name, double baseline, F&& f) {
    const auto t0 = clock_type::now();
    f();
    const double dt = seconds(t0);
    if (baseline > 0.0)
        std::printf("  %-34s %8.3f s   speedup %.2fx\n", name, dt, baseline / dt);
    else
        std::printf("  %-34s %8.3f s\n", name, dt);
    return dt;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; parallel kernels fall back to serial\n");
#endif

    const SshParams ssh{-76.0, -149.8, -73.8, 6, 9016.0, -41.2};
    const Hamiltonian h = build_ssh_obc(ssh);
    const auto grid = default_grid(9016.0, 250.0, 20001);

    std::printf("sweep: 12x12 lattice, %zu grid points\n", grid.size());
    ResponseSpectrum a, b;
    const double t_sweep = timed("sweep_serial", 0.0, [&] { a = sweep_serial(h, grid, 1, 1); });
    timed("sweep (parallel)", t_sweep, [&] { b = sweep(h, grid, 1, 1); });
    std::printf("  identical results: %s\n", a.amplitudes == b.amplitudes ? "yes" : "NO");

    const auto cgrid = default_grid(9016.0, 250.0, 4001);
    std::printf("campaign: 12 spectra, %zu points each, 1%% noise\n", cgrid.size());
    Campaign ca, cb;
    const NoiseSpec noise{0.01, 7};
    const double t_camp =
        timed("run_campaign_serial", 0.0, [&] { ca = run_campaign_serial(h, cgrid, CampaignMode::Lev, 1, {1.0, 0.0}, noise); });
    timed("run_campaign (parallel)", t_camp, [&] { cb = run_campaign(h, cgrid, CampaignMode::Lev, 1, {1.0, 0.0}, noise); });
    bool same = true;
    for (std::size_t k = 0; k < ca.spectra.size(); ++k)
        same = same && ca.spectra[k].amplitudes == cb.spectra[k].amplitudes;
    std::printf("  identical results: %s\n", same ? "yes" : "NO");

    const TwoLevelParams tl{9016.0, -41.2, -19.7, -40.8, 0.0, 0.0};
    auto h_at = [tl](LoopPoint p) {
        TwoLevelParams q = tl;
        q.phi_x = p.phi_x;
        q.phi_y = p.phi_y;
        return build_h1(q);
    };
    const EpLocations ep = ep_locations(tl.gamma1, tl.gamma2);
    const ParametricLoop loop = make_loop({0.5 * (ep.phi_x_low + ep.phi_x_high), 0.0},
                                          1.3 * 0.5 * (ep.phi_x_high - ep.phi_x_low),
                                          1.3 * 0.5 * (ep.phi_x_high - ep.phi_x_low), 4000, 1, Orientation::Ccw);
    std::printf("mode tracking: %zu loop points\n", loop.points.size());
    TrackOptions serial_opt;
    serial_opt.parallel = false;
    std::vector<TransportedStates> ba, bb;
    const double t_track = timed("track_modes serial", 0.0, [&] { ba = track_modes(exact_provider(h_at), loop, serial_opt); });
    timed("track_modes (parallel)", t_track, [&] { bb = track_modes(exact_provider(h_at), loop); });
    same = true;
    for (std::size_t band = 0; band < ba.size(); ++band)
        for (std::size_t k = 0; k < loop.points.size(); ++k)
            same = same && ba[band].rev[k] == bb[band].rev[k];
    std::printf("  identical results: %s\n", same ? "yes" : "NO");
    return 0;
}
