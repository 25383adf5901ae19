#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "levlab/geometry.hpp"
#include "levlab/models.hpp"
#include "levlab/response.hpp"

using namespace levlab;

// The OpenMP kernels must agree bit-for-bit with the serial references: each
// output slot is a pure function of its own inputs, so scheduling cannot leak in.

TEST_CASE("sweep: parallel kernel equals the serial reference bitwise") {
    Hamiltonian h = build_ssh_obc({-76.0, -149.8, -73.8, 6, 9016.0, -41.2});
    const auto grid = default_grid(9016.0, 250.0, 4001);
    ResponseSpectrum a = sweep_serial(h, grid, 3, 1);
    ResponseSpectrum b = sweep(h, grid, 3, 1);
    CHECK(a.amplitudes == b.amplitudes);
    CHECK(a.omega_grid == b.omega_grid);
}

TEST_CASE("run_campaign: parallel kernel equals the serial reference, with and without noise") {
    Hamiltonian h = build_ssh_obc({-76.0, -149.8, -73.8, 6, 9016.0, -41.2});
    const auto grid = default_grid(9016.0, 250.0, 801);
    for (auto noise : {std::optional<NoiseSpec>{}, std::optional<NoiseSpec>{NoiseSpec{0.02, 99}}}) {
        Campaign a = run_campaign_serial(h, grid, CampaignMode::Lev, 1, {1.0, 0.0}, noise);
        Campaign b = run_campaign(h, grid, CampaignMode::Lev, 1, {1.0, 0.0}, noise);
        REQUIRE(a.spectra.size() == b.spectra.size());
        for (std::size_t k = 0; k < a.spectra.size(); ++k)
            CHECK(a.spectra[k].amplitudes == b.spectra[k].amplitudes);
    }
}

TEST_CASE("track_modes: parallel diagonalization batch equals the serial one") {
    const TwoLevelParams tl{9016.0, -41.2, -19.7, -40.8, 0.0, 0.0};
    auto h_at = [tl](LoopPoint p) {
        TwoLevelParams q = tl;
        q.phi_x = p.phi_x;
        q.phi_y = p.phi_y;
        return build_h1(q);
    };
    const EpLocations ep = ep_locations(tl.gamma1, tl.gamma2);
    const ParametricLoop loop = make_loop({0.5 * (ep.phi_x_low + ep.phi_x_high), 0.0}, 30.0, 30.0, 257, 1,
                                          Orientation::Ccw);
    TrackOptions serial;
    serial.parallel = false;
    auto a = track_modes(exact_provider(h_at), loop, serial);
    auto b = track_modes(exact_provider(h_at), loop);
    REQUIRE(a.size() == b.size());
    for (std::size_t band = 0; band < a.size(); ++band) {
        CHECK(a[band].raw_index == b[band].raw_index);
        for (std::size_t k = 0; k < loop.points.size(); ++k) {
            CHECK(a[band].rev[k] == b[band].rev[k]);
            CHECK(a[band].lev[k] == b[band].lev[k]);
            CHECK(a[band].eigenvalue[k] == b[band].eigenvalue[k]);
        }
    }
}
