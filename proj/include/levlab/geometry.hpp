#pragma once

#include <functional>

#include "levlab/linalg.hpp"
#include "levlab/response.hpp"
#include "levlab/retrieval.hpp"
#include "levlab/types.hpp"

namespace levlab {

struct LoopPoint {
    double phi_x = 0.0;
    double phi_y = 0.0;
};

enum class Orientation { Ccw, Cw };

/// Closed path in (phi_x, phi_y) space; `points` holds all traversals.
struct ParametricLoop {
    std::vector<LoopPoint> points;
    int steps_per_cycle = 0;
    int cycles = 1;
    bool closed = true;
};

ParametricLoop make_loop(LoopPoint center, double radius_x, double radius_y, int steps, int cycles,
                         Orientation orientation);

/// Biorthonormal eigensystem at one loop point, modes sorted by ascending Re.
struct StepEigens {
    std::vector<cplx> omega;
    CMatrix rev;  // columns
    CMatrix lev;  // rows, lev * rev = I
};

using StepProvider = std::function<StepEigens(LoopPoint)>;

/// One followed band along the loop. `raw` states keep the provider's gauge;
/// `rev`/`lev` carry the parallel-transport gauge (successive overlaps
/// real-positive). `raw_index[k]` records which provider mode this band
/// occupies at step k (the tracking permutation).
struct TransportedStates {
    int band = 0;
    int steps_per_cycle = 0;
    int cycles = 1;
    std::vector<cplx> eigenvalue;
    std::vector<std::vector<cplx>> rev, lev;          // transported
    std::vector<std::vector<cplx>> rev_raw, lev_raw;  // tracked, provider gauge
    std::vector<int> raw_index;
};

struct TrackOptions {
    double ep_margin_rel = 1e-6;   ///< EPTooClose when min eigen-gap falls below this times the scale
    double ambiguity_rel = 0.01;   ///< TrackingAmbiguous when the two best overlaps differ by less
    bool parallel = true;          ///< diagonalize loop points with OpenMP
};

std::vector<TransportedStates> track_modes(const StepProvider& at, const ParametricLoop& loop,
                                           const TrackOptions& opt = {});

/// Provider from exact diagonalization of h_at(point).
StepProvider exact_provider(std::function<Hamiltonian(LoopPoint)> h_at);

struct RetrievedProviderOptions {
    std::vector<double> grid;  ///< response frequency grid (required)
    int fixed_site = 1;
    cplx a0{1.0, 0.0};
    std::optional<NoiseSpec> noise;
    FitOptions fit;
};

/// Provider that synthesizes LEV and REV campaigns at each point and fits both
/// jointly, pairing modes by pole proximity.
StepProvider retrieved_provider(std::function<Hamiltonian(LoopPoint)> h_at, RetrievedProviderOptions opt);

struct BerryResult {
    double theta = 0.0;               ///< total geometric phase in (-pi, pi]
    std::vector<double> cumulative;   ///< partial Wilson sums; size steps+1, last = unwrapped total
    std::vector<cplx> projections;    ///< transported REV projected on the reference vector
    int steps = 0;                    ///< total steps (all cycles)
    int cycles = 1;
};

/// Discrete Wilson-loop phase Theta = -Im sum_k ln <L(k)|R(k+1)> over the closed
/// tracked strand, wrap term included.
BerryResult berry_phase(const TransportedStates& ts, std::span<const cplx> reference = {});

/// Per-step projections: <Ref|psi_R(k)> for REV, <psi_L(k)|Ref> for LEV.
std::vector<cplx> project_on_ref(const TransportedStates& ts, std::span<const cplx> ref, VectorKind kind);

}  // namespace levlab
