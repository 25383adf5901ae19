#include "levlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

double wrap_half_open(double theta) {
    double t = std::remainder(theta, 2.0 * M_PI);
    if (t <= -M_PI + 1e-15) t += 2.0 * M_PI;
    return t;
}

void sort_step(StepEigens& e) {
    const std::size_t n = e.omega.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return e.omega[a].real() != e.omega[b].real() ? e.omega[a].real() < e.omega[b].real()
                                                      : e.omega[a].imag() < e.omega[b].imag();
    });
    StepEigens out;
    out.omega.resize(n);
    out.rev = CMatrix(n, n);
    out.lev = CMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.omega[k] = e.omega[order[k]];
        for (std::size_t i = 0; i < n; ++i) {
            out.rev(i, k) = e.rev(i, order[k]);
            out.lev(k, i) = e.lev(order[k], i);
        }
    }
    e = std::move(out);
}

}  // namespace

ParametricLoop make_loop(LoopPoint center, double radius_x, double radius_y, int steps, int cycles,
                         Orientation orientation) {
    if (steps < 8) throw std::invalid_argument("make_loop: at least 8 steps per cycle required");
    if (cycles < 1) throw std::invalid_argument("make_loop: cycles must be >= 1");
    if (!(radius_x > 0.0) || !(radius_y > 0.0)) throw std::invalid_argument("make_loop: radii must be positive");
    ParametricLoop loop;
    loop.steps_per_cycle = steps;
    loop.cycles = cycles;
    loop.closed = true;
    loop.points.resize(static_cast<std::size_t>(steps) * cycles);
    const double sign = orientation == Orientation::Ccw ? 1.0 : -1.0;
    for (std::size_t k = 0; k < loop.points.size(); ++k) {
        const double angle = sign * 2.0 * M_PI * static_cast<double>(k % steps) / steps;
        loop.points[k] = {center.phi_x + radius_x * std::cos(angle), center.phi_y + radius_y * std::sin(angle)};
    }
    return loop;
}

StepProvider exact_provider(std::function<Hamiltonian(LoopPoint)> h_at) {
    return [h_at = std::move(h_at)](LoopPoint p) {
        EigenSystem es = eig(h_at(p));
        return StepEigens{std::move(es.eigenvalues), std::move(es.rev), std::move(es.lev)};
    };
}

StepProvider retrieved_provider(std::function<Hamiltonian(LoopPoint)> h_at, RetrievedProviderOptions opt) {
    if (opt.grid.empty()) throw std::invalid_argument("retrieved_provider: frequency grid required");
    return [h_at = std::move(h_at), opt = std::move(opt)](LoopPoint p) {
        const Hamiltonian h = h_at(p);
        const int n = static_cast<int>(h.dim());
        Campaign clev = run_campaign(h, opt.grid, CampaignMode::Lev, opt.fixed_site, opt.a0, opt.noise);
        Campaign crev = run_campaign(h, opt.grid, CampaignMode::Rev, opt.fixed_site, opt.a0, opt.noise);
        auto [fml, lmodes] = fit_modes(clev, n, opt.fit);
        auto [fmr, rmodes] = fit_modes(crev, n, opt.fit);

        StepEigens out;
        out.omega.resize(n);
        out.rev = CMatrix(n, n);
        out.lev = CMatrix(n, n);
        std::vector<bool> used(n, false);
        for (int k = 0; k < n; ++k) {
            // pair the LEV-campaign mode with the REV-campaign mode at the same pole
            std::size_t match = 0;
            double best = 1e300;
            for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
                if (used[r]) continue;
                const double d = std::abs(fml.poles[k] - fmr.poles[r]);
                if (d < best) { best = d; match = r; }
            }
            used[match] = true;
            out.omega[k] = 0.5 * (fml.poles[k] + fmr.poles[match]);
            for (int i = 0; i < n; ++i) {
                out.rev(i, k) = rmodes[match].entries[i];
                out.lev(k, i) = lmodes[k].entries[i];
            }
        }
        auto [rev, lev] = biorthonormalize(out.rev, out.lev);
        out.rev = std::move(rev);
        out.lev = std::move(lev);
        sort_step(out);
        return out;
    };
}

std::vector<TransportedStates> track_modes(const StepProvider& at, const ParametricLoop& loop,
                                           const TrackOptions& opt) {
    const std::size_t nsteps = loop.points.size();
    if (nsteps < 8) throw std::invalid_argument("track_modes: loop must have at least 8 points");

    std::vector<StepEigens> steps(nsteps);
    const std::int64_t total = static_cast<std::int64_t>(nsteps);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (std::int64_t k = 0; k < total; ++k) steps[k] = at(loop.points[k]);

    const std::size_t n = steps[0].omega.size();
    for (std::size_t k = 0; k < nsteps; ++k) {
        if (steps[k].omega.size() != n) throw std::invalid_argument("track_modes: provider dimension changed");
        double scale = 0.0, gap = 1e300;
        for (std::size_t a = 0; a < n; ++a) {
            scale += std::abs(steps[k].omega[a]);
            for (std::size_t b = a + 1; b < n; ++b)
                gap = std::min(gap, std::abs(steps[k].omega[a] - steps[k].omega[b]));
        }
        scale = std::max(scale / static_cast<double>(n), 1.0);
        if (n > 1 && gap <= opt.ep_margin_rel * scale)
            throw EPTooClose("track_modes: eigen-gap " + std::to_string(gap) + " at step " + std::to_string(k) +
                             " is inside the EP margin");
    }

    std::vector<TransportedStates> bands(n);
    for (std::size_t b = 0; b < n; ++b) {
        TransportedStates& ts = bands[b];
        ts.band = static_cast<int>(b);
        ts.steps_per_cycle = loop.steps_per_cycle ? loop.steps_per_cycle : static_cast<int>(nsteps);
        ts.cycles = loop.cycles;
        ts.eigenvalue.resize(nsteps);
        ts.rev.resize(nsteps);
        ts.lev.resize(nsteps);
        ts.rev_raw.resize(nsteps);
        ts.lev_raw.resize(nsteps);
        ts.raw_index.resize(nsteps);
        ts.eigenvalue[0] = steps[0].omega[b];
        ts.raw_index[0] = static_cast<int>(b);
        ts.rev_raw[0] = steps[0].rev.col(b);
        ts.lev_raw[0] = {steps[0].lev.row(b).begin(), steps[0].lev.row(b).end()};
        ts.rev[0] = ts.rev_raw[0];
        ts.lev[0] = ts.lev_raw[0];
    }

    for (std::size_t k = 1; k < nsteps; ++k) {
        std::vector<bool> used(n, false);
        for (std::size_t b = 0; b < n; ++b) {
            TransportedStates& ts = bands[b];
            // pair with the next step by maximal biorthogonal overlap
            double best = -1.0, second = -1.0;
            std::size_t pick = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double o = std::abs(bilinear(ts.lev_raw[k - 1], steps[k].rev.col(j)));
                if (o > best) { second = best; best = o; pick = j; }
                else if (o > second) second = o;
            }
            if (second > 0.0 && best > 0.0 && (best - second) < opt.ambiguity_rel * best) {
                // overlaps nearly tie; fall back to eigenvalue continuity
                double d_best = 1e300;
                std::size_t near = pick;
                for (std::size_t j = 0; j < n; ++j) {
                    if (used[j]) continue;
                    const double d = std::abs(steps[k].omega[j] - ts.eigenvalue[k - 1]);
                    if (d < d_best) { d_best = d; near = j; }
                }
                if (near != pick)
                    throw TrackingAmbiguous("track_modes: overlap and eigenvalue pairing disagree at step " +
                                            std::to_string(k));
            }
            used[pick] = true;
            ts.raw_index[k] = static_cast<int>(pick);
            ts.eigenvalue[k] = steps[k].omega[pick];
            ts.rev_raw[k] = steps[k].rev.col(pick);
            ts.lev_raw[k] = {steps[k].lev.row(pick).begin(), steps[k].lev.row(pick).end()};
            // parallel transport: rotate so <L(k-1)|R(k)> is real-positive
            const cplx overlap = bilinear(ts.lev[k - 1], ts.rev_raw[k]);
            const double mag = std::abs(overlap);
            const cplx phase = mag > 0.0 ? overlap / mag : cplx{1.0};
            ts.rev[k].resize(n);
            ts.lev[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                ts.rev[k][i] = ts.rev_raw[k][i] / phase;
                ts.lev[k][i] = ts.lev_raw[k][i] * phase;
            }
        }
    }
    return bands;
}

BerryResult berry_phase(const TransportedStates& ts, std::span<const cplx> reference) {
    const std::size_t k = ts.rev_raw.size();
    if (k < 2) throw std::invalid_argument("berry_phase: too few steps");
    BerryResult out;
    out.steps = static_cast<int>(k);
    out.cycles = ts.cycles;
    out.cumulative.resize(k + 1);
    out.cumulative[0] = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        const auto& next = i < k ? ts.rev_raw[i] : ts.rev_raw[0];  // wrap to the strand start
        const cplx overlap = bilinear(ts.lev_raw[i - 1], next);
        out.cumulative[i] = out.cumulative[i - 1] - std::arg(overlap);
    }
    out.theta = wrap_half_open(out.cumulative.back());

    const std::size_t n = ts.rev_raw[0].size();
    std::vector<cplx> ref(reference.begin(), reference.end());
    if (ref.empty()) {
        ref.assign(n, cplx{});
        ref[0] = 1.0;
    }
    out.projections = project_on_ref(ts, ref, VectorKind::Rev);
    return out;
}

std::vector<cplx> project_on_ref(const TransportedStates& ts, std::span<const cplx> ref, VectorKind kind) {
    if (ref.empty() || norm2(ref) == 0.0) throw std::invalid_argument("project_on_ref: reference must be nonzero");
    const std::size_t k = ts.rev.size();
    if (ref.size() != ts.rev[0].size()) throw std::invalid_argument("project_on_ref: dimension mismatch");
    std::vector<cplx> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i] = kind == VectorKind::Rev ? hdot(ref, ts.rev[i]) : bilinear(ts.lev[i], ref);
    return out;
}

}  // namespace levlab
