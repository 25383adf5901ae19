#include "levlab/run.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "levlab/csv.hpp"
#include "levlab/errors.hpp"
#include "levlab/serialize.hpp"
#include "levlab/svg.hpp"

namespace levlab {

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write artifact: " + (dir_ / name).string());
        out << content;
        entries_.push_back({name, sha256_hex(content)});
    }

    void adopt(const std::string& name) {  // hash a file written by someone else
        std::ifstream in(dir_ / name, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        entries_.push_back({name, sha256_hex(os.str())});
    }

    const std::filesystem::path& dir() const { return dir_; }
    std::vector<ArtifactEntry> take() { return std::move(entries_); }

private:
    std::filesystem::path dir_;
    std::vector<ArtifactEntry> entries_;
};

std::optional<NoiseSpec> noise_of(const CampaignConfig& c) {
    if (c.noise_sigma_rel <= 0.0) return std::nullopt;
    return NoiseSpec{c.noise_sigma_rel, c.seed};
}

// ---------------------------------------------------------------------------
// two-level-berry
// ---------------------------------------------------------------------------

void run_two_level_berry(const RunConfig& c, ArtifactWriter& w) {
    const TwoLevelParams base = c.two_level;
    auto h_at = [base](LoopPoint p) {
        TwoLevelParams q = base;
        q.phi_x = p.phi_x;
        q.phi_y = p.phi_y;
        return build_h1(q);
    };

    LoopPoint center;
    double rx, ry;
    if (c.loop.center_x && c.loop.center_y && c.loop.radius_x && c.loop.radius_y) {
        center = {*c.loop.center_x, *c.loop.center_y};
        rx = *c.loop.radius_x;
        ry = *c.loop.radius_y;
    } else {
        // default: ellipse around both EPs with a 30% margin
        const EpLocations ep = ep_locations(base.gamma1, base.gamma2);
        center = {0.5 * (ep.phi_x_low + ep.phi_x_high), 0.0};
        rx = ry = 1.3 * 0.5 * (ep.phi_x_high - ep.phi_x_low);
        if (c.loop.center_x) center.phi_x = *c.loop.center_x;
        if (c.loop.center_y) center.phi_y = *c.loop.center_y;
        if (c.loop.radius_x) rx = *c.loop.radius_x;
        if (c.loop.radius_y) ry = *c.loop.radius_y;
    }
    const ParametricLoop loop = make_loop(center, rx, ry, c.loop.steps, c.loop.cycles, c.loop.orientation);

    StepProvider provider;
    if (c.retrieval.source == RetrievalConfig::Source::Exact) {
        provider = exact_provider(h_at);
    } else {
        RetrievedProviderOptions opt;
        opt.grid = c.grid.make();
        opt.fixed_site = c.campaign.fixed_site;
        opt.a0 = c.campaign.a0;
        opt.noise = noise_of(c.campaign);
        provider = retrieved_provider(h_at, opt);
    }

    auto bands = track_modes(provider, loop);
    const std::size_t band = static_cast<std::size_t>(c.retrieval.band);
    if (band >= bands.size()) throw ConfigError("retrieval.band out of range for a two-level system");
    const TransportedStates& ts = bands[band];
    BerryResult br = berry_phase(ts);

    if (c.output.json) w.write("berry.json", berry_result_to_json(br));

    const std::vector<cplx> ref{1.0, 0.0};
    auto proj_rev = project_on_ref(ts, ref, VectorKind::Rev);
    auto proj_lev = project_on_ref(ts, ref, VectorKind::Lev);
    // continue the transport through the loop closure for the final row
    const cplx wrap = bilinear(ts.lev.back(), ts.rev_raw[0]);
    const cplx phase = std::abs(wrap) > 0.0 ? wrap / std::abs(wrap) : cplx{1.0};
    std::vector<cplx> closed_rev(ref.size()), closed_lev(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        closed_rev[i] = ts.rev_raw[0][i] / phase;
        closed_lev[i] = ts.lev_raw[0][i] * phase;
    }

    Table series;
    series.columns = {"step", "arg_proj_rev", "arg_proj_lev", "cum_phase"};
    const std::size_t k = proj_rev.size();
    for (std::size_t i = 0; i <= k; ++i) {
        const cplx pr = i < k ? proj_rev[i] : hdot(ref, closed_rev);
        const cplx pl = i < k ? proj_lev[i] : bilinear(closed_lev, ref);
        series.rows.push_back({static_cast<double>(i), std::arg(pr), std::arg(pl), br.cumulative[i]});
    }
    if (c.output.csv) w.write("berry_series.csv", table_to_csv(series));

    if (c.output.svg) {
        Series cum{"cumulative phase", {}, {}};
        for (std::size_t i = 0; i < series.rows.size(); ++i) {
            cum.x.push_back(series.rows[i][0]);
            cum.y.push_back(series.rows[i][3]);
        }
        w.write("berry_cumulative.svg",
                render_svg({cum}, PlotKind::Line, "Accumulated geometric phase", "step", "phase (rad)"));
        Series ar{"arg proj REV", {}, {}}, al{"arg proj LEV", {}, {}};
        for (std::size_t i = 0; i < series.rows.size(); ++i) {
            ar.x.push_back(series.rows[i][0]);
            ar.y.push_back(series.rows[i][1]);
            al.x.push_back(series.rows[i][0]);
            al.y.push_back(series.rows[i][2]);
        }
        w.write("projections_arg.svg",
                render_svg({ar, al}, PlotKind::Line, "State projections on (1,0)", "step", "argument (rad)"));
    }
}

// ---------------------------------------------------------------------------
// ssh-tzm
// ---------------------------------------------------------------------------

void run_ssh_tzm(const RunConfig& c, ArtifactWriter& w) {
    const SshParams p = c.ssh;
    const Hamiltonian h = build_ssh_obc(p);
    const std::size_t n = h.dim();
    if (c.campaign.fixed_site > static_cast<int>(n)) throw ConfigError("campaign.fixed_site exceeds the lattice size");
    const auto grid = c.grid.make();
    const auto noise = noise_of(c.campaign);

    Campaign lev = run_campaign(h, grid, CampaignMode::Lev, c.campaign.fixed_site, c.campaign.a0, noise);
    Campaign rev = run_campaign(h, grid, CampaignMode::Rev, c.campaign.fixed_site, c.campaign.a0, noise);
    if (c.output.csv) {
        for (const auto& f : write_campaign(lev, w.dir(), "lev_campaign")) w.adopt(f);
        for (const auto& f : write_campaign(rev, w.dir(), "rev_campaign")) w.adopt(f);
    }

    RetrieveOptions opt;
    opt.method = c.retrieval.method;
    opt.n_modes = c.retrieval.n_modes;
    const double target = c.retrieval.target_omega.value_or(p.onsite);
    RetrievedMode lev_mode = retrieve_eigvec(lev, ModeSelector::nearest(target), opt);
    RetrievedMode rev_mode = retrieve_eigvec(rev, ModeSelector::nearest(target), opt);
    if (c.output.json) {
        w.write("lev_tzm.json", retrieved_mode_to_json(lev_mode));
        w.write("rev_tzm.json", retrieved_mode_to_json(rev_mode));
    }

    // analytic profile in the same gauge for side-by-side plots
    auto [lev_t, rev_t] = tzm_embedded(tzm_profile(p));
    gauge_fix(lev_t);
    gauge_fix(rev_t);
    Table prof;
    prof.columns = {"site",          "theory_lev_re", "theory_lev_im", "theory_rev_re", "theory_rev_im",
                    "retr_lev_re",   "retr_lev_im",   "retr_rev_re",   "retr_rev_im"};
    for (std::size_t i = 0; i < n; ++i)
        prof.rows.push_back({static_cast<double>(i + 1), lev_t[i].real(), lev_t[i].imag(), rev_t[i].real(),
                             rev_t[i].imag(), lev_mode.entries[i].real(), lev_mode.entries[i].imag(),
                             rev_mode.entries[i].real(), rev_mode.entries[i].imag()});
    if (c.output.csv) w.write("tzm_sites.csv", table_to_csv(prof));

    // spectra: open-chain eigenvalues and the momentum-space locus
    EigenSystem es = eig(h);
    Table obc;
    obc.columns = {"index", "re_omega_rad_s", "im_omega_rad_s"};
    for (std::size_t i = 0; i < n; ++i)
        obc.rows.push_back({static_cast<double>(i + 1), es.eigenvalues[i].real(), es.eigenvalues[i].imag()});
    if (c.output.csv) w.write("obc_spectrum.csv", table_to_csv(obc));

    const int nk = 512;
    std::vector<cplx> br_a(nk), br_b(nk);
    for (int i = 0; i < nk; ++i) {
        const double kk = -M_PI + 2.0 * M_PI * i / nk;
        EigenSystem bloch = eig(build_ssh_bloch(p, kk));
        cplx w0 = bloch.eigenvalues[0], w1 = bloch.eigenvalues[1];
        if (i > 0 && std::abs(w0 - br_a[i - 1]) + std::abs(w1 - br_b[i - 1]) >
                         std::abs(w1 - br_a[i - 1]) + std::abs(w0 - br_b[i - 1]))
            std::swap(w0, w1);
        br_a[i] = w0;
        br_b[i] = w1;
    }
    Table pbc;
    pbc.columns = {"k", "branch1_re", "branch1_im", "branch2_re", "branch2_im"};
    for (int i = 0; i < nk; ++i)
        pbc.rows.push_back({-M_PI + 2.0 * M_PI * i / nk, br_a[i].real(), br_a[i].imag(), br_b[i].real(),
                            br_b[i].imag()});
    if (c.output.csv) w.write("pbc_locus.csv", table_to_csv(pbc));

    if (c.output.svg) {
        auto curve = [](const std::string& name, const std::vector<cplx>& z) {
            Series s{name, {}, {}};
            for (const cplx& v : z) {
                s.x.push_back(v.real());
                s.y.push_back(v.imag());
            }
            return s;
        };
        std::vector<cplx> obc_pts(es.eigenvalues.begin(), es.eigenvalues.end());
        w.write("spectra_complex_plane.svg",
                render_svg({curve("PBC branch 1", br_a), curve("PBC branch 2", br_b), curve("OBC", obc_pts)},
                           PlotKind::ComplexPlane, "Spectra in the complex plane", "Re omega (rad/s)",
                           "Im omega (rad/s)"));
        auto site_series = [&](const char* name, const std::vector<cplx>& v, bool re) {
            Series s{name, {}, {}};
            for (std::size_t i = 0; i < v.size(); ++i) {
                s.x.push_back(static_cast<double>(i + 1));
                s.y.push_back(re ? v[i].real() : v[i].imag());
            }
            return s;
        };
        w.write("tzm_rev.svg",
                render_svg({site_series("theory Re", rev_t, true), site_series("theory Im", rev_t, false),
                            site_series("retrieved Re", rev_mode.entries, true),
                            site_series("retrieved Im", rev_mode.entries, false)},
                           PlotKind::Line, "Zero-mode REV profile", "site", "amplitude"));
        w.write("tzm_lev.svg",
                render_svg({site_series("theory Re", lev_t, true), site_series("theory Im", lev_t, false),
                            site_series("retrieved Re", lev_mode.entries, true),
                            site_series("retrieved Im", lev_mode.entries, false)},
                           PlotKind::Line, "Zero-mode LEV profile", "site", "amplitude"));
    }
}

// ---------------------------------------------------------------------------
// custom
// ---------------------------------------------------------------------------

void run_custom(const RunConfig& c, ArtifactWriter& w) {
    std::ifstream in(c.hamiltonian_file, std::ios::binary);
    if (!in) throw ConfigError("cannot open model.hamiltonian_file: " + c.hamiltonian_file);
    std::ostringstream os;
    os << in.rdbuf();
    const Hamiltonian h = hamiltonian_from_json(os.str());
    if (c.campaign.fixed_site > static_cast<int>(h.dim()))
        throw ConfigError("campaign.fixed_site exceeds the system dimension");

    EigenSystem es = eig(h);
    if (c.output.json) w.write("eigensystem.json", eigensystem_to_json(es));

    const auto grid = c.grid.make();
    const auto noise = noise_of(c.campaign);
    Campaign lev = run_campaign(h, grid, CampaignMode::Lev, c.campaign.fixed_site, c.campaign.a0, noise);
    Campaign rev = run_campaign(h, grid, CampaignMode::Rev, c.campaign.fixed_site, c.campaign.a0, noise);
    if (c.output.csv) {
        for (const auto& f : write_campaign(lev, w.dir(), "lev_campaign")) w.adopt(f);
        for (const auto& f : write_campaign(rev, w.dir(), "rev_campaign")) w.adopt(f);
    }

    RetrieveOptions opt;
    opt.method = c.retrieval.method;
    opt.n_modes = c.retrieval.n_modes;
    const ModeSelector sel = c.retrieval.target_omega ? ModeSelector::nearest(*c.retrieval.target_omega)
                                                      : ModeSelector::by_index(c.retrieval.band);
    RetrievedMode lev_mode = retrieve_eigvec(lev, sel, opt);
    RetrievedMode rev_mode = retrieve_eigvec(rev, sel, opt);
    if (c.output.json) {
        w.write("retrieved_lev.json", retrieved_mode_to_json(lev_mode));
        w.write("retrieved_rev.json", retrieved_mode_to_json(rev_mode));
    }
}

}  // namespace

std::string result_bundle_to_json(const ResultBundle& b) {
    nlohmann::json j;
    j["schema_version"] = b.schema_version;
    j["inputs"] = nlohmann::json::parse(b.inputs);
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a : b.artifacts) j["artifacts"].push_back({{"file", a.file}, {"sha256", a.sha256}});
    return j.dump(2) + "\n";
}

ResultBundle run(const RunConfig& config) {
    ArtifactWriter w(config.output.directory);
    if (config.experiment == "two-level-berry") run_two_level_berry(config, w);
    else if (config.experiment == "ssh-tzm") run_ssh_tzm(config, w);
    else run_custom(config, w);

    ResultBundle bundle;
    bundle.inputs = effective_config_json(config);
    bundle.artifacts = w.take();
    std::ofstream out(std::filesystem::path(config.output.directory) / "result.json", std::ios::binary);
    out << result_bundle_to_json(bundle);
    return bundle;
}

}  // namespace levlab
