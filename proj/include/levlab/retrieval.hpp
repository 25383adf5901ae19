#pragma once

#include <optional>

#include "levlab/response.hpp"
#include "levlab/types.hpp"

namespace levlab {

enum class VectorKind { Lev, Rev };
enum class RetrievalMethod { PeakSample, Fit };

/// One eigenstate recovered from response data. Entries are LEV or REV
/// components known up to one common complex prefactor; retrieve_eigvec
/// normalizes them to unit norm with the largest entry real-positive.
struct RetrievedMode {
    int mode_idx = 0;
    cplx omega_n{};  ///< imaginary part is 0 for the peak-sample method
    std::vector<cplx> entries;
    VectorKind kind = VectorKind::Lev;
    RetrievalMethod method = RetrievalMethod::PeakSample;
    double quality = 0.0;  ///< relative RMS fit residual; 0 for peak sampling
};

/// Shared-pole rational model A_j(omega) = sum_n c_{n,j} / (omega - omega_n).
struct FitModel {
    std::vector<cplx> poles;  ///< sorted by ascending Re, ties by ascending Im
    CMatrix residues;         ///< poles.size() x spectra count
    double quality = 0.0;

    cplx eval(std::size_t spectrum, double omega) const;
};

struct Peak {
    double omega = 0.0;
    double amplitude = 0.0;
    double prominence = 0.0;
    double half_width = 0.0;  ///< half width at 1/sqrt(2) of the peak height
};

/// Local maxima of |A| above a prominence threshold, ascending in omega.
std::vector<Peak> pick_peaks(const ResponseSpectrum& s, int max_peaks, double prominence_rel = 0.05);
std::vector<Peak> pick_peaks(const std::vector<double>& omega, const std::vector<double>& magnitude,
                             int max_peaks, double prominence_rel = 0.05);

/// Read one entry per campaign spectrum at the grid point nearest omega_peak.
RetrievedMode extract_peak_entries(const Campaign& c, double omega_peak);

struct FitOptions {
    int max_iter = 150;
    int restarts = 4;                ///< merge/respawn refinement rounds
    double diverged_rms = 0.1;       ///< FitDiverged above this relative residual
    bool allow_growing_poles = false;
    std::optional<FitModel> init;    ///< overrides the peak-based initialization
};

/// Joint least-squares fit of every spectrum with shared poles; residues per
/// (mode, spectrum) become the retrieved entries.
std::pair<FitModel, std::vector<RetrievedMode>> fit_modes(const Campaign& c, int n_modes,
                                                          const FitOptions& opt = {});

struct ModeSelector {
    enum class Kind { Index, NearestOmega } kind = Kind::Index;
    int index = 0;          ///< 0-based position in the Re-sorted mode list
    double omega = 0.0;

    static ModeSelector by_index(int i) { return {Kind::Index, i, 0.0}; }
    static ModeSelector nearest(double w) { return {Kind::NearestOmega, 0, w}; }
};

struct RetrieveOptions {
    enum class Method { Auto, PeakOnly, FitOnly } method = Method::Auto;
    int n_modes = 0;                  ///< 0: campaign size (system dimension)
    double overlap_linewidths = 10.0; ///< fit when min peak gap < this many linewidths
    double weak_rel = 1e-6;           ///< WeakPrefactor threshold on the fixed-site entry
    FitOptions fit;
};

/// Full protocol: find peaks, sample or fit depending on overlap, normalize.
RetrievedMode retrieve_eigvec(const Campaign& c, const ModeSelector& target, const RetrieveOptions& opt = {});

}  // namespace levlab
