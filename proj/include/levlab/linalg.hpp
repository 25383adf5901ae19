#pragma once

#include <utility>

#include "levlab/types.hpp"

namespace levlab {

/// Eigendecomposition with paired left/right eigenvectors.
/// Columns of `rev` are |psi_n^R> (unit norm, largest entry rotated real-positive);
/// rows of `lev` are <psi_n^L|, scaled so that lev * rev = I.
struct EigenSystem {
    std::vector<cplx> eigenvalues;  ///< sorted by ascending Re, ties by ascending Im
    CMatrix rev;
    CMatrix lev;
    std::vector<double> condition;  ///< per-mode |lev_n| |rev_n| (biorthogonal condition number)
};

struct EigOptions {
    double condition_cap = 1e12;  ///< REV-matrix condition beyond which DefectiveMatrix is raised
};

EigenSystem eig(const Hamiltonian& h, const EigOptions& opt = {});

/// Eigenvalues only (unsorted), without the eigenvector machinery.
std::vector<cplx> eigenvalues_only(const CMatrix& a);

/// (omega I - H)^{-1}. Throws SingularAtResonance when the shifted matrix is
/// singular at pivot tolerance.
CMatrix resolvent(const Hamiltonian& h, double omega);

/// Gauge-fix REV columns (unit norm, largest entry real-positive) and rescale LEV
/// rows so that the diagonal overlaps <L_n|R_n> are exactly 1.
std::pair<CMatrix, CMatrix> biorthonormalize(const CMatrix& rev, const CMatrix& lev);

// --- shared dense kernels ---

struct LuFactors {
    CMatrix a;              // packed L\U
    std::vector<int> piv;   // row permutation
    double min_pivot = 0.0;
    double scale = 0.0;     // max |entry| of the input
};

LuFactors lu_factor(CMatrix a);
bool lu_singular(const LuFactors& f, double rel_tol);
void lu_solve(const LuFactors& f, std::span<cplx> b);
/// Solve with tiny pivots replaced (inverse-iteration style); never throws on singularity.
void lu_solve_perturbed(const LuFactors& f, std::span<cplx> b);
CMatrix lu_inverse(const LuFactors& f);

/// Scale to unit norm and rotate so the largest-magnitude entry (lowest index on
/// ties) is real-positive. No-op on zero vectors.
void gauge_fix(std::span<cplx> v);

double condition_fro(const CMatrix& a, const CMatrix& a_inv);

}  // namespace levlab
