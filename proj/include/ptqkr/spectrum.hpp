#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "ptqkr/model.hpp"
#include "ptqkr/types.hpp"

namespace ptqkr {

// Eigenvalues mu of S and the quasi-energies eps = i Log mu, principal
// branch: Re eps = -arg mu in (-pi, pi], Im eps = ln |mu|.
struct QESpectrum {
    ResonanceParams params;
    std::vector<cplx> mu;
    std::vector<cplx> eps;
    std::vector<cplx> vectors;   // column-major D x D right eigenvectors; empty unless requested
    double residual_bound = 0.0; // coarse backward-error scale of the eigensolve
};

// Dense non-symmetric eigensolve (Hessenberg + shifted QR with balancing,
// via LAPACK zgeev).  Throws ConvergenceFailure with the failing index if the
// QR iteration stalls, ZeroEigenvalue if any |mu| underflows to zero.
QESpectrum diagonalize(const FloquetMatrix& f, bool want_vectors = false);

// Counts calls into the eigensolver (used to verify that cache hits skip the
// expensive path).
std::atomic<std::int64_t>& diagonalization_count();

// Eigenvalues of an arbitrary dense matrix (no vectors); same backend and
// error behavior as diagonalize.  Used for symmetry-sector blocks and
// reference ensembles.
std::vector<cplx> eigenvalues(const CMatrix& m);

std::vector<cplx> quasi_energies(const std::vector<cplx>& mu);

struct RealComplexPartition {
    std::vector<double> real_eps;  // Re eps of members with |Im eps| <= tol_real
    std::vector<cplx> complex_eps; // members with |Im eps| >  tol_real
    double tol_real = 1e-10;
    double P = 0.0;                     // real fraction |real_eps| / D
    std::int64_t boundary_stragglers = 0; // complex members with |Im eps| <= 10 tol_real
};

RealComplexPartition classify_real(const QESpectrum& spec, double tol_real = 1e-10);

// Spectral consequence of the (anti-unitary) symmetry relating S to S^{-1}:
// the eigenvalue multiset is invariant under eps -> conj(eps).  Returns the
// worst matched-pair distance between {eps} and {conj(eps)} (greedy nearest
// match; optimal-assignment fallback when any greedy match exceeds 1e-6).
// The relation holds at q = 0 or q = pi/D only; PreconditionViolation
// otherwise (use cross_q_conjugation for other q).
double conjugation_pairing_residual(const QESpectrum& spec);

// Matching distance between {eps(-q)} and {conj(eps(q))}.  The inputs must
// agree in every parameter except q <-> -q (ParamMismatch otherwise).
double cross_q_conjugation(const QESpectrum& plus, const QESpectrum& minus);

// Density-normalized histogram of Re eps over (-pi, pi], pooled over spectra.
Histogram real_part_density(const std::vector<QESpectrum>& specs, int bins);

// Pearson chi-square test of uniformity over (-pi, pi] with `bins` equal
// cells; returns the p-value (upper tail of chi-square with bins-1 dof).
double chi2_uniform_pvalue(const std::vector<double>& values, int bins);

} // namespace ptqkr
