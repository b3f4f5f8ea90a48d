#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptqkr/errors.hpp"
#include "ptqkr/types.hpp"

namespace ptqkr {

// Parameters of the kicked rotor at quantum resonance.
//
// The effective Planck constant is hbar_eff = 4*pi*N/M with gcd(N, M) = 1,
// and the gauge (magnetic) term is gamma_eff = 2*pi*a/(b*M); a = 0 forces
// b = 1, a > 0 requires gcd(a, b*M) = 1.  The one-period evolution reduces,
// via Bloch's theorem with quasi-momentum q in (-pi/D, pi/D], to a dense
// D x D block with D = b*M.
struct ResonanceParams {
    std::int64_t N = 1;
    std::int64_t M = 399;
    std::int64_t b = 1;
    std::int64_t a = 0;
    double k = 0.0;      // kick strength
    double lambda = 0.0; // strength of the imaginary (balanced gain/loss) kick component
    double q = 0.0;      // Bloch number

    std::int64_t D() const { return b * M; }
    double hbar_eff() const;
    double gamma_eff() const;

    // Throws PreconditionViolation on broken coprimality/range invariants and
    // OverflowRisk when k*lambda exceeds the double-precision budget (700).
    void validate() const;
};

// Fourier coefficients W_n of the kick factor exp{-i k [cos x + i lambda sin x]},
// so that the factor equals sum_n W_n e^{i n x}.  Coefficients are stored for
// n in [-n_max, n_max]; tail_bound is the largest |W_n| over the outermost 16
// indices on each side and is guaranteed below tail_tol * max(1, max|W_n|):
// the requested tolerance is absolute at unit coefficient scale and relative
// once gain inflates the scale past 1.
struct KickTable {
    double k = 0.0;
    double lambda = 0.0;
    std::int64_t n_max = 0;
    std::int64_t grid = 0;     // DFT size used (power of two); 0 marks series evaluation
    double tail_bound = 0.0;
    bool conditioning_warning = false; // set when max |W_n| > 1e12
    std::vector<cplx> w;               // w[n_max + n]

    cplx at(std::int64_t n) const {
        if (n < -n_max || n > n_max) return {0.0, 0.0};
        return w[static_cast<std::size_t>(n + n_max)];
    }
};

// Builds the kick-coefficient table by uniform sampling of the kick factor
// and a discrete Fourier transform.  n_max starts at ceil(k(1+lambda)) +
// max(64, ceil(10 k^{1/3})) — past the classical turning point and its Airy
// transition region — and is widened until the measured boundary values fall
// below tail_tol at the coefficient scale; the DFT grid starts at the
// smallest power of two >= 2 n_max + 1 and doubles whenever the widened
// range no longer fits.  The sampled transform carries a rounding floor of
// order k * ulp per coefficient that no grid size can push below a tight
// threshold once k is large, so when the grid cap (2^24) is exhausted the
// builder hands over to the series evaluation below (possible for
// lambda < 1; otherwise NonConvergedTail).
KickTable kick_fourier_table(double k, double lambda, double tail_tol = 1e-14);

// Same table evaluated termwise from the closed form
//   W_n = (-i)^n [(1+lambda)/(1-lambda)]^{n/2} J_n(k sqrt(1-lambda^2)),
// with the Bessel run obtained by stable downward recurrence and each
// coefficient assembled in log space (the gain power alone may overflow
// where the product is representable).  Boundary values here are genuinely
// small rather than sitting on a quadrature noise floor, which makes tight
// tolerances reachable at large k; requires lambda < 1 so that the Bessel
// argument stays real.  grid is set to 0.
KickTable kick_fourier_table_series(double k, double lambda, double tail_tol = 1e-14);

// Folds the coefficients onto D momentum classes with the Bloch phase:
// folded[d] = sum_{t == d (mod D)} W_t e^{-i q t}.
std::vector<cplx> fold_kick_coefficients(const KickTable& table, std::int64_t D, double q);

// Half-period free-rotation phase g_m = exp(-i (hbar_eff/4) m^2 + i (gamma_eff/2) m),
// evaluated with exact integer reduction of the phase argument so it stays
// accurate for any lattice index m (also negative / outside [0, D)).
cplx half_rotation_phase(const ResonanceParams& p, std::int64_t m);

// Dense reduced one-period matrix S_{l,n} = g_l * folded[(l-n) mod D] * g_n,
// l, n in {0, ..., D-1}, bundled with the parameters it was built from.
struct FloquetMatrix {
    ResonanceParams params;
    CMatrix s;
};

FloquetMatrix build_reduced_floquet(const ResonanceParams& p);
FloquetMatrix build_reduced_floquet(const ResonanceParams& p, const KickTable& table);

// ||S^H S - I||_F / sqrt(D); ~0 exactly when lambda = 0 (unitary limit).
double unitarity_residual(const CMatrix& s);

enum class SymmetryKind { TimeReversal, PtSpectral };

struct SymmetryReport {
    SymmetryKind kind = SymmetryKind::TimeReversal;
    double residual = 0.0;               // normalized Frobenius / matching distance
    std::int64_t p = 0;                  // index shift (L * Delta) mod M
    std::optional<std::int64_t> Delta;   // (M+1)/N when integral
};

// Time-reversal-type symmetry of S for b = 1 and gamma_eff in {0, 2*pi*L/M}:
// S_{l,n} = S_{-n+p, -l+p} with p = (L * Delta) mod M, Delta = (M+1)/N.
// The reflected index pair is reduced mod M, with the sign the half-rotation
// phase picks up across a period restored: g_{m+jM} = g_m * (-1)^{j(N M + a)},
// so for odd N*M + a the naive mod-M lookup alone would flip the sign of the
// wrapped rows/columns and the identity would only appear to hold on the
// interior block.  Returns ||S - R||_F / ||S||_F with R the reflected matrix.
// NotApplicable for b > 1 or non-integral Delta.
SymmetryReport time_reversal_residual(const FloquetMatrix& f, std::int64_t L);

// Validates one reduced eigenpair (mu, c) against the full lattice operator
// U_{l,n} = g_l W_{l-n} g_n by banded convolution on l in [-L_trunc, L_trunc].
// The lattice extension of the reduced eigenvector is
//   phi_l = c_{l mod D} e^{i q l} * sgn(l),
// where sgn(l) = (-1)^{floor(l/D)} when N*b*M + a is odd and 1 otherwise:
// the half-rotation phase satisfies g_{m+jD} = g_m * (-1)^{j(N b M + a)}, so
// the alternating factor is what makes the periodic extension an actual
// lattice eigenfunction in the odd case.  Returns the max residual
// |sum_n U_{l,n} phi_n - mu phi_l| over the central half of the window.
// WindowTooSmall if L_trunc < 4 (n_max + D).
double bloch_consistency_residual(const ResonanceParams& p, cplx mu,
                                  const std::vector<cplx>& c, std::int64_t L_trunc);

// Parity sector blocks.  For gamma_eff = 0, b = 1 and odd M the matrix in the
// symmetric index convention l in [-h, h], h = (M-1)/2, commutes with the
// reflection l -> -l up to terms of order q*t and k*lambda (exactly at q = 0,
// lambda = 0).  The returned blocks are the projections onto the even
// (dimension h+1) and odd (dimension h) reflection sectors.  Splitting
// spectra into sectors removes the quasi-degenerate doublets (tunneling pairs
// between the +l and -l ladders) that otherwise contaminate spacing
// statistics; the approximation is controlled whenever k*lambda is far below
// the mean level spacing 2*pi/M.  NotApplicable unless a = 0, b = 1, M odd.
struct ParityBlocks {
    CMatrix even;
    CMatrix odd;
};
ParityBlocks parity_sector_blocks(const ResonanceParams& p);
ParityBlocks parity_sector_blocks(const ResonanceParams& p, const KickTable& table);

} // namespace ptqkr
