#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ptqkr/model.hpp"
#include "ptqkr/spectrum.hpp"
#include "ptqkr/stats.hpp"

namespace ptqkr {

struct RegimeReport {
    double xi_l = 0.0;    // localization length estimate k^2 / 2
    bool localized = false; // xi_l < M strictly; a tie counts as delocalized
};

RegimeReport localization_regime(const ResonanceParams& params);

struct SweepOptions {
    std::string cache_dir; // empty: no caching
    int workers = 1;
    double tail_tol = 1e-14;
    double tol_real = 1e-10; // part of the cache key: classification context
                             // changes the downstream artifact
};

// Diagonalization with a content-addressed disk cache.  The key hashes the
// canonical parameter string plus a code-version tag, so stale files from an
// older build are recomputed rather than trusted.  Files are written to a
// temp name and renamed, so a parallel or killed run never leaves a torn
// entry under the final name.  An unreadable or malformed entry counts in
// cache_corrupt_count(), warns on stderr, and is recomputed and replaced.
QESpectrum compute_spectrum_cached(const ResonanceParams& params,
                                   const SweepOptions& opts);

std::atomic<std::int64_t>& cache_corrupt_count();
std::atomic<std::int64_t>& cache_hit_count();

// Hex digest used for cache keys (exposed so the key scheme is testable
// against published vectors).
std::string sha256_hex(const std::string& data);

// Fixed-size worker pool over [0, n); results must be deposited into
// per-index slots so output is identical for any worker count.  The first
// exception thrown by the body is rethrown on the calling thread.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

struct PhaseCell {
    double k = 0.0;
    double lambda = 0.0;
    double P = 0.0;        // real fraction; NaN when `error` is set
    std::int64_t n_real = -1;
    std::string error;     // nonempty: this cell failed, others are unaffected
};

struct PhaseDiagram {
    ResonanceParams base;
    double tol_real = 1e-10;
    double k_star = 0.0; // localization boundary k* = sqrt(2M) where xi_L = M
    std::vector<double> ks;
    std::vector<double> lambdas;
    std::vector<PhaseCell> cells; // row-major: cells[ik * lambdas.size() + il]
};

// Grids must be nonempty and strictly increasing.  Cells are evaluated
// concurrently; a failing cell records its error in-place and never aborts
// the rest of the sweep.
PhaseDiagram real_fraction_phase_diagram(const ResonanceParams& base,
                                         const std::vector<double>& ks,
                                         const std::vector<double>& lambdas,
                                         const SweepOptions& opts);

// Half-open Bloch grid avoiding both the zone center and the zone edge:
// q_j = (j + 1/2) pi / (M count), j = 0 .. count-1.
std::vector<double> bloch_grid(std::int64_t M, int count);

std::vector<QESpectrum> bloch_ensemble(const ResonanceParams& base, int count,
                                       const SweepOptions& opts);

// Spectra at k = center - half, ..., center + half in steps of dk (q fixed).
std::vector<QESpectrum> k_window_ensemble(const ResonanceParams& base,
                                          double k_center, double half_width,
                                          double dk, const SweepOptions& opts);

enum class SectorMode { Auto, On, Off };

// Parity desymmetrization pays off only where it is a symmetry to working
// precision: gamma_eff = 0 (a = 0, b = 1), odd M, and a kick narrow enough
// that the Bloch/PT-breaking terms stay below the sector coupling scale.
bool sectors_applicable(const ResonanceParams& params);

// Real sequences ready for spacing statistics, one per ensemble member (two
// per member when parity sectors are split: even and odd blocks are
// statistically independent and must not be mixed into one spectrum).
// Sectors off: real parts of the QEs within opts.tol_real of the real axis.
std::vector<std::vector<double>>
real_spacing_sequences(const std::vector<ResonanceParams>& members,
                       SectorMode mode, const SweepOptions& opts);

struct TransitionPoint {
    double lambda = 0.0;
    double r_mean = 0.0;
    double r_stderr = 0.0;
    std::int64_t n_ratios = 0;
};

struct TransitionCurve {
    std::vector<TransitionPoint> points;
    double midpoint = 0.6425; // target <r> level whose crossing defines lambda0
    std::optional<double> lambda0; // empty + warning when the curve never crosses
};

// <r>(lambda) pooled over ensemble members (each member keeps its own k and
// q; lambda is overridden by the grid).  For q != 0: complex-plane ratios of
// the complex-classified QEs; for q = 0: real-axis ratios of the real QEs.
// Members contributing fewer than 3 usable points at a grid point are
// skipped; a point with no usable member gets r_mean = NaN, n_ratios = 0.
// lambda0 interpolates linearly in lambda between the first pair of finite
// points straddling the midpoint.
TransitionCurve r_transition_curve(const std::vector<ResonanceParams>& members,
                                   const std::vector<double>& lambdas,
                                   double midpoint, const SweepOptions& opts);

} // namespace ptqkr
