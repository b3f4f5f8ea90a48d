#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ptqkr/errors.hpp"
#include "ptqkr/types.hpp"

namespace ptqkr {

enum class SourceKind { RealAxis, ComplexPlane };

// Point set pooled over an ensemble of spectra, each spectrum unfolded
// independently (so their local densities are comparable), with provenance
// kept: spectrum i owns pts[offsets[i] .. offsets[i+1]).  Neighbor searches
// never cross spectrum boundaries.  re_period > 0 marks the real axis as
// periodic with that width (quasi-energy real parts live on a circle).
struct UnfoldedPoints {
    SourceKind source = SourceKind::RealAxis;
    std::vector<cplx> pts; // Im = 0 for the real-axis kind
    std::vector<std::size_t> offsets;
    double re_period = 0.0;

    std::size_t spectra() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

// Unfolds an ensemble of complex spectra: per spectrum the real parts are
// kept (their density is uniform on (-pi, pi]) and the imaginary parts are
// mapped through the spectrum's own empirical staircase y -> rank(y)/count;
// both axes are then rescaled by one common factor chosen so the pooled mean
// nearest-neighbor spacing is 1.  Each spectrum must contribute at least 20
// points (TooFewPoints).
UnfoldedPoints unfold_complex(const std::vector<std::vector<cplx>>& spectra);

// Unfolds real spectra: per spectrum, sorted values rescaled to unit mean
// consecutive spacing (exactly invariant under affine input transforms).
// Each spectrum must contribute at least 20 values (TooFewPoints).
UnfoldedPoints unfold_real(const std::vector<std::vector<double>>& spectra);

// Wraps raw complex spectra as a point set without any unfolding (ratio
// statistics are unfolding-free).  re_period = 2 pi for quasi-energies.
UnfoldedPoints raw_complex_points(const std::vector<std::vector<cplx>>& spectra,
                                  double re_period);

struct SpacingSample {
    std::vector<double> s; // nearest-neighbor distances, renormalized to <s> = 1
};

// Per-point nearest-neighbor distance (Euclidean; 1D distance on the real
// axis), computed within each spectrum and pooled, then renormalized to unit
// mean.  Quadratic scan by default; a uniform-grid spatial index above 5e4
// points per spectrum (bit-identical results by construction).  Requires at
// least 3 points per spectrum (TooFewPoints).
SpacingSample nn_spacings(const UnfoldedPoints& points);

struct RatioSample {
    std::vector<cplx> z;   // (eps_NN - eps) / (eps_NNN - eps)
    std::vector<double> r; // |z|, each in [0, 1]
    double r_mean = 0.0;
    double r_stderr = 0.0; // standard error of the mean
};

// Nearest / next-to-nearest neighbor ratios per point.  Ties are broken by
// (distance, index); exactly coincident points raise DegenerateSpectrum with
// the multiplicity in the message.  Requires >= 3 points per spectrum.
RatioSample spacing_ratios(const UnfoldedPoints& points);

// Density-normalized histogram (integrates to 1 over [lo, hi]).  EmptyInput
// when `values` is empty; a nonempty input that misses the range entirely
// yields a zero histogram with empty_range_warning set.
Histogram histogram_density(const std::vector<double>& values, int bin_count,
                            double lo, double hi);

enum class FitMethod { Mle, HistogramLsq };

// One-parameter interpolation between Poisson (beta = 0) and Wigner GOE
// (beta = 1): P(s) = C1 s^beta exp(-C2 s^{beta+1}) with
// C2 = Gamma((beta+2)/(beta+1))^{beta+1}, C1 = (beta+1) C2.
struct BrodyFit {
    double beta = 0.0;
    double C1 = 1.0;
    double C2 = 1.0;
    FitMethod method = FitMethod::Mle;
    double goodness = 0.0; // KS distance of the sample to the fitted CDF
    bool clamped = false;  // unconstrained optimum left [0, 1]
};

// Maximum-likelihood fit (score root by bisection on beta in [0,1] to 1e-6)
// or binned least-squares cross-check (50 bins on [0,4]).  MLE requires at
// least 500 spacings.
BrodyFit brody_fit(const SpacingSample& sample, FitMethod method = FitMethod::Mle);

struct MixtureFit {
    double alpha = 0.0;  // GOE weight in alpha*P_GOE + (1-alpha)*P_Poisson, clipped to [0,1]
    double residual = 0.0; // least-squares objective at the fit
};

// Closed-form binned least squares of the histogram against the two-component
// mixture.
MixtureFit mixture_fit(const Histogram& hist);

enum class ReferenceKind { Poisson, GoeWigner, GueWigner, Brody };

// Unit-mean reference spacing densities / CDFs; beta is used by Brody only.
double reference_pdf(ReferenceKind kind, double s, double beta = 0.0);
double reference_cdf(ReferenceKind kind, double s, double beta = 0.0);

// Sup-norm distance between the empirical CDF of `sample` and `cdf`.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample sup-norm CDF distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_tail(double chi2, int dof);

// Points-per-spectrum crossover from the quadratic neighbor scan to the
// spatial grid.  Mutable so tests can exercise the grid path on small inputs;
// both paths produce bit-identical results.
std::size_t& spatial_index_threshold();

} // namespace ptqkr
