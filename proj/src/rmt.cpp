#include "ptqkr/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <lapacke.h>

#include "internal.hpp"

namespace ptqkr {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1): top 53 bits, offset by half an ulp so 0 never appears.
double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal pair keyed by (seed, kind, index, i, j); evaluation-order
// independent by construction.
void gauss_pair(const EnsembleSpec& spec, int index, int i, int j, double& g1,
                double& g2) {
    std::uint64_t h = mix64(spec.seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(spec.kind));
    h = mix64(h ^ static_cast<std::uint64_t>(index));
    h = mix64(h ^ static_cast<std::uint64_t>(i));
    h = mix64(h ^ static_cast<std::uint64_t>(j));
    const double u1 = to_unit(mix64(h));
    const double u2 = to_unit(mix64(h ^ 0xd1b54a32d192ed03ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    g1 = r * std::cos(2.0 * M_PI * u2);
    g2 = r * std::sin(2.0 * M_PI * u2);
}

} // namespace

const char* ensemble_name(EnsembleKind kind) {
    switch (kind) {
    case EnsembleKind::Goe: return "goe";
    case EnsembleKind::Gue: return "gue";
    case EnsembleKind::GinibreA: return "ginibre_a";
    case EnsembleKind::AIdagger: return "ai_dagger";
    }
    return "unknown";
}

EnsembleKind ensemble_from_name(const std::string& name) {
    if (name == "goe") return EnsembleKind::Goe;
    if (name == "gue") return EnsembleKind::Gue;
    if (name == "ginibre_a") return EnsembleKind::GinibreA;
    if (name == "ai_dagger") return EnsembleKind::AIdagger;
    raise(ErrKind::UnknownKind, "ensemble_from_name: '" + name + "'");
    return EnsembleKind::Goe;
}

void EnsembleSpec::validate() const {
    if (n < 16)
        raise(ErrKind::PreconditionViolation, "EnsembleSpec: n must be >= 16");
    if (count < 1)
        raise(ErrKind::PreconditionViolation, "EnsembleSpec: count must be >= 1");
    if (!(bulk_fraction > 0.0) || bulk_fraction > 1.0)
        raise(ErrKind::PreconditionViolation,
              "EnsembleSpec: bulk_fraction must be in (0, 1]");
}

CMatrix sample_matrix(const EnsembleSpec& spec, int index) {
    spec.validate();
    const int n = spec.n;
    CMatrix m(n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double g1 = 0.0, g2 = 0.0;
    switch (spec.kind) {
    case EnsembleKind::Goe:
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i) {
                gauss_pair(spec, index, i, j, g1, g2);
                const double v = (i == j) ? std::sqrt(2.0) * g1 : g1;
                m(i, j) = v;
                m(j, i) = v;
            }
        break;
    case EnsembleKind::Gue:
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i) {
                gauss_pair(spec, index, i, j, g1, g2);
                if (i == j) {
                    m(i, j) = g1;
                } else {
                    const cplx v(g1 * inv_sqrt2, g2 * inv_sqrt2);
                    m(i, j) = v;
                    m(j, i) = std::conj(v);
                }
            }
        break;
    case EnsembleKind::GinibreA:
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                gauss_pair(spec, index, i, j, g1, g2);
                m(i, j) = cplx(g1 * inv_sqrt2, g2 * inv_sqrt2);
            }
        break;
    case EnsembleKind::AIdagger:
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i) {
                gauss_pair(spec, index, i, j, g1, g2);
                const cplx v(g1 * inv_sqrt2, g2 * inv_sqrt2);
                m(i, j) = v;
                m(j, i) = v;
            }
        break;
    }
    return m;
}

EnsembleBaseline baseline_statistics(const EnsembleSpec& spec) {
    spec.validate();
    detail::ensure_single_threaded_blas();
    const int n = spec.n;
    const bool hermitian =
        spec.kind == EnsembleKind::Goe || spec.kind == EnsembleKind::Gue;

    UnfoldedPoints points;
    if (hermitian) {
        // Keep the central bulk of each sorted spectrum, then unfold every
        // kept level through the pooled empirical staircase.
        std::vector<std::vector<double>> kept(static_cast<std::size_t>(spec.count));
        std::vector<double> w(static_cast<std::size_t>(n));
        const int lo = static_cast<int>(std::floor(0.5 * n * (1.0 - spec.bulk_fraction)));
        const int hi = n - lo;
        for (int idx = 0; idx < spec.count; ++idx) {
            CMatrix m = sample_matrix(spec, idx);
            const lapack_int info = LAPACKE_zheev(
                LAPACK_COL_MAJOR, 'N', 'L', n,
                reinterpret_cast<lapack_complex_double*>(m.a.data()), n, w.data());
            if (info != 0)
                raise(ErrKind::ConvergenceFailure,
                      "baseline_statistics: zheev failed on matrix " + std::to_string(idx));
            kept[static_cast<std::size_t>(idx)].assign(w.begin() + lo, w.begin() + hi);
        }
        std::vector<double> pooled;
        for (const auto& k : kept) pooled.insert(pooled.end(), k.begin(), k.end());
        std::sort(pooled.begin(), pooled.end());
        const double psize = static_cast<double>(pooled.size());
        points.source = SourceKind::RealAxis;
        points.offsets.push_back(0);
        for (const auto& k : kept) {
            for (double x : k) {
                const auto r = std::lower_bound(pooled.begin(), pooled.end(), x) -
                               pooled.begin();
                points.pts.emplace_back(static_cast<double>(r + 1) / psize, 0.0);
            }
            points.offsets.push_back(points.pts.size());
        }
    } else {
        // Flat bulk of the circular law: keep the disk, no unfolding needed.
        const double radius = spec.bulk_fraction * std::sqrt(static_cast<double>(n));
        std::vector<cplx> vals(static_cast<std::size_t>(n));
        points.source = SourceKind::ComplexPlane;
        points.offsets.push_back(0);
        for (int idx = 0; idx < spec.count; ++idx) {
            CMatrix m = sample_matrix(spec, idx);
            cplx dummy;
            const lapack_int info = LAPACKE_zgeev(
                LAPACK_COL_MAJOR, 'N', 'N', n,
                reinterpret_cast<lapack_complex_double*>(m.a.data()), n,
                reinterpret_cast<lapack_complex_double*>(vals.data()),
                reinterpret_cast<lapack_complex_double*>(&dummy), 1,
                reinterpret_cast<lapack_complex_double*>(&dummy), 1);
            if (info != 0)
                raise(ErrKind::ConvergenceFailure,
                      "baseline_statistics: zgeev failed on matrix " + std::to_string(idx));
            for (const cplx& z : vals)
                if (std::abs(z) <= radius) points.pts.push_back(z);
            points.offsets.push_back(points.pts.size());
        }
    }

    EnsembleBaseline base;
    base.spec = spec;
    base.spacings = nn_spacings(points);
    base.ratios = spacing_ratios(points);
    base.r_mean = base.ratios.r_mean;
    base.r_stderr = base.ratios.r_stderr;
    return base;
}

} // namespace ptqkr
