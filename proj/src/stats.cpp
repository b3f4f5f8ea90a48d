#include "ptqkr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>

#include <gsl/gsl_sf_gamma.h>

namespace ptqkr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Crossover from the quadratic scan to the spatial grid, points per spectrum.
std::size_t g_spatial_threshold = 50000;

double wrap_delta(double d, double period) {
    if (period > 0.0) d -= period * std::round(d / period);
    return d;
}

// Best two neighbors of one point as lexicographically smallest (d2, index)
// pairs, independent of offer order.
struct TwoBest {
    double d1 = kInf, d2 = kInf;
    std::size_t j1 = static_cast<std::size_t>(-1);
    std::size_t j2 = static_cast<std::size_t>(-1);

    void offer(double d, std::size_t j) {
        if (j == j1 || j == j2) return; // grid wrap may revisit a cell
        if (d < d1 || (d == d1 && j < j1)) {
            d2 = d1; j2 = j1;
            d1 = d; j1 = j;
        } else if (d < d2 || (d == d2 && j < j2)) {
            d2 = d; j2 = j;
        }
    }
};

double pair_dist2(const cplx* p, std::size_t i, std::size_t j, double period) {
    const double dx = wrap_delta(p[i].real() - p[j].real(), period);
    const double dy = p[i].imag() - p[j].imag();
    return dx * dx + dy * dy;
}

void two_best_brute(const cplx* p, std::size_t n, double period,
                    std::vector<TwoBest>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        TwoBest best;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            best.offer(pair_dist2(p, i, j, period), j);
        }
        out[i] = best;
    }
}

// Uniform-grid index.  The ring scan stops only when the next ring's distance
// lower bound strictly exceeds the current second-best squared distance, so
// the (d2, index) winners match the quadratic scan bit for bit.
void two_best_grid(const cplx* p, std::size_t n, double period,
                   std::vector<TwoBest>& out) {
    double minx = kInf, maxx = -kInf, miny = kInf, maxy = -kInf;
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = p[i].real();
        if (period > 0.0) {
            x = std::fmod(x, period);
            if (x < 0.0) x += period;
        }
        xs[i] = x;
        minx = std::min(minx, x); maxx = std::max(maxx, x);
        miny = std::min(miny, p[i].imag()); maxy = std::max(maxy, p[i].imag());
    }
    const double spanx = (period > 0.0) ? period : std::max(maxx - minx, 0.0);
    const double spany = std::max(maxy - miny, 0.0);
    if (period > 0.0) minx = 0.0;

    // Aim for about one point per cell, keeping the cells near-square.
    long ncx = 1, ncy = 1;
    if (spanx > 0.0 && spany > 0.0) {
        const double aspect = spanx / spany;
        ncx = std::max<long>(1, static_cast<long>(std::sqrt(static_cast<double>(n) * aspect)));
        ncy = std::max<long>(1, static_cast<long>(std::sqrt(static_cast<double>(n) / aspect)));
    } else if (spanx > 0.0) {
        ncx = static_cast<long>(n);
    } else if (spany > 0.0) {
        ncy = static_cast<long>(n);
    }
    const double wx = (ncx > 0 && spanx > 0.0) ? spanx / static_cast<double>(ncx) : 0.0;
    const double wy = (ncy > 0 && spany > 0.0) ? spany / static_cast<double>(ncy) : 0.0;
    double wmin = kInf;
    if (ncx > 1) wmin = std::min(wmin, wx);
    if (ncy > 1) wmin = std::min(wmin, wy);

    auto cell_x = [&](double x) {
        if (wx <= 0.0) return 0L;
        return std::min(ncx - 1, static_cast<long>((x - minx) / wx));
    };
    auto cell_y = [&](double y) {
        if (wy <= 0.0) return 0L;
        return std::min(ncy - 1, static_cast<long>((y - miny) / wy));
    };

    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(ncx * ncy));
    for (std::size_t i = 0; i < n; ++i)
        cells[static_cast<std::size_t>(cell_y(p[i].imag()) * ncx + cell_x(xs[i]))].push_back(i);

    const long max_ring = ncx + ncy + 2;
    for (std::size_t i = 0; i < n; ++i) {
        TwoBest best;
        const long cx = cell_x(xs[i]);
        const long cy = cell_y(p[i].imag());
        for (long r = 0; r <= max_ring; ++r) {
            if (r >= 2 && wmin < kInf) {
                const double bound = static_cast<double>(r - 1) * wmin;
                if (bound * bound > best.d2) break;
            }
            for (long dy = -r; dy <= r; ++dy) {
                const long gy = cy + dy;
                if (gy < 0 || gy >= ncy) continue;
                const long step = (std::labs(dy) == r) ? 1 : 2 * r;
                for (long dx = -r; dx <= r; dx += std::max(step, 1L)) {
                    long gx = cx + dx;
                    if (period > 0.0) {
                        gx %= ncx;
                        if (gx < 0) gx += ncx;
                    } else if (gx < 0 || gx >= ncx) {
                        continue;
                    }
                    for (std::size_t j : cells[static_cast<std::size_t>(gy * ncx + gx)]) {
                        if (j == i) continue;
                        best.offer(pair_dist2(p, i, j, period), j);
                    }
                    if (r == 0) break;
                }
            }
        }
        out[i] = best;
    }
}

void two_best(const cplx* p, std::size_t n, double period, std::vector<TwoBest>& out) {
    out.assign(n, TwoBest{});
    if (n > g_spatial_threshold)
        two_best_grid(p, n, period, out);
    else
        two_best_brute(p, n, period, out);
}

void require_spectra(const UnfoldedPoints& points, std::size_t min_per_spectrum,
                     const char* who) {
    if (points.spectra() == 0 || points.pts.empty())
        raise(ErrKind::EmptyInput, std::string(who) + ": no spectra");
    for (std::size_t s = 0; s + 1 < points.offsets.size(); ++s) {
        const std::size_t n = points.offsets[s + 1] - points.offsets[s];
        if (n < min_per_spectrum)
            raise(ErrKind::TooFewPoints,
                  std::string(who) + ": spectrum " + std::to_string(s) + " has " +
                      std::to_string(n) + " points, need >= " +
                      std::to_string(min_per_spectrum));
    }
}

// Sorted-order nearest-neighbor distances on a line: min of the two adjacent
// gaps, one-sided at the ends (circular closure when period > 0).
void nn_line(std::vector<double>& v, double period, std::vector<double>& out) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::vector<double> gap(n);
    for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = v[i + 1] - v[i];
    if (period > 0.0) {
        gap[n - 1] = (v[0] + period) - v[n - 1];
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(std::min(gap[i], gap[(i + n - 1) % n]));
    } else {
        out.push_back(gap[0]);
        for (std::size_t i = 1; i + 1 < n; ++i)
            out.push_back(std::min(gap[i - 1], gap[i]));
        out.push_back(gap[n - 2]);
    }
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double brody_c2(double beta) {
    return std::pow(std::tgamma((beta + 2.0) / (beta + 1.0)), beta + 1.0);
}

} // namespace

std::size_t& spatial_index_threshold() { return g_spatial_threshold; }

UnfoldedPoints unfold_complex(const std::vector<std::vector<cplx>>& spectra) {
    if (spectra.empty())
        raise(ErrKind::EmptyInput, "unfold_complex: no spectra");
    UnfoldedPoints out;
    out.source = SourceKind::ComplexPlane;
    out.offsets.push_back(0);
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        const auto& sp = spectra[s];
        const std::size_t n = sp.size();
        if (n < 20)
            raise(ErrKind::TooFewPoints, "unfold_complex: spectrum " + std::to_string(s) +
                                             " has " + std::to_string(n) +
                                             " points, need >= 20");
        // Imaginary parts go through the spectrum's empirical staircase:
        // rank/count in (0, 1].  Stable sort keeps ties deterministic.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return sp[a].imag() < sp[b].imag();
        });
        std::vector<double> rank(n);
        for (std::size_t r = 0; r < n; ++r)
            rank[order[r]] = static_cast<double>(r + 1) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            out.pts.emplace_back(sp[i].real(), rank[i]);
        out.offsets.push_back(out.pts.size());
    }

    // One common rescale so the pooled mean nearest-neighbor spacing is 1.
    const double period = 2.0 * M_PI;
    double acc = 0.0;
    std::size_t cnt = 0;
    std::vector<TwoBest> best;
    for (std::size_t s = 0; s + 1 < out.offsets.size(); ++s) {
        const std::size_t b = out.offsets[s], e = out.offsets[s + 1];
        two_best(out.pts.data() + b, e - b, period, best);
        for (const auto& tb : best) acc += std::sqrt(tb.d1);
        cnt += e - b;
    }
    const double mean_nn = acc / static_cast<double>(cnt);
    if (mean_nn > 0.0) {
        const double scale = 1.0 / mean_nn;
        for (auto& z : out.pts) z *= scale;
        out.re_period = period * scale;
    } else {
        out.re_period = period;
    }
    return out;
}

UnfoldedPoints unfold_real(const std::vector<std::vector<double>>& spectra) {
    if (spectra.empty())
        raise(ErrKind::EmptyInput, "unfold_real: no spectra");
    UnfoldedPoints out;
    out.source = SourceKind::RealAxis;
    out.offsets.push_back(0);
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        std::vector<double> v = spectra[s];
        const std::size_t n = v.size();
        if (n < 20)
            raise(ErrKind::TooFewPoints, "unfold_real: spectrum " + std::to_string(s) +
                                             " has " + std::to_string(n) +
                                             " points, need >= 20");
        std::sort(v.begin(), v.end());
        // Shift to the lowest level, rescale by the mean consecutive gap.
        const double span = v[n - 1] - v[0];
        if (span <= 0.0)
            raise(ErrKind::DegenerateSpectrum,
                  "unfold_real: spectrum " + std::to_string(s) + " is a single level");
        const double scale = static_cast<double>(n - 1) / span;
        for (std::size_t i = 0; i < n; ++i)
            out.pts.emplace_back((v[i] - v[0]) * scale, 0.0);
        out.offsets.push_back(out.pts.size());
    }
    return out;
}

UnfoldedPoints raw_complex_points(const std::vector<std::vector<cplx>>& spectra,
                                  double re_period) {
    if (spectra.empty())
        raise(ErrKind::EmptyInput, "raw_complex_points: no spectra");
    UnfoldedPoints out;
    out.source = SourceKind::ComplexPlane;
    out.re_period = re_period;
    out.offsets.push_back(0);
    for (const auto& sp : spectra) {
        out.pts.insert(out.pts.end(), sp.begin(), sp.end());
        out.offsets.push_back(out.pts.size());
    }
    return out;
}

SpacingSample nn_spacings(const UnfoldedPoints& points) {
    require_spectra(points, 3, "nn_spacings");
    SpacingSample out;
    out.s.reserve(points.pts.size());
    std::vector<TwoBest> best;
    std::vector<double> line;
    for (std::size_t s = 0; s + 1 < points.offsets.size(); ++s) {
        const std::size_t b = points.offsets[s], e = points.offsets[s + 1];
        if (points.source == SourceKind::RealAxis) {
            line.clear();
            for (std::size_t i = b; i < e; ++i) line.push_back(points.pts[i].real());
            nn_line(line, points.re_period, out.s);
        } else {
            two_best(points.pts.data() + b, e - b, points.re_period, best);
            for (const auto& tb : best) out.s.push_back(std::sqrt(tb.d1));
        }
    }
    const double m = mean_of(out.s);
    if (m > 0.0)
        for (double& v : out.s) v /= m;
    return out;
}

RatioSample spacing_ratios(const UnfoldedPoints& points) {
    require_spectra(points, 3, "spacing_ratios");
    RatioSample out;
    out.z.reserve(points.pts.size());
    out.r.reserve(points.pts.size());
    std::vector<TwoBest> best;
    for (std::size_t s = 0; s + 1 < points.offsets.size(); ++s) {
        const std::size_t b = points.offsets[s], e = points.offsets[s + 1];
        const std::size_t n = e - b;
        const cplx* p = points.pts.data() + b;
        two_best(p, n, points.re_period, best);
        for (std::size_t i = 0; i < n; ++i) {
            if (best[i].d1 == 0.0) {
                std::size_t mult = 0;
                for (std::size_t j = 0; j < n; ++j)
                    if (pair_dist2(p, i, j, points.re_period) == 0.0) ++mult;
                raise(ErrKind::DegenerateSpectrum,
                      "spacing_ratios: spectrum " + std::to_string(s) +
                          " has a point of multiplicity " + std::to_string(mult));
            }
            // Displacements with the same real-axis wrap the distances used.
            auto disp = [&](std::size_t j) {
                return cplx(wrap_delta(p[j].real() - p[i].real(), points.re_period),
                            p[j].imag() - p[i].imag());
            };
            const cplx z = disp(best[i].j1) / disp(best[i].j2);
            out.z.push_back(z);
            out.r.push_back(std::abs(z));
        }
    }
    const std::size_t n = out.r.size();
    out.r_mean = mean_of(out.r);
    double var = 0.0;
    for (double v : out.r) var += (v - out.r_mean) * (v - out.r_mean);
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    out.r_stderr = std::sqrt(var / static_cast<double>(n));
    return out;
}

Histogram histogram_density(const std::vector<double>& values, int bin_count,
                            double lo, double hi) {
    if (values.empty())
        raise(ErrKind::EmptyInput, "histogram_density: empty sample");
    if (bin_count < 2 || !(hi > lo))
        raise(ErrKind::PreconditionViolation, "histogram_density: bad bins or range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bin_count), 0);
    h.total = static_cast<std::int64_t>(values.size());
    const double w = (hi - lo) / bin_count;
    for (double v : values) {
        if (v < lo || v > hi) continue;
        auto idx = static_cast<std::size_t>((v - lo) / w);
        if (idx >= static_cast<std::size_t>(bin_count)) idx = bin_count - 1; // v == hi
        ++h.counts[idx];
        ++h.in_range;
    }
    h.density.assign(static_cast<std::size_t>(bin_count), 0.0);
    if (h.in_range == 0) {
        h.empty_range_warning = true;
    } else {
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            h.density[i] = static_cast<double>(h.counts[i]) /
                           (static_cast<double>(h.in_range) * w);
    }
    return h;
}

namespace {

double brody_mean_loglik(const std::vector<double>& s, double beta) {
    const double c2 = brody_c2(beta);
    const double c1 = (beta + 1.0) * c2;
    const double logc1 = std::log(c1);
    double acc = 0.0;
    for (double v : s)
        acc += logc1 + beta * std::log(v) - c2 * std::pow(v, beta + 1.0);
    return acc / static_cast<double>(s.size());
}

double brody_sse(const Histogram& hist, double beta) {
    const double w = hist.bin_width();
    const double c2 = brody_c2(beta);
    const double c1 = (beta + 1.0) * c2;
    double acc = 0.0;
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double c = hist.lo + (static_cast<double>(i) + 0.5) * w;
        const double f = c1 * std::pow(c, beta) * std::exp(-c2 * std::pow(c, beta + 1.0));
        const double d = hist.density[i] - f;
        acc += d * d;
    }
    return acc;
}

} // namespace

BrodyFit brody_fit(const SpacingSample& sample, FitMethod method) {
    if (sample.s.empty())
        raise(ErrKind::EmptyInput, "brody_fit: empty sample");
    BrodyFit fit;
    fit.method = method;

    if (method == FitMethod::Mle) {
        std::vector<double> s;
        s.reserve(sample.s.size());
        for (double v : sample.s)
            if (v > 0.0) s.push_back(v);
        if (s.size() < 500)
            raise(ErrKind::TooFewPoints, "brody_fit: MLE needs >= 500 positive spacings, got " +
                                             std::to_string(s.size()));
        const double h = 1e-5;
        auto score = [&](double beta) {
            return (brody_mean_loglik(s, beta + h) - brody_mean_loglik(s, beta - h)) /
                   (2.0 * h);
        };
        const double s0 = score(0.0), s1 = score(1.0);
        if (s0 <= 0.0) {
            fit.beta = 0.0;
            fit.clamped = s0 < 0.0;
        } else if (s1 >= 0.0) {
            fit.beta = 1.0;
            fit.clamped = s1 > 0.0;
        } else {
            double a = 0.0, b = 1.0;
            for (int it = 0; it < 60 && (b - a) > 1e-6; ++it) {
                const double mid = 0.5 * (a + b);
                (score(mid) > 0.0 ? a : b) = mid;
            }
            fit.beta = 0.5 * (a + b);
        }
    } else {
        const Histogram hist = histogram_density(sample.s, 50, 0.0, 4.0);
        // Golden-section minimization of the binned squared error.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = 0.0, b = 1.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = brody_sse(hist, x1), f2 = brody_sse(hist, x2);
        while (b - a > 1e-6) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a);
                f1 = brody_sse(hist, x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a);
                f2 = brody_sse(hist, x2);
            }
        }
        fit.beta = 0.5 * (a + b);
        const double h = 1e-5;
        if (fit.beta < 2e-6)
            fit.clamped = brody_sse(hist, h) > brody_sse(hist, 0.0);
        else if (fit.beta > 1.0 - 2e-6)
            fit.clamped = brody_sse(hist, 1.0 - h) > brody_sse(hist, 1.0);
    }

    fit.C2 = brody_c2(fit.beta);
    fit.C1 = (fit.beta + 1.0) * fit.C2;
    const double beta = fit.beta, c2 = fit.C2;
    fit.goodness = ks_distance(sample.s, [beta, c2](double v) {
        return v <= 0.0 ? 0.0 : 1.0 - std::exp(-c2 * std::pow(v, beta + 1.0));
    });
    return fit;
}

MixtureFit mixture_fit(const Histogram& hist) {
    if (hist.density.empty())
        raise(ErrKind::EmptyInput, "mixture_fit: empty histogram");
    const double w = hist.bin_width();
    double num = 0.0, den = 0.0;
    std::vector<double> pv(hist.density.size()), gv(hist.density.size());
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double c = hist.lo + (static_cast<double>(i) + 0.5) * w;
        pv[i] = reference_pdf(ReferenceKind::Poisson, c);
        gv[i] = reference_pdf(ReferenceKind::GoeWigner, c);
        num += (hist.density[i] - pv[i]) * (gv[i] - pv[i]);
        den += (gv[i] - pv[i]) * (gv[i] - pv[i]);
    }
    MixtureFit fit;
    fit.alpha = (den > 0.0) ? num / den : 0.0;
    fit.alpha = std::clamp(fit.alpha, 0.0, 1.0);
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double d = hist.density[i] - (fit.alpha * gv[i] + (1.0 - fit.alpha) * pv[i]);
        fit.residual += d * d;
    }
    return fit;
}

double reference_pdf(ReferenceKind kind, double s, double beta) {
    if (s < 0.0)
        raise(ErrKind::PreconditionViolation, "reference_pdf: negative spacing");
    switch (kind) {
    case ReferenceKind::Poisson:
        return std::exp(-s);
    case ReferenceKind::GoeWigner:
        return 0.5 * M_PI * s * std::exp(-0.25 * M_PI * s * s);
    case ReferenceKind::GueWigner:
        return (32.0 / (M_PI * M_PI)) * s * s * std::exp(-4.0 * s * s / M_PI);
    case ReferenceKind::Brody: {
        const double c2 = brody_c2(beta);
        return (beta + 1.0) * c2 * std::pow(s, beta) *
               std::exp(-c2 * std::pow(s, beta + 1.0));
    }
    }
    raise(ErrKind::UnknownKind, "reference_pdf: unknown reference");
    return 0.0;
}

double reference_cdf(ReferenceKind kind, double s, double beta) {
    if (s < 0.0)
        raise(ErrKind::PreconditionViolation, "reference_cdf: negative spacing");
    switch (kind) {
    case ReferenceKind::Poisson:
        return 1.0 - std::exp(-s);
    case ReferenceKind::GoeWigner:
        return 1.0 - std::exp(-0.25 * M_PI * s * s);
    case ReferenceKind::GueWigner:
        return std::erf(2.0 * s / std::sqrt(M_PI)) -
               (4.0 * s / M_PI) * std::exp(-4.0 * s * s / M_PI);
    case ReferenceKind::Brody:
        return 1.0 - std::exp(-brody_c2(beta) * std::pow(s, beta + 1.0));
    }
    raise(ErrKind::UnknownKind, "reference_cdf: unknown reference");
    return 0.0;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty())
        raise(ErrKind::EmptyInput, "ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        raise(ErrKind::EmptyInput, "ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double chi2_tail(double chi2, int dof) {
    if (dof <= 0 || chi2 < 0.0)
        raise(ErrKind::PreconditionViolation, "chi2_tail: bad arguments");
    return gsl_sf_gamma_inc_Q(0.5 * dof, 0.5 * chi2);
}

} // namespace ptqkr
