#include "ptqkr/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <gsl/gsl_sf_gamma.h>

#include "internal.hpp"

namespace ptqkr {

namespace {

constexpr double pi = std::numbers::pi;

// Worst matched-pair distance between equal-sized complex multisets A and B.
// Greedy pass: take A in (Re, Im) order, match each to its nearest unused B.
// Near-degenerate clusters can defeat greedy matching, so if any greedy match
// exceeds 1e-6 the assignment is redone optimally (Jonker-Volgonant style
// shortest augmenting paths on the dense distance matrix).
double matching_distance(const std::vector<cplx>& A, const std::vector<cplx>& B) {
    const std::size_t n = A.size();
    if (n == 0) return 0.0;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (A[x].real() != A[y].real()) return A[x].real() < A[y].real();
        return A[x].imag() < A[y].imag();
    });

    std::vector<char> used(n, 0);
    double worst = 0.0;
    for (std::size_t oi = 0; oi < n; ++oi) {
        const cplx a = A[order[oi]];
        std::size_t best = n;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d = std::abs(a - B[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        used[best] = 1;
        worst = std::max(worst, bd);
    }
    if (worst <= 1e-6) return worst;

    // Optimal assignment minimizing total distance; report its worst edge.
    const std::size_t nn = n;
    std::vector<double> cost(nn * nn);
    for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j < nn; ++j) cost[i * nn + j] = std::abs(A[i] - B[j]);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(nn + 1, 0.0), v(nn + 1, 0.0);
    std::vector<std::size_t> p(nn + 1, nn), way(nn + 1, nn);
    for (std::size_t i = 0; i < nn; ++i) {
        p[nn] = i;
        std::size_t j0 = nn;
        std::vector<double> minv(nn + 1, inf);
        std::vector<char> usedc(nn + 1, 0);
        do {
            usedc[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = nn;
            for (std::size_t j = 0; j < nn; ++j) {
                if (usedc[j]) continue;
                const double cur = cost[i0 * nn + j] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= nn; ++j) {
                if (usedc[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != nn);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != nn);
    }
    worst = 0.0;
    for (std::size_t j = 0; j < nn; ++j)
        if (p[j] != nn) worst = std::max(worst, cost[p[j] * nn + j]);
    return worst;
}

} // namespace

std::atomic<std::int64_t>& diagonalization_count() {
    static std::atomic<std::int64_t> counter{0};
    return counter;
}

QESpectrum diagonalize(const FloquetMatrix& f, bool want_vectors) {
    detail::ensure_single_threaded_blas();
    diagonalization_count().fetch_add(1, std::memory_order_relaxed);

    const int n = f.s.n;
    CMatrix work = f.s; // zgeev overwrites its input
    QESpectrum spec;
    spec.params = f.params;
    spec.mu.resize(static_cast<std::size_t>(n));
    if (want_vectors) spec.vectors.resize(static_cast<std::size_t>(n) * n);

    cplx dummy_vl;
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n,
        reinterpret_cast<lapack_complex_double*>(work.a.data()), n,
        reinterpret_cast<lapack_complex_double*>(spec.mu.data()),
        reinterpret_cast<lapack_complex_double*>(&dummy_vl), 1,
        reinterpret_cast<lapack_complex_double*>(want_vectors ? spec.vectors.data()
                                                              : &dummy_vl),
        want_vectors ? n : 1);
    if (info != 0)
        raise(ErrKind::ConvergenceFailure,
              "eigensolver failed (zgeev info=" + std::to_string(info) + ")");

    spec.eps = quasi_energies(spec.mu);
    spec.residual_bound = std::numeric_limits<double>::epsilon() *
                          frobenius_norm(f.s) * static_cast<double>(n);
    return spec;
}

std::vector<cplx> eigenvalues(const CMatrix& m) {
    detail::ensure_single_threaded_blas();
    diagonalization_count().fetch_add(1, std::memory_order_relaxed);
    CMatrix work = m;
    std::vector<cplx> vals(static_cast<std::size_t>(m.n));
    cplx dummy;
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'N', m.n,
        reinterpret_cast<lapack_complex_double*>(work.a.data()), m.n,
        reinterpret_cast<lapack_complex_double*>(vals.data()),
        reinterpret_cast<lapack_complex_double*>(&dummy), 1,
        reinterpret_cast<lapack_complex_double*>(&dummy), 1);
    if (info != 0)
        raise(ErrKind::ConvergenceFailure,
              "eigensolver failed (zgeev info=" + std::to_string(info) + ")");
    return vals;
}

std::vector<cplx> quasi_energies(const std::vector<cplx>& mu) {
    std::vector<cplx> eps(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double r = std::abs(mu[i]);
        if (r == 0.0)
            raise(ErrKind::ZeroEigenvalue,
                  "eigenvalue " + std::to_string(i) +
                      " is exactly zero (defective or overflowed matrix)");
        double re = -std::arg(mu[i]); // in [-pi, pi); fold the branch edge
        if (re == -pi) re = pi;
        eps[i] = cplx{re, std::log(r)};
    }
    return eps;
}

RealComplexPartition classify_real(const QESpectrum& spec, double tol_real) {
    if (!(tol_real > 0.0))
        raise(ErrKind::PreconditionViolation, "tol_real must be positive");
    RealComplexPartition part;
    part.tol_real = tol_real;
    for (const cplx& e : spec.eps) {
        if (std::abs(e.imag()) <= tol_real) {
            part.real_eps.push_back(e.real());
        } else {
            part.complex_eps.push_back(e);
            if (std::abs(e.imag()) <= 10.0 * tol_real) ++part.boundary_stragglers;
        }
    }
    part.P = spec.eps.empty()
                 ? 0.0
                 : static_cast<double>(part.real_eps.size()) /
                       static_cast<double>(spec.eps.size());
    return part;
}

double conjugation_pairing_residual(const QESpectrum& spec) {
    const double q = spec.params.q;
    const double q_edge = pi / static_cast<double>(spec.params.D());
    const bool at_zero = std::abs(q) <= 1e-12 * q_edge;
    const bool at_edge = std::abs(q - q_edge) <= 1e-12 * q_edge;
    if (!at_zero && !at_edge)
        raise(ErrKind::PreconditionViolation,
              "eps <-> conj(eps) pairing holds at q = 0 or q = pi/D only; "
              "use cross_q_conjugation for q = " +
                  std::to_string(q));
    std::vector<cplx> conj(spec.eps.size());
    for (std::size_t i = 0; i < spec.eps.size(); ++i) conj[i] = std::conj(spec.eps[i]);
    return matching_distance(spec.eps, conj);
}

double cross_q_conjugation(const QESpectrum& plus, const QESpectrum& minus) {
    const ResonanceParams& pp = plus.params;
    const ResonanceParams& pm = minus.params;
    if (pp.N != pm.N || pp.M != pm.M || pp.b != pm.b || pp.a != pm.a ||
        pp.k != pm.k || pp.lambda != pm.lambda)
        raise(ErrKind::ParamMismatch,
              "cross-q comparison requires identical parameters apart from q");
    if (std::abs(pp.q + pm.q) > 1e-12 * std::max(1.0, std::abs(pp.q)))
        raise(ErrKind::ParamMismatch,
              "cross-q comparison requires opposite Bloch numbers, got q1=" +
                  std::to_string(pp.q) + " q2=" + std::to_string(pm.q));
    std::vector<cplx> conj(plus.eps.size());
    for (std::size_t i = 0; i < plus.eps.size(); ++i) conj[i] = std::conj(plus.eps[i]);
    return matching_distance(minus.eps, conj);
}

Histogram real_part_density(const std::vector<QESpectrum>& specs, int bins) {
    if (bins < 10)
        raise(ErrKind::PreconditionViolation, "real_part_density needs bins >= 10");
    std::size_t total = 0;
    for (const QESpectrum& s : specs) total += s.eps.size();
    if (total == 0) raise(ErrKind::EmptyInput, "no quasi-energies supplied");

    Histogram h;
    h.lo = -pi;
    h.hi = pi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (const QESpectrum& s : specs) {
        for (const cplx& e : s.eps) {
            // Re eps lies in (-pi, pi]; map the closed right edge into the top bin.
            int idx = static_cast<int>((e.real() - h.lo) / (2.0 * pi) * bins);
            idx = std::clamp(idx, 0, bins - 1);
            ++h.counts[static_cast<std::size_t>(idx)];
            ++h.in_range;
        }
    }
    h.total = static_cast<std::int64_t>(total);
    h.density.resize(h.counts.size());
    const double w = h.bin_width();
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        h.density[i] = static_cast<double>(h.counts[i]) /
                       (static_cast<double>(h.in_range) * w);
    return h;
}

double chi2_uniform_pvalue(const std::vector<double>& values, int bins) {
    if (values.empty()) raise(ErrKind::EmptyInput, "no values for the uniformity test");
    if (bins < 2)
        raise(ErrKind::PreconditionViolation, "uniformity test needs bins >= 2");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        int idx = static_cast<int>((v + pi) / (2.0 * pi) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    const double expected =
        static_cast<double>(values.size()) / static_cast<double>(bins);
    double chi2 = 0.0;
    for (std::int64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    // Upper-tail probability of chi-square with bins-1 degrees of freedom.
    return gsl_sf_gamma_inc_Q(0.5 * static_cast<double>(bins - 1), 0.5 * chi2);
}

} // namespace ptqkr
