#include "ptqkr/model.hpp"

#include <cblas.h>
#include <fftw3.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <string>

#include "internal.hpp"

extern "C" void openblas_set_num_threads(int);

namespace ptqkr {

namespace detail {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

void ensure_single_threaded_blas() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

} // namespace detail

namespace {

constexpr double pi = std::numbers::pi;

// Floor division / floor modulus for possibly negative lattice indices.
std::int64_t floor_div(std::int64_t x, std::int64_t d) {
    std::int64_t quot = x / d;
    if ((x % d) != 0 && ((x < 0) != (d < 0))) --quot;
    return quot;
}

std::int64_t floor_mod(std::int64_t x, std::int64_t d) {
    std::int64_t r = x % d;
    if (r < 0) r += d;
    return r;
}

// (-i)^n for any integer n.
cplx minus_i_pow(std::int64_t n) {
    switch (floor_mod(n, 4)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

// Shared starting width of the kept coefficient range: past the classical
// turning point |n| ~ k(1+lambda) and its Airy transition region O(k^{1/3}).
std::int64_t kick_n_min(double k, double lambda) {
    return static_cast<std::int64_t>(std::ceil(k * (1.0 + lambda))) +
           std::max<std::int64_t>(64, static_cast<std::int64_t>(std::ceil(10.0 * std::cbrt(k))));
}

void check_kick_preconditions(double k, double lambda, double tail_tol) {
    if (!(k >= 0.0) || !(lambda >= 0.0))
        raise(ErrKind::PreconditionViolation, "kick strengths must be >= 0 and finite");
    if (!(tail_tol > 0.0))
        raise(ErrKind::PreconditionViolation, "tail_tol must be positive");
    if (k * lambda > 700.0)
        raise(ErrKind::OverflowRisk,
              "k*lambda = " + std::to_string(k * lambda) +
                  " exceeds the double-precision exponent budget (700)");
}

// GSL must report failures through return codes, not the aborting default
// handler; global, flipped once before the first special-function call here.
void quiet_gsl_errors() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

} // namespace

double frobenius_norm(const CMatrix& m) {
    double acc = 0.0;
    for (const cplx& z : m.a) acc += std::norm(z);
    return std::sqrt(acc);
}

double ResonanceParams::hbar_eff() const {
    return 4.0 * pi * static_cast<double>(N) / static_cast<double>(M);
}

double ResonanceParams::gamma_eff() const {
    return 2.0 * pi * static_cast<double>(a) / static_cast<double>(b * M);
}

void ResonanceParams::validate() const {
    if (N < 1 || M < 1 || b < 1 || a < 0)
        raise(ErrKind::PreconditionViolation,
              "require N >= 1, M >= 1, b >= 1, a >= 0");
    if (std::gcd(N, M) != 1)
        raise(ErrKind::PreconditionViolation,
              "N and M must be coprime (resonance condition), got N=" +
                  std::to_string(N) + " M=" + std::to_string(M));
    if (a == 0 && b != 1)
        raise(ErrKind::PreconditionViolation, "a = 0 requires b = 1");
    if (a > 0 && std::gcd(a, b * M) != 1)
        raise(ErrKind::PreconditionViolation,
              "a and b*M must be coprime, got a=" + std::to_string(a) +
                  " b*M=" + std::to_string(b * M));
    if (!(k >= 0.0) || !(lambda >= 0.0))
        raise(ErrKind::PreconditionViolation, "k and lambda must be >= 0 and finite");
    const double qmax = pi / static_cast<double>(D());
    if (!(q > -qmax && q <= qmax))
        raise(ErrKind::PreconditionViolation,
              "Bloch number outside (-pi/D, pi/D]: q=" + std::to_string(q));
    if (k * lambda > 700.0)
        raise(ErrKind::OverflowRisk,
              "k*lambda = " + std::to_string(k * lambda) +
                  " exceeds the double-precision exponent budget (700)");
}

KickTable kick_fourier_table(double k, double lambda, double tail_tol) {
    check_kick_preconditions(k, lambda, tail_tol);

    // The coefficients are Bessel-like: negligible beyond the classical
    // turning point |n| ~ k(1+lambda), crossed over an Airy region of width
    // O(k^{1/3}).  The margin below is a starting point only; a boundary
    // value that fails the probe means the kept range is too narrow (the
    // gain factor pushes the crossover outward), so the loop widens n_max
    // while it fits in the grid and doubles the grid only when it no longer
    // does.
    const std::int64_t n_min = kick_n_min(k, lambda);

    constexpr std::int64_t grid_cap = std::int64_t{1} << 24;

    std::int64_t grid0 = 1;
    while (grid0 < 2 * n_min + 1) grid0 <<= 1;

    KickTable t;
    t.k = k;
    t.lambda = lambda;

    for (std::int64_t grid = grid0; grid <= grid_cap; grid <<= 1) {
        const std::size_t g = static_cast<std::size_t>(grid);
        std::vector<cplx> in(g), out(g);
        for (std::size_t j = 0; j < g; ++j) {
            const double x = 2.0 * pi * static_cast<double>(j) / static_cast<double>(grid);
            // exp{-i k [cos x + i lambda sin x]} = e^{k lambda sin x} e^{-i k cos x}
            const double amp = std::exp(k * lambda * std::sin(x));
            const double ph = -k * std::cos(x);
            in[j] = cplx{amp * std::cos(ph), amp * std::sin(ph)};
        }

        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
            // FFTW_ESTIMATE: deterministic plan choice, never overwrites input.
            plan = fftw_plan_dft_1d(static_cast<int>(grid),
                                    reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
        }
        fftw_execute(plan);
        {
            std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
            fftw_destroy_plan(plan);
        }

        const std::int64_t fit_cap = (grid - 1) / 2;
        for (std::int64_t n_max = n_min;;) {
            // Forward DFT gives out[m] = sum_j in[j] e^{-2 pi i j m / grid},
            // so W_n = out[n mod grid] / grid.
            t.n_max = n_max;
            t.w.assign(static_cast<std::size_t>(2 * n_max + 1), cplx{});
            const double inv = 1.0 / static_cast<double>(grid);
            for (std::int64_t n = -n_max; n <= n_max; ++n)
                t.w[static_cast<std::size_t>(n + n_max)] =
                    out[static_cast<std::size_t>(floor_mod(n, grid))] * inv;

            double tail = 0.0;
            for (std::int64_t d = 0; d < 16 && d <= n_max; ++d) {
                tail = std::max(tail, std::abs(t.at(n_max - d)));
                tail = std::max(tail, std::abs(t.at(-n_max + d)));
            }
            double peak = 0.0;
            for (const cplx& w : t.w) peak = std::max(peak, std::abs(w));
            t.tail_bound = tail;
            t.grid = grid;

            // The tolerance is read at the coefficient scale: below unit
            // scale it is absolute, while a gain-inflated table (peak of
            // order e^{k lambda}) can only be truncated relative to its own
            // magnitude, double precision allowing no better.
            if (tail < tail_tol * std::max(1.0, peak)) {
                t.conditioning_warning = peak > 1e12;
                return t;
            }

            if (n_max >= fit_cap) break; // widest fit tried; need a bigger grid
            n_max = std::min(n_max + std::max<std::int64_t>(64, n_max / 8), fit_cap);
        }
    }

    // The sampled transform's coefficients carry a rounding floor of order
    // k * ulp that a larger grid cannot push below a tight threshold once k
    // is large; the termwise series has no such floor, so hand over to it
    // where it is defined.
    if (lambda < 1.0) return kick_fourier_table_series(k, lambda, tail_tol);

    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "kick coefficient boundary %.3e not below scaled tol %.3e within the 2^24 grid cap",
                  t.tail_bound, tail_tol);
    raise(ErrKind::NonConvergedTail, msg);
}

KickTable kick_fourier_table_series(double k, double lambda, double tail_tol) {
    check_kick_preconditions(k, lambda, tail_tol);
    if (!(lambda < 1.0))
        raise(ErrKind::PreconditionViolation,
              "series evaluation requires lambda < 1 (real Bessel argument)");
    quiet_gsl_errors();

    const double kappa = k * std::sqrt((1.0 - lambda) * (1.0 + lambda));
    // ln g with g = sqrt((1+lambda)/(1-lambda)); the gain factor is g^n.
    const double lng = 0.5 * (std::log1p(lambda) - std::log1p(-lambda));
    const std::int64_t n_min = kick_n_min(k, lambda);

    if (kappa == 0.0) { // the kick factor is identically 1: a delta table
        KickTable d;
        d.k = k;
        d.lambda = lambda;
        d.grid = 0;
        d.n_max = n_min;
        d.w.assign(static_cast<std::size_t>(2 * n_min + 1), cplx{});
        d.w[static_cast<std::size_t>(n_min)] = cplx{1.0, 0.0};
        return d;
    }

    // |W_n| decays past the turning point over Airy steps of width
    // ~kappa^{1/3}; a few extra widths per round reach any representable
    // threshold quickly.
    const std::int64_t step =
        16 + static_cast<std::int64_t>(std::ceil(8.0 * std::cbrt(kappa + 1.0)));
    constexpr std::int64_t top_cap = std::int64_t{1} << 23;

    KickTable t;
    t.k = k;
    t.lambda = lambda;
    t.grid = 0; // no sampling grid: series evaluation

    for (std::int64_t n_top = n_min + step; n_top <= top_cap; n_top += step) {
        std::vector<double> jn(static_cast<std::size_t>(n_top + 1));
        const int status =
            gsl_sf_bessel_Jn_array(0, static_cast<int>(n_top), kappa, jn.data());
        if (status != 0)
            raise(ErrKind::NonConvergedTail,
                  std::string("Bessel run failed: ") + gsl_strerror(status));

        // log |W_n| for n >= 0; the negative side is smaller by g^{-2n}.
        std::vector<double> lw(static_cast<std::size_t>(n_top + 1));
        double peak = 0.0;
        for (std::int64_t n = 0; n <= n_top; ++n) {
            const double l =
                lng * static_cast<double>(n) + std::log(std::abs(jn[static_cast<std::size_t>(n)]));
            lw[static_cast<std::size_t>(n)] = l;
            peak = std::max(peak, std::exp(l));
        }
        const double thr = tail_tol * std::max(1.0, peak);

        // Smallest kept range (>= the starting width) whose outermost 16
        // magnitudes all sit below the threshold; same probe the sampled
        // route uses.
        for (std::int64_t m = n_min; m <= n_top; ++m) {
            double tail = 0.0;
            for (std::int64_t d = 0; d < 16 && d <= m; ++d)
                tail = std::max(tail, std::exp(lw[static_cast<std::size_t>(m - d)]));
            if (!(tail < thr)) continue;

            t.n_max = m;
            t.tail_bound = tail;
            t.conditioning_warning = peak > 1e12;
            t.w.assign(static_cast<std::size_t>(2 * m + 1), cplx{});
            for (std::int64_t n = -m; n <= m; ++n) {
                const std::int64_t r = n < 0 ? -n : n;
                double v = std::exp(lng * static_cast<double>(n) +
                                    std::log(std::abs(jn[static_cast<std::size_t>(r)])));
                if (jn[static_cast<std::size_t>(r)] < 0.0) v = -v;
                if (n < 0 && (r & 1) != 0) v = -v; // J_{-r} = (-1)^r J_r
                t.w[static_cast<std::size_t>(n + m)] = minus_i_pow(n) * v;
            }
            return t;
        }
    }
    raise(ErrKind::NonConvergedTail,
          "kick coefficient boundary not below scaled tol within the series range cap");
}

std::vector<cplx> fold_kick_coefficients(const KickTable& table, std::int64_t D, double q) {
    if (D < 1) raise(ErrKind::PreconditionViolation, "fold requires D >= 1");
    std::vector<cplx> folded(static_cast<std::size_t>(D), cplx{});
    for (std::int64_t n = -table.n_max; n <= table.n_max; ++n) {
        const double ph = -q * static_cast<double>(n);
        folded[static_cast<std::size_t>(floor_mod(n, D))] +=
            table.at(n) * cplx{std::cos(ph), std::sin(ph)};
    }
    return folded;
}

cplx half_rotation_phase(const ResonanceParams& p, std::int64_t m) {
    // g_m = exp(-i pi N m^2 / M + i pi a m / (b M)).  Both phase arguments are
    // reduced exactly as integers modulo the 2*pi period before touching
    // floating point, so the value stays accurate for huge |m|.
    const std::int64_t twoM = 2 * p.M;
    const std::int64_t twobM = 2 * p.b * p.M;
    __int128 r1 = (static_cast<__int128>(p.N) * m % twoM) * m % twoM;
    if (r1 < 0) r1 += twoM;
    __int128 r2 = static_cast<__int128>(p.a) * m % twobM;
    if (r2 < 0) r2 += twobM;
    const double th1 = pi * static_cast<double>(static_cast<std::int64_t>(r1)) /
                       static_cast<double>(p.M);
    const double th2 = pi * static_cast<double>(static_cast<std::int64_t>(r2)) /
                       static_cast<double>(p.b * p.M);
    const double ph = -th1 + th2;
    return {std::cos(ph), std::sin(ph)};
}

FloquetMatrix build_reduced_floquet(const ResonanceParams& p, const KickTable& table) {
    p.validate();
    if (table.k != p.k || table.lambda != p.lambda)
        raise(ErrKind::ParamMismatch, "kick table was built for different (k, lambda)");
    const std::int64_t D = p.D();
    const std::vector<cplx> folded = fold_kick_coefficients(table, D, p.q);
    std::vector<cplx> g(static_cast<std::size_t>(D));
    for (std::int64_t m = 0; m < D; ++m)
        g[static_cast<std::size_t>(m)] = half_rotation_phase(p, m);

    FloquetMatrix f{p, CMatrix(static_cast<int>(D))};
    for (std::int64_t n = 0; n < D; ++n)
        for (std::int64_t l = 0; l < D; ++l)
            f.s(static_cast<int>(l), static_cast<int>(n)) =
                g[static_cast<std::size_t>(l)] *
                folded[static_cast<std::size_t>(floor_mod(l - n, D))] *
                g[static_cast<std::size_t>(n)];
    return f;
}

FloquetMatrix build_reduced_floquet(const ResonanceParams& p) {
    p.validate();
    return build_reduced_floquet(p, kick_fourier_table(p.k, p.lambda));
}

double unitarity_residual(const CMatrix& s) {
    detail::ensure_single_threaded_blas();
    const int n = s.n;
    CMatrix c(n);
    const double one = 1.0, zero = 0.0;
    // Upper triangle of S^H S (Hermitian rank-n update).
    cblas_zherk(CblasColMajor, CblasUpper, CblasConjTrans, n, n, one, s.a.data(), n,
                zero, c.a.data(), n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        acc += std::norm(c(j, j) - cplx{1.0, 0.0});
        for (int i = 0; i < j; ++i) acc += 2.0 * std::norm(c(i, j));
    }
    return std::sqrt(acc) / std::sqrt(static_cast<double>(n));
}

SymmetryReport time_reversal_residual(const FloquetMatrix& f, std::int64_t L) {
    const ResonanceParams& p = f.params;
    SymmetryReport rep;
    rep.kind = SymmetryKind::TimeReversal;
    if (p.b != 1)
        raise(ErrKind::NotApplicable,
              "index-reversal symmetry is only stated for b = 1");
    if ((p.M + 1) % p.N != 0)
        raise(ErrKind::NotApplicable,
              "(M+1)/N is not an integer; no index shift is defined");
    const std::int64_t Delta = (p.M + 1) / p.N;
    rep.Delta = Delta;
    rep.p = floor_mod(L * Delta, p.M);

    const std::int64_t M = p.M;
    // Reflected entry S_{-n+p, -l+p}: indices are reduced mod M, and the sign
    // the half-rotation phase picks up across a period, g_{m+jM} = g_m *
    // (-1)^{j (N M + a)}, is restored per wrapped index.
    const bool odd_period = ((p.N * M + p.a) % 2) != 0;
    double num = 0.0, den = 0.0;
    for (std::int64_t n = 0; n < M; ++n) {
        for (std::int64_t l = 0; l < M; ++l) {
            const std::int64_t i = -n + rep.p;
            const std::int64_t j = -l + rep.p;
            double sign = 1.0;
            if (odd_period && ((floor_div(i, M) + floor_div(j, M)) % 2 != 0)) sign = -1.0;
            const cplx refl = sign * f.s(static_cast<int>(floor_mod(i, M)),
                                         static_cast<int>(floor_mod(j, M)));
            const cplx here = f.s(static_cast<int>(l), static_cast<int>(n));
            num += std::norm(here - refl);
            den += std::norm(here);
        }
    }
    rep.residual = std::sqrt(num) / std::sqrt(den);
    return rep;
}

double bloch_consistency_residual(const ResonanceParams& p, cplx mu,
                                  const std::vector<cplx>& c, std::int64_t L_trunc) {
    p.validate();
    const std::int64_t D = p.D();
    if (static_cast<std::int64_t>(c.size()) != D)
        raise(ErrKind::PreconditionViolation,
              "eigenvector length " + std::to_string(c.size()) +
                  " does not match D = " + std::to_string(D));
    const KickTable table = kick_fourier_table(p.k, p.lambda);
    if (L_trunc < 4 * (table.n_max + D))
        raise(ErrKind::WindowTooSmall,
              "need L_trunc >= 4 (n_max + D) = " +
                  std::to_string(4 * (table.n_max + D)) + ", got " +
                  std::to_string(L_trunc));

    const std::int64_t L = L_trunc;
    const std::size_t win = static_cast<std::size_t>(2 * L + 1);
    const bool odd_period = ((p.N * p.b * p.M + p.a) % 2) != 0;

    // Lattice extension phi_l = c_{l mod D} e^{iql} sgn(l) and the
    // premultiplied psi_l = g_l phi_l used by the convolution.
    std::vector<cplx> phi(win), psi(win);
    for (std::int64_t l = -L; l <= L; ++l) {
        double sign = 1.0;
        if (odd_period && (floor_mod(floor_div(l, D), 2) != 0)) sign = -1.0;
        const double ph = p.q * static_cast<double>(l);
        const cplx v = sign * c[static_cast<std::size_t>(floor_mod(l, D))] *
                       cplx{std::cos(ph), std::sin(ph)};
        phi[static_cast<std::size_t>(l + L)] = v;
        psi[static_cast<std::size_t>(l + L)] = half_rotation_phase(p, l) * v;
    }

    double worst = 0.0;
    const std::int64_t half = L / 2;
    for (std::int64_t l = -half; l <= half; ++l) {
        cplx acc{};
        for (std::int64_t t = -table.n_max; t <= table.n_max; ++t)
            acc += table.at(t) * psi[static_cast<std::size_t>(l - t + L)];
        acc = half_rotation_phase(p, l) * acc - mu * phi[static_cast<std::size_t>(l + L)];
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

ParityBlocks parity_sector_blocks(const ResonanceParams& p, const KickTable& table) {
    p.validate();
    if (p.a != 0 || p.b != 1 || p.M % 2 == 0)
        raise(ErrKind::NotApplicable,
              "parity sectors require a = 0, b = 1 and odd M");
    const std::int64_t M = p.M;
    const std::int64_t h = (M - 1) / 2;
    const std::vector<cplx> folded = fold_kick_coefficients(table, M, p.q);

    // Matrix in the symmetric index convention l, n in [-h, h].
    std::vector<cplx> g(static_cast<std::size_t>(M));
    for (std::int64_t i = 0; i < M; ++i)
        g[static_cast<std::size_t>(i)] = half_rotation_phase(p, i - h);
    auto ssym = [&](std::int64_t l, std::int64_t n) {
        return g[static_cast<std::size_t>(l + h)] *
               folded[static_cast<std::size_t>(floor_mod(l - n, M))] *
               g[static_cast<std::size_t>(n + h)];
    };

    // Even sector basis: |0> and (|r> + |-r>)/sqrt(2); odd: (|r> - |-r>)/sqrt(2).
    ParityBlocks blocks{CMatrix(static_cast<int>(h + 1)), CMatrix(static_cast<int>(h))};
    const double rt2 = std::sqrt(2.0);
    for (std::int64_t cn = 0; cn <= h; ++cn) {
        for (std::int64_t r = 0; r <= h; ++r) {
            cplx v = (ssym(r, cn) + ssym(r, -cn) + ssym(-r, cn) + ssym(-r, -cn)) / 2.0;
            if (r == 0) v /= rt2;
            if (cn == 0) v /= rt2;
            blocks.even(static_cast<int>(r), static_cast<int>(cn)) = v;
        }
    }
    for (std::int64_t cn = 1; cn <= h; ++cn)
        for (std::int64_t r = 1; r <= h; ++r)
            blocks.odd(static_cast<int>(r - 1), static_cast<int>(cn - 1)) =
                (ssym(r, cn) - ssym(r, -cn) - ssym(-r, cn) + ssym(-r, -cn)) / 2.0;
    return blocks;
}

ParityBlocks parity_sector_blocks(const ResonanceParams& p) {
    p.validate();
    return parity_sector_blocks(p, kick_fourier_table(p.k, p.lambda));
}

} // namespace ptqkr
