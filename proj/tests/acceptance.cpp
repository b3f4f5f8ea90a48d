// End-to-end acceptance checks, one printed line per criterion.
//
//   acceptance [--full] [--workers N] [--cache DIR] [--cli PATH]
//
// Default mode runs the desk-scale variants of the statistics criteria
// (M = 399 ensembles); --full upgrades c6-c8 to the M = 1999 recipes.
// c13 exercises the command-line tool and needs --cli <path-to-qkr>.
// Exit code: number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gsl/gsl_sf_bessel.h>

#include "ptqkr/model.hpp"
#include "ptqkr/rmt.hpp"
#include "ptqkr/spectrum.hpp"
#include "ptqkr/stats.hpp"
#include "ptqkr/sweep.hpp"

using namespace ptqkr;
namespace fs = std::filesystem;
using cplxd = ptqkr::cplx;

namespace {

struct Args {
    bool full = false;
    int workers = 1;
    std::string cache = "acceptance_cache";
    std::string cli;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Check {
    bool pass = false;
    std::string detail;
};

ResonanceParams params(std::int64_t N, std::int64_t M, std::int64_t b,
                       std::int64_t a, double k, double lambda, double q) {
    ResonanceParams p;
    p.N = N;
    p.M = M;
    p.b = b;
    p.a = a;
    p.k = k;
    p.lambda = lambda;
    p.q = q;
    return p;
}

std::vector<ResonanceParams> k_window_params(const ResonanceParams& base,
                                             double kc, double half, double dk) {
    std::vector<ResonanceParams> out;
    for (double k = kc - half; k <= kc + half + dk / 2; k += dk) {
        ResonanceParams p = base;
        p.k = k;
        out.push_back(p);
    }
    return out;
}

std::vector<ResonanceParams> bloch_params(const ResonanceParams& base, int count) {
    std::vector<ResonanceParams> out;
    for (double q : bloch_grid(base.M, count)) {
        ResonanceParams p = base;
        p.q = q;
        out.push_back(p);
    }
    return out;
}

cplxd minus_i_pow(std::int64_t n) {
    switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
    }
}

// ---------------------------------------------------------------------------
// c1: at lambda = 0 the one-period matrix is unitary and every QE is real.
Check c1(const Args&) {
    double worst = 0.0;
    int real_sets = 0, total = 0;
    for (auto [N, M] : {std::pair<std::int64_t, std::int64_t>{1, 5}, {1, 399}})
        for (double k : {1.0, 10.0, 1e3}) {
            const FloquetMatrix f = build_reduced_floquet(params(N, M, 1, 0, k, 0.0, 0.0));
            worst = std::max(worst, unitarity_residual(f.s));
            const RealComplexPartition part = classify_real(diagonalize(f), 1e-10);
            ++total;
            if (part.P == 1.0) ++real_sets;
        }
    return {worst < 1e-10 && real_sets == total,
            fmt("unitarity residual <= %.2e (need < 1e-10), P = 1 at %d/%d parameter sets",
                worst, real_sets, total)};
}

// c2: kick coefficients against a Bessel series and against plain quadrature.
Check c2(const Args&) {
    const KickTable t0 = kick_fourier_table(10.0, 0.0);
    double worst_bessel = 0.0;
    for (std::int64_t n = -t0.n_max; n <= t0.n_max; ++n) {
        const cplxd ref = minus_i_pow(n) * gsl_sf_bessel_Jn(static_cast<int>(n), 10.0);
        worst_bessel = std::max(worst_bessel, std::abs(t0.at(n) - ref));
    }

    const KickTable t1 = kick_fourier_table(10.0, 0.5);
    const std::size_t G = std::size_t{1} << 16;
    std::vector<cplxd> f(G);
    for (std::size_t i = 0; i < G; ++i) {
        const double x = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(G);
        // exp{-i k [cos x + i lambda sin x]} = e^{k lambda sin x} e^{-i k cos x}
        f[i] = std::exp(10.0 * 0.5 * std::sin(x)) *
               std::exp(cplxd(0.0, -10.0 * std::cos(x)));
    }
    double worst_quad = 0.0;
    for (std::int64_t n = -t1.n_max; n <= t1.n_max; ++n) {
        cplxd acc = 0.0;
        for (std::size_t i = 0; i < G; ++i) {
            const double x = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(G);
            acc += f[i] * std::exp(cplxd(0.0, -static_cast<double>(n) * x));
        }
        acc /= static_cast<double>(G);
        worst_quad = std::max(worst_quad, std::abs(t1.at(n) - acc));
    }
    return {worst_bessel < 1e-12 && worst_quad < 1e-10,
            fmt("Bessel-series error %.2e (need < 1e-12), quadrature error %.2e (need < 1e-10)",
                worst_bessel, worst_quad)};
}

// c3: the assembled matrix equals the literal triple-sum definition.
Check c3(const Args&) {
    std::mt19937 rng(20250819u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (auto [N, M] : {std::pair<std::int64_t, std::int64_t>{1, 2}, {1, 5}, {2, 5}})
        for (std::int64_t b : {1, 3}) {
            const std::int64_t a = b == 1 ? 0 : 1;
            const std::int64_t D = b * M;
            const double k = 20.0 * u01(rng);
            const double lam = 0.2 * u01(rng);
            const double q = (M_PI / static_cast<double>(D)) * (2.0 * u01(rng) - 1.0) * 0.999;
            const ResonanceParams p = params(N, M, b, a, k, lam, q);
            const FloquetMatrix fm = build_reduced_floquet(p);
            const KickTable t = kick_fourier_table(k, lam);
            for (std::int64_t l = 0; l < D; ++l)
                for (std::int64_t n = 0; n < D; ++n) {
                    cplxd sum = 0.0;
                    const std::int64_t d = l - n;
                    for (std::int64_t jj = -(t.n_max + std::llabs(d)) / D - 1;
                         jj <= (t.n_max + std::llabs(d)) / D + 1; ++jj) {
                        const std::int64_t tt = d + jj * D;
                        if (tt < -t.n_max || tt > t.n_max) continue;
                        sum += t.at(tt) * std::exp(cplxd(0.0, -q * static_cast<double>(tt)));
                    }
                    const cplxd brute =
                        half_rotation_phase(p, l) * sum * half_rotation_phase(p, n);
                    worst = std::max(worst,
                                     std::abs(fm.s(static_cast<int>(l), static_cast<int>(n)) - brute));
                }
        }
    return {worst <= 1e-12, fmt("max entrywise deviation %.2e (need <= 1e-12)", worst)};
}

// c4: index-reflection identity, spectral self-conjugation at q = 0, and the
// cross-q conjugation match.
Check c4(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;

    const double r7 =
        time_reversal_residual(build_reduced_floquet(params(1, 7, 1, 0, 10.0, 0.1, 0.0)), 0).residual;
    const double r399 =
        time_reversal_residual(build_reduced_floquet(params(1, 399, 1, 0, 10.0, 0.1, 0.0)), 0).residual;
    const double r5 =
        time_reversal_residual(build_reduced_floquet(params(1, 5, 1, 1, 10.0, 0.1, 0.0)), 1).residual;

    const QESpectrum s0 = compute_spectrum_cached(params(1, 399, 1, 0, 1e5, 1e-5, 0.0), opts);
    const double pairing = conjugation_pairing_residual(s0);

    const QESpectrum plus = compute_spectrum_cached(params(1, 399, 1, 0, 1e5, 1e-5, 0.001), opts);
    const QESpectrum minus = compute_spectrum_cached(params(1, 399, 1, 0, 1e5, 1e-5, -0.001), opts);
    const double cross = cross_q_conjugation(plus, minus);

    const bool pass = r7 < 1e-12 && r399 < 1e-12 && r5 < 1e-10 && pairing < 1e-8 && cross < 1e-8;
    return {pass,
            fmt("reflection residuals %.1e/%.1e (< 1e-12) and %.1e (< 1e-10); "
                "pairing %.1e, cross-q %.1e (< 1e-8)",
                r7, r399, r5, pairing, cross)};
}

// c5: flat Re-QE density and partially broken spectrum at k lambda = 1.
Check c5(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    double min_p = 1.0, max_P = 0.0;
    for (double qv : {0.0, 0.001, -0.001}) {
        const QESpectrum spec = compute_spectrum_cached(params(1, 399, 1, 0, 1e5, 1e-5, qv), opts);
        std::vector<double> re;
        re.reserve(spec.eps.size());
        for (const cplxd& e : spec.eps) re.push_back(e.real());
        min_p = std::min(min_p, chi2_uniform_pvalue(re, 20));
        max_P = std::max(max_P, classify_real(spec).P);
    }
    return {min_p > 0.01 && max_P < 1.0,
            fmt("uniformity p >= %.3f (need > 0.01), real fraction <= %.3f (need < 1)",
                min_p, max_P)};
}

// c6: localized regime, Bloch-pooled real-QE spacings against e^{-s}.
Check c6(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    const std::int64_t M = args.full ? 1999 : 399;
    const int count = args.full ? 200 : 50;
    const double bound = args.full ? 0.05 : 0.07;

    const auto members = bloch_params(params(5, M, 1, 0, 10.0, 1e-8, 0.0), count);
    const auto seqs = real_spacing_sequences(members, SectorMode::Auto, opts);
    const SpacingSample s = nn_spacings(unfold_real(seqs));
    const double ks =
        ks_distance(s.s, [](double x) { return reference_cdf(ReferenceKind::Poisson, x); });
    return {ks < bound,
            fmt("KS to Poisson %.4f (need < %.2f) [M=%lld, %d Bloch members, %zu spacings]",
                ks, bound, static_cast<long long>(M), count, s.s.size())};
}

// c7: delocalized regime, k-window pooled real-QE spacings against GOE.
Check c7(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    const std::int64_t M = args.full ? 1999 : 399;
    const double kc = args.full ? 1e5 : 1e3;
    const double bound = args.full ? 0.05 : 0.07;

    const auto members = k_window_params(params(5, M, 1, 0, kc, 1e-10, 0.0), kc, 50.0, 1.0);
    const auto seqs = real_spacing_sequences(members, SectorMode::Auto, opts);
    const SpacingSample s = nn_spacings(unfold_real(seqs));
    const double ks =
        ks_distance(s.s, [](double x) { return reference_cdf(ReferenceKind::GoeWigner, x); });
    return {ks < bound,
            fmt("KS to GOE %.4f (need < %.2f) [M=%lld, k-window at %.0f, %zu spacings]",
                ks, bound, static_cast<long long>(M), kc, s.s.size())};
}

// c8: Brody parameter of the real QEs in the intermediate regime.
Check c8(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;

    const auto beta_of = [&](std::int64_t M, double kc, double lam) {
        const auto members = k_window_params(params(5, M, 1, 0, kc, lam, 0.0), kc, 50.0, 1.0);
        const auto seqs = real_spacing_sequences(members, SectorMode::Auto, opts);
        const SpacingSample s = nn_spacings(unfold_real(seqs));
        return std::pair<double, std::size_t>{brody_fit(s, FitMethod::Mle).beta, s.s.size()};
    };

    const auto [beta_ci, n_ci] = beta_of(399, 1e3, 1e-5);
    const bool ci_ok = beta_ci >= 0.30 && beta_ci <= 0.52;
    if (!args.full)
        return {ci_ok, fmt("beta = %.4f in [0.30, 0.52] [M=399, %zu spacings; "
                           "M=1999 leg runs with --full]",
                           beta_ci, n_ci)};

    const auto [beta_full, n_full] = beta_of(1999, 1e5, 1e-7);
    const bool full_ok = beta_full >= 0.4104 - 0.05 && beta_full <= 0.4104 + 0.05;
    return {ci_ok && full_ok,
            fmt("beta = %.4f vs 0.4104 +- 0.05 [M=1999, %zu spacings]; desk-scale beta = %.4f in [0.30, 0.52]",
                beta_full, n_full, beta_ci)};
}

// c9: two-component spacing-density mixture weight on Re QE.
Check c9(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    const double lam = std::pow(10.0, -6.5);
    const std::vector<QESpectrum> specs =
        k_window_ensemble(params(5, 1999, 1, 0, 1e5, lam, 0.001), 1e5, 50.0, 1.0, opts);
    std::vector<std::vector<double>> seqs(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        seqs[i].reserve(specs[i].eps.size());
        for (const cplxd& e : specs[i].eps) seqs[i].push_back(e.real());
    }
    const SpacingSample s = nn_spacings(unfold_real(seqs));
    const MixtureFit mf = mixture_fit(histogram_density(s.s, 50, 0.0, 4.0));
    const bool pass = mf.alpha >= 0.7971 - 0.05 && mf.alpha <= 0.7971 + 0.05;
    return {pass, fmt("alpha = %.4f vs 0.7971 +- 0.05 [%zu members, %zu spacings]",
                      mf.alpha, specs.size(), s.s.size())};
}

// c10: reference-ensemble mean spacing ratios (also feeds c11 baselines).
struct BaselinePair {
    EnsembleBaseline ginibre_a;
    EnsembleBaseline ai_dagger;
};

Check c10(const Args&, BaselinePair& out) {
    struct Row {
        EnsembleKind kind;
        std::uint64_t seed;
        double target;
    };
    const Row rows[] = {{EnsembleKind::Goe, 11, 0.5687},
                        {EnsembleKind::Gue, 12, 0.6180},
                        {EnsembleKind::GinibreA, 13, 0.7378},
                        {EnsembleKind::AIdagger, 14, 0.7218}};
    bool pass = true;
    std::string detail;
    for (const Row& row : rows) {
        EnsembleSpec spec;
        spec.kind = row.kind;
        spec.n = 1000;
        spec.count = 50;
        spec.seed = row.seed;
        spec.bulk_fraction = 0.8;
        EnsembleBaseline base = baseline_statistics(spec);
        pass = pass && std::abs(base.r_mean - row.target) <= 0.01;
        if (!detail.empty()) detail += ", ";
        detail += fmt("%s %.4f (%+.4f)", ensemble_name(row.kind), base.r_mean,
                      base.r_mean - row.target);
        if (row.kind == EnsembleKind::GinibreA) out.ginibre_a = std::move(base);
        if (row.kind == EnsembleKind::AIdagger) out.ai_dagger = std::move(base);
    }
    return {pass, detail + " [targets +-0.01]"};
}

// c11: symmetry-class matching of the complex QE cloud at large lambda.
Check c11(const Args& args, const BaselinePair& bases) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    const double lam = std::pow(10.0, -4.8);

    struct Leg {
        const char* name;
        std::int64_t b, a;
        const EnsembleBaseline* match;
        const EnsembleBaseline* other;
        double r_target;
    };
    const Leg legs[] = {
        {"no-gauge", 1, 0, &bases.ai_dagger, &bases.ginibre_a, 0.7218},
        {"gauged", 3, 5, &bases.ginibre_a, &bases.ai_dagger, 0.7378},
    };

    bool pass = true;
    std::string detail;
    for (const Leg& leg : legs) {
        const std::vector<QESpectrum> specs = k_window_ensemble(
            params(5, 399, leg.b, leg.a, 1e5, lam, 0.001), 1e5, 50.0, 1.0, opts);
        std::vector<std::vector<cplxd>> clouds;
        for (const QESpectrum& sp : specs) {
            std::vector<cplxd> cx = classify_real(sp).complex_eps;
            if (cx.size() >= 20) clouds.push_back(std::move(cx));
        }
        const RatioSample ratios = spacing_ratios(raw_complex_points(clouds, 2.0 * M_PI));
        const SpacingSample s = nn_spacings(unfold_complex(clouds));
        const double ks_match = ks_two_sample(s.s, leg.match->spacings.s);
        const double ks_other = ks_two_sample(s.s, leg.other->spacings.s);
        const bool leg_ok = std::abs(ratios.r_mean - leg.r_target) <= 0.015 &&
                            ks_match < 0.05 && ks_other > 0.05;
        pass = pass && leg_ok;
        if (!detail.empty()) detail += "; ";
        detail += fmt("%s r=%.4f (target %.4f+-0.015) KS match %.4f (<0.05) other %.4f (>0.05)",
                      leg.name, ratios.r_mean, leg.r_target, ks_match, ks_other);
    }
    return {pass, detail};
}

// c12: <r>(lambda) transition curves and the stability of the crossing.
Check c12(const Args& args) {
    SweepOptions opts;
    opts.cache_dir = args.cache;
    opts.workers = args.workers;
    std::vector<double> lambdas;
    for (int j = 0; j <= 8; ++j) lambdas.push_back(std::pow(10.0, -8.0 + 0.5 * j));

    struct Run {
        std::int64_t M;
        double kspan;
    };
    const Run runs[] = {{399, 2.0}, {799, 1.0}, {1999, 0.0}};

    std::vector<double> lam0s;
    TransitionCurve headline;
    for (const Run& run : runs) {
        const auto members =
            k_window_params(params(5, run.M, 1, 0, 1e5, 1e-6, 0.001), 1e5, run.kspan, 1.0);
        TransitionCurve c = r_transition_curve(members, lambdas, 0.6425, opts);
        if (c.lambda0) lam0s.push_back(*c.lambda0);
        if (run.M == 1999) headline = std::move(c);
    }

    const TransitionPoint& first = headline.points.front();
    const TransitionPoint& last = headline.points.back();
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < headline.points.size(); ++i) {
        const TransitionPoint& p0 = headline.points[i];
        const TransitionPoint& p1 = headline.points[i + 1];
        if (!(std::isfinite(p0.r_mean) && std::isfinite(p1.r_mean)) ||
            p1.r_mean < p0.r_mean - 2.0 * (p0.r_stderr + p1.r_stderr))
            monotone = false;
    }
    const bool ends_ok = std::abs(first.r_mean - 0.5687) <= 0.01 &&
                         std::abs(last.r_mean - 0.7218) <= 0.01;
    const bool lam0_ok =
        lam0s.size() == 3 &&
        *std::max_element(lam0s.begin(), lam0s.end()) /
                *std::min_element(lam0s.begin(), lam0s.end()) <=
            std::pow(10.0, 0.5);

    std::string lam_str = "lambda0 {";
    for (std::size_t i = 0; i < lam0s.size(); ++i)
        lam_str += fmt("%s%.3e", i ? ", " : "", lam0s[i]);
    lam_str += "}";
    return {monotone && ends_ok && lam0_ok,
            fmt("r: %.4f -> %.4f (targets 0.5687/0.7218 +-0.01), monotone=%s, %s within one grid step=%s",
                first.r_mean, last.r_mean, monotone ? "yes" : "no", lam_str.c_str(),
                lam0_ok ? "yes" : "no")};
}

// c13: the CLI produces byte-identical outputs across cache state and workers.
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Check c13(const Args& args) {
    if (args.cli.empty())
        return {false, "skipped: pass --cli <path-to-qkr> to run the determinism checks"};

    const fs::path root = fs::temp_directory_path() / "ptqkr_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    struct Job {
        const char* name;
        std::string flags;
        std::vector<std::string> files;
    };
    const std::vector<Job> jobs = {
        {"spectrum",
         "spectrum --N 1 --M 101 --b 1 --a 0 --k 100 --lambda 1e-3 --q 0.001 --bins 20",
         {"spectrum.csv", "re_density.csv", "im_density.csv", "summary.json"}},
        {"phase",
         "phase --N 1 --M 101 --b 1 --a 0 --q 0.001 --k-min 1 --k-max 1000 --k-points 3 "
         "--lambda-min 1e-6 --lambda-max 1e-2 --lambda-points 3 --lambda-zero",
         {"phase.csv"}},
        {"stats",
         "stats --N 1 --M 101 --b 1 --a 0 --k 100 --lambda 3e-2 --q 0.001 "
         "--ensemble kwindow --center 100 --half-width 2 --dk 1",
         {"spacing_hist.csv", "reference_curves.csv", "fits.json"}},
        {"transition",
         "transition --N 1 --M 101 --b 1 --a 0 --k 100 --q 0.001 "
         "--lambda-min 1e-6 --lambda-max 1e-2 --lambda-points 4",
         {"transition.csv"}},
    };

    // cold cache / warm cache at 1 worker, then a cold cache at 4 workers
    struct Variant {
        const char* tag;
        const char* cache;
        int workers;
    };
    const Variant variants[] = {{"cold1", "cacheA", 1}, {"warm1", "cacheA", 1},
                                {"cold4", "cacheB", 4}};

    for (const Job& job : jobs) {
        std::vector<fs::path> outs;
        for (const Variant& v : variants) {
            const fs::path out = root / job.name / v.tag;
            fs::create_directories(out);
            const std::string cmd =
                "\"" + args.cli + "\" " + job.flags + " --workers " + std::to_string(v.workers) +
                " --out \"" + out.string() + "\" --cache \"" + (root / v.cache).string() +
                "\" > \"" + (out / "run.log").string() + "\" 2>&1";
            const int rc = std::system(cmd.c_str());
            if (rc != 0)
                return {false, fmt("%s run (%s) exited nonzero (%d); log: %s", job.name,
                                   v.tag, rc, (out / "run.log").string().c_str())};
            outs.push_back(out);
        }
        for (const std::string& file : job.files) {
            const std::string ref = slurp(outs[0] / file);
            if (ref.empty())
                return {false, fmt("%s produced no %s", job.name, file.c_str())};
            for (std::size_t v = 1; v < outs.size(); ++v)
                if (slurp(outs[v] / file) != ref)
                    return {false, fmt("%s: %s differs between %s and %s runs", job.name,
                                       file.c_str(), variants[0].tag, variants[v].tag)};
        }
    }
    return {true, "4 subcommands byte-identical across cold cache, warm cache, and 4 workers"};
}

} // namespace

int main(int argc, char** argv) {
    Args args;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--full") args.full = true;
        else if (a == "--workers" && i + 1 < argc) args.workers = std::atoi(argv[++i]);
        else if (a == "--cache" && i + 1 < argc) args.cache = argv[++i];
        else if (a == "--cli" && i + 1 < argc) args.cli = argv[++i];
        else {
            std::cerr << "usage: acceptance [--full] [--workers N] [--cache DIR] [--cli PATH]\n";
            return 2;
        }
    }
    std::cout << "acceptance: " << (args.full ? "full-scale" : "desk-scale")
              << " statistics variants, workers=" << args.workers
              << ", cache=" << args.cache << "\n"
              << std::flush;

    BaselinePair bases;
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria = {
        {"c1", [&] { return c1(args); }},
        {"c2", [&] { return c2(args); }},
        {"c3", [&] { return c3(args); }},
        {"c4", [&] { return c4(args); }},
        {"c5", [&] { return c5(args); }},
        {"c6", [&] { return c6(args); }},
        {"c7", [&] { return c7(args); }},
        {"c8", [&] { return c8(args); }},
        {"c9", [&] { return c9(args); }},
        {"c10", [&] { return c10(args, bases); }},
        {"c11", [&] { return c11(args, bases); }},
        {"c12", [&] { return c12(args); }},
        {"c13", [&] { return c13(args); }},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check check;
        try {
            check = fn();
        } catch (const Error& e) {
            check = {false, fmt("error: %s", e.what())};
        } catch (const std::exception& e) {
            check = {false, fmt("unexpected exception: %s", e.what())};
        }
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        if (!check.pass) ++failures;
        std::cout << fmt("%-4s %s (%llds)  %s", name, check.pass ? "PASS" : "FAIL",
                         static_cast<long long>(secs), check.detail.c_str())
                  << "\n"
                  << std::flush;
    }
    std::cout << "acceptance: " << (13 - failures) << "/13 criteria passed\n";
    return failures;
}
