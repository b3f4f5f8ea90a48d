#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptqkr/model.hpp"
#include "ptqkr/output.hpp"
#include "ptqkr/rmt.hpp"
#include "ptqkr/spectrum.hpp"
#include "ptqkr/stats.hpp"
#include "ptqkr/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ptqkr;

namespace {

struct RunConfig {
    std::int64_t N = 1, M = 399, b = 1, a = 0;
    double k = 0.0, lambda = 0.0, q = 0.0;
    double tol_real = 1e-10;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out = ".";
    std::string cache;

    // stats / ensemble knobs
    std::string ensemble = "single"; // single | bloch | kwindow
    int count = 50;                  // bloch ensemble size
    double center = 1e5, half_width = 50.0, dk = 1.0;
    std::string sectors = "auto"; // auto | on | off
    std::string plane = "auto";   // auto | real | complex
    int bins = 50;

    // phase grid
    double k_min = 1.0, k_max = 1e6;
    int k_points = 25;
    double lambda_min = 1e-12, lambda_max = 1e-1;
    int lambda_points = 25;
    bool lambda_zero = false;

    // transition
    double midpoint = 0.6425;

    // baseline
    std::vector<std::string> classes;
    int rmt_n = 1000;
    int rmt_count = 50;
    double bulk = 0.8;

    ResonanceParams params() const {
        ResonanceParams p;
        p.N = N; p.M = M; p.b = b; p.a = a;
        p.k = k; p.lambda = lambda; p.q = q;
        return p;
    }
    SweepOptions sweep() const {
        SweepOptions o;
        o.cache_dir = cache;
        o.workers = workers;
        o.tol_real = tol_real;
        return o;
    }
};

// Config file (JSON) sits between built-in defaults and explicit flags:
// values here overwrite the defaults before the command line is parsed, so
// any flag given still wins.
void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrKind::PreconditionViolation, "cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(ErrKind::PreconditionViolation,
              "config file " + path + " is not valid JSON: " + e.what());
    }
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("N", c.N); get("M", c.M); get("b", c.b); get("a", c.a);
    get("k", c.k); get("lambda", c.lambda); get("q", c.q);
    get("tol_real", c.tol_real); get("seed", c.seed); get("workers", c.workers);
    get("out", c.out); get("cache", c.cache);
    get("ensemble", c.ensemble); get("count", c.count);
    get("center", c.center); get("half_width", c.half_width); get("dk", c.dk);
    get("sectors", c.sectors); get("plane", c.plane); get("bins", c.bins);
    get("k_min", c.k_min); get("k_max", c.k_max); get("k_points", c.k_points);
    get("lambda_min", c.lambda_min); get("lambda_max", c.lambda_max);
    get("lambda_points", c.lambda_points); get("lambda_zero", c.lambda_zero);
    get("midpoint", c.midpoint);
    get("classes", c.classes);
    get("rmt_n", c.rmt_n); get("rmt_count", c.rmt_count); get("bulk", c.bulk);
}

void add_common(CLI::App* cmd, RunConfig& c, std::string& config_path) {
    cmd->add_option("--N", c.N, "resonance numerator of hbar_eff = 4 pi N / M");
    cmd->add_option("--M", c.M, "resonance denominator (system period)");
    cmd->add_option("--b", c.b, "gauge denominator factor: gamma_eff = 2 pi a/(b M)");
    cmd->add_option("--a", c.a, "gauge numerator (integer; 0 means gamma_eff = 0)");
    cmd->add_option("--k", c.k, "kick strength");
    cmd->add_option("--lambda", c.lambda, "imaginary kick component strength");
    cmd->add_option("--q", c.q, "Bloch number in (-pi/D, pi/D]");
    cmd->add_option("--tol-real", c.tol_real, "threshold on |Im eps| for realness");
    cmd->add_option("--seed", c.seed, "random seed (recorded in outputs)");
    cmd->add_option("--workers", c.workers, "worker threads for sweeps");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--cache", c.cache, "spectrum cache directory (empty: off)");
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os)
        raise(ErrKind::PreconditionViolation, "cannot write " + p.string());
    std::cerr << "writing " << p.string() << "\n";
    return os;
}

json fit_json(const BrodyFit& fit, std::size_t n_samples) {
    return json{{"method", fit.method == FitMethod::Mle ? "mle" : "histogram_lsq"},
                {"beta", fit.beta},
                {"goodness", fit.goodness},
                {"n_samples", n_samples},
                {"clamped", fit.clamped}};
}

json params_json(const RunConfig& c) {
    const ResonanceParams p = c.params();
    return json{{"N", p.N},     {"M", p.M},
                {"b", p.b},     {"a", p.a},
                {"k", p.k},     {"lambda", p.lambda},
                {"q", p.q},     {"hbar_eff", p.hbar_eff()},
                {"gamma_eff", p.gamma_eff()}, {"D", p.D()},
                {"tol_real", c.tol_real},     {"seed", c.seed}};
}

std::vector<double> log_grid(double lo, double hi, int points, const char* what) {
    if (points < 1 || !(lo > 0.0) || !(hi > lo))
        raise(ErrKind::PreconditionViolation,
              std::string(what) + ": need points >= 1 and 0 < min < max");
    std::vector<double> g(static_cast<std::size_t>(points));
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    const double step = (std::log10(hi) - std::log10(lo)) / (points - 1);
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + i * step);
    return g;
}

// ---------------------------------------------------------------- spectrum --
int cmd_spectrum(const RunConfig& c) {
    const ResonanceParams p = c.params();
    p.validate();
    const QESpectrum spec = compute_spectrum_cached(p, c.sweep());
    const RealComplexPartition part = classify_real(spec, c.tol_real);
    const auto comments = params_record(p, c.tol_real, c.seed);

    {
        auto os = open_out(c.out, "spectrum.csv");
        write_spectrum_csv(os, spec, part, comments);
    }
    std::vector<double> re, im;
    re.reserve(spec.eps.size());
    im.reserve(spec.eps.size());
    for (const cplx& e : spec.eps) {
        re.push_back(e.real());
        im.push_back(e.imag());
    }
    {
        auto os = open_out(c.out, "re_density.csv");
        write_histogram_csv(os, histogram_density(re, c.bins, -M_PI, M_PI), comments);
    }
    {
        double lo = *std::min_element(im.begin(), im.end());
        double hi = *std::max_element(im.begin(), im.end());
        if (!(hi > lo)) { // fully real spectrum: give the histogram a window
            lo -= 1e-15;
            hi += 1e-15;
        }
        auto os = open_out(c.out, "im_density.csv");
        write_histogram_csv(os, histogram_density(im, c.bins, lo, hi), comments);
    }

    json summary;
    summary["params"] = params_json(c);
    summary["P"] = part.P;
    summary["n_real"] = part.real_eps.size();
    summary["boundary_stragglers"] = part.boundary_stragglers;
    summary["residual_bound"] = spec.residual_bound;
    if (p.k > 0.0) {
        const RegimeReport regime = localization_regime(p);
        summary["xi_l"] = regime.xi_l;
        summary["localized"] = regime.localized;
    } else {
        summary["xi_l"] = 0.0;
        summary["localized"] = true;
    }

    const FloquetMatrix f = build_reduced_floquet(p);
    summary["unitarity_residual"] = unitarity_residual(f.s);
    try {
        const SymmetryReport rep = time_reversal_residual(f, p.a);
        summary["time_reversal_residual"] = rep.residual;
        summary["time_reversal_p"] = rep.p;
    } catch (const Error& e) {
        if (e.kind() != ErrKind::NotApplicable) throw;
        summary["time_reversal_residual"] = nullptr;
    }
    try {
        summary["pairing_residual"] = conjugation_pairing_residual(spec);
    } catch (const Error& e) {
        if (e.kind() != ErrKind::PreconditionViolation) throw;
        summary["pairing_residual"] = nullptr; // q not on a symmetric point
    }
    auto os = open_out(c.out, "summary.json");
    os << summary.dump(2) << "\n";
    return 0;
}

// ------------------------------------------------------------------- phase --
int cmd_phase(const RunConfig& c) {
    const ResonanceParams base = c.params();
    std::vector<double> ks = log_grid(c.k_min, c.k_max, c.k_points, "k grid");
    std::vector<double> lambdas =
        log_grid(c.lambda_min, c.lambda_max, c.lambda_points, "lambda grid");
    if (c.lambda_zero) lambdas.insert(lambdas.begin(), 0.0);

    // Row-at-a-time evaluation so long sweeps report progress; identical
    // cells and cache keys as one big call.
    PhaseDiagram diagram;
    diagram.base = base;
    diagram.tol_real = c.tol_real;
    diagram.k_star = std::sqrt(2.0 * static_cast<double>(base.M));
    diagram.ks = ks;
    diagram.lambdas = lambdas;
    for (std::size_t ik = 0; ik < ks.size(); ++ik) {
        PhaseDiagram row = real_fraction_phase_diagram(
            base, {ks[ik]}, lambdas, c.sweep());
        diagram.cells.insert(diagram.cells.end(), row.cells.begin(), row.cells.end());
        std::cerr << "phase: row " << (ik + 1) << "/" << ks.size() << "\n";
    }

    auto comments = params_record(base, c.tol_real, c.seed);
    auto os = open_out(c.out, "phase.csv");
    write_phase_csv(os, diagram, comments);
    return 0;
}

// ------------------------------------------------------------------- stats --
int cmd_stats(const RunConfig& c) {
    const ResonanceParams base = c.params();
    base.validate();
    const SweepOptions opts = c.sweep();

    SectorMode mode = SectorMode::Auto;
    if (c.sectors == "on") mode = SectorMode::On;
    else if (c.sectors == "off") mode = SectorMode::Off;
    else if (c.sectors != "auto")
        raise(ErrKind::UnknownKind, "--sectors must be auto, on, or off");

    // Assemble the ensemble member parameters.
    std::vector<ResonanceParams> members;
    if (c.ensemble == "single") {
        members.push_back(base);
    } else if (c.ensemble == "bloch") {
        for (double qv : bloch_grid(base.M, c.count)) {
            ResonanceParams p = base;
            p.q = qv;
            members.push_back(p);
        }
    } else if (c.ensemble == "kwindow") {
        if (!(c.dk > 0.0))
            raise(ErrKind::PreconditionViolation, "--dk must be > 0");
        const auto nk =
            static_cast<std::size_t>(std::llround(2.0 * c.half_width / c.dk)) + 1;
        for (std::size_t i = 0; i < nk; ++i) {
            ResonanceParams p = base;
            p.k = c.center - c.half_width + static_cast<double>(i) * c.dk;
            members.push_back(p);
        }
    } else {
        raise(ErrKind::UnknownKind, "--ensemble must be single, bloch, or kwindow");
    }

    bool complex_plane;
    if (c.plane == "complex") complex_plane = true;
    else if (c.plane == "real") complex_plane = false;
    else if (c.plane == "auto") complex_plane = (base.q != 0.0);
    else raise(ErrKind::UnknownKind, "--plane must be auto, real, or complex");

    SpacingSample sample;
    RatioSample rsample;
    if (complex_plane) {
        std::vector<std::vector<cplx>> spectra(members.size());
        parallel_for(members.size(), opts.workers, [&](std::size_t i) {
            spectra[i] = compute_spectrum_cached(members[i], opts).eps;
        });
        sample = nn_spacings(unfold_complex(spectra));
        rsample = spacing_ratios(raw_complex_points(spectra, 2.0 * M_PI));
    } else {
        const auto seqs = real_spacing_sequences(members, mode, opts);
        sample = nn_spacings(unfold_real(seqs));
        std::vector<std::vector<cplx>> as_pts(seqs.size());
        for (std::size_t i = 0; i < seqs.size(); ++i)
            for (double v : seqs[i]) as_pts[i].emplace_back(v, 0.0);
        rsample = spacing_ratios(raw_complex_points(as_pts, 2.0 * M_PI));
    }

    auto comments = params_record(base, c.tol_real, c.seed);
    comments.push_back("ensemble=" + c.ensemble);
    comments.push_back("members=" + std::to_string(members.size()));

    const Histogram hist = histogram_density(sample.s, c.bins, 0.0, 4.0);
    {
        auto os = open_out(c.out, "spacing_hist.csv");
        write_histogram_csv(os, hist, comments);
    }

    const BrodyFit mle = brody_fit(sample, FitMethod::Mle);
    const BrodyFit lsq = brody_fit(sample, FitMethod::HistogramLsq);
    const MixtureFit mix = mixture_fit(hist);

    { // reference curves at the histogram midpoints, for plotting
        auto os = open_out(c.out, "reference_curves.csv");
        for (const auto& line : comments) os << "# " << line << "\n";
        os << "s,poisson,goe,gue,brody\n";
        const double w = hist.bin_width();
        for (std::size_t i = 0; i < hist.density.size(); ++i) {
            const double s = hist.lo + (static_cast<double>(i) + 0.5) * w;
            os << fmt17(s) << ',' << fmt17(reference_pdf(ReferenceKind::Poisson, s))
               << ',' << fmt17(reference_pdf(ReferenceKind::GoeWigner, s)) << ','
               << fmt17(reference_pdf(ReferenceKind::GueWigner, s)) << ','
               << fmt17(reference_pdf(ReferenceKind::Brody, s, mle.beta)) << "\n";
        }
    }

    json out;
    out["params"] = params_json(c);
    out["ensemble"] = {{"kind", c.ensemble},
                       {"members", members.size()},
                       {"plane", complex_plane ? "complex" : "real"},
                       {"sectors", c.sectors}};
    out["brody_mle"] = fit_json(mle, sample.s.size());
    out["brody_lsq"] = fit_json(lsq, sample.s.size());
    out["mixture"] = {{"method", "binned_lsq"},
                      {"alpha", mix.alpha},
                      {"goodness", mix.residual},
                      {"n_samples", sample.s.size()}};
    out["ks"] = {{"poisson", ks_distance(sample.s, [](double s) {
                      return reference_cdf(ReferenceKind::Poisson, s);
                  })},
                 {"goe", ks_distance(sample.s, [](double s) {
                      return reference_cdf(ReferenceKind::GoeWigner, s);
                  })},
                 {"gue", ks_distance(sample.s, [](double s) {
                      return reference_cdf(ReferenceKind::GueWigner, s);
                  })}};
    out["ratios"] = {{"r_mean", rsample.r_mean},
                     {"r_stderr", rsample.r_stderr},
                     {"n", rsample.r.size()}};
    auto os = open_out(c.out, "fits.json");
    os << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- baseline --
int cmd_baseline(const RunConfig& c) {
    std::vector<std::string> names = c.classes;
    if (names.empty())
        raise(ErrKind::PreconditionViolation, "baseline: give at least one --class");

    auto parse_class = [](const std::string& s) -> EnsembleKind {
        if (s == "GOE" || s == "goe") return EnsembleKind::Goe;
        if (s == "GUE" || s == "gue") return EnsembleKind::Gue;
        if (s == "A" || s == "GinibreA" || s == "ginibre_a") return EnsembleKind::GinibreA;
        if (s == "AIdagger" || s == "AIdag" || s == "ai_dagger") return EnsembleKind::AIdagger;
        raise(ErrKind::UnknownKind, "unknown ensemble class '" + s + "'");
    };

    std::vector<EnsembleBaseline> baselines;
    for (const auto& name : names) {
        EnsembleSpec spec;
        spec.kind = parse_class(name);
        spec.n = c.rmt_n;
        spec.count = c.rmt_count;
        spec.seed = c.seed;
        spec.bulk_fraction = c.bulk;
        std::cerr << "baseline: sampling " << ensemble_name(spec.kind) << " n="
                  << spec.n << " count=" << spec.count << "\n";
        baselines.push_back(baseline_statistics(spec));
    }

    std::vector<std::string> comments;
    comments.push_back("seed=" + std::to_string(c.seed));
    comments.push_back("bulk_fraction=" + fmt17(c.bulk));
    auto os = open_out(c.out, "baseline.csv");
    write_baseline_csv(os, baselines, comments);
    return 0;
}

// -------------------------------------------------------------- transition --
int cmd_transition(const RunConfig& c) {
    const ResonanceParams base = c.params();
    const std::vector<double> lambdas =
        log_grid(c.lambda_min, c.lambda_max, c.lambda_points, "lambda grid");
    const TransitionCurve curve =
        r_transition_curve({base}, lambdas, c.midpoint, c.sweep());
    auto comments = params_record(base, c.tol_real, c.seed);
    auto os = open_out(c.out, "transition.csv");
    write_transition_csv(os, curve, comments);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PT-symmetric kicked rotor at quantum resonance: spectra, "
                 "spectral statistics, and parameter sweeps"};
    app.require_subcommand(1);

    RunConfig c;
    std::string config_path;

    // Config file first: scan argv so the file's values become the defaults
    // that explicit flags then override.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
    }
    try {
        if (!config_path.empty()) apply_config_file(c, config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App* sp = app.add_subcommand("spectrum", "one spectrum: CSV + densities + summary");
    add_common(sp, c, config_path);
    sp->get_option("--k")->required();
    sp->add_option("--bins", c.bins, "histogram bins");

    CLI::App* ph = app.add_subcommand("phase", "real-fraction phase diagram over (k, lambda)");
    add_common(ph, c, config_path);
    ph->add_option("--k-min", c.k_min, "k grid minimum (log-spaced grid)");
    ph->add_option("--k-max", c.k_max, "k grid maximum");
    ph->add_option("--k-points", c.k_points, "k grid size");
    ph->add_option("--lambda-min", c.lambda_min, "lambda grid minimum");
    ph->add_option("--lambda-max", c.lambda_max, "lambda grid maximum");
    ph->add_option("--lambda-points", c.lambda_points, "lambda grid size");
    ph->add_flag("--lambda-zero", c.lambda_zero, "prepend lambda = 0 column");

    CLI::App* st = app.add_subcommand("stats", "ensemble spacing/ratio statistics and fits");
    add_common(st, c, config_path);
    st->get_option("--k")->required();
    st->add_option("--ensemble", c.ensemble, "single | bloch | kwindow");
    st->add_option("--count", c.count, "bloch ensemble size");
    st->add_option("--center", c.center, "k-window center");
    st->add_option("--half-width", c.half_width, "k-window half width");
    st->add_option("--dk", c.dk, "k-window step");
    st->add_option("--sectors", c.sectors, "parity sectors: auto | on | off");
    st->add_option("--plane", c.plane, "statistics plane: auto | real | complex");
    st->add_option("--bins", c.bins, "histogram bins");

    CLI::App* bl = app.add_subcommand("baseline", "random-matrix reference statistics");
    add_common(bl, c, config_path);
    bl->add_option("--class", c.classes, "ensemble class (repeatable): GOE GUE A AIdagger");
    bl->add_option("--n", c.rmt_n, "matrix dimension");
    bl->add_option("--count", c.rmt_count, "matrices per ensemble");
    bl->add_option("--bulk", c.bulk, "bulk fraction");

    CLI::App* tr = app.add_subcommand("transition", "<r>(lambda) curve and lambda0");
    add_common(tr, c, config_path);
    tr->get_option("--k")->required();
    tr->add_option("--lambda-min", c.lambda_min, "lambda grid minimum (log-spaced)");
    tr->add_option("--lambda-max", c.lambda_max, "lambda grid maximum");
    tr->add_option("--lambda-points", c.lambda_points, "lambda grid size");
    tr->add_option("--midpoint", c.midpoint, "target <r> level defining lambda0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // help/version exit 0; any parse problem is 2
    }

    try {
        if (sp->parsed()) return cmd_spectrum(c);
        if (ph->parsed()) return cmd_phase(c);
        if (st->parsed()) return cmd_stats(c);
        if (bl->parsed()) return cmd_baseline(c);
        if (tr->parsed()) return cmd_transition(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.kind()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
