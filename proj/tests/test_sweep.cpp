#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptqkr/model.hpp"
#include "ptqkr/spectrum.hpp"
#include "ptqkr/sweep.hpp"

using namespace ptqkr;
namespace fs = std::filesystem;

namespace {

template <typename Fn> ErrKind thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    REQUIRE_MESSAGE(false, "expected an Error to be thrown");
    return ErrKind::EmptyInput; // unreachable
}

ResonanceParams small_case() {
    ResonanceParams p;
    p.N = 1;
    p.M = 21;
    p.b = 1;
    p.a = 0;
    p.k = 3.0;
    p.lambda = 0.01;
    p.q = 0.001;
    return p;
}

// Fresh scratch directory per tag; wiped up front so reruns start cold.
fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("ptqkr_sweep_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<fs::path> cache_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

bool bitwise_equal(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].real() != b[i].real() || a[i].imag() != b[i].imag()) return false;
    return true;
}

} // namespace

TEST_CASE("digest matches published vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("parallel_for covers every index once and rethrows") {
    SUBCASE("per-index slots") {
        std::vector<std::size_t> slot(1000, static_cast<std::size_t>(-1));
        parallel_for(slot.size(), 4, [&](std::size_t i) { slot[i] = 2 * i; });
        for (std::size_t i = 0; i < slot.size(); ++i) CHECK(slot[i] == 2 * i);
    }
    SUBCASE("more workers than work") {
        std::atomic<int> hits{0};
        parallel_for(3, 16, [&](std::size_t) { hits.fetch_add(1); });
        CHECK(hits.load() == 3);
    }
    SUBCASE("body exception reaches the caller") {
        CHECK_THROWS_AS(parallel_for(64, 4,
                                     [&](std::size_t i) {
                                         if (i == 37)
                                             throw std::runtime_error("boom");
                                     }),
                        std::runtime_error);
    }
}

TEST_CASE("disk cache round-trips spectra bitwise") {
    const fs::path dir = fresh_dir("roundtrip");
    SweepOptions opts;
    opts.cache_dir = dir.string();
    const ResonanceParams p = small_case();

    const std::int64_t hits0 = cache_hit_count().load();
    const std::int64_t diags0 = diagonalization_count().load();

    const QESpectrum fresh = compute_spectrum_cached(p, opts);
    CHECK(diagonalization_count().load() == diags0 + 1);
    CHECK(cache_hit_count().load() == hits0);
    REQUIRE(cache_files(dir).size() == 1);

    const QESpectrum warm = compute_spectrum_cached(p, opts);
    CHECK(cache_hit_count().load() == hits0 + 1);
    CHECK(diagonalization_count().load() == diags0 + 1); // eigensolver skipped
    CHECK(bitwise_equal(fresh.mu, warm.mu));
    CHECK(bitwise_equal(fresh.eps, warm.eps));
    CHECK(warm.residual_bound == fresh.residual_bound);
    CHECK(warm.params.M == p.M);

    SUBCASE("classification tolerance is part of the key") {
        SweepOptions opts2 = opts;
        opts2.tol_real = 1e-8;
        (void)compute_spectrum_cached(p, opts2);
        CHECK(cache_files(dir).size() == 2);

        SweepOptions opts3 = opts;
        opts3.tail_tol = 1e-12;
        (void)compute_spectrum_cached(p, opts3);
        CHECK(cache_files(dir).size() == 3);
    }
    SUBCASE("empty cache_dir disables caching") {
        SweepOptions nocache;
        const std::int64_t h = cache_hit_count().load();
        const QESpectrum again = compute_spectrum_cached(p, nocache);
        CHECK(cache_hit_count().load() == h);
        CHECK(bitwise_equal(again.mu, fresh.mu));
    }
}

TEST_CASE("corrupt cache entries are recomputed, counted, and replaced") {
    const fs::path dir = fresh_dir("corrupt");
    SweepOptions opts;
    opts.cache_dir = dir.string();
    const ResonanceParams p = small_case();

    const QESpectrum fresh = compute_spectrum_cached(p, opts);
    const std::vector<fs::path> files = cache_files(dir);
    REQUIRE(files.size() == 1);
    {
        std::ofstream f(files[0], std::ios::binary | std::ios::trunc);
        f << "not a cache entry";
    }

    const std::int64_t bad0 = cache_corrupt_count().load();
    const std::int64_t diags0 = diagonalization_count().load();
    const QESpectrum redone = compute_spectrum_cached(p, opts);
    CHECK(cache_corrupt_count().load() == bad0 + 1);
    CHECK(diagonalization_count().load() == diags0 + 1);
    CHECK(bitwise_equal(redone.mu, fresh.mu));

    // the rewritten entry must serve the next call
    const std::int64_t hits0 = cache_hit_count().load();
    (void)compute_spectrum_cached(p, opts);
    CHECK(cache_hit_count().load() == hits0 + 1);
    CHECK(cache_corrupt_count().load() == bad0 + 1);
}

TEST_CASE("localization regime estimate") {
    ResonanceParams p;
    p.N = 1;
    p.b = 1;
    p.a = 0;

    p.M = 1999;
    p.k = 10.0;
    RegimeReport r = localization_regime(p);
    CHECK(r.xi_l == 50.0);
    CHECK(r.localized);

    p.k = 1e5;
    r = localization_regime(p);
    CHECK_FALSE(r.localized);

    p.M = 512; // k^2/2 == M exactly: boundary counts as delocalized
    p.k = 32.0;
    r = localization_regime(p);
    CHECK(r.xi_l == 512.0);
    CHECK_FALSE(r.localized);

    p.k = 0.0;
    CHECK(thrown_kind([&] { localization_regime(p); }) ==
          ErrKind::PreconditionViolation);
}

TEST_CASE("phase diagram is worker-count independent") {
    ResonanceParams base = small_case();
    const std::vector<double> ks = {1.0, 2.0, 5.0};
    const std::vector<double> lambdas = {0.0, 1e-3, 1e-2};

    SweepOptions one;
    one.workers = 1;
    SweepOptions four;
    four.workers = 4;
    const PhaseDiagram d1 = real_fraction_phase_diagram(base, ks, lambdas, one);
    const PhaseDiagram d4 = real_fraction_phase_diagram(base, ks, lambdas, four);

    REQUIRE(d1.cells.size() == 9);
    REQUIRE(d4.cells.size() == 9);
    CHECK(d1.k_star == doctest::Approx(std::sqrt(2.0 * 21.0)).epsilon(1e-15));
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(d1.cells[i].error.empty());
        CHECK(d1.cells[i].P == d4.cells[i].P); // bitwise
        CHECK(d1.cells[i].n_real == d4.cells[i].n_real);
    }

    SUBCASE("row-major cell layout") {
        for (std::size_t ik = 0; ik < ks.size(); ++ik)
            for (std::size_t il = 0; il < lambdas.size(); ++il) {
                const PhaseCell& c = d1.cells[ik * lambdas.size() + il];
                CHECK(c.k == ks[ik]);
                CHECK(c.lambda == lambdas[il]);
            }
    }
    SUBCASE("hermitian column stays fully real") {
        for (std::size_t ik = 0; ik < ks.size(); ++ik) {
            const PhaseCell& c = d1.cells[ik * lambdas.size()];
            CHECK(c.lambda == 0.0);
            CHECK(c.P == 1.0);
            CHECK(c.n_real == 21);
        }
    }
}

TEST_CASE("a failing cell is recorded in place, not thrown") {
    ResonanceParams base = small_case();
    // k * lambda = 1000 overflows the kick factor scale for the second k
    const PhaseDiagram d =
        real_fraction_phase_diagram(base, {1.0, 1e5}, {1e-2}, SweepOptions{});
    REQUIRE(d.cells.size() == 2);
    CHECK(d.cells[0].error.empty());
    CHECK(d.cells[0].P > 0.0);
    CHECK_FALSE(d.cells[1].error.empty());
    CHECK(std::isnan(d.cells[1].P));
    CHECK(d.cells[1].n_real == -1);

    SUBCASE("grids must be nonempty and strictly increasing") {
        CHECK(thrown_kind([&] {
            real_fraction_phase_diagram(base, {}, {1e-2}, SweepOptions{});
        }) == ErrKind::PreconditionViolation);
        CHECK(thrown_kind([&] {
            real_fraction_phase_diagram(base, {2.0, 1.0}, {1e-2}, SweepOptions{});
        }) == ErrKind::PreconditionViolation);
    }
}

TEST_CASE("Bloch grid avoids the zone center and edge") {
    const std::int64_t M = 21;
    const std::vector<double> q = bloch_grid(M, 10);
    REQUIRE(q.size() == 10);
    const double zone = M_PI / static_cast<double>(M);
    for (std::size_t j = 0; j < q.size(); ++j) {
        CHECK(q[j] > 0.0);
        CHECK(q[j] < zone);
        if (j > 0) CHECK(q[j] > q[j - 1]);
        CHECK(q[j] == doctest::Approx((j + 0.5) * M_PI / (21.0 * 10.0))
                          .epsilon(1e-15));
    }
    CHECK(bloch_grid(M, 1)[0] == doctest::Approx(zone / 2).epsilon(1e-15));

    SUBCASE("ensemble members carry the grid q values") {
        ResonanceParams base = small_case();
        const std::vector<QESpectrum> ens = bloch_ensemble(base, 3, SweepOptions{});
        const std::vector<double> grid = bloch_grid(base.M, 3);
        REQUIRE(ens.size() == 3);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(ens[j].params.q == grid[j]);
            CHECK(ens[j].mu.size() == 21);
        }
        CHECK_FALSE(bitwise_equal(ens[0].mu, ens[1].mu));
    }
}

TEST_CASE("k-window ensemble spans the window in order") {
    ResonanceParams base = small_case();
    const std::vector<QESpectrum> ens =
        k_window_ensemble(base, 5.0, 2.0, 1.0, SweepOptions{});
    REQUIRE(ens.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ens[i].params.k == 3.0 + static_cast<double>(i));
        CHECK(ens[i].mu.size() == 21);
    }
    CHECK(thrown_kind([&] { k_window_ensemble(base, 5.0, 2.0, 0.0, SweepOptions{}); }) ==
          ErrKind::PreconditionViolation);
    CHECK(thrown_kind([&] { k_window_ensemble(base, 5.0, -1.0, 1.0, SweepOptions{}); }) ==
          ErrKind::PreconditionViolation);
}

TEST_CASE("parity sector gate") {
    ResonanceParams p = small_case(); // a=0 b=1 M=21 odd, k*lambda = 0.03
    p.k = 1.0;
    p.lambda = 1e-6;
    CHECK(sectors_applicable(p));

    ResonanceParams off = p;
    off.b = 3;
    off.a = 1; // nonzero linear phase breaks the parity of the free propagator
    CHECK_FALSE(sectors_applicable(off));

    off = p;
    off.N = 1;
    off.M = 22; // even M: the lattice has no central site to mirror about
    CHECK_FALSE(sectors_applicable(off));

    off = p;
    off.k = 10.0;
    off.lambda = 0.1; // kick couples the sectors beyond working precision
    CHECK_FALSE(sectors_applicable(off));
}

TEST_CASE("real spacing sequences, sectored and plain") {
    ResonanceParams p = small_case();
    p.q = 0.0;
    p.k = 1.0;
    p.lambda = 1e-6;
    ResonanceParams p2 = p;
    p2.k = 2.0;
    const std::vector<ResonanceParams> members = {p, p2};

    SUBCASE("sectors off: one sequence of classified real parts per member") {
        const auto seqs =
            real_spacing_sequences(members, SectorMode::Off, SweepOptions{});
        REQUIRE(seqs.size() == 2);
        CHECK(seqs[0].size() == 21); // PT-exact phase at this kick: fully real
        CHECK(seqs[1].size() == 21);
    }
    SUBCASE("sectors on: even and odd blocks stay separate") {
        for (SectorMode mode : {SectorMode::On, SectorMode::Auto}) {
            const auto seqs = real_spacing_sequences(members, mode, SweepOptions{});
            REQUIRE(seqs.size() == 4);
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(seqs[2 * i].size() == 11);     // even block: (M+1)/2
                CHECK(seqs[2 * i + 1].size() == 10); // odd block: (M-1)/2
            }
        }
    }
    SUBCASE("auto falls back when the gate fails") {
        std::vector<ResonanceParams> wide = members;
        wide[0].k = 10.0;
        wide[0].lambda = 0.1;
        const auto seqs =
            real_spacing_sequences(wide, SectorMode::Auto, SweepOptions{});
        CHECK(seqs.size() == 2); // unsectored
    }
    SUBCASE("forcing sectors on incompatible parameters fails loudly") {
        std::vector<ResonanceParams> even = members;
        even[0].M = 22;
        CHECK(thrown_kind([&] {
            real_spacing_sequences(even, SectorMode::On, SweepOptions{});
        }) == ErrKind::NotApplicable);
    }
    SUBCASE("no members") {
        CHECK(thrown_kind([&] {
            real_spacing_sequences({}, SectorMode::Off, SweepOptions{});
        }) == ErrKind::EmptyInput);
    }
}

TEST_CASE("transition curve pools members and locates the crossing") {
    ResonanceParams base = small_case();
    base.q = 0.0;
    base.k = 5.0;
    const std::vector<double> lambdas = {1e-4, 1e-3, 1e-2};

    const TransitionCurve c =
        r_transition_curve({base}, lambdas, 0.6425, SweepOptions{});
    REQUIRE(c.points.size() == 3);
    CHECK(c.midpoint == 0.6425);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(c.points[i].lambda == lambdas[i]);
        REQUIRE(std::isfinite(c.points[i].r_mean)); // 21 real QEs: plenty of points
        CHECK(c.points[i].r_mean > 0.0);
        CHECK(c.points[i].r_mean <= 1.0);
        CHECK(c.points[i].n_ratios > 0);
    }

    SUBCASE("a level between two measured values is always crossed") {
        const double level =
            0.5 * (c.points[0].r_mean + c.points[1].r_mean);
        if (c.points[0].r_mean != c.points[1].r_mean) {
            const TransitionCurve hit =
                r_transition_curve({base}, lambdas, level, SweepOptions{});
            REQUIRE(hit.lambda0.has_value());
            CHECK(*hit.lambda0 >= lambdas[0]);
            CHECK(*hit.lambda0 <= lambdas[2]);
        }
    }
    SUBCASE("an unreachable level reports no crossing") {
        const TransitionCurve miss =
            r_transition_curve({base}, lambdas, 2.0, SweepOptions{});
        CHECK_FALSE(miss.lambda0.has_value());
    }
    SUBCASE("members below the point floor make a NaN point") {
        ResonanceParams tiny = base;
        tiny.q = 0.001; // complex-plane branch: needs >= 3 complex-classified QEs
        const TransitionCurve nan_curve = r_transition_curve(
            {tiny}, {1e-12, 1e-11}, 0.6425, SweepOptions{});
        for (const TransitionPoint& pt : nan_curve.points) {
            CHECK(std::isnan(pt.r_mean)); // near-Hermitian: everything is real
            CHECK(pt.n_ratios == 0);
        }
        CHECK_FALSE(nan_curve.lambda0.has_value());
    }
    SUBCASE("input validation") {
        CHECK(thrown_kind([&] {
            r_transition_curve({}, lambdas, 0.6425, SweepOptions{});
        }) == ErrKind::EmptyInput);
        CHECK(thrown_kind([&] {
            r_transition_curve({base}, {}, 0.6425, SweepOptions{});
        }) == ErrKind::PreconditionViolation);
    }
}
