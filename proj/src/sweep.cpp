#include "ptqkr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <unistd.h>

#include "json.hpp"

#include "internal.hpp"

namespace fs = std::filesystem;

namespace ptqkr {

namespace {

// The cache payload is raw IEEE-754 doubles in file byte order.
static_assert(std::endian::native == std::endian::little,
              "spectrum cache assumes a little-endian host");

constexpr char kCacheMagic[8] = {'P', 'T', 'Q', 'K', 'R', 'S', '0', '1'};

// Bumping this tag invalidates every existing cache entry; bump whenever the
// numerics feeding cached spectra change.
constexpr const char* kCodeVersion = "ptqkr-spec-v1";

// ---------------------------------------------------------------- sha-256 --
constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

std::uint32_t ror32(std::uint32_t x, int r) { return (x >> r) | (x << (32 - r)); }

void sha256_block(std::uint32_t h[8], const unsigned char* p) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
        w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
               (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 =
            ror32(w[i - 15], 7) ^ ror32(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 =
            ror32(w[i - 2], 17) ^ ror32(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t S1 = ror32(e, 6) ^ ror32(e, 11) ^ ror32(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = hh + S1 + ch + kSha256K[i] + w[i];
        const std::uint32_t S0 = ror32(a, 2) ^ ror32(a, 13) ^ ror32(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = S0 + maj;
        hh = g; g = f; f = e; e = d + t1;
        d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
}

} // namespace

std::string sha256_hex(const std::string& data) {
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t n = data.size();
    std::size_t off = 0;
    for (; off + 64 <= n; off += 64) sha256_block(h, bytes + off);

    unsigned char tail[128] = {0};
    const std::size_t rem = n - off;
    std::memcpy(tail, bytes + off, rem);
    tail[rem] = 0x80;
    const std::size_t tail_len = (rem < 56) ? 64 : 128;
    const std::uint64_t bits = std::uint64_t(n) * 8;
    for (int i = 0; i < 8; ++i)
        tail[tail_len - 1 - i] = static_cast<unsigned char>(bits >> (8 * i));
    sha256_block(h, tail);
    if (tail_len == 128) sha256_block(h, tail + 64);

    char out[65];
    for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 64);
}

namespace {

std::string cache_canonical(const ResonanceParams& p, const SweepOptions& o) {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "%s;N=%lld;M=%lld;b=%lld;a=%lld;k=%.17g;lambda=%.17g;q=%.17g;"
                  "tail_tol=%.17g;tol_real=%.17g",
                  kCodeVersion, static_cast<long long>(p.N), static_cast<long long>(p.M),
                  static_cast<long long>(p.b), static_cast<long long>(p.a), p.k, p.lambda,
                  p.q, o.tail_tol, o.tol_real);
    return buf;
}

void warn(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

QESpectrum compute_fresh(const ResonanceParams& p, const SweepOptions& opts) {
    const KickTable table = kick_fourier_table(p.k, p.lambda, opts.tail_tol);
    return diagonalize(build_reduced_floquet(p, table));
}

// Header is JSON so a cache entry is self-describing; the canonical key is
// stored verbatim and must match what the reader expects.
bool read_cache_file(const fs::path& path, const std::string& canonical,
                     std::int64_t n_expect, QESpectrum& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string raw((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (raw.size() < 12 || std::memcmp(raw.data(), kCacheMagic, 8) != 0) return false;
    std::uint32_t hlen = 0;
    std::memcpy(&hlen, raw.data() + 8, 4);
    if (hlen > (1u << 20) || raw.size() < 12 + std::size_t(hlen)) return false;

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(raw.substr(12, hlen));
    } catch (const nlohmann::json::exception&) {
        return false;
    }
    if (!header.contains("key") || !header.contains("n") ||
        !header.contains("residual_bound"))
        return false;
    if (header["key"].get<std::string>() != canonical) return false;
    const auto n = header["n"].get<std::int64_t>();
    if (n != n_expect) return false;

    const std::size_t payload = std::size_t(n) * 4 * sizeof(double);
    if (raw.size() != 12 + std::size_t(hlen) + payload) return false;

    spec.residual_bound = header["residual_bound"].get<double>();
    spec.mu.resize(std::size_t(n));
    spec.eps.resize(std::size_t(n));
    spec.vectors.clear();
    const char* src = raw.data() + 12 + hlen;
    std::memcpy(spec.mu.data(), src, std::size_t(n) * sizeof(cplx));
    std::memcpy(spec.eps.data(), src + std::size_t(n) * sizeof(cplx),
                std::size_t(n) * sizeof(cplx));
    return true;
}

void write_cache_file(const fs::path& path, const std::string& canonical,
                      const QESpectrum& spec) {
    nlohmann::json header;
    header["key"] = canonical;
    header["n"] = static_cast<std::int64_t>(spec.eps.size());
    header["residual_bound"] = spec.residual_bound;
    const std::string hs = header.dump();

    fs::create_directories(path.parent_path());
    static std::atomic<std::uint64_t> temp_seq{0};
    const fs::path tmp = path.parent_path() /
                         (path.filename().string() + ".tmp" +
                          std::to_string(static_cast<unsigned long>(::getpid())) + "-" +
                          std::to_string(temp_seq.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            warn("cache write failed to open " + tmp.string());
            return;
        }
        out.write(kCacheMagic, 8);
        const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
        out.write(reinterpret_cast<const char*>(&hlen), 4);
        out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
        out.write(reinterpret_cast<const char*>(spec.mu.data()),
                  static_cast<std::streamsize>(spec.mu.size() * sizeof(cplx)));
        out.write(reinterpret_cast<const char*>(spec.eps.data()),
                  static_cast<std::streamsize>(spec.eps.size() * sizeof(cplx)));
        if (!out) {
            warn("cache write failed for " + tmp.string());
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            return;
        }
    }
    // rename() is atomic within a filesystem: readers see old-or-new, never torn.
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        warn("cache rename failed: " + ec.message());
        fs::remove(tmp, ec);
    }
}

} // namespace

std::atomic<std::int64_t>& cache_corrupt_count() {
    static std::atomic<std::int64_t> counter{0};
    return counter;
}

std::atomic<std::int64_t>& cache_hit_count() {
    static std::atomic<std::int64_t> counter{0};
    return counter;
}

QESpectrum compute_spectrum_cached(const ResonanceParams& params,
                                   const SweepOptions& opts) {
    params.validate();
    if (opts.cache_dir.empty()) return compute_fresh(params, opts);

    const std::string canonical = cache_canonical(params, opts);
    const std::string key = sha256_hex(canonical);
    const fs::path path =
        fs::path(opts.cache_dir) / key.substr(0, 2) / (key + ".spec");

    std::error_code ec;
    if (fs::exists(path, ec)) {
        QESpectrum spec;
        spec.params = params;
        if (read_cache_file(path, canonical, params.D(), spec)) {
            cache_hit_count().fetch_add(1, std::memory_order_relaxed);
            return spec;
        }
        cache_corrupt_count().fetch_add(1, std::memory_order_relaxed);
        warn("corrupt cache entry " + path.string() + "; recomputing");
    }

    QESpectrum spec = compute_fresh(params, opts);
    write_cache_file(path, canonical, spec);
    return spec;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t w = workers < 1 ? 1 : static_cast<std::size_t>(workers);
    w = std::min(w, n);
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w - 1);
    for (std::size_t t = 1; t < w; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

RegimeReport localization_regime(const ResonanceParams& params) {
    if (!(params.k > 0.0))
        raise(ErrKind::PreconditionViolation, "localization_regime: k must be > 0");
    if (params.M < 1)
        raise(ErrKind::PreconditionViolation, "localization_regime: M must be >= 1");
    RegimeReport rep;
    rep.xi_l = 0.5 * params.k * params.k;
    rep.localized = rep.xi_l < static_cast<double>(params.M);
    return rep;
}

namespace {

void require_increasing(const std::vector<double>& v, const char* what) {
    if (v.empty())
        raise(ErrKind::PreconditionViolation, std::string(what) + " grid is empty");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            raise(ErrKind::PreconditionViolation,
                  std::string(what) + " grid must be strictly increasing");
}

} // namespace

PhaseDiagram real_fraction_phase_diagram(const ResonanceParams& base,
                                         const std::vector<double>& ks,
                                         const std::vector<double>& lambdas,
                                         const SweepOptions& opts) {
    require_increasing(ks, "k");
    require_increasing(lambdas, "lambda");
    PhaseDiagram diagram;
    diagram.base = base;
    diagram.tol_real = opts.tol_real;
    diagram.k_star = std::sqrt(2.0 * static_cast<double>(base.M));
    diagram.ks = ks;
    diagram.lambdas = lambdas;
    const std::size_t nl = lambdas.size();
    diagram.cells.resize(ks.size() * nl);

    parallel_for(diagram.cells.size(), opts.workers, [&](std::size_t i) {
        PhaseCell& cell = diagram.cells[i];
        cell.k = ks[i / nl];
        cell.lambda = lambdas[i % nl];
        try {
            ResonanceParams p = base;
            p.k = cell.k;
            p.lambda = cell.lambda;
            const QESpectrum spec = compute_spectrum_cached(p, opts);
            const RealComplexPartition part = classify_real(spec, opts.tol_real);
            cell.P = part.P;
            cell.n_real = static_cast<std::int64_t>(part.real_eps.size());
        } catch (const std::exception& e) {
            cell.error = e.what();
            cell.P = std::numeric_limits<double>::quiet_NaN();
            cell.n_real = -1;
        }
    });
    return diagram;
}

std::vector<double> bloch_grid(std::int64_t M, int count) {
    if (count < 1)
        raise(ErrKind::PreconditionViolation, "bloch_grid: count must be >= 1");
    if (M < 1)
        raise(ErrKind::PreconditionViolation, "bloch_grid: M must be >= 1");
    std::vector<double> qs(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
        qs[static_cast<std::size_t>(j)] =
            (static_cast<double>(j) + 0.5) * M_PI /
            (static_cast<double>(M) * static_cast<double>(count));
    return qs;
}

std::vector<QESpectrum> bloch_ensemble(const ResonanceParams& base, int count,
                                       const SweepOptions& opts) {
    const std::vector<double> qs = bloch_grid(base.M, count);
    std::vector<QESpectrum> out(qs.size());
    parallel_for(qs.size(), opts.workers, [&](std::size_t i) {
        ResonanceParams p = base;
        p.q = qs[i];
        out[i] = compute_spectrum_cached(p, opts);
    });
    return out;
}

std::vector<QESpectrum> k_window_ensemble(const ResonanceParams& base,
                                          double k_center, double half_width,
                                          double dk, const SweepOptions& opts) {
    if (!(dk > 0.0))
        raise(ErrKind::PreconditionViolation, "k_window_ensemble: step must be > 0");
    if (half_width < 0.0)
        raise(ErrKind::PreconditionViolation,
              "k_window_ensemble: half_width must be >= 0");
    const auto nk = static_cast<std::size_t>(std::llround(2.0 * half_width / dk)) + 1;
    std::vector<QESpectrum> out(nk);
    parallel_for(nk, opts.workers, [&](std::size_t i) {
        ResonanceParams p = base;
        p.k = k_center - half_width + static_cast<double>(i) * dk;
        out[i] = compute_spectrum_cached(p, opts);
    });
    return out;
}

bool sectors_applicable(const ResonanceParams& params) {
    return params.a == 0 && params.b == 1 && params.M % 2 == 1 &&
           params.k * params.lambda <
               2.0 * M_PI / (10.0 * static_cast<double>(params.M));
}

std::vector<std::vector<double>>
real_spacing_sequences(const std::vector<ResonanceParams>& members,
                       SectorMode mode, const SweepOptions& opts) {
    if (members.empty())
        raise(ErrKind::EmptyInput, "real_spacing_sequences: no ensemble members");
    const bool split =
        mode == SectorMode::On ||
        (mode == SectorMode::Auto &&
         std::all_of(members.begin(), members.end(), sectors_applicable));

    std::vector<std::vector<double>> out(split ? 2 * members.size() : members.size());
    parallel_for(members.size(), opts.workers, [&](std::size_t i) {
        const ResonanceParams& p = members[i];
        if (split) {
            const KickTable table = kick_fourier_table(p.k, p.lambda, opts.tail_tol);
            const ParityBlocks blocks = parity_sector_blocks(p, table);
            for (int sector = 0; sector < 2; ++sector) {
                const std::vector<cplx> eps = quasi_energies(
                    eigenvalues(sector == 0 ? blocks.even : blocks.odd));
                std::vector<double>& dst = out[2 * i + static_cast<std::size_t>(sector)];
                dst.reserve(eps.size());
                for (const cplx& e : eps) dst.push_back(e.real());
            }
        } else {
            const QESpectrum spec = compute_spectrum_cached(p, opts);
            out[i] = classify_real(spec, opts.tol_real).real_eps;
        }
    });
    return out;
}

TransitionCurve r_transition_curve(const std::vector<ResonanceParams>& members,
                                   const std::vector<double>& lambdas,
                                   double midpoint, const SweepOptions& opts) {
    require_increasing(lambdas, "lambda");
    if (members.empty())
        raise(ErrKind::EmptyInput, "r_transition_curve: no ensemble members");
    TransitionCurve curve;
    curve.midpoint = midpoint;
    curve.points.resize(lambdas.size());

    // One task per (lambda, member) pair so a single worker pool covers both
    // loops; results land in per-pair slots, keeping pooling deterministic.
    const std::size_t nm = members.size();
    std::vector<std::vector<double>> pair_pts(lambdas.size() * nm);
    parallel_for(pair_pts.size(), opts.workers, [&](std::size_t t) {
        ResonanceParams p = members[t % nm];
        p.lambda = lambdas[t / nm];
        const QESpectrum spec = compute_spectrum_cached(p, opts);
        const RealComplexPartition part = classify_real(spec, opts.tol_real);
        auto& slot = pair_pts[t];
        if (p.q == 0.0) {
            slot = part.real_eps;
        } else {
            slot.reserve(2 * part.complex_eps.size());
            for (const cplx& e : part.complex_eps) {
                slot.push_back(e.real());
                slot.push_back(e.imag());
            }
        }
    });

    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        std::vector<std::vector<cplx>> spectra;
        for (std::size_t m = 0; m < nm; ++m) {
            const auto& slot = pair_pts[i * nm + m];
            const bool complex_plane = members[m].q != 0.0;
            std::vector<cplx> pts;
            if (complex_plane) {
                for (std::size_t j = 0; j + 1 < slot.size(); j += 2)
                    pts.emplace_back(slot[j], slot[j + 1]);
            } else {
                for (double v : slot) pts.emplace_back(v, 0.0);
            }
            if (pts.size() >= 3) spectra.push_back(std::move(pts));
        }
        TransitionPoint& tp = curve.points[i];
        tp.lambda = lambdas[i];
        if (spectra.empty()) {
            tp.r_mean = std::numeric_limits<double>::quiet_NaN();
            tp.r_stderr = std::numeric_limits<double>::quiet_NaN();
            tp.n_ratios = 0;
            warn("r_transition_curve: no member has >= 3 usable points at "
                 "lambda = " + std::to_string(lambdas[i]));
            continue;
        }
        const RatioSample rs =
            spacing_ratios(raw_complex_points(spectra, 2.0 * M_PI));
        tp.r_mean = rs.r_mean;
        tp.r_stderr = rs.r_stderr;
        tp.n_ratios = static_cast<std::int64_t>(rs.r.size());
    }

    for (std::size_t i = 0; i + 1 < curve.points.size() && !curve.lambda0; ++i) {
        const double a = curve.points[i].r_mean - midpoint;
        const double b = curve.points[i + 1].r_mean - midpoint;
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (a == 0.0) {
            curve.lambda0 = curve.points[i].lambda;
        } else if (a * b < 0.0) {
            const double t = a / (a - b);
            curve.lambda0 = curve.points[i].lambda +
                            t * (curve.points[i + 1].lambda - curve.points[i].lambda);
        }
    }
    if (!curve.lambda0 && !curve.points.empty()) {
        const double last = curve.points.back().r_mean;
        if (std::isfinite(last) && last == midpoint)
            curve.lambda0 = curve.points.back().lambda;
        else
            warn("r_transition_curve: <r> never crosses the midpoint " +
                 std::to_string(midpoint) + "; lambda0 not defined");
    }
    return curve;
}

} // namespace ptqkr
