#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace ptqkr {

using cplx = std::complex<double>;

// Dense square complex matrix in column-major order (LAPACK layout).
struct CMatrix {
    int n = 0;
    std::vector<cplx> a;

    CMatrix() = default;
    explicit CMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {}

    cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(j) * n + i]; }
    const cplx& operator()(int i, int j) const {
        return a[static_cast<std::size_t>(j) * n + i];
    }
};

double frobenius_norm(const CMatrix& m);

// Density-normalized histogram on [lo, hi): density integrates to 1 over the
// range (computed from the in-range count).  Raw counts are kept so merged /
// re-normalized views stay exact.
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::int64_t> counts;
    std::vector<double> density;
    std::int64_t total = 0;    // all samples offered, including out-of-range
    std::int64_t in_range = 0; // samples that landed in [lo, hi)
    bool empty_range_warning = false; // nonempty input, nothing in range

    double bin_width() const {
        return (hi - lo) / static_cast<double>(counts.size());
    }
};

} // namespace ptqkr
