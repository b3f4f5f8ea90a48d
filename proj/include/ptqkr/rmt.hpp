#pragma once

#include <cstdint>
#include <string>

#include "ptqkr/errors.hpp"
#include "ptqkr/stats.hpp"
#include "ptqkr/types.hpp"

namespace ptqkr {

// Reference random-matrix ensembles.  Enum values are pinned because they
// feed the counter-based sampler: reordering would silently change streams.
enum class EnsembleKind : std::uint64_t {
    Goe = 1,      // real symmetric, N(0,1) off-diagonal, N(0,2) diagonal
    Gue = 2,      // Hermitian, N(0,1) real diagonal, (x+iy)/sqrt(2) above
    GinibreA = 3, // all entries iid (x+iy)/sqrt(2)
    AIdagger = 4, // complex symmetric, entries (x+iy)/sqrt(2) mirrored bitwise
};

const char* ensemble_name(EnsembleKind kind);
EnsembleKind ensemble_from_name(const std::string& name); // UnknownKind on miss

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::Goe;
    int n = 1000;
    int count = 50;
    std::uint64_t seed = 0;
    double bulk_fraction = 0.8; // central sorted fraction (Hermitian) or
                                // disk radius fraction of sqrt(n) (non-normal)

    void validate() const; // n >= 16, count >= 1, bulk_fraction in (0, 1]
};

// Matrix `index` of the ensemble, reproducible in isolation: every entry is a
// pure function of (seed, kind, index, i, j) through a splitmix64-style mix
// chain feeding Box-Muller, so samples are independent of evaluation order
// and worker count.
CMatrix sample_matrix(const EnsembleSpec& spec, int index);

struct EnsembleBaseline {
    EnsembleSpec spec;
    SpacingSample spacings; // pooled bulk NN spacings, <s> = 1
    RatioSample ratios;     // pooled bulk NN/NNN ratios
    double r_mean = 0.0;
    double r_stderr = 0.0;
};

// Diagonalizes the ensemble and reduces it to bulk spacing and ratio samples.
// Hermitian kinds: per-matrix central bulk_fraction of the sorted spectrum,
// unfolded through the pooled empirical staircase, then 1D neighbor
// statistics per matrix.  Non-normal kinds: eigenvalues inside the disk of
// radius bulk_fraction * sqrt(n), plane statistics per matrix, no unfolding
// (the bulk density is already flat).
EnsembleBaseline baseline_statistics(const EnsembleSpec& spec);

} // namespace ptqkr
