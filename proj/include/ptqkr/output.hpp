#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ptqkr/model.hpp"
#include "ptqkr/rmt.hpp"
#include "ptqkr/spectrum.hpp"
#include "ptqkr/stats.hpp"
#include "ptqkr/sweep.hpp"

namespace ptqkr {

// Full-precision round-trippable decimal form (17 significant digits).
std::string fmt17(double v);

// "key=value" lines naming every parameter that went into a run; emitted as
// '#' comments so each artifact is self-describing and re-runnable.
std::vector<std::string> params_record(const ResonanceParams& p, double tol_real,
                                       std::uint64_t seed);

// All writers: leading '# ' comment lines, then one header row, then data
// rows; '.' decimal separator, ',' delimiter, %.17g floats.  No timestamps or
// hostnames — identical runs must produce identical bytes.
void write_spectrum_csv(std::ostream& os, const QESpectrum& spec,
                        const RealComplexPartition& part,
                        const std::vector<std::string>& comments);

void write_histogram_csv(std::ostream& os, const Histogram& hist,
                         const std::vector<std::string>& comments);

void write_phase_csv(std::ostream& os, const PhaseDiagram& diagram,
                     const std::vector<std::string>& comments);

void write_transition_csv(std::ostream& os, const TransitionCurve& curve,
                          const std::vector<std::string>& comments);

void write_baseline_csv(std::ostream& os,
                        const std::vector<EnsembleBaseline>& baselines,
                        const std::vector<std::string>& comments);

} // namespace ptqkr
