#include "ptqkr/output.hpp"

#include <cstdio>

namespace ptqkr {

namespace {

void emit_comments(std::ostream& os, const std::vector<std::string>& comments) {
    for (const auto& c : comments) os << "# " << c << "\n";
}

} // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> params_record(const ResonanceParams& p, double tol_real,
                                       std::uint64_t seed) {
    std::vector<std::string> rec;
    rec.push_back("N=" + std::to_string(p.N));
    rec.push_back("M=" + std::to_string(p.M));
    rec.push_back("b=" + std::to_string(p.b));
    rec.push_back("a=" + std::to_string(p.a));
    rec.push_back("k=" + fmt17(p.k));
    rec.push_back("lambda=" + fmt17(p.lambda));
    rec.push_back("q=" + fmt17(p.q));
    rec.push_back("hbar_eff=" + fmt17(p.hbar_eff()));
    rec.push_back("gamma_eff=" + fmt17(p.gamma_eff()));
    rec.push_back("D=" + std::to_string(p.D()));
    rec.push_back("tol_real=" + fmt17(tol_real));
    rec.push_back("seed=" + std::to_string(seed));
    return rec;
}

void write_spectrum_csv(std::ostream& os, const QESpectrum& spec,
                        const RealComplexPartition& part,
                        const std::vector<std::string>& comments) {
    emit_comments(os, comments);
    os << "index,re_eps,im_eps,is_real\n";
    for (std::size_t i = 0; i < spec.eps.size(); ++i) {
        const bool real = std::abs(spec.eps[i].imag()) <= part.tol_real;
        os << i << ',' << fmt17(spec.eps[i].real()) << ',' << fmt17(spec.eps[i].imag())
           << ',' << (real ? 1 : 0) << "\n";
    }
}

void write_histogram_csv(std::ostream& os, const Histogram& hist,
                         const std::vector<std::string>& comments) {
    emit_comments(os, comments);
    if (hist.empty_range_warning)
        os << "# warning: no samples fell inside the histogram range\n";
    os << "bin_left,bin_right,density\n";
    const double w = hist.bin_width();
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double left = hist.lo + static_cast<double>(i) * w;
        os << fmt17(left) << ',' << fmt17(left + w) << ',' << fmt17(hist.density[i])
           << "\n";
    }
}

void write_phase_csv(std::ostream& os, const PhaseDiagram& diagram,
                     const std::vector<std::string>& comments) {
    emit_comments(os, comments);
    os << "# k_star=" << fmt17(diagram.k_star) << "\n";
    for (const auto& cell : diagram.cells)
        if (!cell.error.empty())
            os << "# cell_error: k=" << fmt17(cell.k) << " lambda=" << fmt17(cell.lambda)
               << " " << cell.error << "\n";
    os << "k,lambda,P,n_real,D,tol_real\n";
    for (const auto& cell : diagram.cells)
        os << fmt17(cell.k) << ',' << fmt17(cell.lambda) << ',' << fmt17(cell.P) << ','
           << cell.n_real << ',' << diagram.base.D() << ',' << fmt17(diagram.tol_real)
           << "\n";
}

void write_transition_csv(std::ostream& os, const TransitionCurve& curve,
                          const std::vector<std::string>& comments) {
    emit_comments(os, comments);
    os << "# midpoint=" << fmt17(curve.midpoint) << "\n";
    if (curve.lambda0)
        os << "# lambda0=" << fmt17(*curve.lambda0) << "\n";
    else
        os << "# lambda0=not_crossed\n";
    os << "lambda,r_mean,r_stderr,n_ratios\n";
    for (const auto& pt : curve.points)
        os << fmt17(pt.lambda) << ',' << fmt17(pt.r_mean) << ',' << fmt17(pt.r_stderr)
           << ',' << pt.n_ratios << "\n";
}

void write_baseline_csv(std::ostream& os,
                        const std::vector<EnsembleBaseline>& baselines,
                        const std::vector<std::string>& comments) {
    emit_comments(os, comments);
    os << "kind,n,count,r_mean,r_stderr\n";
    for (const auto& base : baselines)
        os << ensemble_name(base.spec.kind) << ',' << base.spec.n << ','
           << base.spec.count << ',' << fmt17(base.r_mean) << ','
           << fmt17(base.r_stderr) << "\n";
}

} // namespace ptqkr
