#pragma once

#include <vector>

namespace backoff {

struct Dwt {
    int M = 2;
    // details[j-1] holds octave j (j = 1 is the finest scale).
    std::vector<std::vector<double>> details;
    std::vector<double> approx;
};

// Periodized Daubechies pyramid with M vanishing moments (M in {2, 3, 4}). The series is
// truncated to a multiple of 2^J. With levels = 0, J is the largest depth that keeps the
// coarsest approximation at least one filter length long.
Dwt dwt_details(const std::vector<double>& series, int M, int levels = 0);

const std::vector<double>& daubechies_lowpass(int M);

struct LogscaleDiagram {
    int M = 2;
    std::vector<int> octaves;
    std::vector<double> y;
    std::vector<double> n_coeffs;
    std::vector<double> variance;
    std::vector<double> ci_halfwidth;
};

// Bias-corrected log2 detail energies, with the first and last 2M coefficients of each
// octave dropped. Octaves with fewer than two remaining coefficients are omitted.
LogscaleDiagram logscale_diagram(const std::vector<double>& series, int M);
LogscaleDiagram logscale_diagram(const Dwt& dwt);

struct HurstEstimate {
    double slope = 0.0;
    double slope_se = 0.0;
    double hurst = 0.0;
    int j1 = 0;
    int j2 = 0;
    double chi2 = 0.0;
    double alignment_pvalue = 0.0;
    bool alignment_rejected = false;
};

// Weighted fit of y_j on j over j1..j2 (inclusive), weights 1/var(y_j).
HurstEstimate hurst_estimate(const LogscaleDiagram& d, int j1, int j2);

struct AlignmentRange {
    int j1 = 0;
    int j2 = 0;
    double pvalue = 0.0;
};

// Aligned range (p >= 0.05, at least min_octaves wide) reaching the coarsest octave possible,
// widest among those. Falls back to the best p-value if no range passes.
AlignmentRange suggest_alignment(const LogscaleDiagram& d, int min_octaves = 3);

// Local slopes (y_{j+1} - y_j) indexed by the lower octave.
std::vector<double> octave_slopes(const LogscaleDiagram& d);

}  // namespace backoff
