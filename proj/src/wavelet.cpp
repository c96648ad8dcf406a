#include "backoff/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "backoff/errors.hpp"
#include "backoff/stats.hpp"

namespace backoff {

namespace {

const std::vector<double> kDb2{0.48296291314453414, 0.83651630373780772, 0.22414386804201339,
                               -0.12940952255126037};
const std::vector<double> kDb3{0.33267055295008263, 0.80689150931109257, 0.45987750211849154,
                               -0.13501102001025458, -0.085441273882026661, 0.035226291885709536};
const std::vector<double> kDb4{0.23037781330889650, 0.71484657055291540,  0.63088076792985890,
                               -0.027983769416859854, -0.18703481171909308, 0.030841381835560764,
                               0.032883011666885917, -0.010597401785069032};

}  // namespace

const std::vector<double>& daubechies_lowpass(int M) {
    switch (M) {
        case 2: return kDb2;
        case 3: return kDb3;
        case 4: return kDb4;
        default: throw DomainError("Daubechies filters are provided for M in {2, 3, 4}");
    }
}

Dwt dwt_details(const std::vector<double>& series, int M, int levels) {
    const auto& h = daubechies_lowpass(M);
    const std::size_t L = h.size();
    std::vector<double> g(L);
    for (std::size_t k = 0; k < L; ++k) g[k] = (k % 2 ? -1.0 : 1.0) * h[L - 1 - k];

    const std::size_t n = series.size();
    if (levels <= 0) {
        levels = 0;
        while ((n >> (levels + 1)) >= L) ++levels;
    }
    if (levels < 1 || (n >> levels) < 1 || n < (std::size_t{1} << (levels + 1))) {
        std::ostringstream os;
        os << "series of length " << n << " is too short for " << std::max(levels, 1) << " octaves with M=" << M;
        throw SeriesTooShort(os.str());
    }
    const std::size_t used = (n >> levels) << levels;

    Dwt out;
    out.M = M;
    std::vector<double> a(series.begin(), series.begin() + used);
    for (int j = 0; j < levels; ++j) {
        const std::size_t len = a.size(), half = len / 2;
        std::vector<double> na(half), nd(half);
        for (std::size_t k = 0; k < half; ++k) {
            double sa = 0.0, sd = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                const double x = a[(2 * k + l) % len];
                sa += h[l] * x;
                sd += g[l] * x;
            }
            na[k] = sa;
            nd[k] = sd;
        }
        out.details.push_back(std::move(nd));
        a = std::move(na);
    }
    out.approx = std::move(a);
    return out;
}

LogscaleDiagram logscale_diagram(const Dwt& dwt) {
    LogscaleDiagram d;
    d.M = dwt.M;
    const std::size_t drop = 2 * static_cast<std::size_t>(dwt.M);
    const double ln2 = std::log(2.0);
    for (std::size_t j = 0; j < dwt.details.size(); ++j) {
        const auto& dj = dwt.details[j];
        if (dj.size() < 2 * drop + 2) break;
        long double e = 0.0L;
        for (std::size_t k = drop; k < dj.size() - drop; ++k) e += static_cast<long double>(dj[k]) * dj[k];
        const double nj = static_cast<double>(dj.size() - 2 * drop);
        const double mean_energy = static_cast<double>(e / nj);
        if (!(mean_energy > 0.0)) break;
        const double bias = boost::math::digamma(nj / 2.0) / ln2 - std::log2(nj / 2.0);
        const double var = boost::math::trigamma(nj / 2.0) / (ln2 * ln2);
        d.octaves.push_back(static_cast<int>(j) + 1);
        d.y.push_back(std::log2(mean_energy) - bias);
        d.n_coeffs.push_back(nj);
        d.variance.push_back(var);
        d.ci_halfwidth.push_back(1.959963984540054 * std::sqrt(var));
    }
    return d;
}

LogscaleDiagram logscale_diagram(const std::vector<double>& series, int M) {
    return logscale_diagram(dwt_details(series, M));
}

HurstEstimate hurst_estimate(const LogscaleDiagram& d, int j1, int j2) {
    if (d.octaves.empty() || j1 >= j2 || j1 < d.octaves.front() || j2 > d.octaves.back()) {
        std::ostringstream os;
        os << "octave range [" << j1 << ", " << j2 << "] is not inside the diagram";
        throw DomainError(os.str());
    }
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < d.octaves.size(); ++i) {
        if (d.octaves[i] >= j1 && d.octaves[i] <= j2) {
            x.push_back(d.octaves[i]);
            y.push_back(d.y[i]);
            w.push_back(1.0 / d.variance[i]);
        }
    }
    const LineFit f = wls(x, y, w);
    HurstEstimate h;
    h.slope = f.slope;
    h.slope_se = f.slope_se;
    h.hurst = (1.0 + f.slope) / 2.0;
    h.j1 = j1;
    h.j2 = j2;
    h.chi2 = f.chi2;
    const int dof = static_cast<int>(x.size()) - 2;
    h.alignment_pvalue = dof > 0 ? chi_square_sf(f.chi2, dof) : 1.0;
    h.alignment_rejected = h.alignment_pvalue < 0.05;
    return h;
}

AlignmentRange suggest_alignment(const LogscaleDiagram& d, int min_octaves) {
    if (static_cast<int>(d.octaves.size()) < std::max(min_octaves, 2)) {
        throw SeriesTooShort("logscale diagram has too few octaves for an alignment scan");
    }
    AlignmentRange best, fallback;
    bool found = false;
    fallback.pvalue = -1.0;
    for (std::size_t a = 0; a < d.octaves.size(); ++a) {
        for (std::size_t b = a + std::max(min_octaves, 2) - 1; b < d.octaves.size(); ++b) {
            const HurstEstimate h = hurst_estimate(d, d.octaves[a], d.octaves[b]);
            const AlignmentRange r{h.j1, h.j2, h.alignment_pvalue};
            if (r.pvalue > fallback.pvalue) fallback = r;
            if (r.pvalue < 0.05) continue;
            if (!found || r.j2 > best.j2 || (r.j2 == best.j2 && r.j1 < best.j1)) best = r;
            found = true;
        }
    }
    return found ? best : fallback;
}

std::vector<double> octave_slopes(const LogscaleDiagram& d) {
    std::vector<double> s;
    for (std::size_t i = 0; i + 1 < d.y.size(); ++i) s.push_back(d.y[i + 1] - d.y[i]);
    return s;
}

}  // namespace backoff
