#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace sppkit {

// Per-agent, per-step independent heading perturbations. Draws are counter
// based: agent i at step t sees stream (seed, noise, i) at counter t.
struct NoiseSpec {
    enum class Kind { uniform, gaussian, truncated_gaussian };

    Kind kind = Kind::uniform;
    double half_width = 0.0; // uniform support [-half_width, half_width]
    double sigma = 0.0;      // gaussian / truncated gaussian
    double cut = 0.0;        // truncation bound

    static NoiseSpec uniform(double half_width) {
        NoiseSpec s;
        s.kind = Kind::uniform;
        s.half_width = half_width;
        s.validate();
        return s;
    }
    static NoiseSpec gaussian(double sigma) {
        NoiseSpec s;
        s.kind = Kind::gaussian;
        s.sigma = sigma;
        s.validate();
        return s;
    }
    static NoiseSpec truncated_gaussian(double sigma, double cut) {
        NoiseSpec s;
        s.kind = Kind::truncated_gaussian;
        s.sigma = sigma;
        s.cut = cut;
        s.validate();
        return s;
    }

    void validate() const {
        switch (kind) {
        case Kind::uniform:
            if (!(half_width > 0)) throw ConfigError("noise: half_width must be > 0");
            break;
        case Kind::gaussian:
            if (!(sigma > 0)) throw ConfigError("noise: sigma must be > 0");
            break;
        case Kind::truncated_gaussian:
            if (!(sigma > 0)) throw ConfigError("noise: sigma must be > 0");
            if (!(cut > 0)) throw ConfigError("noise: cut must be > 0");
            break;
        }
    }

    double draw(const RandomStream& stream, std::uint64_t counter) const {
        switch (kind) {
        case Kind::uniform:
            return stream.uniform(counter, -half_width, half_width);
        case Kind::gaussian:
            return sigma * stream.gaussian(counter);
        case Kind::truncated_gaussian: {
            // Inverse-CDF draw so one counter slot always suffices.
            const double z = cut / sigma;
            const double lo = norm_cdf(-z);
            const double hi = norm_cdf(z);
            const double u = stream.uniform01_open(counter);
            double x = sigma * norm_ppf(lo + u * (hi - lo));
            if (x > cut) x = cut;
            if (x < -cut) x = -cut;
            return x;
        }
        }
        return 0.0;
    }

    // Marginal density at x (zero outside support).
    double density(double x) const {
        switch (kind) {
        case Kind::uniform:
            return std::abs(x) <= half_width ? 1.0 / (2.0 * half_width) : 0.0;
        case Kind::gaussian:
            return norm_pdf(x / sigma) / sigma;
        case Kind::truncated_gaussian: {
            if (std::abs(x) > cut) return 0.0;
            const double z = cut / sigma;
            const double mass = norm_cdf(z) - norm_cdf(-z);
            return norm_pdf(x / sigma) / (sigma * mass);
        }
        }
        return 0.0;
    }

    std::string describe() const {
        std::ostringstream os;
        switch (kind) {
        case Kind::uniform:
            os << "uniform[-" << half_width << "," << half_width << "]";
            break;
        case Kind::gaussian:
            os << "gaussian(sigma=" << sigma << ")";
            break;
        case Kind::truncated_gaussian:
            os << "truncated_gaussian(sigma=" << sigma << ",cut=" << cut << ")";
            break;
        }
        return os.str();
    }
};

// One synchronous draw for n agents. Deterministic in (spec, n, seed, step)
// and independent of evaluation order across agents.
inline std::vector<double> sample(const NoiseSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t step = 0) {
    spec.validate();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream stream(seed, stream_tag::noise, i);
        out[i] = spec.draw(stream, step);
    }
    return out;
}

// Analytic lower bound rho on the joint density over the box [-eta, eta]^n.
struct NoiseBoundCertificate {
    double eta = 0.0;
    double rho_lower = 0.0;
    std::size_t n = 0;
};

inline NoiseBoundCertificate certificate(const NoiseSpec& spec, double eta, std::size_t n) {
    spec.validate();
    if (!(eta > 0)) throw NoCertificateError("certificate: eta must be > 0");
    if (n < 1) throw NoCertificateError("certificate: n must be >= 1");
    double rho = 0.0;
    switch (spec.kind) {
    case NoiseSpec::Kind::uniform:
        if (eta > spec.half_width) throw NoCertificateError("certificate: eta exceeds uniform support");
        rho = 1.0 / std::pow(2.0 * spec.half_width, static_cast<double>(n));
        break;
    case NoiseSpec::Kind::gaussian:
        // infimum of the density on [-eta, eta] sits at the endpoints
        rho = std::pow(norm_pdf(eta / spec.sigma) / spec.sigma, static_cast<double>(n));
        break;
    case NoiseSpec::Kind::truncated_gaussian:
        if (eta > spec.cut) throw NoCertificateError("certificate: eta exceeds truncation bound");
        rho = std::pow(spec.density(eta), static_cast<double>(n));
        break;
    }
    return {eta, rho, n};
}

struct DensityCheckReport {
    bool pass = false;
    std::size_t bins = 0;
    std::size_t samples = 0;
    double required = 0.0;     // rho^(1/n)
    double worst_margin = 0.0; // min over bins of (density - (required - 3 SE))
    std::string summary() const {
        std::ostringstream os;
        os << (pass ? "pass" : "fail") << " (bins=" << bins << ", samples=" << samples << ", required=" << required
           << ", worst_margin=" << worst_margin << ")";
        return os.str();
    }
};

// Histogram check of the marginal density against the certificate's per-agent
// bound rho^(1/n): every bin on [-eta, eta] must sit above the bound minus
// three standard errors.
inline DensityCheckReport empirical_density_check(const NoiseSpec& spec, const NoiseBoundCertificate& cert,
                                                  std::size_t samples, std::size_t bins, std::uint64_t seed = 1) {
    if (samples < 10000) throw InsufficientData("empirical_density_check: need at least 1e4 samples");
    if (bins < 2) throw ConfigError("empirical_density_check: need at least 2 bins");
    const double eta = cert.eta;
    const double width = 2.0 * eta / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    RandomStream stream(seed, stream_tag::noise, 0);
    for (std::size_t k = 0; k < samples; ++k) {
        const double x = spec.draw(stream, k);
        if (x < -eta || x >= eta) continue;
        auto b = static_cast<std::size_t>((x + eta) / width);
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    const double required = std::pow(cert.rho_lower, 1.0 / static_cast<double>(cert.n));
    DensityCheckReport rep;
    rep.bins = bins;
    rep.samples = samples;
    rep.required = required;
    rep.pass = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < bins; ++b) {
        const double p = static_cast<double>(counts[b]) / static_cast<double>(samples);
        const double density = p / width;
        const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples)) / width;
        const double margin = density - (required - 3.0 * se);
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < 0) rep.pass = false;
    }
    return rep;
}

} // namespace sppkit
