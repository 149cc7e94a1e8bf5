#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "jacobi/errors.hpp"
#include "jacobi/operator.hpp"

namespace jacobi {

/// Counter-based generator: draw k is a SplitMix64 finalizer applied to
/// seed + k * golden. Streams for parallel trials come from derive(), so the
/// samples of a trial never depend on scheduling.
class SeededSampler {
public:
    explicit SeededSampler(std::uint64_t seed) : seed_(seed) {}

    static SeededSampler derive(std::uint64_t master, std::uint64_t stream) {
        return SeededSampler(stream_seed(master, stream));
    }
    static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
        return mix(master ^ mix(stream + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Number of ternary digits in a Cantor draw; 3^-34 is below double
/// resolution on [0, 1].
inline constexpr int cantor_digits = 34;

struct Uniform {
    double low = 0.0;
    double high = 1.0;
};
struct Gaussian {
    double mean = 0.0;
    double sd = 1.0;
};
/// shift + scale * X with X Cantor-distributed on [0, 1].
struct Cantor {
    double scale = 1.0;
    double shift = 0.0;
};

/// A continuous (atomless) single-site distribution.
class DistributionSpec {
public:
    using Params = std::variant<Uniform, Gaussian, Cantor>;

    DistributionSpec() : DistributionSpec(Uniform{}) {}
    DistributionSpec(Params p) : params_(p) { validate(); }
    DistributionSpec(Uniform p) : DistributionSpec(Params(p)) {}
    DistributionSpec(Gaussian p) : DistributionSpec(Params(p)) {}
    DistributionSpec(Cantor p) : DistributionSpec(Params(p)) {}

    const Params& params() const { return params_; }
    std::string kind() const {
        switch (params_.index()) {
        case 0: return "uniform";
        case 1: return "gaussian";
        default: return "cantor";
        }
    }

private:
    void validate() const {
        std::visit(
            [](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, Uniform>) {
                    if (!std::isfinite(p.low) || !std::isfinite(p.high) || !(p.low < p.high))
                        throw InvalidSpec("uniform distribution needs low < high");
                } else if constexpr (std::is_same_v<P, Gaussian>) {
                    if (!std::isfinite(p.mean) || !std::isfinite(p.sd) || !(p.sd > 0.0))
                        throw InvalidSpec("gaussian distribution needs sd > 0");
                } else {
                    if (!std::isfinite(p.shift) || !std::isfinite(p.scale) || !(p.scale > 0.0))
                        throw InvalidSpec("cantor distribution needs scale > 0");
                }
            },
            params_);
    }

    Params params_;
};

/// Sum_{i=1..K} 2 d_i 3^-i for the lowest K bits d_i of `bits`.
inline double cantor_from_bits(std::uint64_t bits) {
    double x = 0.0;
    for (int i = cantor_digits; i >= 1; --i) {
        const double digit = ((bits >> (i - 1)) & 1U) ? 2.0 : 0.0;
        x = (digit + x) / 3.0;
    }
    return x;
}

inline double sample_value(const DistributionSpec& spec, SeededSampler& sampler) {
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, Uniform>) {
                return p.low + (p.high - p.low) * sampler.uniform01();
            } else if constexpr (std::is_same_v<P, Gaussian>) {
                // Box-Muller; the library normal_distribution is not
                // reproducible across standard library implementations.
                const double u1 = 1.0 - sampler.uniform01();
                const double u2 = sampler.uniform01();
                const double r = std::sqrt(-2.0 * std::log(u1));
                return p.mean + p.sd * r * std::cos(2.0 * std::numbers::pi * u2);
            } else {
                return p.shift + p.scale * cantor_from_bits(sampler.next_u64());
            }
        },
        spec.params());
}

/// Product measure over the sites of an interval: either one shared
/// distribution or one per site.
class PotentialModel {
public:
    PotentialModel() = default;
    PotentialModel(DistributionSpec shared) : specs_{shared}, shared_(true) {}
    PotentialModel(std::vector<DistributionSpec> per_site)
        : specs_(std::move(per_site)), shared_(false) {}

    bool shared() const { return shared_; }
    const std::vector<DistributionSpec>& specs() const { return specs_; }

    const DistributionSpec& at(std::size_t offset) const {
        return shared_ ? specs_.front() : specs_.at(offset);
    }
    void check_covers(const IndexInterval& interval) const {
        if (specs_.empty()) throw CoverageError("potential model has no distribution");
        if (!shared_ && specs_.size() != interval.size()) {
            throw CoverageError("potential model lists " + std::to_string(specs_.size()) +
                                " distributions for " + std::to_string(interval.size()) +
                                " sites");
        }
    }

private:
    std::vector<DistributionSpec> specs_{DistributionSpec{}};
    bool shared_ = true;
};

/// Independent draws omega(lo), ..., omega(hi), in site order.
inline std::vector<double> sample_potential(const PotentialModel& model,
                                            const IndexInterval& interval,
                                            SeededSampler& sampler) {
    model.check_covers(interval);
    std::vector<double> omega(interval.size());
    for (std::size_t k = 0; k < omega.size(); ++k) omega[k] = sample_value(model.at(k), sampler);
    return omega;
}

/// Cantor function, clamped outside [0, 1].
inline double cantor_cdf(double x) {
    if (!(x > 0.0)) return 0.0;
    if (x >= 1.0) return 1.0;
    double result = 0.0;
    double half = 0.5;
    for (int i = 0; i < 64 && half > 0.0; ++i) {
        x *= 3.0;
        const double digit = std::floor(x);
        x -= digit;
        if (digit >= 2.0) {
            result += half;
        } else if (digit >= 1.0) {
            return result + half; // inside a removed middle third
        }
        half *= 0.5;
    }
    return result;
}

} // namespace jacobi
