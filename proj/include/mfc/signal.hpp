#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mfc {

/// Uniformly sampled real-valued signal. Sample k lives at t0 + k*ts.
struct SampledSignal {
    std::vector<double> samples;
    double ts = 0.01;  ///< sampling period, s (> 0)
    double t0 = 0.0;   ///< time of the first sample, s

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double time_at(std::size_t k) const { return t0 + static_cast<double>(k) * ts; }
    double t_end() const {
        return empty() ? t0 : time_at(samples.size() - 1);
    }

    /// Grid index of time t. Throws if t is off-grid or out of range.
    std::size_t index_at(double t) const {
        const double raw = (t - t0) / ts;
        const double rounded = std::round(raw);
        if (std::abs(raw - rounded) > 1e-6)
            throw std::invalid_argument("SampledSignal: time not on the sampling grid");
        if (rounded < -0.5 || rounded >= static_cast<double>(samples.size()))
            throw std::invalid_argument("SampledSignal: time outside the sampled range");
        return static_cast<std::size_t>(rounded);
    }

    void validate() const {
        if (!(ts > 0.0) || !std::isfinite(ts))
            throw std::invalid_argument("SampledSignal: ts must be positive and finite");
        for (double v : samples)
            if (!std::isfinite(v)) throw std::invalid_argument("SampledSignal: non-finite sample");
    }
};

enum class NoiseKind { none, gaussian_white };

/// Additive measurement-noise description. Identical (seed, variance) yields a
/// bit-identical sequence.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double variance = 0.0;
    std::uint64_t seed = 0;
};

/// Deterministic N(0,1) stream: mt19937_64 driving a Box-Muller transform.
/// std::normal_distribution is avoided because its sample sequence is
/// implementation-defined.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1)
        const double u1 = (static_cast<double>(engine_()) + 1.0) / (max_ + 1.0);
        const double u2 = static_cast<double>(engine_()) / (max_ + 1.0);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
    static constexpr double max_ = static_cast<double>(std::mt19937_64::max());
};

/// clean + iid N(0, variance), deterministic under (seed, variance, length).
inline SampledSignal add_noise(const SampledSignal& clean, const NoiseSpec& spec) {
    if (!(spec.variance >= 0.0) || !std::isfinite(spec.variance))
        throw std::invalid_argument("add_noise: variance must be finite and >= 0");
    SampledSignal out = clean;
    if (spec.kind == NoiseKind::none || spec.variance == 0.0) return out;
    GaussianStream g(spec.seed);
    const double sigma = std::sqrt(spec.variance);
    for (double& v : out.samples) v += sigma * g.next();
    return out;
}

struct TimeWindow {
    double t_start = 0.0;
    double t_end = 0.0;
};

struct TrackingMetrics {
    double rms_error = 0.0;
    double max_abs_error = 0.0;
    TimeWindow eval_window;
};

/// RMS and max-abs of (y - y_ref) over the samples inside [t_start, t_end].
inline TrackingMetrics tracking_metrics(const SampledSignal& y, const SampledSignal& y_ref,
                                        TimeWindow window) {
    if (y.ts != y_ref.ts || y.t0 != y_ref.t0 || y.size() != y_ref.size())
        throw std::invalid_argument("tracking_metrics: signals must share the sampling grid");
    if (y.empty()) throw std::invalid_argument("tracking_metrics: empty signals");

    std::size_t n = 0;
    double sum_sq = 0.0, max_abs = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double t = y.time_at(k);
        if (t < window.t_start - 1e-12 || t > window.t_end + 1e-12) continue;
        const double e = y.samples[k] - y_ref.samples[k];
        sum_sq += e * e;
        max_abs = std::max(max_abs, std::abs(e));
        ++n;
    }
    if (n == 0) throw std::invalid_argument("tracking_metrics: empty evaluation window");
    return {std::sqrt(sum_sq / static_cast<double>(n)), max_abs, window};
}

/// CSV form: header "t,<name>", one row per sample in time order.
inline void write_csv(std::ostream& os, const SampledSignal& s, std::string_view name) {
    os.imbue(std::locale::classic());
    os.precision(std::numeric_limits<double>::max_digits10);
    os << "t," << name << '\n';
    for (std::size_t k = 0; k < s.size(); ++k)
        os << s.time_at(k) << ',' << s.samples[k] << '\n';
}

inline void write_csv_file(const std::string& path, const SampledSignal& s, std::string_view name) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(f, s, name);
}

}  // namespace mfc
