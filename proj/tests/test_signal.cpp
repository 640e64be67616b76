#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mfc/signal.hpp"

using namespace mfc;

namespace {

SampledSignal make_ramp(std::size_t n, double ts = 0.01, double slope = 1.0, double t0 = 0.0) {
    SampledSignal s{{}, ts, t0};
    s.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) s.samples.push_back(slope * s.time_at(k));
    return s;
}

}  // namespace

TEST_CASE("add_noise with zero variance is the identity") {
    auto s = make_ramp(100);
    auto out = add_noise(s, {NoiseKind::gaussian_white, 0.0, 42});
    REQUIRE(out.samples == s.samples);
    out = add_noise(s, {NoiseKind::none, 0.5, 42});
    REQUIRE(out.samples == s.samples);
}

TEST_CASE("add_noise is deterministic under (seed, variance)") {
    auto s = make_ramp(1000);
    NoiseSpec spec{NoiseKind::gaussian_white, 0.01, 7};
    auto a = add_noise(s, spec);
    auto b = add_noise(s, spec);
    REQUIRE(a.samples == b.samples);
    auto c = add_noise(s, {NoiseKind::gaussian_white, 0.01, 8});
    REQUIRE(a.samples != c.samples);
}

TEST_CASE("add_noise sample statistics match the requested distribution") {
    SampledSignal s{std::vector<double>(100000, 0.0), 0.01, 0.0};
    auto out = add_noise(s, {NoiseKind::gaussian_white, 0.01, 1});
    double mean = 0.0;
    for (double v : out.samples) mean += v;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (double v : out.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.size() - 1);
    REQUIRE(std::abs(mean) < 0.002);
    REQUIRE(var > 0.009);
    REQUIRE(var < 0.011);
}

TEST_CASE("add_noise rejects negative variance") {
    auto s = make_ramp(10);
    REQUIRE_THROWS_AS(add_noise(s, {NoiseKind::gaussian_white, -1.0, 0}), std::invalid_argument);
}

TEST_CASE("tracking_metrics basics") {
    auto y = make_ramp(200);
    SECTION("y == y_ref gives zeros") {
        auto m = tracking_metrics(y, y, {0.0, y.t_end()});
        REQUIRE(m.rms_error == 0.0);
        REQUIRE(m.max_abs_error == 0.0);
    }
    SECTION("constant offset c gives rms = max = |c|") {
        auto ref = y;
        for (double& v : ref.samples) v += 0.25;
        auto m = tracking_metrics(y, ref, {0.0, y.t_end()});
        REQUIRE_THAT(m.rms_error, Catch::Matchers::WithinAbs(0.25, 1e-12));
        REQUIRE_THAT(m.max_abs_error, Catch::Matchers::WithinAbs(0.25, 1e-12));
    }
    SECTION("alternating +-1 error gives rms = max = 1") {
        auto ref = y;
        for (std::size_t k = 0; k < ref.size(); ++k) ref.samples[k] += (k % 2 ? 1.0 : -1.0);
        auto m = tracking_metrics(y, ref, {0.0, y.t_end()});
        REQUIRE_THAT(m.rms_error, Catch::Matchers::WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(m.max_abs_error, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("rms <= max always (random spot check)") {
        auto noisy = add_noise(y, {NoiseKind::gaussian_white, 0.3, 3});
        auto m = tracking_metrics(noisy, y, {0.2, 1.5});
        REQUIRE(m.rms_error <= m.max_abs_error);
    }
}

TEST_CASE("tracking_metrics rejects bad inputs") {
    auto y = make_ramp(100);
    auto other = make_ramp(100, 0.02);
    REQUIRE_THROWS_AS(tracking_metrics(y, other, {0.0, 0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(tracking_metrics(y, y, {5.0, 6.0}), std::invalid_argument);  // empty window
}

TEST_CASE("tracking metrics are invariant under joint time translation") {
    auto y = make_ramp(150);
    auto ref = add_noise(y, {NoiseKind::gaussian_white, 0.05, 11});
    auto m0 = tracking_metrics(y, ref, {0.3, 1.2});
    auto ys = y;
    auto refs = ref;
    ys.t0 += 10.0;
    refs.t0 += 10.0;
    auto m1 = tracking_metrics(ys, refs, {10.3, 11.2});
    REQUIRE(m0.rms_error == m1.rms_error);
    REQUIRE(m0.max_abs_error == m1.max_abs_error);
}

TEST_CASE("CSV serialization: header, time order, decimal point") {
    SampledSignal s{{1.5, 2.5, -3.0}, 0.5, 1.0};
    std::ostringstream os;
    write_csv(os, s, "y");
    const std::string text = os.str();
    REQUIRE(text.substr(0, 4) == "t,y\n");
    REQUIRE(text.find(',') != std::string::npos);
    REQUIRE(text.find("1,1.5") != std::string::npos);
    REQUIRE(text.find("1.5,2.5") != std::string::npos);
    REQUIRE(text.find("2,-3") != std::string::npos);
}
