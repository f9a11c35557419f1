#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "stemob/inversion.hpp"

using namespace stemob;

namespace {

Latent random_latent(const std::vector<std::size_t>& shape, std::uint64_t stream) {
    NoiseKey key;
    key.seed = 555;
    key.stream_id = stream;
    return draw_noise(key, shape);
}

double rel_error(const Latent& a, const Latent& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        num += d * d;
        den += static_cast<double>(b.data[i]) * b.data[i];
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

bool bitwise_equal(const Latent& a, const Latent& b) {
    return a.shape == b.shape &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0;
}

}  // namespace

TEST_CASE("ddpm inversion identity at step zero") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 4, 4}, 1);
    CHECK(bitwise_equal(ddpm_invert(x0, sched, 0, NoiseKey{}), x0));
}

TEST_CASE("scale_and_noise direct substitution") {
    Latent x0({1}, {1.0f});
    Latent eps({1}, {0.5f});
    const Latent out = scale_and_noise(x0, 0.64, eps);
    CHECK(out.data[0] == doctest::Approx(0.8 + 0.6 * 0.5).epsilon(1e-7));
}

TEST_CASE("ddpm marginal moments over many keys") {
    const auto sched = NoiseSchedule::cosine(50);
    const int t = 20;
    const double ab = sched.alpha_bar(t);
    Latent x0({1}, {0.7f});
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        NoiseKey key;
        key.seed = 31337;
        key.stream_id = static_cast<std::uint64_t>(i);
        const double v = ddpm_invert(x0, sched, t, key).data[0];
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double sigma = std::sqrt(1.0 - ab);
    CHECK(std::abs(mean - std::sqrt(ab) * 0.7) < 3.0 * sigma / std::sqrt(double(n)));
    CHECK(var == doctest::Approx(1.0 - ab).epsilon(0.02));
}

TEST_CASE("trajectory basics") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 4, 4}, 2);
    NoiseKey key;
    key.seed = 11;
    key.stream_id = 3;

    const auto traj1 = ddpm_invert_trajectory(x0, sched, 1, key);
    REQUIRE(traj1.size() == 1);
    CHECK(bitwise_equal(traj1[0], ddpm_invert(x0, sched, 1, key)));

    const auto traj = ddpm_invert_trajectory(x0, sched, 10, key);
    const auto traj_again = ddpm_invert_trajectory(x0, sched, 10, key);
    for (std::size_t i = 0; i < traj.size(); ++i) CHECK(bitwise_equal(traj[i], traj_again[i]));

    CHECK_THROWS_AS(ddpm_invert_trajectory(x0, sched, 0, key), std::out_of_range);
    CHECK_THROWS_AS(ddpm_invert_trajectory(x0, sched, 51, key), std::out_of_range);
}

TEST_CASE("per-step noises of a trajectory are pairwise uncorrelated") {
    const auto sched = NoiseSchedule::cosine(50);
    const int t_max = 4;
    const int trials = 20000;
    Latent x0({4}, {0.3f, -0.2f, 0.9f, 0.1f});

    // reconstruct eps_t = (x_t - sqrt(ab_t) x0) / sqrt(1-ab_t), correlate steps
    std::vector<std::vector<double>> eps(t_max);
    for (int trial = 0; trial < trials; ++trial) {
        NoiseKey key;
        key.seed = 909;
        key.stream_id = static_cast<std::uint64_t>(trial);
        const auto traj = ddpm_invert_trajectory(x0, sched, t_max, key);
        for (int t = 1; t <= t_max; ++t) {
            const double ab = sched.alpha_bar(t);
            for (std::size_t i = 0; i < x0.data.size(); ++i)
                eps[t - 1].push_back(
                    (traj[t - 1].data[i] - std::sqrt(ab) * x0.data[i]) / std::sqrt(1.0 - ab));
        }
    }
    const double n = static_cast<double>(eps[0].size());
    for (int a = 0; a < t_max; ++a) {
        for (int b = a + 1; b < t_max; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < eps[a].size(); ++i) dot += eps[a][i] * eps[b][i];
            CHECK(std::abs(dot / n) < 3.0 / std::sqrt(n) + 0.005);
        }
    }
}

TEST_CASE("error reduction round trip") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 6, 6}, 5);
    NoiseKey key;
    key.seed = 21;
    const auto traj = ddpm_invert_trajectory(x0, sched, 12, key);
    const OraclePredictor oracle(x0, sched);

    const auto z = ddpm_error_reduction(x0, traj, oracle, sched);
    REQUIRE(z.size() == traj.size());

    const auto rebuilt = ddpm_resynthesize(traj, z, oracle, sched);
    REQUIRE(rebuilt.size() == traj.size());
    // rebuilt[t-1] is x_{t-1}: trajectory entries for t >= 2, x0 at the end
    for (int t = 2; t <= 12; ++t) CHECK(rel_error(rebuilt[t - 1], traj[t - 2]) < 1e-5);
    CHECK(rel_error(rebuilt[0], x0) < 1e-4);

    CHECK(ddpm_error_reduction(x0, {}, oracle, sched).empty());
}

TEST_CASE("error reduction with zero predictor still resynthesizes the trajectory") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 4, 4}, 6);
    NoiseKey key;
    key.seed = 22;
    const auto traj = ddpm_invert_trajectory(x0, sched, 8, key);
    const ZeroPredictor zero;
    const auto z = ddpm_error_reduction(x0, traj, zero, sched);
    const auto rebuilt = ddpm_resynthesize(traj, z, zero, sched);
    for (int t = 2; t <= 8; ++t) CHECK(rel_error(rebuilt[t - 1], traj[t - 2]) < 1e-5);
    CHECK(rel_error(rebuilt[0], x0) < 1e-4);
}

TEST_CASE("ddim single step forms") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 4, 4}, 7);
    const double ab1 = sched.alpha_bar(1);

    const ZeroPredictor zero;
    const Latent step_zero = ddim_invert_step(x0, 1, sched, zero);
    for (std::size_t i = 0; i < x0.data.size(); ++i)
        CHECK(step_zero.data[i] ==
              doctest::Approx(std::sqrt(ab1) * x0.data[i]).epsilon(1e-6));

    // with alpha_bar[0] = 1 the first step must reduce to the single-shot form
    const OraclePredictor oracle(x0, sched);
    const Latent eps = oracle.predict(x0, 1);
    const Latent step_oracle = ddim_invert_step(x0, 1, sched, oracle);
    for (std::size_t i = 0; i < x0.data.size(); ++i)
        CHECK(step_oracle.data[i] ==
              doctest::Approx(std::sqrt(ab1) * x0.data[i] + std::sqrt(1.0 - ab1) * eps.data[i])
                  .epsilon(1e-5));

    CHECK(step_oracle.shape == x0.shape);
    CHECK_THROWS_AS(ddim_invert_step(x0, 0, sched, zero), std::out_of_range);
    CHECK_THROWS_AS(ddim_invert_step(x0, 51, sched, zero), std::out_of_range);
}

TEST_CASE("ddim inversion with zero predictor is pure scaling") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 4, 4}, 8);
    const ZeroPredictor zero;
    CHECK(bitwise_equal(ddim_invert(x0, sched, 0, zero), x0));
    for (int t : {1, 10, 37, 50}) {
        const Latent xt = ddim_invert(x0, sched, t, zero);
        const double scale = std::sqrt(sched.alpha_bar(t));
        for (std::size_t i = 0; i < x0.data.size(); ++i)
            CHECK(xt.data[i] == doctest::Approx(scale * x0.data[i]).epsilon(1e-5));
    }
}

TEST_CASE("closed form matches the recursion") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 8, 8}, 9);

    SUBCASE("all-zero eps gives pure scaling") {
        std::vector<Latent> eps(10, make_latent(x0.shape));
        const Latent xt = ddim_invert_closed_form(x0, sched, 10, eps);
        const double scale = std::sqrt(sched.alpha_bar(10));
        for (std::size_t i = 0; i < x0.data.size(); ++i)
            CHECK(xt.data[i] == doctest::Approx(scale * x0.data[i]).epsilon(1e-6));
    }

    SUBCASE("single-term sum at t=1") {
        const Latent eps1 = random_latent(x0.shape, 10);
        const Latent xt = ddim_invert_closed_form(x0, sched, 1, {eps1});
        const double ab1 = sched.alpha_bar(1);
        for (std::size_t i = 0; i < x0.data.size(); ++i)
            CHECK(xt.data[i] == doctest::Approx(std::sqrt(ab1) * x0.data[i] +
                                                std::sqrt(1.0 - ab1) * eps1.data[i])
                                    .epsilon(1e-6));
    }

    SUBCASE("replayed predictor outputs reproduce the recursive result") {
        const OraclePredictor oracle(x0, sched);
        for (int t : {1, 7, 25, 50}) {
            const DdimTrace trace = ddim_invert_with_trace(x0, sched, t, oracle);
            CHECK(bitwise_equal(trace.x_t, ddim_invert(x0, sched, t, oracle)));
            const Latent closed = ddim_invert_closed_form(x0, sched, t, trace.eps_per_step);
            CHECK(rel_error(closed, trace.x_t) < 1e-5);
        }
    }

    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(ddim_invert_closed_form(x0, sched, 3, {}), std::invalid_argument);
    }
}

TEST_CASE("ddim denoise inverts the inversion") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent x0 = random_latent({3, 6, 6}, 11);

    SUBCASE("oracle predictor round trip") {
        const OraclePredictor oracle(x0, sched);
        for (int t : {1, 5, 20, 50}) {
            const Latent xt = ddim_invert(x0, sched, t, oracle);
            CHECK(rel_error(ddim_denoise(xt, sched, t, oracle), x0) < 1e-4);
        }
    }

    SUBCASE("zero predictor round trip is exact scaling") {
        const ZeroPredictor zero;
        const Latent xt = ddim_invert(x0, sched, 30, zero);
        CHECK(rel_error(ddim_denoise(xt, sched, 30, zero), x0) < 1e-5);
    }

    SUBCASE("depth mismatch degrades loudly") {
        const ZeroPredictor zero;
        const Latent xt = ddim_invert(x0, sched, 30, zero);
        const double matched = rel_error(ddim_denoise(xt, sched, 30, zero), x0);
        const double mismatched = rel_error(ddim_denoise(xt, sched, 40, zero), x0);
        CHECK(mismatched > 100.0 * std::max(matched, 1e-9));
    }
}

TEST_CASE("stem_preprocess contract") {
    const auto sched = NoiseSchedule::cosine(50);
    const Latent o = random_latent({3, 16, 16}, 12);

    InversionConfig config;
    config.method = InversionMethod::ddpm;
    config.total_steps = 50;
    config.seed = 99;

    SUBCASE("t_stop zero is the identity") {
        config.t_stop = 0;
        CHECK(bitwise_equal(stem_preprocess(o, config, sched, 4), o));
    }

    SUBCASE("deterministic rerun") {
        config.t_stop = 15;
        const Latent a = stem_preprocess(o, config, sched, 4);
        const Latent b = stem_preprocess(o, config, sched, 4);
        CHECK(bitwise_equal(a, b));
        const Latent c = stem_preprocess(o, config, sched, 5);
        CHECK_FALSE(bitwise_equal(a, c));
    }

    SUBCASE("error-reduction flag does not change the returned latent") {
        config.t_stop = 10;
        const Latent plain = stem_preprocess(o, config, sched, 4);
        config.error_reduction = true;
        const Latent full = stem_preprocess(o, config, sched, 4);
        CHECK(bitwise_equal(plain, full));
    }

    SUBCASE("ddim path uses the predictor") {
        config.method = InversionMethod::ddim;
        config.t_stop = 15;
        const Latent out = stem_preprocess(o, config, sched, 4);
        const double scale = std::sqrt(sched.alpha_bar(15));
        for (std::size_t i = 0; i < o.data.size(); ++i)
            CHECK(out.data[i] == doctest::Approx(scale * o.data[i]).epsilon(1e-5));
    }

    SUBCASE("config mismatch") {
        config.t_stop = 15;
        const auto other = NoiseSchedule::cosine(30);
        CHECK_THROWS_AS(stem_preprocess(o, config, other, 4), std::invalid_argument);
        config.t_stop = 60;
        CHECK_THROWS_AS(stem_preprocess(o, config, sched, 4), std::invalid_argument);
    }
}

TEST_CASE("stem_preprocess noise field has the scheduled variance") {
    const auto sched = NoiseSchedule::cosine(50);
    NoiseKey img_key;
    img_key.seed = 1;
    img_key.stream_id = 77;
    Latent o = draw_noise(img_key, {3, 128, 128});
    for (float& v : o.data) v = std::max(-1.0f, std::min(1.0f, v));

    InversionConfig config;
    config.t_stop = 15;
    config.total_steps = 50;
    config.seed = 4242;
    const Latent out = stem_preprocess(o, config, sched, 9);

    const double ab = sched.alpha_bar(15);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < o.data.size(); ++i) {
        const double resid = out.data[i] - std::sqrt(ab) * o.data[i];
        sum += resid;
        sum_sq += resid * resid;
    }
    const double n = static_cast<double>(o.data.size());
    const double var = sum_sq / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(1.0 - ab).epsilon(0.02));
}
