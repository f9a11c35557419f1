#include "stemob/inversion.hpp"

#include <cmath>

namespace stemob {
namespace {

void check_step_range(int t, int lo, int hi, const char* what) {
    if (t < lo || t > hi)
        throw std::out_of_range(std::string(what) + ": step " + std::to_string(t) + " outside [" +
                                std::to_string(lo) + "," + std::to_string(hi) + "]");
}

}  // namespace

std::string to_string(InversionMethod m) {
    return m == InversionMethod::ddpm ? "ddpm" : "ddim";
}

InversionMethod inversion_method_from_string(const std::string& s) {
    if (s == "ddpm") return InversionMethod::ddpm;
    if (s == "ddim") return InversionMethod::ddim;
    throw std::invalid_argument("unknown inversion method '" + s + "'");
}

Latent scale_and_noise(const Latent& x0, double alpha_bar, const Latent& eps) {
    require_same_shape(x0, eps, "scale_and_noise");
    const double a = std::sqrt(alpha_bar);
    const double b = std::sqrt(1.0 - alpha_bar);
    Latent out = make_latent(x0.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(a * x0.data[i] + b * eps.data[i]);
    return out;
}

Latent ddpm_invert(const Latent& x0, const NoiseSchedule& schedule, int t, const NoiseKey& key) {
    check_step_range(t, 0, schedule.steps(), "ddpm_invert");
    if (t == 0) return x0;
    NoiseKey step_key = key;
    step_key.step = static_cast<std::uint32_t>(t);
    const Latent eps = draw_noise(step_key, x0.shape);
    return scale_and_noise(x0, schedule.alpha_bar(t), eps);
}

std::vector<Latent> ddpm_invert_trajectory(const Latent& x0, const NoiseSchedule& schedule,
                                           int t_max, const NoiseKey& base_key) {
    check_step_range(t_max, 1, schedule.steps(), "ddpm_invert_trajectory");
    std::vector<Latent> out;
    out.reserve(static_cast<std::size_t>(t_max));
    for (int t = 1; t <= t_max; ++t) out.push_back(ddpm_invert(x0, schedule, t, base_key));
    return out;
}

namespace {

// Reverse-process mean reconstructed from the epsilon estimate:
//   mu(x_t) = (x_t - beta_t / sqrt(1 - ab_t) * eps) / sqrt(alpha_t)
Latent posterior_mean(const Latent& x_t, int t, const NoiseSchedule& schedule,
                      const NoisePredictor& predictor) {
    const Latent eps = predictor.predict(x_t, t);
    const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    Latent mu = make_latent(x_t.shape);
    for (std::size_t i = 0; i < mu.data.size(); ++i)
        mu.data[i] = static_cast<float>((x_t.data[i] - coef * eps.data[i]) * inv_sqrt_alpha);
    return mu;
}

}  // namespace

std::vector<Latent> ddpm_error_reduction(const Latent& x0, const std::vector<Latent>& trajectory,
                                         const NoisePredictor& predictor,
                                         const NoiseSchedule& schedule) {
    if (trajectory.empty()) return {};
    const int t_max = static_cast<int>(trajectory.size());
    check_step_range(t_max, 1, schedule.steps(), "ddpm_error_reduction");
    for (const Latent& x : trajectory) require_same_shape(x, x0, "ddpm_error_reduction");

    std::vector<Latent> z(static_cast<std::size_t>(t_max));
    for (int t = t_max; t >= 1; --t) {
        const Latent& x_prev = t == 1 ? x0 : trajectory[static_cast<std::size_t>(t) - 2];
        const Latent mu = posterior_mean(trajectory[static_cast<std::size_t>(t) - 1], t, schedule,
                                         predictor);
        const double inv_sigma = 1.0 / schedule.sigma(t);
        Latent zt = make_latent(x0.shape);
        for (std::size_t i = 0; i < zt.data.size(); ++i)
            zt.data[i] = static_cast<float>((x_prev.data[i] - mu.data[i]) * inv_sigma);
        z[static_cast<std::size_t>(t) - 1] = std::move(zt);
    }
    return z;
}

std::vector<Latent> ddpm_resynthesize(const std::vector<Latent>& trajectory,
                                      const std::vector<Latent>& noise_maps,
                                      const NoisePredictor& predictor,
                                      const NoiseSchedule& schedule) {
    if (trajectory.size() != noise_maps.size())
        throw std::invalid_argument("ddpm_resynthesize: trajectory and noise maps differ in length");
    if (trajectory.empty()) return {};
    const int t_max = static_cast<int>(trajectory.size());

    std::vector<Latent> out(static_cast<std::size_t>(t_max));
    Latent current = trajectory.back();
    for (int t = t_max; t >= 1; --t) {
        const Latent mu = posterior_mean(current, t, schedule, predictor);
        const double sigma = schedule.sigma(t);
        const Latent& zt = noise_maps[static_cast<std::size_t>(t) - 1];
        Latent x_prev = make_latent(current.shape);
        for (std::size_t i = 0; i < x_prev.data.size(); ++i)
            x_prev.data[i] = static_cast<float>(mu.data[i] + sigma * zt.data[i]);
        out[static_cast<std::size_t>(t) - 1] = x_prev;
        current = std::move(x_prev);
    }
    return out;
}

namespace {

struct DdimCoeffs {
    double carry;  // sqrt(ab_t / ab_{t-1})
    double noise;  // sqrt(1-ab_t) - carry * sqrt(1-ab_{t-1})
};

DdimCoeffs ddim_coeffs(const NoiseSchedule& schedule, int t) {
    const double ab_t = schedule.alpha_bar(t);
    const double ab_prev = schedule.alpha_bar(t - 1);
    DdimCoeffs c;
    c.carry = std::sqrt(ab_t / ab_prev);
    c.noise = std::sqrt(1.0 - ab_t) - c.carry * std::sqrt(1.0 - ab_prev);
    return c;
}

}  // namespace

Latent ddim_invert_step(const Latent& x_prev, int t, const NoiseSchedule& schedule,
                        const NoisePredictor& predictor) {
    check_step_range(t, 1, schedule.steps(), "ddim_invert_step");
    const DdimCoeffs c = ddim_coeffs(schedule, t);
    const Latent eps = predictor.predict(x_prev, t);
    require_same_shape(eps, x_prev, "ddim_invert_step");
    Latent out = make_latent(x_prev.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(c.carry * x_prev.data[i] + c.noise * eps.data[i]);
    return out;
}

Latent ddim_invert(const Latent& x0, const NoiseSchedule& schedule, int t,
                   const NoisePredictor& predictor) {
    check_step_range(t, 0, schedule.steps(), "ddim_invert");
    Latent x = x0;
    for (int s = 1; s <= t; ++s) x = ddim_invert_step(x, s, schedule, predictor);
    return x;
}

DdimTrace ddim_invert_with_trace(const Latent& x0, const NoiseSchedule& schedule, int t,
                                 const NoisePredictor& predictor) {
    check_step_range(t, 0, schedule.steps(), "ddim_invert_with_trace");
    DdimTrace trace;
    trace.x_t = x0;
    trace.eps_per_step.reserve(static_cast<std::size_t>(t));
    for (int s = 1; s <= t; ++s) {
        Latent eps = predictor.predict(trace.x_t, s);
        const DdimCoeffs c = ddim_coeffs(schedule, s);
        Latent next = make_latent(trace.x_t.shape);
        for (std::size_t i = 0; i < next.data.size(); ++i)
            next.data[i] =
                static_cast<float>(c.carry * trace.x_t.data[i] + c.noise * eps.data[i]);
        trace.eps_per_step.push_back(std::move(eps));
        trace.x_t = std::move(next);
    }
    return trace;
}

Latent ddim_invert_closed_form(const Latent& x0, const NoiseSchedule& schedule, int t,
                               const std::vector<Latent>& eps_per_step) {
    check_step_range(t, 0, schedule.steps(), "ddim_invert_closed_form");
    if (eps_per_step.size() != static_cast<std::size_t>(t))
        throw std::invalid_argument("ddim_invert_closed_form: need exactly t epsilon latents");
    const double ab_t = schedule.alpha_bar(t);
    const double sqrt_ab_t = std::sqrt(ab_t);

    std::vector<double> acc(x0.data.size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = sqrt_ab_t * x0.data[i];
    for (int i = 1; i <= t; ++i) {
        const Latent& eps = eps_per_step[static_cast<std::size_t>(i) - 1];
        require_same_shape(eps, x0, "ddim_invert_closed_form");
        const double ab_i = schedule.alpha_bar(i);
        const double ab_im1 = schedule.alpha_bar(i - 1);
        const double coef =
            sqrt_ab_t * (std::sqrt(1.0 / ab_i - 1.0) - std::sqrt(1.0 / ab_im1 - 1.0));
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += coef * eps.data[k];
    }

    Latent out = make_latent(x0.shape);
    for (std::size_t k = 0; k < acc.size(); ++k) out.data[k] = static_cast<float>(acc[k]);
    return out;
}

Latent ddim_denoise(const Latent& x_t, const NoiseSchedule& schedule, int t,
                    const NoisePredictor& predictor) {
    check_step_range(t, 0, schedule.steps(), "ddim_denoise");
    Latent x = x_t;
    for (int s = t; s >= 1; --s) {
        const DdimCoeffs c = ddim_coeffs(schedule, s);
        const Latent eps = predictor.predict(x, s);
        require_same_shape(eps, x, "ddim_denoise");
        Latent prev = make_latent(x.shape);
        for (std::size_t i = 0; i < prev.data.size(); ++i)
            prev.data[i] =
                static_cast<float>((x.data[i] - c.noise * eps.data[i]) / c.carry);
        x = std::move(prev);
    }
    return x;
}

Latent stem_preprocess(const Latent& observation, const InversionConfig& config,
                       const NoiseSchedule& schedule, std::uint64_t stream_id,
                       const NoisePredictor& predictor) {
    if (schedule.steps() != config.total_steps)
        throw std::invalid_argument("stem_preprocess: schedule has " +
                                    std::to_string(schedule.steps()) + " steps but config says " +
                                    std::to_string(config.total_steps));
    if (config.t_stop < 0 || config.t_stop > config.total_steps)
        throw std::invalid_argument("stem_preprocess: t_stop " + std::to_string(config.t_stop) +
                                    " outside [0," + std::to_string(config.total_steps) + "]");
    if (config.t_stop == 0) return observation;

    if (config.method == InversionMethod::ddim)
        return ddim_invert(observation, schedule, config.t_stop, predictor);

    NoiseKey key;
    key.seed = config.seed;
    key.stream_id = stream_id;
    if (!config.error_reduction)
        return ddpm_invert(observation, schedule, config.t_stop, key);

    // Full-fidelity path: the noise maps are extracted and discarded, the
    // returned latent is still the step-t_stop trajectory point (bitwise
    // equal to the single-shot form because the keying is per step).
    const auto trajectory = ddpm_invert_trajectory(observation, schedule, config.t_stop, key);
    ddpm_error_reduction(observation, trajectory, predictor, schedule);
    return trajectory.back();
}

}  // namespace stemob
