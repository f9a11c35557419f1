#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemob/latent.hpp"
#include "stemob/noise.hpp"
#include "stemob/predictor.hpp"
#include "stemob/schedule.hpp"

namespace stemob {

enum class InversionMethod { ddpm, ddim };

std::string to_string(InversionMethod m);
InversionMethod inversion_method_from_string(const std::string& s);

struct InversionConfig {
    InversionMethod method = InversionMethod::ddpm;
    int t_stop = 15;  // inversion depth t out of total steps T
    int total_steps = 50;
    std::uint64_t seed = 0;
    bool error_reduction = false;
};

// x_t = sqrt(alpha_bar) * x0 + sqrt(1 - alpha_bar) * eps, evaluated in
// double and stored as float32.
Latent scale_and_noise(const Latent& x0, double alpha_bar, const Latent& eps);

// Single-shot stochastic inversion to step t: the noise is drawn fresh for
// this step only, so no other step needs to be computed.
Latent ddpm_invert(const Latent& x0, const NoiseSchedule& schedule, int t, const NoiseKey& key);

// [x_1 .. x_t_max], each sampled with a step-distinct key derived from
// base_key, so the per-step noises are mutually independent.
std::vector<Latent> ddpm_invert_trajectory(const Latent& x0, const NoiseSchedule& schedule,
                                           int t_max, const NoiseKey& base_key);

// Consistent noise-map extraction, processed in reverse step order:
// z_t = (x_{t-1} - mu(x_t)) / sigma_t, where mu is the reverse-process mean
// reconstructed from the predictor's epsilon estimate. z_1 needs the clean
// latent, which is why x0 is an explicit argument. Returns [z_1 .. z_t_max].
std::vector<Latent> ddpm_error_reduction(const Latent& x0, const std::vector<Latent>& trajectory,
                                         const NoisePredictor& predictor,
                                         const NoiseSchedule& schedule);

// Re-runs the reverse process x_{t-1} = mu(x_t) + sigma_t * z_t from the
// deepest trajectory point down to x_0. Returns [x_0 .. x_{t_max-1}].
std::vector<Latent> ddpm_resynthesize(const std::vector<Latent>& trajectory,
                                      const std::vector<Latent>& noise_maps,
                                      const NoisePredictor& predictor,
                                      const NoiseSchedule& schedule);

// One deterministic inversion step t-1 -> t:
//   x_t = sqrt(ab_t/ab_{t-1}) * x_{t-1}
//       + (sqrt(1-ab_t) - sqrt(ab_t/ab_{t-1}) * sqrt(1-ab_{t-1})) * eps
// with eps = predict(x_{t-1}, t). Equivalent to stepping the update
// x_t/sqrt(ab_t) = x_{t-1}/sqrt(ab_{t-1}) + (sqrt(1/ab_t - 1) -
// sqrt(1/ab_{t-1} - 1)) * eps.
Latent ddim_invert_step(const Latent& x_prev, int t, const NoiseSchedule& schedule,
                        const NoisePredictor& predictor);

// t-fold application of ddim_invert_step starting from x0.
Latent ddim_invert(const Latent& x0, const NoiseSchedule& schedule, int t,
                   const NoisePredictor& predictor);

// Same recursion, but records the per-step predictor outputs so the closed
// form below can be checked against it.
struct DdimTrace {
    Latent x_t;
    std::vector<Latent> eps_per_step;  // eps used at steps 1..t
};
DdimTrace ddim_invert_with_trace(const Latent& x0, const NoiseSchedule& schedule, int t,
                                 const NoisePredictor& predictor);

// Direct evaluation of the unrolled recursion:
//   x_t = sqrt(ab_t) * x0
//       + sum_i sqrt(ab_t) * (sqrt(1/ab_i - 1) - sqrt(1/ab_{i-1} - 1)) * eps_i
Latent ddim_invert_closed_form(const Latent& x0, const NoiseSchedule& schedule, int t,
                               const std::vector<Latent>& eps_per_step);

// Algebraic inverse of ddim_invert_step applied from depth t down to 0, with
// the predictor evaluated at the current iterate. Exact for predictors whose
// output does not depend on the latent (zero, table); for the oracle the
// predicted clean latent is exact at every step, so the round trip closes.
Latent ddim_denoise(const Latent& x_t, const NoiseSchedule& schedule, int t,
                    const NoisePredictor& predictor);

// The preprocessing operator: partially inverts an observation by
// config.t_stop of config.total_steps steps. DDPM is the single-shot form
// (no trajectory and no error reduction; with error_reduction set the
// noise-map pass runs for fidelity but the returned latent is the same).
// DDIM runs the deterministic recursion with the given predictor.
Latent stem_preprocess(const Latent& observation, const InversionConfig& config,
                       const NoiseSchedule& schedule, std::uint64_t stream_id,
                       const NoisePredictor& predictor = ZeroPredictor{});

}  // namespace stemob
