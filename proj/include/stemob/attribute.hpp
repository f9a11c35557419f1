#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stemob/latent.hpp"
#include "stemob/schedule.hpp"

namespace stemob {

enum class LossMethod { general, ddpm, ddim };

std::string to_string(LossMethod m);
LossMethod loss_method_from_string(const std::string& s);

// Overlap coefficient of two isotropic equal-variance Gaussians whose means
// are d apart: OVL = 1 - erf(d / (2*sqrt(2)*sigma)). For image-sized latents
// the multivariate overlap reduces exactly to this 1-D value along the
// mean-difference axis.
double ovl_gaussian(double d, double sigma);

// Half the overlap of the two step-t inversion marginals; ranges in [0, 1/2]
// and hits 1/2 exactly when the inputs coincide. Depends on the inputs only
// through ||y0 - x0||.
double attribute_loss_general(const Latent& x0, const Latent& y0, double alpha_bar_t,
                              double sigma);

// The general form with sigma = sqrt(1 - alpha_bar_t), i.e. the marginal of
// single-shot stochastic inversion. Strictly increasing in t.
double attribute_loss_ddpm(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                           int t);

// Deterministic-inversion analogue: the per-step noise variances accumulate,
// giving loss = 1/2 * [1 - erf(||y0-x0|| / (2*sqrt(2*V_t)))] with
// V_t = sum_{i<=t} (sqrt(1/ab_i - 1) - sqrt(1/ab_{i-1} - 1))^2. The
// predictor's mean shift cancels between two similar images and is dropped;
// for the zero/oracle/table predictors exercised here that is exact.
double attribute_loss_ddim(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                           int t);

// Norm-level entry points (the latent versions reduce to these).
double attribute_loss_ddpm_from_distance(double distance, const NoiseSchedule& schedule, int t);
double attribute_loss_ddim_from_distance(double distance, const NoiseSchedule& schedule, int t);

// Earliest step in [1, T] whose loss exceeds rho, or nullopt if the loss
// never crosses within the schedule. rho must lie in [0, 0.5).
std::optional<int> tau(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                       double rho, LossMethod method);
std::optional<int> tau_from_distance(double distance, const NoiseSchedule& schedule, double rho,
                                     LossMethod method);

struct LossCurve {
    LossMethod method = LossMethod::ddpm;
    std::vector<int> steps;     // 1..T
    std::vector<double> losses;
};

LossCurve loss_curve(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                     LossMethod method);

// Sampling estimate of the overlap integral min(p1, p2) along the
// mean-difference axis, with its standard error. Draws x ~ N(0, sigma^2)
// and averages min(1, p2(x)/p1(x)); unbiased, independent of the erf route.
struct OvlEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};
OvlEstimate ovl_monte_carlo(double d, double sigma, std::size_t n, std::uint64_t seed);

}  // namespace stemob
