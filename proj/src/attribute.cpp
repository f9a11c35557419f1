#include "stemob/attribute.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace stemob {
namespace {

void check_step(const NoiseSchedule& schedule, int t, const char* what) {
    if (t < 1 || t > schedule.steps())
        throw std::out_of_range(std::string(what) + ": step " + std::to_string(t) +
                                " outside [1," + std::to_string(schedule.steps()) + "]");
}

double ddim_variance_sum(const NoiseSchedule& schedule, int t) {
    double v = 0.0;
    for (int i = 1; i <= t; ++i) {
        const double term = std::sqrt(1.0 / schedule.alpha_bar(i) - 1.0) -
                            std::sqrt(1.0 / schedule.alpha_bar(i - 1) - 1.0);
        v += term * term;
    }
    return v;
}

}  // namespace

std::string to_string(LossMethod m) {
    switch (m) {
        case LossMethod::general: return "general";
        case LossMethod::ddpm: return "ddpm";
        case LossMethod::ddim: return "ddim";
    }
    return "?";
}

LossMethod loss_method_from_string(const std::string& s) {
    if (s == "general") return LossMethod::general;
    if (s == "ddpm") return LossMethod::ddpm;
    if (s == "ddim") return LossMethod::ddim;
    throw std::invalid_argument("unknown loss method '" + s + "'");
}

double ovl_gaussian(double d, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("ovl_gaussian: sigma must be positive");
    if (d < 0.0) throw std::invalid_argument("ovl_gaussian: distance must be nonnegative");
    return 1.0 - std::erf(d / (2.0 * std::sqrt(2.0) * sigma));
}

double attribute_loss_general(const Latent& x0, const Latent& y0, double alpha_bar_t,
                              double sigma) {
    if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0))
        throw std::invalid_argument("attribute_loss_general: alpha_bar outside (0,1]");
    const double d = std::sqrt(alpha_bar_t) * latent_distance(x0, y0);
    return 0.5 * ovl_gaussian(d, sigma);
}

double attribute_loss_ddpm_from_distance(double dist, const NoiseSchedule& schedule, int t) {
    check_step(schedule, t, "attribute_loss_ddpm");
    const double ab = schedule.alpha_bar(t);
    return 0.5 * ovl_gaussian(std::sqrt(ab) * dist, std::sqrt(1.0 - ab));
}

double attribute_loss_ddim_from_distance(double dist, const NoiseSchedule& schedule, int t) {
    check_step(schedule, t, "attribute_loss_ddim");
    return 0.5 * ovl_gaussian(dist, std::sqrt(ddim_variance_sum(schedule, t)));
}

double attribute_loss_ddpm(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                           int t) {
    return attribute_loss_ddpm_from_distance(latent_distance(x0, y0), schedule, t);
}

double attribute_loss_ddim(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                           int t) {
    return attribute_loss_ddim_from_distance(latent_distance(x0, y0), schedule, t);
}

std::optional<int> tau_from_distance(double dist, const NoiseSchedule& schedule, double rho,
                                     LossMethod method) {
    if (!(rho >= 0.0 && rho < 0.5))
        throw std::invalid_argument("tau: rho must lie in [0, 0.5)");
    for (int t = 1; t <= schedule.steps(); ++t) {
        const double loss = method == LossMethod::ddim
                                ? attribute_loss_ddim_from_distance(dist, schedule, t)
                                : attribute_loss_ddpm_from_distance(dist, schedule, t);
        if (loss > rho) return t;
    }
    return std::nullopt;
}

std::optional<int> tau(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                       double rho, LossMethod method) {
    if (method == LossMethod::general)
        throw std::invalid_argument("tau: pick ddpm or ddim (general needs an explicit sigma)");
    return tau_from_distance(latent_distance(x0, y0), schedule, rho, method);
}

LossCurve loss_curve(const Latent& x0, const Latent& y0, const NoiseSchedule& schedule,
                     LossMethod method) {
    if (method == LossMethod::general)
        throw std::invalid_argument("loss_curve: pick ddpm or ddim");
    const double dist = latent_distance(x0, y0);
    LossCurve curve;
    curve.method = method;
    curve.steps.reserve(static_cast<std::size_t>(schedule.steps()));
    curve.losses.reserve(static_cast<std::size_t>(schedule.steps()));
    for (int t = 1; t <= schedule.steps(); ++t) {
        curve.steps.push_back(t);
        curve.losses.push_back(method == LossMethod::ddim
                                   ? attribute_loss_ddim_from_distance(dist, schedule, t)
                                   : attribute_loss_ddpm_from_distance(dist, schedule, t));
    }
    return curve;
}

OvlEstimate ovl_monte_carlo(double d, double sigma, std::size_t n, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("ovl_monte_carlo: sigma must be positive");
    if (d < 0.0) throw std::invalid_argument("ovl_monte_carlo: distance must be nonnegative");
    if (n < 10000) throw std::invalid_argument("ovl_monte_carlo: need at least 1e4 samples");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = normal(rng);
        // density ratio p2/p1 for means 0 and d at equal variance
        const double ratio = std::exp((2.0 * x * d - d * d) * inv_two_var);
        const double v = std::min(1.0, ratio);
        sum += v;
        sum_sq += v * v;
    }
    OvlEstimate est;
    est.estimate = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - est.estimate * est.estimate);
    est.stderr_ = std::sqrt(var / static_cast<double>(n));
    return est;
}

}  // namespace stemob
