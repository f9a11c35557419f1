#include "stemob/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace stemob {

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::linear ? "linear" : "cosine";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::linear;
    if (s == "cosine") return ScheduleKind::cosine;
    throw std::invalid_argument("unknown schedule kind '" + s + "'");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> beta)
    : kind_(kind), beta_(std::move(beta)) {
    const std::size_t T = beta_.size();
    alpha_.resize(T);
    alpha_bar_.resize(T + 1);
    alpha_bar_[0] = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (!(beta_[t] > 0.0 && beta_[t] < 1.0))
            throw std::invalid_argument("schedule produced beta outside (0,1) at step " +
                                        std::to_string(t + 1));
        alpha_[t] = 1.0 - beta_[t];
        alpha_bar_[t + 1] = alpha_bar_[t] * alpha_[t];
        if (!(alpha_bar_[t + 1] > 0.0))
            throw std::invalid_argument("alpha_bar underflowed to zero at step " +
                                        std::to_string(t + 1));
    }
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
    if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
    if (!(beta_start > 0.0 && beta_start < 1.0) || !(beta_end > 0.0 && beta_end < 1.0))
        throw std::invalid_argument("beta endpoints must lie in (0,1)");
    if (beta_start > beta_end) throw std::invalid_argument("beta_start must be <= beta_end");
    std::vector<double> beta(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        beta[t] = steps == 1 ? beta_start
                             : beta_start + (beta_end - beta_start) * t / (steps - 1);
    }
    return NoiseSchedule(ScheduleKind::linear, std::move(beta));
}

NoiseSchedule NoiseSchedule::cosine(int steps, double offset, double max_beta) {
    if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
    if (!(offset > 0.0)) throw std::invalid_argument("cosine offset must be positive");
    if (!(max_beta > 0.0 && max_beta < 1.0))
        throw std::invalid_argument("max_beta must lie in (0,1)");
    auto f = [&](int t) {
        double x = ((static_cast<double>(t) / steps + offset) / (1.0 + offset)) * M_PI / 2.0;
        double c = std::cos(x);
        return c * c;
    };
    std::vector<double> beta(static_cast<std::size_t>(steps));
    for (int t = 1; t <= steps; ++t) {
        beta[t - 1] = std::min(1.0 - f(t) / f(t - 1), max_beta);
    }
    return NoiseSchedule(ScheduleKind::cosine, std::move(beta));
}

double NoiseSchedule::beta(int t) const {
    if (t < 1 || t > steps())
        throw std::out_of_range("beta: step " + std::to_string(t) + " outside [1," +
                                std::to_string(steps()) + "]");
    return beta_[t - 1];
}

double NoiseSchedule::alpha(int t) const {
    if (t < 1 || t > steps())
        throw std::out_of_range("alpha: step " + std::to_string(t) + " outside [1," +
                                std::to_string(steps()) + "]");
    return alpha_[t - 1];
}

double NoiseSchedule::sigma(int t) const { return std::sqrt(1.0 - alpha(t)); }

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > steps())
        throw std::out_of_range("alpha_bar: step " + std::to_string(t) + " outside [0," +
                                std::to_string(steps()) + "]");
    return alpha_bar_[t];
}

void NoiseSchedule::dump_csv(std::ostream& os) const {
    os << "t,beta,alpha,alpha_bar,sigma\n";
    char buf[128];
    for (int t = 1; t <= steps(); ++t) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", t, beta(t), alpha(t),
                      alpha_bar(t), sigma(t));
        os << buf;
    }
}

}  // namespace stemob
