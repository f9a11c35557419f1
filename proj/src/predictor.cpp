#include "stemob/predictor.hpp"

#include <cmath>

namespace stemob {

Latent ZeroPredictor::predict(const Latent& x, int /*step*/) const {
    return make_latent(x.shape);
}

OraclePredictor::OraclePredictor(Latent x0, const NoiseSchedule& schedule)
    : x0_(std::move(x0)), schedule_(&schedule) {
    validate_latent(x0_, "oracle x0");
}

Latent OraclePredictor::predict(const Latent& x, int step) const {
    require_same_shape(x, x0_, "oracle predict");
    if (step < 1 || step > schedule_->steps())
        throw std::out_of_range("oracle predict: step " + std::to_string(step) + " outside [1," +
                                std::to_string(schedule_->steps()) + "]");
    const double ab = schedule_->alpha_bar(step);
    const double scale = std::sqrt(ab);
    const double denom = std::sqrt(1.0 - ab);
    Latent eps = make_latent(x.shape);
    for (std::size_t i = 0; i < eps.data.size(); ++i)
        eps.data[i] = static_cast<float>((x.data[i] - scale * x0_.data[i]) / denom);
    return eps;
}

TablePredictor::TablePredictor(std::vector<Latent> eps_by_step)
    : eps_by_step_(std::move(eps_by_step)) {}

Latent TablePredictor::predict(const Latent& x, int step) const {
    if (step < 1 || static_cast<std::size_t>(step) > eps_by_step_.size())
        throw std::out_of_range("table predict: no entry for step " + std::to_string(step));
    const Latent& eps = eps_by_step_[static_cast<std::size_t>(step) - 1];
    require_same_shape(x, eps, "table predict");
    return eps;
}

}  // namespace stemob
