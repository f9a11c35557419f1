#pragma once

#include <vector>

#include "stemob/latent.hpp"

namespace stemob {

// Closed-form ridge readout over standardized flattened pixels, the minimal
// stand-in for a visual policy. The per-feature normalization statistics are
// frozen at fit time and travel with the model.
struct RegressorModel {
    std::size_t feature_dim = 0;
    std::size_t label_dim = 0;
    double lambda = 0.0;
    std::vector<double> feature_mean;   // feature_dim
    std::vector<double> feature_scale;  // feature_dim, strictly positive
    std::vector<double> weights;        // label_dim x feature_dim, row-major
    std::vector<double> bias;           // label_dim

    std::vector<double> predict(const Latent& input) const;
    double weight_norm() const;
};

// Solves the ridge normal equations in their kernel form (n x n), which is
// the cheap side for pixel features. Throws if the normalized design matrix
// is all zeros (every sample identical) instead of fitting a vacuous model.
RegressorModel fit_regressor(const std::vector<Latent>& inputs,
                             const std::vector<std::vector<double>>& labels, double lambda);

struct EvalReport {
    double mse = 0.0;           // mean squared Euclidean label error
    double success_rate = 0.0;  // fraction of predictions within the radius
    std::size_t count = 0;
};

EvalReport evaluate(const RegressorModel& model, const std::vector<Latent>& inputs,
                    const std::vector<std::vector<double>>& labels, double radius);

}  // namespace stemob
