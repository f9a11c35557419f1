#include "stemob/regression.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace stemob {

std::vector<double> RegressorModel::predict(const Latent& input) const {
    if (input.data.size() != feature_dim)
        throw std::invalid_argument("predict: input has " + std::to_string(input.data.size()) +
                                    " features, model expects " + std::to_string(feature_dim));
    std::vector<double> out(label_dim);
    for (std::size_t m = 0; m < label_dim; ++m) {
        double acc = bias[m];
        const double* w = weights.data() + m * feature_dim;
        for (std::size_t j = 0; j < feature_dim; ++j)
            acc += w[j] * ((input.data[j] - feature_mean[j]) / feature_scale[j]);
        out[m] = acc;
    }
    return out;
}

double RegressorModel::weight_norm() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return std::sqrt(s);
}

RegressorModel fit_regressor(const std::vector<Latent>& inputs,
                             const std::vector<std::vector<double>>& labels, double lambda) {
    if (inputs.size() < 2) throw std::invalid_argument("fit_regressor: need at least 2 samples");
    if (inputs.size() != labels.size())
        throw std::invalid_argument("fit_regressor: inputs and labels differ in count");
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_regressor: lambda must be positive");

    const std::size_t n = inputs.size();
    const std::size_t d = inputs[0].data.size();
    const std::size_t m = labels[0].size();
    if (m == 0) throw std::invalid_argument("fit_regressor: empty labels");
    for (const Latent& x : inputs)
        if (x.data.size() != d)
            throw std::invalid_argument("fit_regressor: inconsistent feature dimensions");
    for (const auto& y : labels)
        if (y.size() != m) throw std::invalid_argument("fit_regressor: inconsistent label dims");

    RegressorModel model;
    model.feature_dim = d;
    model.label_dim = m;
    model.lambda = lambda;
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 1.0);

    for (const Latent& x : inputs)
        for (std::size_t j = 0; j < d; ++j) model.feature_mean[j] += x.data[j];
    for (double& mu : model.feature_mean) mu /= static_cast<double>(n);

    std::vector<double> var(d, 0.0);
    for (const Latent& x : inputs)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x.data[j] - model.feature_mean[j];
            var[j] += c * c;
        }
    bool any_varying = false;
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n - 1));
        if (sd > 1e-12) {
            model.feature_scale[j] = sd;
            any_varying = true;
        }
    }
    if (!any_varying)
        throw std::invalid_argument("fit_regressor: degenerate input, all samples identical");

    Eigen::MatrixXd Z(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (inputs[i].data[j] - model.feature_mean[j]) / model.feature_scale[j];

    Eigen::MatrixXd Yc(n, m);
    model.bias.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) model.bias[k] += labels[i][k];
    for (double& b : model.bias) b /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k)
            Yc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                labels[i][k] - model.bias[k];

    // Kernel-form ridge: W = Z^T (Z Z^T + lambda I)^-1 Yc
    Eigen::MatrixXd K = Z * Z.transpose();
    K.diagonal().array() += lambda;
    const Eigen::MatrixXd A = Eigen::LLT<Eigen::MatrixXd>(K).solve(Yc);
    const Eigen::MatrixXd W = Z.transpose() * A;  // d x m

    model.weights.assign(m * d, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < d; ++j)
            model.weights[k * d + j] =
                W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    return model;
}

EvalReport evaluate(const RegressorModel& model, const std::vector<Latent>& inputs,
                    const std::vector<std::vector<double>>& labels, double radius) {
    if (inputs.empty()) throw std::invalid_argument("evaluate: empty split");
    if (inputs.size() != labels.size())
        throw std::invalid_argument("evaluate: inputs and labels differ in count");

    EvalReport report;
    report.count = inputs.size();
    std::size_t hits = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto pred = model.predict(inputs[i]);
        if (pred.size() != labels[i].size())
            throw std::invalid_argument("evaluate: label dimension mismatch");
        double sq = 0.0;
        for (std::size_t k = 0; k < pred.size(); ++k) {
            const double diff = pred[k] - labels[i][k];
            sq += diff * diff;
        }
        total += sq;
        if (std::sqrt(sq) <= radius) ++hits;
    }
    report.mse = total / static_cast<double>(inputs.size());
    report.success_rate = static_cast<double>(hits) / static_cast<double>(inputs.size());
    return report;
}

}  // namespace stemob
