#pragma once

#include <memory>
#include <vector>

#include "stemob/latent.hpp"
#include "stemob/schedule.hpp"

namespace stemob {

// Pluggable epsilon estimator for DDIM inversion and the error-reduction
// pass. Implementations must be safe for concurrent read-only evaluation.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Latent predict(const Latent& x, int step) const = 0;
};

// Always predicts zero noise; under it every inversion collapses to pure
// sqrt(alpha_bar) scaling.
class ZeroPredictor final : public NoisePredictor {
public:
    Latent predict(const Latent& x, int step) const override;
};

// Knows the clean latent and returns the epsilon consistent with it:
// eps = (x - sqrt(alpha_bar_t) * x0) / sqrt(1 - alpha_bar_t). Makes
// invert-then-denoise an exact round trip, which is what the tests lean on.
class OraclePredictor final : public NoisePredictor {
public:
    OraclePredictor(Latent x0, const NoiseSchedule& schedule);
    Latent predict(const Latent& x, int step) const override;

private:
    Latent x0_;
    const NoiseSchedule* schedule_;
};

// Replays a recorded step-indexed epsilon sequence, ignoring the input
// latent. Lets tests compare recursive and closed-form inversion exactly.
class TablePredictor final : public NoisePredictor {
public:
    explicit TablePredictor(std::vector<Latent> eps_by_step);
    Latent predict(const Latent& x, int step) const override;

private:
    std::vector<Latent> eps_by_step_;  // eps_by_step_[t-1] is step t
};

}  // namespace stemob
