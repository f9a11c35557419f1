#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace stemob {

enum class ScheduleKind { linear, cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

// Variance schedule of a T-step diffusion process. All tables are held in
// double precision; the cumulative product alpha_bar would underflow float32
// for large T. alpha_bar has T+1 entries with alpha_bar[0] == 1 so that
// step-0 inversion is the identity.
class NoiseSchedule {
public:
    static NoiseSchedule linear(int steps, double beta_start = 1e-4, double beta_end = 0.02);
    static NoiseSchedule cosine(int steps, double offset = 0.008, double max_beta = 0.999);

    ScheduleKind kind() const { return kind_; }
    int steps() const { return static_cast<int>(beta_.size()); }

    // t in [1, T]
    double beta(int t) const;
    double alpha(int t) const;
    double sigma(int t) const;  // sqrt(1 - alpha[t])

    // t in [0, T]
    double alpha_bar(int t) const;

    // CSV rows `t,beta,alpha,alpha_bar,sigma`, one per step, 17 significant
    // digits (lossless for double).
    void dump_csv(std::ostream& os) const;

private:
    NoiseSchedule(ScheduleKind kind, std::vector<double> beta);

    ScheduleKind kind_;
    std::vector<double> beta_;       // beta_[t-1] is step t
    std::vector<double> alpha_;      // 1 - beta
    std::vector<double> alpha_bar_;  // alpha_bar_[t], size T+1, [0] == 1
};

}  // namespace stemob
