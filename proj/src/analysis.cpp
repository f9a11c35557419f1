#include "stemob/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace stemob {
namespace {

// Neumaier-compensated running sum; aggregation order is fixed by the
// callers, so results are reproducible regardless of parallel pair
// evaluation upstream.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

double intra_category_distance(const std::vector<Latent>& images) {
    const std::size_t n = images.size();
    if (n < 2) throw std::invalid_argument("intra_category_distance: need at least 2 images");
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum.add(latent_distance(images[i], images[j]));
    return sum.value() * 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double cross_category_distance(const std::vector<Latent>& a, const std::vector<Latent>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("cross_category_distance: empty category");
    CompensatedSum sum;
    for (const Latent& x : a)
        for (const Latent& y : b) sum.add(latent_distance(x, y));
    return sum.value() / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

DistanceMatrix build_distance_matrix(const CategorizedSet& set) {
    const std::size_t k = set.categories.size();
    if (k == 0) throw std::invalid_argument("build_distance_matrix: no categories");
    if (set.images.size() != k)
        throw std::invalid_argument("build_distance_matrix: category/image list size mismatch");
    for (std::size_t c = 0; c < k; ++c)
        if (set.images[c].size() < 2)
            throw std::invalid_argument("build_distance_matrix: category '" + set.categories[c] +
                                        "' has fewer than 2 images");

    DistanceMatrix m;
    m.categories = set.categories;
    m.values.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        m.values[i][i] = intra_category_distance(set.images[i]);
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = cross_category_distance(set.images[i], set.images[j]);
            m.values[i][j] = d;
            m.values[j][i] = d;
        }
    }
    return m;
}

void DistanceMatrix::write_csv(std::ostream& os) const {
    os << "category";
    for (const auto& c : categories) os << "," << c;
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < categories.size(); ++i) {
        os << categories[i];
        for (std::size_t j = 0; j < categories.size(); ++j) {
            std::snprintf(buf, sizeof(buf), ",%.17g", values[i][j]);
            os << buf;
        }
        os << "\n";
    }
}

IndistinguishabilityCurve indistinguishability_curve(const std::vector<TaggedPair>& pairs,
                                                     const NoiseSchedule& schedule, double rho,
                                                     LossMethod method) {
    if (pairs.empty()) throw std::invalid_argument("indistinguishability_curve: no pairs");
    if (!(rho >= 0.0 && rho < 0.5))
        throw std::invalid_argument("indistinguishability_curve: rho must lie in [0, 0.5)");

    std::vector<double> dist;
    std::vector<PairTag> tag;
    dist.reserve(pairs.size());
    tag.reserve(pairs.size());
    std::size_t n_intra = 0, n_cross = 0;
    for (const TaggedPair& p : pairs) {
        dist.push_back(latent_distance(p.first, p.second));
        tag.push_back(p.tag);
        (p.tag == PairTag::intra ? n_intra : n_cross)++;
    }

    IndistinguishabilityCurve curve;
    for (int t = 1; t <= schedule.steps(); ++t) {
        std::size_t over_intra = 0, over_cross = 0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            const double loss = method == LossMethod::ddim
                                    ? attribute_loss_ddim_from_distance(dist[i], schedule, t)
                                    : attribute_loss_ddpm_from_distance(dist[i], schedule, t);
            if (loss > rho) (tag[i] == PairTag::intra ? over_intra : over_cross)++;
        }
        curve.steps.push_back(t);
        curve.intra_fraction.push_back(
            n_intra ? static_cast<double>(over_intra) / static_cast<double>(n_intra) : 0.0);
        curve.cross_fraction.push_back(
            n_cross ? static_cast<double>(over_cross) / static_cast<double>(n_cross) : 0.0);
    }
    return curve;
}

int IndistinguishabilityCurve::crossing_step(const std::vector<int>& steps,
                                             const std::vector<double>& fractions, double level) {
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (fractions[i] >= level) return steps[i];
    return -1;
}

void IndistinguishabilityCurve::write_csv(std::ostream& os) const {
    os << "t,intra_fraction,cross_fraction\n";
    char buf[96];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", steps[i], intra_fraction[i],
                      cross_fraction[i]);
        os << buf;
    }
}

std::vector<TaggedPair> make_tagged_pairs(const CategorizedSet& set) {
    std::vector<TaggedPair> pairs;
    for (std::size_t c = 0; c < set.images.size(); ++c) {
        const auto& imgs = set.images[c];
        for (std::size_t i = 0; i < imgs.size(); ++i)
            for (std::size_t j = i + 1; j < imgs.size(); ++j)
                pairs.push_back({imgs[i], imgs[j], PairTag::intra});
    }
    for (std::size_t a = 0; a < set.images.size(); ++a)
        for (std::size_t b = a + 1; b < set.images.size(); ++b)
            for (const Latent& x : set.images[a])
                for (const Latent& y : set.images[b]) pairs.push_back({x, y, PairTag::cross});
    return pairs;
}

}  // namespace stemob
