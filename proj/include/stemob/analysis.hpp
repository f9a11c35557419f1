#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "stemob/attribute.hpp"
#include "stemob/latent.hpp"
#include "stemob/schedule.hpp"

namespace stemob {

// Mean over all unordered pairs, 2/(N(N-1)) * sum_{i<j} D(x_i, x_j).
// The pairwise metric is latent_distance (2-norm of the difference).
double intra_category_distance(const std::vector<Latent>& images);

// Mean over all ordered cross pairs, 1/(MN) * sum_i sum_j D(x_i, y_j).
double cross_category_distance(const std::vector<Latent>& a, const std::vector<Latent>& b);

// Categories in a fixed order with their member images.
struct CategorizedSet {
    std::vector<std::string> categories;
    std::vector<std::vector<Latent>> images;  // images[c] belong to categories[c]
};

// Symmetric matrix of mean pairwise distances; the diagonal holds the
// intra-category means. Note the values are distances, so a smaller diagonal
// means higher within-category similarity.
struct DistanceMatrix {
    std::vector<std::string> categories;
    std::vector<std::vector<double>> values;

    void write_csv(std::ostream& os) const;
};

DistanceMatrix build_distance_matrix(const CategorizedSet& set);

enum class PairTag { intra, cross };

struct TaggedPair {
    Latent first;
    Latent second;
    PairTag tag = PairTag::intra;
};

// Fraction of pairs whose attribute loss exceeds rho at each step, split by
// tag. Both series are nondecreasing in t because each pair's loss is.
struct IndistinguishabilityCurve {
    std::vector<int> steps;
    std::vector<double> intra_fraction;
    std::vector<double> cross_fraction;

    // Earliest step where the fraction reaches the given level, or -1.
    static int crossing_step(const std::vector<int>& steps, const std::vector<double>& fractions,
                             double level);

    void write_csv(std::ostream& os) const;
};

IndistinguishabilityCurve indistinguishability_curve(const std::vector<TaggedPair>& pairs,
                                                     const NoiseSchedule& schedule, double rho,
                                                     LossMethod method = LossMethod::ddpm);

// All intra pairs plus all cross pairs of a categorized set.
std::vector<TaggedPair> make_tagged_pairs(const CategorizedSet& set);

}  // namespace stemob
