#include "stemob/latent.hpp"

#include <cmath>
#include <sstream>

namespace stemob {

Latent make_latent(std::vector<std::size_t> shape) {
    if (shape.empty()) throw std::invalid_argument("latent shape must not be empty");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("latent shape has a zero dimension");
        n *= d;
    }
    Latent out;
    out.shape = std::move(shape);
    out.data.assign(n, 0.0f);
    return out;
}

void validate_latent(const Latent& x, const std::string& what) {
    if (x.shape.empty()) throw std::invalid_argument(what + ": empty shape");
    std::size_t n = 1;
    for (std::size_t d : x.shape) {
        if (d == 0) throw std::invalid_argument(what + ": zero dimension");
        n *= d;
    }
    if (n != x.data.size())
        throw std::invalid_argument(what + ": data length " + std::to_string(x.data.size()) +
                                    " does not match shape " + shape_to_string(x.shape));
    for (float v : x.data)
        if (!std::isfinite(v)) throw std::invalid_argument(what + ": non-finite value");
}

void require_same_shape(const Latent& a, const Latent& b, const std::string& what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(what + ": shape mismatch " + shape_to_string(a.shape) +
                                    " vs " + shape_to_string(b.shape));
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

double latent_distance(const Latent& x, const Latent& y) {
    require_same_shape(x, y, "latent_distance");
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double diff = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
        const double v = diff * diff;
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return std::sqrt(sum + comp);
}

}  // namespace stemob
