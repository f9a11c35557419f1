#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stemob {

// Dense row-major float32 tensor. Observations, noise fields and inverted
// latents all use this one representation.
struct Latent {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    Latent() = default;
    Latent(std::vector<std::size_t> shape_, std::vector<float> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {}

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    bool same_shape(const Latent& other) const { return shape == other.shape; }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }
};

// Zero-filled latent of the given shape. Throws on empty or zero-sized dims.
Latent make_latent(std::vector<std::size_t> shape);

// Enforces the Latent invariants: nonempty shape, no zero dimension,
// data length == product of dims, all values finite.
void validate_latent(const Latent& x, const std::string& what = "latent");

void require_same_shape(const Latent& a, const Latent& b, const std::string& what);

std::string shape_to_string(const std::vector<std::size_t>& shape);

// Euclidean norm of the elementwise difference, accumulated in compensated
// double precision so batching and evaluation order never change the value.
double latent_distance(const Latent& x, const Latent& y);

}  // namespace stemob
