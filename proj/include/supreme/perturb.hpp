#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "supreme/matrix.hpp"
#include "supreme/rng.hpp"

namespace supreme {

// Stochastic input transformations used to manufacture positive pairs.
// A Perturbation is a composition of steps; the empty composition is the
// identity. apply() is a pure function of (steps, rng state, input) and
// never modifies its input.
class Perturbation {
public:
    struct Step {
        enum class Kind {
            gaussian_noise,     // additive N(0, sigma^2) per coordinate
            relative_noise,     // sigma = factor * per-dimension std of reference data
            coordinate_dropout, // zero each coordinate with probability rate
            random_scale,       // multiply each row by u ~ Uniform(lo, hi)
            horizontal_flip     // treat a row as a height x width image, mirror columns
        };
        Kind kind;
        double sigma = 0.0;
        double factor = 0.0;
        double rate = 0.0;
        double lo = 0.0, hi = 0.0;
        std::size_t width = 0, height = 0;
        std::vector<double> sigma_per_dim;  // resolved for relative_noise
    };

    Perturbation() = default;

    // Grammar: steps joined by '+'. Tokens:
    //   none | noise:SIGMA | relnoise:FACTOR | dropout:RATE | scale:LO:HI | flip:W:H
    static Perturbation parse(const std::string& text);

    // Computes per-dimension stds for relative_noise steps. When `groups`
    // is given (one label per reference row), the std pools within-group
    // deviations so the noise scale tracks cluster width rather than the
    // overall spread of the data.
    void resolve(const Matrix& reference_features, const std::vector<int>* groups = nullptr);

    void validate(std::size_t dim) const;
    Matrix apply(const Matrix& batch, Rng& rng) const;
    bool identity() const { return steps_.empty(); }
    std::string describe() const;
    const std::vector<Step>& steps() const { return steps_; }
    void add_step(Step step) { steps_.push_back(std::move(step)); }

private:
    std::vector<Step> steps_;
};

}  // namespace supreme
