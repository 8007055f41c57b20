#include "supreme/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "supreme/error.hpp"

namespace supreme {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("perturbation: cannot parse " + what + " from '" + s + "'");
    }
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    const double v = parse_double(s, what);
    if (v < 0.0 || v != std::floor(v)) {
        throw ValidationError("perturbation: " + what + " must be a non-negative integer, got '" +
                              s + "'");
    }
    return static_cast<std::size_t>(v);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

Perturbation Perturbation::parse(const std::string& text) {
    Perturbation p;
    if (text.empty() || text == "none") return p;
    for (const std::string& token : split(text, '+')) {
        const auto parts = split(token, ':');
        if (parts.empty() || parts[0].empty()) {
            throw ValidationError("perturbation: empty step in '" + text + "'");
        }
        Step step{};
        const std::string& name = parts[0];
        if (name == "noise" && parts.size() == 2) {
            step.kind = Step::Kind::gaussian_noise;
            step.sigma = parse_double(parts[1], "noise sigma");
            if (step.sigma < 0.0) throw ValidationError("perturbation: noise sigma must be >= 0");
        } else if (name == "relnoise" && parts.size() == 2) {
            step.kind = Step::Kind::relative_noise;
            step.factor = parse_double(parts[1], "relnoise factor");
            if (step.factor < 0.0) throw ValidationError("perturbation: relnoise factor must be >= 0");
        } else if (name == "dropout" && parts.size() == 2) {
            step.kind = Step::Kind::coordinate_dropout;
            step.rate = parse_double(parts[1], "dropout rate");
            if (step.rate < 0.0 || step.rate >= 1.0) {
                throw ValidationError("perturbation: dropout rate must be in [0, 1)");
            }
        } else if (name == "scale" && parts.size() == 3) {
            step.kind = Step::Kind::random_scale;
            step.lo = parse_double(parts[1], "scale lo");
            step.hi = parse_double(parts[2], "scale hi");
            if (step.lo <= 0.0 || step.hi < step.lo) {
                throw ValidationError("perturbation: scale range must satisfy 0 < lo <= hi");
            }
        } else if (name == "flip" && parts.size() == 3) {
            step.kind = Step::Kind::horizontal_flip;
            step.width = parse_size(parts[1], "flip width");
            step.height = parse_size(parts[2], "flip height");
            if (step.width == 0 || step.height == 0) {
                throw ValidationError("perturbation: flip width and height must be positive");
            }
        } else {
            throw ValidationError("perturbation: unknown step '" + token + "'");
        }
        p.steps_.push_back(std::move(step));
    }
    return p;
}

void Perturbation::resolve(const Matrix& reference_features, const std::vector<int>* groups) {
    const std::size_t n = reference_features.rows;
    const std::size_t d = reference_features.cols;
    if (groups && groups->size() != n) {
        throw ValidationError("perturbation: one group label per reference row required");
    }
    for (Step& step : steps_) {
        if (step.kind != Step::Kind::relative_noise) continue;
        if (n < 2) throw ValidationError("perturbation: relnoise needs at least 2 reference rows");
        step.sigma_per_dim.assign(d, 0.0);

        // per-dimension means, overall or per group
        std::size_t group_count = 1;
        std::vector<std::size_t> of(n, 0);
        if (groups) {
            int max_label = 0;
            for (int g : *groups) {
                if (g < 0) throw ValidationError("perturbation: negative group label");
                max_label = std::max(max_label, g);
            }
            group_count = static_cast<std::size_t>(max_label) + 1;
            for (std::size_t i = 0; i < n; ++i) of[i] = static_cast<std::size_t>((*groups)[i]);
        }
        Matrix means(group_count, d);
        std::vector<std::size_t> sizes(group_count, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++sizes[of[i]];
            for (std::size_t j = 0; j < d; ++j) means.at(of[i], j) += reference_features.at(i, j);
        }
        for (std::size_t g = 0; g < group_count; ++g) {
            if (sizes[g] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) means.at(g, j) /= static_cast<double>(sizes[g]);
        }
        for (std::size_t j = 0; j < d; ++j) {
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = reference_features.at(i, j) - means.at(of[i], j);
                var += diff * diff;
            }
            var /= static_cast<double>(n);
            step.sigma_per_dim[j] = step.factor * std::sqrt(var);
        }
    }
}

void Perturbation::validate(std::size_t dim) const {
    for (const Step& step : steps_) {
        if (step.kind == Step::Kind::horizontal_flip && step.width * step.height != dim) {
            throw ValidationError("perturbation: flip " + std::to_string(step.width) + "x" +
                                  std::to_string(step.height) + " does not factor dimension " +
                                  std::to_string(dim));
        }
        if (step.kind == Step::Kind::relative_noise && step.sigma_per_dim.size() != dim) {
            throw ValidationError(
                "perturbation: relnoise is unresolved; call resolve() with reference features");
        }
    }
}

Matrix Perturbation::apply(const Matrix& batch, Rng& rng) const {
    validate(batch.cols);
    Matrix out = batch;
    for (const Step& step : steps_) {
        switch (step.kind) {
            case Step::Kind::gaussian_noise:
                for (double& v : out.data) v += step.sigma * rng.normal();
                break;
            case Step::Kind::relative_noise:
                for (std::size_t i = 0; i < out.rows; ++i) {
                    for (std::size_t j = 0; j < out.cols; ++j) {
                        out.at(i, j) += step.sigma_per_dim[j] * rng.normal();
                    }
                }
                break;
            case Step::Kind::coordinate_dropout:
                for (double& v : out.data) {
                    if (rng.uniform01() < step.rate) v = 0.0;
                }
                break;
            case Step::Kind::random_scale:
                for (std::size_t i = 0; i < out.rows; ++i) {
                    const double u = rng.uniform(step.lo, step.hi);
                    for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) *= u;
                }
                break;
            case Step::Kind::horizontal_flip:
                for (std::size_t i = 0; i < out.rows; ++i) {
                    double* row = out.row(i);
                    for (std::size_t r = 0; r < step.height; ++r) {
                        std::reverse(row + r * step.width, row + (r + 1) * step.width);
                    }
                }
                break;
        }
    }
    return out;
}

std::string Perturbation::describe() const {
    if (steps_.empty()) return "none";
    std::string s;
    for (const Step& step : steps_) {
        if (!s.empty()) s += "+";
        switch (step.kind) {
            case Step::Kind::gaussian_noise:
                s += "noise:" + fmt(step.sigma);
                break;
            case Step::Kind::relative_noise:
                s += "relnoise:" + fmt(step.factor);
                break;
            case Step::Kind::coordinate_dropout:
                s += "dropout:" + fmt(step.rate);
                break;
            case Step::Kind::random_scale:
                s += "scale:" + fmt(step.lo) + ":" + fmt(step.hi);
                break;
            case Step::Kind::horizontal_flip:
                s += "flip:" + std::to_string(step.width) + ":" + std::to_string(step.height);
                break;
        }
    }
    return s;
}

}  // namespace supreme
