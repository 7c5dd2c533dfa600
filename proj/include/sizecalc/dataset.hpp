#pragma once

#include <optional>

#include <Eigen/Dense>

#include "sizecalc/errors.hpp"

namespace sizecalc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// A development or validation sample: binary outcomes, an n x p covariate
// matrix and, for simulated data, the true event probabilities.
struct Dataset {
    VectorXd outcomes;
    MatrixXd covariates;
    std::optional<VectorXd> true_probs;

    Index size() const { return outcomes.size(); }
    Index n_predictors() const { return covariates.cols(); }

    double event_rate() const { return outcomes.mean(); }

    void validate() const
    {
        require(outcomes.size() >= 1, "dataset must have at least one row");
        require(covariates.cols() >= 1, "dataset must have at least one covariate");
        require(covariates.rows() == outcomes.size(), "covariate rows must match outcome length");
        if (true_probs)
            require(true_probs->size() == outcomes.size(), "true_probs length must match outcomes");
        for (Index i = 0; i < outcomes.size(); ++i)
            require(outcomes[i] == 0.0 || outcomes[i] == 1.0, "outcomes must be 0 or 1");
    }
};

} // namespace sizecalc
