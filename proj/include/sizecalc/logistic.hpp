#pragma once

#include <optional>

#include <Eigen/Dense>

#include "sizecalc/dataset.hpp"

namespace sizecalc {

struct IrlsControl {
    double deviance_tol = 1e-10;
    double score_tol = 1e-8;
    int max_iter = 50;
    // |coefficient| above this at termination is treated as separation.
    double separation_bound = 20.0;
};

struct FittedLogistic {
    double intercept = 0.0;
    VectorXd slopes;
    bool converged = false;
    int iterations = 0;
    double max_abs_score = 0.0;
    double deviance = 0.0;
    // Inverse Fisher information at the solution, ordered (intercept, slopes...).
    MatrixXd covariance;

    VectorXd coefficients() const
    {
        VectorXd beta(slopes.size() + 1);
        beta << intercept, slopes;
        return beta;
    }

    template <typename Derived>
    VectorXd linear_predictor(const Eigen::MatrixBase<Derived>& x) const
    {
        return (x * slopes).array() + intercept;
    }
};

struct CalibrationFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
};

struct FitOptions {
    std::optional<VectorXd> offset;
    // Keep the slopes at zero and estimate the intercept only (with the offset).
    bool fixed_slopes = false;
    // Warm start, ordered (intercept, slopes...).
    std::optional<VectorXd> start;
    IrlsControl control{};
};

// Maximum likelihood logistic regression by IRLS with step halving. Throws
// DegenerateOutcome when only one class is present and NonConvergence on
// separation or iteration cap.
FittedLogistic fit_logistic(const Dataset& data, const FitOptions& options = {});

// Same, on raw arrays (no dataset invariants beyond matching lengths).
FittedLogistic fit_logistic(const Eigen::Ref<const MatrixXd>& covariates,
                            const Eigen::Ref<const VectorXd>& outcomes,
                            const FitOptions& options = {});

// Logistic recalibration of outcomes on a linear predictor: returns (a, s)
// of logit P(Y=1) = a + s * lp.
CalibrationFit fit_calibration(const Eigen::Ref<const VectorXd>& outcomes,
                               const Eigen::Ref<const VectorXd>& linear_predictor);

// Intercept of the recalibration model with the slope fixed at one.
double calibration_in_large(const Eigen::Ref<const VectorXd>& outcomes,
                            const Eigen::Ref<const VectorXd>& linear_predictor);

// Intercept-only fit with an offset; returns the intercept.
double fit_intercept_with_offset(const Eigen::Ref<const VectorXd>& outcomes,
                                 const Eigen::Ref<const VectorXd>& offset,
                                 const IrlsControl& control = {});

} // namespace sizecalc
