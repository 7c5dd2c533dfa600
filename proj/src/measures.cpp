#include "sizecalc/measures.hpp"

#include "sizecalc/normal.hpp"

namespace sizecalc {

MeasureSet measure_predictions(const Eigen::Ref<const VectorXd>& outcomes,
                               const Eigen::Ref<const VectorXd>& linear_predictor,
                               const std::optional<Eigen::Ref<const VectorXd>>& true_probs)
{
    const CalibrationFit cal = fit_calibration(outcomes, linear_predictor);
    const VectorXd probs = linear_predictor.unaryExpr([](double e) { return expit(e); });

    MeasureSet m;
    m.cal_slope = cal.slope;
    m.cal_in_large = calibration_in_large(outcomes, linear_predictor);
    m.c_stat = concordance(outcomes, linear_predictor);
    m.brier = brier(outcomes, probs);
    if (true_probs)
        m.mape = mape(*true_probs, probs);
    return m;
}

MeasureSet measure_all(const Dataset& validation, const FittedLogistic& model)
{
    validation.validate();
    require(validation.n_predictors() == model.slopes.size(),
            "validation covariate count does not match model slopes");
    const VectorXd lp = model.linear_predictor(validation.covariates);
    if (validation.true_probs)
        return measure_predictions(validation.outcomes, lp, Eigen::Ref<const VectorXd>(*validation.true_probs));
    return measure_predictions(validation.outcomes, lp);
}

} // namespace sizecalc
