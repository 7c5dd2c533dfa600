#include "sizecalc/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sizecalc/normal.hpp"

namespace sizecalc {

namespace {

// mean and log(1 + exp(eta)) sharing one exp.
inline void logistic_terms(double eta, double& mu, double& softplus)
{
    const double e = std::exp(-std::fabs(eta));
    const double inv = 1.0 / (1.0 + e);
    mu = eta >= 0 ? inv : e * inv;
    softplus = std::max(eta, 0.0) + std::log1p(e);
}

struct NewtonEval {
    double deviance = 0.0;
    VectorXd score;
    MatrixXd information;
};

struct NewtonResult {
    VectorXd beta;
    NewtonEval eval;
    bool converged = false;
    int iterations = 0;
};

// Full design matrix model: eta = X beta + offset, X includes the intercept column.
class DesignModel {
public:
    DesignModel(const MatrixXd& design, const Eigen::Ref<const VectorXd>& y, const VectorXd* offset)
        : x_(design), y_(y), offset_(offset) {}

    Index dim() const { return x_.cols(); }

    NewtonEval operator()(const VectorXd& beta) const
    {
        VectorXd eta = x_ * beta;
        if (offset_)
            eta += *offset_;
        const Eigen::ArrayXd e = eta.array();
        const Eigen::ArrayXd mu = 1.0 / (1.0 + (-e).exp());
        const Eigen::ArrayXd w = mu * (1.0 - mu);
        const Eigen::ArrayXd sp = e.max(0.0) + (-e.abs()).exp().log1p();

        NewtonEval out;
        out.deviance = 2.0 * (sp - y_.array() * e).sum();
        out.score = x_.transpose() * (y_.array() - mu).matrix();
        out.information = x_.transpose() * (x_.array().colwise() * w).matrix();
        return out;
    }

private:
    const MatrixXd& x_;
    Eigen::Ref<const VectorXd> y_;
    const VectorXd* offset_;
};

// logit P = a + s * x, accumulated in one pass.
class RecalibrationModel {
public:
    RecalibrationModel(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const VectorXd>& x)
        : y_(y), x_(x) {}

    Index dim() const { return 2; }

    NewtonEval operator()(const VectorXd& beta) const
    {
        const double a = beta[0], s = beta[1];
        double dev = 0, g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        const Index n = y_.size();
        for (Index i = 0; i < n; ++i) {
            const double xi = x_[i];
            const double eta = a + s * xi;
            double mu, sp;
            logistic_terms(eta, mu, sp);
            const double w = mu * (1.0 - mu);
            const double r = y_[i] - mu;
            dev += sp - y_[i] * eta;
            g0 += r;
            g1 += r * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        NewtonEval out;
        out.deviance = 2.0 * dev;
        out.score = Eigen::Vector2d(g0, g1);
        out.information.resize(2, 2);
        out.information << h00, h01, h01, h11;
        return out;
    }

private:
    Eigen::Ref<const VectorXd> y_;
    Eigen::Ref<const VectorXd> x_;
};

// logit P = a + offset.
class InterceptModel {
public:
    InterceptModel(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const VectorXd>& offset)
        : y_(y), offset_(offset) {}

    Index dim() const { return 1; }

    NewtonEval operator()(const VectorXd& beta) const
    {
        const double a = beta[0];
        double dev = 0, g = 0, h = 0;
        const Index n = y_.size();
        for (Index i = 0; i < n; ++i) {
            const double eta = a + offset_[i];
            double mu, sp;
            logistic_terms(eta, mu, sp);
            dev += sp - y_[i] * eta;
            g += y_[i] - mu;
            h += mu * (1.0 - mu);
        }
        NewtonEval out;
        out.deviance = 2.0 * dev;
        out.score = VectorXd::Constant(1, g);
        out.information = MatrixXd::Constant(1, 1, h);
        return out;
    }

private:
    Eigen::Ref<const VectorXd> y_;
    Eigen::Ref<const VectorXd> offset_;
};

template <typename Model>
NewtonResult newton_raphson(const Model& model, VectorXd beta, const IrlsControl& control)
{
    NewtonResult res;
    NewtonEval cur = model(beta);
    double prev_dev = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter <= control.max_iter; ++iter) {
        res.iterations = iter;
        const double max_score = cur.score.cwiseAbs().maxCoeff();
        const double rel_change = std::fabs(prev_dev - cur.deviance) / (std::fabs(cur.deviance) + 0.1);
        if (iter > 0 && rel_change < control.deviance_tol && max_score < control.score_tol) {
            res.converged = true;
            break;
        }
        if (iter == control.max_iter)
            break;

        Eigen::LDLT<MatrixXd> ldlt(cur.information);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            break;
        const VectorXd step = ldlt.solve(cur.score);
        if (!step.allFinite())
            break;

        double t = 1.0;
        VectorXd trial = beta + step;
        NewtonEval next = model(trial);
        const double slack = 1e-12 * (std::fabs(cur.deviance) + 1.0);
        for (int halving = 0; halving < 30 && !(std::isfinite(next.deviance) && next.deviance <= cur.deviance + slack);
             ++halving) {
            t *= 0.5;
            trial = beta + t * step;
            next = model(trial);
        }
        if (!std::isfinite(next.deviance))
            break;
        prev_dev = cur.deviance;
        beta = std::move(trial);
        cur = std::move(next);
    }
    res.beta = std::move(beta);
    res.eval = std::move(cur);
    return res;
}

void check_outcomes(const Eigen::Ref<const VectorXd>& y)
{
    double events = 0;
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0)
            fail(ErrorKind::InvalidArgument, "outcomes must be 0 or 1");
        events += y[i];
    }
    if (events == 0 || events == double(y.size()))
        fail(ErrorKind::DegenerateOutcome, "outcomes contain a single class");
}

bool is_constant(const Eigen::Ref<const VectorXd>& v)
{
    return v.size() == 0 || v.maxCoeff() == v.minCoeff();
}

MatrixXd inverse_information(const MatrixXd& info)
{
    Eigen::LDLT<MatrixXd> ldlt(info);
    return ldlt.solve(MatrixXd::Identity(info.rows(), info.cols()));
}

} // namespace

FittedLogistic fit_logistic(const Eigen::Ref<const MatrixXd>& covariates,
                            const Eigen::Ref<const VectorXd>& outcomes,
                            const FitOptions& options)
{
    const Index n = outcomes.size();
    const Index p = covariates.cols();
    require(covariates.rows() == n, "covariate rows must match outcome length");
    require(n >= 1, "fit requires at least one row");
    if (options.offset)
        require(options.offset->size() == n, "offset length must match outcomes");
    check_outcomes(outcomes);

    const double ybar = outcomes.mean();
    FittedLogistic fit;

    if (options.fixed_slopes) {
        const VectorXd offset = options.offset ? *options.offset : VectorXd::Zero(n);
        VectorXd start = VectorXd::Constant(1, options.start ? (*options.start)[0] : logit(ybar));
        const NewtonResult r = newton_raphson(InterceptModel(outcomes, offset), start, options.control);
        if (!r.converged || !r.beta.allFinite())
            fail(ErrorKind::NonConvergence, "intercept-only fit did not converge");
        fit.intercept = r.beta[0];
        fit.slopes = VectorXd::Zero(p);
        fit.converged = true;
        fit.iterations = r.iterations;
        fit.max_abs_score = r.eval.score.cwiseAbs().maxCoeff();
        fit.deviance = r.eval.deviance;
        fit.covariance = inverse_information(r.eval.information);
        return fit;
    }

    for (Index j = 0; j < p; ++j)
        if (is_constant(covariates.col(j)))
            fail(ErrorKind::ConstantPredictor, "covariate column " + std::to_string(j) + " is constant");

    MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = covariates;

    VectorXd start;
    if (options.start) {
        require(options.start->size() == p + 1, "start vector must have p+1 entries");
        start = *options.start;
    } else {
        start = VectorXd::Zero(p + 1);
        start[0] = logit(ybar);
        if (options.offset)
            start[0] -= options.offset->mean();
    }

    const VectorXd* offset = options.offset ? &*options.offset : nullptr;
    const NewtonResult r = newton_raphson(DesignModel(design, outcomes, offset), start, options.control);
    const double max_coef = r.beta.cwiseAbs().maxCoeff();
    if (!r.beta.allFinite() || max_coef > options.control.separation_bound)
        fail(ErrorKind::NonConvergence, "coefficients diverge (|beta| = " + std::to_string(max_coef)
                                            + "), data appear separated");
    if (!r.converged)
        fail(ErrorKind::NonConvergence, "IRLS did not converge in " + std::to_string(options.control.max_iter)
                                            + " iterations");

    fit.intercept = r.beta[0];
    fit.slopes = r.beta.tail(p);
    fit.converged = true;
    fit.iterations = r.iterations;
    fit.max_abs_score = r.eval.score.cwiseAbs().maxCoeff();
    fit.deviance = r.eval.deviance;
    fit.covariance = inverse_information(r.eval.information);
    return fit;
}

FittedLogistic fit_logistic(const Dataset& data, const FitOptions& options)
{
    data.validate();
    return fit_logistic(data.covariates, data.outcomes, options);
}

CalibrationFit fit_calibration(const Eigen::Ref<const VectorXd>& outcomes,
                               const Eigen::Ref<const VectorXd>& linear_predictor)
{
    require(outcomes.size() == linear_predictor.size(), "outcomes and linear predictor lengths differ");
    check_outcomes(outcomes);
    if (is_constant(linear_predictor))
        fail(ErrorKind::ConstantPredictor, "linear predictor is constant");

    const IrlsControl control{};
    const double lp_mean = linear_predictor.mean();
    const double lp_sd = std::sqrt((linear_predictor.array() - lp_mean).square().mean());

    // start at the perfectly calibrated values
    VectorXd start(2);
    start << 0.0, 1.0;
    const NewtonResult r = newton_raphson(RecalibrationModel(outcomes, linear_predictor), start, control);
    // Separation shows up as a diverging standardized slope.
    if (!r.beta.allFinite() || std::fabs(r.beta[1]) * lp_sd > control.separation_bound)
        fail(ErrorKind::NonConvergence, "calibration slope diverges, predictor separates outcomes");
    if (!r.converged)
        fail(ErrorKind::NonConvergence, "calibration fit did not converge");

    CalibrationFit out;
    out.intercept = r.beta[0];
    out.slope = r.beta[1];
    const MatrixXd cov = inverse_information(r.eval.information);
    out.slope_se = std::sqrt(cov(1, 1));
    return out;
}

double fit_intercept_with_offset(const Eigen::Ref<const VectorXd>& outcomes,
                                 const Eigen::Ref<const VectorXd>& offset,
                                 const IrlsControl& control)
{
    require(outcomes.size() == offset.size(), "outcomes and offset lengths differ");
    check_outcomes(outcomes);
    VectorXd start = VectorXd::Constant(1, logit(outcomes.mean()) - offset.mean());
    const NewtonResult r = newton_raphson(InterceptModel(outcomes, offset), start, control);
    if (!r.converged || !r.beta.allFinite())
        fail(ErrorKind::NonConvergence, "intercept-with-offset fit did not converge");
    return r.beta[0];
}

double calibration_in_large(const Eigen::Ref<const VectorXd>& outcomes,
                            const Eigen::Ref<const VectorXd>& linear_predictor)
{
    return fit_intercept_with_offset(outcomes, linear_predictor);
}

} // namespace sizecalc
