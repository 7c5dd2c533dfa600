#include "sizecalc/quadrature.hpp"

#include <cmath>

#include "sizecalc/errors.hpp"
#include "sizecalc/normal.hpp"

namespace sizecalc {

GaussHermite make_gauss_hermite(int order)
{
    require(order >= 2, "Gauss-Hermite order must be at least 2");
    // Jacobi matrix of the probabilists' Hermite recurrence: off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(double(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussHermite rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = solver.eigenvectors().row(0).transpose().array().square();
    rule.weights /= rule.weights.sum();
    return rule;
}

const GaussHermite& gauss_hermite()
{
    static const GaussHermite rule = make_gauss_hermite(96);
    return rule;
}

double logistic_normal_mean(double mu, double sigma)
{
    const GaussHermite& rule = gauss_hermite();
    double total = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        total += rule.weights[i] * expit(mu + sigma * rule.nodes[i]);
    return total;
}

namespace {

constexpr int kGridPoints = 8001;
constexpr double kGridHalfWidth = 10.0;

} // namespace

double logistic_normal_concordance(double mu, double sigma)
{
    if (sigma == 0.0)
        return 0.5;  // every pair tied
    const double h = 2.0 * kGridHalfWidth / (kGridPoints - 1);
    double mass1 = 0, mass0 = 0, pairs = 0, below0 = 0;
    for (int i = 0; i < kGridPoints; ++i) {
        const double z = -kGridHalfWidth + h * i;
        const double w = (i == 0 || i == kGridPoints - 1 ? 0.5 : 1.0) * normal_pdf(z);
        const double p = expit(mu + sigma * z);
        const double m1 = w * p;
        const double m0 = w * (1.0 - p);
        pairs += m1 * (below0 + 0.5 * m0);
        below0 += m0;
        mass1 += m1;
        mass0 += m0;
    }
    if (sigma < 0)
        return 1.0 - pairs / (mass1 * mass0);
    return pairs / (mass1 * mass0);
}

} // namespace sizecalc
