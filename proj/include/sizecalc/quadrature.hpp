#pragma once

#include <Eigen/Dense>

namespace sizecalc {

// Nodes and weights for E[f(Z)], Z ~ N(0,1): sum_i weights[i] * f(nodes[i]).
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Probabilists' Gauss-Hermite rule by the Golub-Welsch eigenvalue method.
GaussHermite make_gauss_hermite(int order);

// Shared 96-point rule.
const GaussHermite& gauss_hermite();

// E[expit(mu + sigma Z)].
double logistic_normal_mean(double mu, double sigma);

// C-statistic of the model logit P(Y=1|eta) = eta with eta ~ N(mu, sigma^2):
// P(eta_1 > eta_0) + 0.5 P(eta_1 = eta_0) for eta_k drawn given Y = k.
// Evaluated on a fine standard-normal grid as a discrete Mann-Whitney sum,
// so sigma = 0 gives exactly 0.5.
double logistic_normal_concordance(double mu, double sigma);

} // namespace sizecalc
