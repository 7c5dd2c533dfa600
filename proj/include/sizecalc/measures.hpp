#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sizecalc/dataset.hpp"
#include "sizecalc/errors.hpp"
#include "sizecalc/logistic.hpp"

namespace sizecalc {

struct MeasureSet {
    double cal_slope = 0.0;
    double cal_in_large = 0.0;
    double c_stat = 0.0;
    double brier = 0.0;
    std::optional<double> mape;
};

// Concordance (C-statistic / AUC) by sorting: each event/non-event pair counts
// 1 when the event scores higher and 0.5 when tied. The pair count is kept
// in integers, so the result is exactly the pairwise average.
template <typename DerivedY, typename DerivedS>
double concordance(const Eigen::DenseBase<DerivedY>& outcomes, const Eigen::DenseBase<DerivedS>& scores)
{
    const Index n = outcomes.size();
    require(scores.size() == n, "outcomes and scores lengths differ");

    std::vector<std::pair<double, bool>> ranked(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
        ranked[std::size_t(k)] = {double(scores(k)), outcomes(k) != 0};
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // twice the concordant-pair count: 2 per strictly ordered pair, 1 per tie
    std::uint64_t twice_concordant = 0;
    std::uint64_t events = 0, non_events_below = 0;
    std::size_t i = 0;
    const std::size_t total = ranked.size();
    while (i < total) {
        std::size_t j = i;
        std::uint64_t group_events = 0, group_non_events = 0;
        while (j < total && ranked[j].first == ranked[i].first) {
            if (ranked[j].second)
                ++group_events;
            else
                ++group_non_events;
            ++j;
        }
        twice_concordant += group_events * (2 * non_events_below + group_non_events);
        events += group_events;
        non_events_below += group_non_events;
        i = j;
    }
    const std::uint64_t non_events = non_events_below;
    if (events == 0 || non_events == 0)
        fail(ErrorKind::DegenerateOutcome, "concordance needs at least one event and one non-event");
    return double(twice_concordant) / (2.0 * double(events) * double(non_events));
}

template <typename DerivedY, typename DerivedP>
double brier(const Eigen::DenseBase<DerivedY>& outcomes, const Eigen::DenseBase<DerivedP>& probs)
{
    require(outcomes.size() == probs.size(), "brier: outcomes and probabilities lengths differ");
    require(outcomes.size() > 0, "brier: empty input");
    return (outcomes.derived().array().template cast<double>() - probs.derived().array()).square().mean();
}

template <typename DerivedT, typename DerivedP>
double mape(const Eigen::DenseBase<DerivedT>& true_probs, const Eigen::DenseBase<DerivedP>& probs)
{
    require(true_probs.size() == probs.size(), "mape: true and predicted lengths differ");
    require(true_probs.size() > 0, "mape: empty input");
    return (true_probs.derived().array() - probs.derived().array()).abs().mean();
}

// All validation measures for one model given its linear predictor on the
// validation rows.
MeasureSet measure_predictions(const Eigen::Ref<const VectorXd>& outcomes,
                               const Eigen::Ref<const VectorXd>& linear_predictor,
                               const std::optional<Eigen::Ref<const VectorXd>>& true_probs = std::nullopt);

MeasureSet measure_all(const Dataset& validation, const FittedLogistic& model);

} // namespace sizecalc
