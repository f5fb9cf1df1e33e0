#pragma once

#include <stdexcept>

#include "execsim/execution_policy.hpp"

namespace execsim {

enum class CostModel { naive, informed };

struct CostForecast {
    double expected_cost = 0.0;
    CostModel model = CostModel::naive;
    int t = 1;
    double shares_remaining = 0.0;
    double price = 0.0;
    double info = 0.0;
};

/// V_t = S P + (theta S^2 / 2) (T-t+2)/(T-t+1)
inline double naive_expected_cost(double shares_remaining, double price, int t, int horizon,
                                  double theta) {
    if (horizon < 1 || t < 1 || t > horizon) {
        throw std::invalid_argument("naive_expected_cost: 1 <= t <= T required");
    }
    const double k = static_cast<double>(horizon - t + 1);
    return shares_remaining * price +
           0.5 * theta * shares_remaining * shares_remaining * (k + 1.0) / k;
}

/// V_t = S P + a_t S^2 + b_t S X + c_t X^2 + d_t
inline double informed_expected_cost(double shares_remaining, double price, double info, int t,
                                     const CoefficientSchedule& schedule) {
    const auto& k = schedule.at(t);
    const double s = shares_remaining;
    return s * price + k.a * s * s + k.b * s * info + k.c * info * info + k.d;
}

/// dV_t/dX_t = b_t S + 2 c_t X_t, where `shares` is the quantity the value is held in.
inline constexpr double cost_sensitivity(double b_t, double c_t, double shares,
                                         double info) noexcept {
    return b_t * shares + 2.0 * c_t * info;
}

inline CostForecast forecast_naive(const MarketState& state, int horizon, double theta) {
    return {naive_expected_cost(state.shares_remaining, state.price, state.t, horizon, theta),
            CostModel::naive, state.t, state.shares_remaining, state.price, state.info};
}

inline CostForecast forecast_informed(const MarketState& state, const CoefficientSchedule& schedule) {
    return {informed_expected_cost(state.shares_remaining, state.price, state.info, state.t, schedule),
            CostModel::informed, state.t, state.shares_remaining, state.price, state.info};
}

}  // namespace execsim
