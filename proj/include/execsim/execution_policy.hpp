#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "execsim/estimation.hpp"
#include "execsim/market_dynamics.hpp"

namespace execsim {

enum class StrategyKind { naive, informed, autoregressive };

inline constexpr std::string_view to_string(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::naive: return "naive";
        case StrategyKind::informed: return "informed";
        case StrategyKind::autoregressive: return "ar";
    }
    return "unknown";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
    if (name == "naive") return StrategyKind::naive;
    if (name == "informed") return StrategyKind::informed;
    if (name == "ar" || name == "autoregressive") return StrategyKind::autoregressive;
    return std::nullopt;
}

/// Coefficients of period t. With k = T - t + 1 periods left and X_t already
/// revealed, the value of the remaining mandate is
///   V_t = S_t P_{t-1} + a S_t^2 + b S_t X_t + c X_t^2 + d
/// and the optimal order is B_t = e S_t + f X_t.
struct PeriodCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;
};

class CoefficientSchedule {
public:
    explicit CoefficientSchedule(std::vector<PeriodCoefficients> by_period)
        : periods_(std::move(by_period)) {
        if (periods_.empty()) throw std::invalid_argument("CoefficientSchedule: empty");
    }

    int horizon() const noexcept { return static_cast<int>(periods_.size()); }

    /// Coefficients of 1-based period t.
    const PeriodCoefficients& at(int t) const {
        if (t < 1 || t > horizon()) throw std::out_of_range("CoefficientSchedule: period out of range");
        return periods_[static_cast<std::size_t>(t - 1)];
    }

    std::span<const PeriodCoefficients> periods() const noexcept { return periods_; }

private:
    std::vector<PeriodCoefficients> periods_;
};

/// Backward induction over the remaining horizon.
///
/// Base (one period left): the whole remainder is bought at P_{t-1} + theta S + gamma X,
/// so a = theta, b = gamma, c = d = 0, e = 1, f = 0.
///
/// Step: given next-period (a', b', c', d'), the expected cost of ordering B is
///   (P + theta B + gamma X) S + a'(S - B)^2 + rho b' X (S - B) + c'(rho^2 X^2 + sigma_eta^2) + d'
/// whose minimizer is B = S - (theta S - rho b' X) / (2a'). Completing the square:
///   a = theta - theta^2 / (4a')            = theta/2 (1 + 1/k)
///   b = gamma + theta rho b' / (2a')
///   c = rho^2 c' - rho^2 b'^2 / (4a')
///   d = d' + c' sigma_eta^2
///   e = 1/k,  f = rho b' / (2a')
inline CoefficientSchedule solve_coefficients(const MarketParams& params, int horizon) {
    if (!(params.theta() > 0.0)) {
        throw std::domain_error("solve_coefficients: theta > 0 required");
    }
    if (horizon < 1) throw std::invalid_argument("solve_coefficients: horizon >= 1 required");

    const double theta = params.theta();
    const double gamma = params.gamma();
    const double rho = params.rho();
    const double var_eta = params.sigma_eta_sq();

    std::vector<PeriodCoefficients> out(static_cast<std::size_t>(horizon));
    PeriodCoefficients next{theta, gamma, 0.0, 0.0, 1.0, 0.0};
    out.back() = next;
    for (int k = 2; k <= horizon; ++k) {
        PeriodCoefficients cur;
        const double two_a = 2.0 * next.a;
        cur.a = 0.5 * theta * (1.0 + 1.0 / k);
        cur.b = gamma + theta * rho * next.b / two_a;
        cur.c = rho * rho * next.c - rho * rho * next.b * next.b / (2.0 * two_a);
        cur.d = next.d + next.c * var_eta;
        cur.e = 1.0 / k;
        cur.f = rho * next.b / two_a;
        out[static_cast<std::size_t>(horizon - k)] = cur;
        next = cur;
    }
    return CoefficientSchedule(std::move(out));
}

enum class OrderRationale { naive, naive_fallback, informed, autoregressive, final_period };

inline constexpr std::string_view to_string(OrderRationale r) noexcept {
    switch (r) {
        case OrderRationale::naive: return "naive";
        case OrderRationale::naive_fallback: return "naive_fallback";
        case OrderRationale::informed: return "informed";
        case OrderRationale::autoregressive: return "autoregressive";
        case OrderRationale::final_period: return "final_period";
    }
    return "unknown";
}

struct OrderDecision {
    double order = 0.0;
    OrderRationale rationale = OrderRationale::naive;
};

/// B_t = S_t / (T - t + 1)
inline double naive_order(double shares_remaining, int t, int horizon) {
    if (horizon < 1 || t < 1 || t > horizon) {
        throw std::invalid_argument("naive_order: 1 <= t <= T required");
    }
    return shares_remaining / static_cast<double>(horizon - t + 1);
}

/// B_t = e_t S_t + f_t X_t; the last period buys exactly what is left.
inline OrderDecision informed_order(double shares_remaining, double info, int t,
                                    const CoefficientSchedule& schedule) {
    if (t == schedule.horizon()) return {shares_remaining, OrderRationale::final_period};
    const auto& k = schedule.at(t);
    return {k.e * shares_remaining + k.f * info, OrderRationale::informed};
}

/// Order adjustment factor used by the auto-regressive strategy:
///   f_hat = gamma_hat / (theta_hat (T-t+1)) * sum_{k=1}^{T-t} (T-t-k) rho_hat^k
/// nullopt (fall back to the uniform split) when theta_hat <= 0 or |rho_hat| >= 1.
inline std::optional<double> ar_adjustment_factor(double theta_hat, double gamma_hat,
                                                  double rho_hat, int t, int horizon) {
    if (t < 1 || t > horizon) throw std::invalid_argument("ar_adjustment_factor: 1 <= t <= T required");
    if (!(theta_hat > 0.0) || !(std::fabs(rho_hat) < 1.0)) return std::nullopt;
    const int n = horizon - t;
    double sum = 0.0;
    double power = 1.0;
    for (int k = 1; k <= n; ++k) {
        power *= rho_hat;
        sum += static_cast<double>(n - k) * power;
    }
    return gamma_hat / (theta_hat * static_cast<double>(horizon - t + 1)) * sum;
}

/// Closed form of the recursive f_t. Same sum as ar_adjustment_factor with
/// weights (T-t+1-k) instead of (T-t-k).
inline double informed_adjustment_closed_form(double theta, double gamma, double rho, int t,
                                              int horizon) {
    if (t < 1 || t > horizon) throw std::invalid_argument("informed_adjustment_closed_form: 1 <= t <= T required");
    const int n = horizon - t;
    double sum = 0.0;
    double power = 1.0;
    for (int k = 1; k <= n; ++k) {
        power *= rho;
        sum += static_cast<double>(n + 1 - k) * power;
    }
    return gamma / (theta * static_cast<double>(horizon - t + 1)) * sum;
}

struct PolicyOptions {
    /// Clamp interior orders into [0, S_t]; the final period still buys the rest.
    bool clamp_nonneg_orders = false;
};

/// Single entry point over the three strategies.
///
/// `state.info` is the information value revealed at the start of period t.
/// informed requires `schedule`; the auto-regressive strategy uses `estimates`
/// when present and usable and otherwise falls back to the uniform split.
inline OrderDecision decide_order(StrategyKind kind, const MarketState& state, int horizon,
                                  const CoefficientSchedule* schedule,
                                  const ParameterEstimates* estimates,
                                  const PolicyOptions& options = {}) {
    if (state.t < 1 || state.t > horizon) {
        throw std::invalid_argument("decide_order: 1 <= t <= T required");
    }
    if (kind == StrategyKind::informed) {
        if (schedule == nullptr) throw std::invalid_argument("decide_order: informed strategy needs a schedule");
        if (schedule->horizon() != horizon) {
            throw std::invalid_argument("decide_order: schedule horizon does not match");
        }
    }
    const double remaining = state.shares_remaining;
    if (state.t == horizon) return {remaining, OrderRationale::final_period};

    OrderDecision decision;
    switch (kind) {
        case StrategyKind::naive:
            decision = {naive_order(remaining, state.t, horizon), OrderRationale::naive};
            break;
        case StrategyKind::informed:
            decision = informed_order(remaining, state.info, state.t, *schedule);
            break;
        case StrategyKind::autoregressive: {
            std::optional<double> f_hat;
            if (estimates != nullptr && estimates->usable()) {
                f_hat = ar_adjustment_factor(estimates->theta_hat, estimates->gamma_hat,
                                             estimates->rho_hat, state.t, horizon);
            }
            const double base = naive_order(remaining, state.t, horizon);
            decision = f_hat ? OrderDecision{base + *f_hat * state.info, OrderRationale::autoregressive}
                             : OrderDecision{base, OrderRationale::naive_fallback};
            break;
        }
    }
    if (options.clamp_nonneg_orders) {
        decision.order = std::clamp(decision.order, 0.0, std::max(0.0, remaining));
    }
    return decision;
}

}  // namespace execsim
