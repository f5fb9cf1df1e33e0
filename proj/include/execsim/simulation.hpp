#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "execsim/estimation.hpp"
#include "execsim/execution_policy.hpp"
#include "execsim/market_dynamics.hpp"
#include "execsim/valuation.hpp"

namespace execsim {

/// One blotter row. Row 0 is the pre-trade state.
struct PeriodRecord {
    int period = 0;
    double price = 0.0;
    double shares_bought = 0.0;
    double shares_remaining = 0.0;
    double market_information = 0.0;
    double accumulated_cost = 0.0;

    bool operator==(const PeriodRecord&) const = default;
};

struct EpisodeOptions {
    bool clamp_nonneg_orders = false;
    /// Keep the auto-regressive estimates refitted after every period.
    bool log_estimates = false;
    /// Auto-regressive episodes also forecast their total cost from the current
    /// estimates, with the information-variance term taken from sigma_eta_sq_hat.
    bool ar_value_toggle = false;
};

struct RunResult {
    StrategyKind strategy = StrategyKind::naive;
    std::uint64_t seed = 0;
    std::uint64_t noise_digest = 0;
    std::vector<PeriodRecord> blotter;  // T + 1 rows
    double actual_cost = 0.0;
    double expected_cost = 0.0;
    double improvement_per_share = 0.0;
    std::vector<OrderRationale> rationales;               // periods 1..T
    std::vector<ParameterEstimates> estimate_log;         // after each period's refit
    std::vector<std::optional<double>> estimated_total_cost;  // ar_value_toggle only
};

/// (expected - actual) / S0; positive means the run beat its benchmark.
inline double per_share_improvement(double expected_cost, double actual_cost, double s0) {
    if (!(s0 > 0.0)) throw std::invalid_argument("per_share_improvement: s0 > 0 required");
    return (expected_cost - actual_cost) / s0;
}

/// Expected accumulated cost of the uniform split after period t (E[X] = 0).
inline double naive_expected_accumulated_cost(const ExecutionMandate& mandate, double theta, int t) {
    const double slice = mandate.s0() / mandate.horizon();
    const double n = static_cast<double>(t);
    return slice * (n * mandate.p0() + theta * slice * n * (n + 1.0) / 2.0);
}

/// Ex-ante benchmark reported by each strategy: the informed value at X = 0 for
/// the informed strategy, the naive value otherwise.
inline double episode_benchmark(StrategyKind kind, const ExecutionMandate& mandate,
                                const MarketParams& strategy_params,
                                const CoefficientSchedule* schedule) {
    if (kind == StrategyKind::informed && schedule != nullptr) {
        return informed_expected_cost(mandate.s0(), mandate.p0(), 0.0, 1, *schedule);
    }
    return naive_expected_cost(mandate.s0(), mandate.p0(), 1, mandate.horizon(),
                               strategy_params.theta());
}

namespace detail {

inline std::optional<double> forecast_total_cost(const ParameterEstimates& est, double spent,
                                                 double remaining, double price, double info,
                                                 int t, int horizon) {
    if (t >= horizon || !est.usable()) return std::nullopt;
    const MarketParams believed(est.theta_hat, est.gamma_hat, est.rho_hat,
                                est.sigma_eps_sq_hat, est.sigma_eta_sq_hat);
    const auto schedule = solve_coefficients(believed, horizon);
    const auto& next = schedule.at(t + 1);
    const double x_mean = est.rho_hat * info;
    return spent + informed_expected_cost(remaining, price, x_mean, t + 1, schedule) +
           next.c * est.sigma_eta_sq_hat;
}

}  // namespace detail

/// Plays one mandate against one noise path.
///
/// Each period t: X_t is revealed, the strategy sizes B_t from (S_t, X_t), the
/// trade prints at P_t = P_{t-1} + theta B_t + gamma X_t + eps_t under the TRUE
/// parameters, and the auto-regressive strategy refits on the completed period.
/// `strategy_params` feed the informed schedule and the benchmark only.
inline RunResult run_episode(StrategyKind kind, const MarketParams& strategy_params,
                             const ExecutionMandate& mandate, const NoisePath& noise,
                             const MarketParams& true_params, const EpisodeOptions& options = {}) {
    const int horizon = mandate.horizon();
    if (noise.horizon() != horizon) {
        throw std::invalid_argument("run_episode: noise path length differs from the horizon");
    }

    std::optional<CoefficientSchedule> schedule;
    if (kind == StrategyKind::informed) schedule = solve_coefficients(strategy_params, horizon);

    RunResult result;
    result.strategy = kind;
    result.seed = noise.seed();
    result.noise_digest = noise.digest();
    result.blotter.reserve(static_cast<std::size_t>(horizon) + 1);
    result.rationales.reserve(static_cast<std::size_t>(horizon));

    double price = mandate.p0();
    double info = 0.0;
    double remaining = mandate.s0();
    double spent = 0.0;
    result.blotter.push_back({0, price, 0.0, remaining, info, 0.0});

    ObservationHistory history(info);
    ParameterEstimates estimates;
    const PolicyOptions policy{options.clamp_nonneg_orders};

    for (int t = 1; t <= horizon; ++t) {
        info = info_step(info, true_params.rho(), noise.eta_at(t));
        const MarketState state{t, price, info, remaining};
        const auto decision = decide_order(kind, state, horizon, schedule ? &*schedule : nullptr,
                                           &estimates, policy);
        const double order = decision.order;
        const double next_price = price_step(price, order, info, true_params.theta(),
                                             true_params.gamma(), noise.eps_at(t));
        spent += next_price * order;
        remaining = t == horizon ? 0.0 : remaining - order;
        result.rationales.push_back(decision.rationale);
        result.blotter.push_back({t, next_price, order, remaining, info, spent});

        if (kind == StrategyKind::autoregressive) {
            history.record(price, next_price, order, info);
            estimates = estimate_all(history, estimates);
            if (options.log_estimates) result.estimate_log.push_back(estimates);
            if (options.ar_value_toggle) {
                result.estimated_total_cost.push_back(detail::forecast_total_cost(
                    estimates, spent, remaining, next_price, info, t, horizon));
            }
        }
        price = next_price;
    }

    result.actual_cost = spent;
    result.expected_cost =
        episode_benchmark(kind, mandate, strategy_params, schedule ? &*schedule : nullptr);
    result.improvement_per_share =
        per_share_improvement(result.expected_cost, result.actual_cost, mandate.s0());
    return result;
}

/// Strategy believes the true parameters.
inline RunResult run_episode(StrategyKind kind, const MarketParams& params,
                             const ExecutionMandate& mandate, const NoisePath& noise,
                             const EpisodeOptions& options = {}) {
    return run_episode(kind, params, mandate, noise, params, options);
}

struct MonteCarloConfig {
    int n_sims = 100;
    std::vector<StrategyKind> strategies{StrategyKind::naive, StrategyKind::informed,
                                         StrategyKind::autoregressive};
    std::uint64_t base_seed = 1;
    EpisodeOptions options{};
    unsigned workers = 1;
};

/// Noise path of simulation `index`; every strategy replays this same path.
inline NoisePath paired_noise_path(std::uint64_t base_seed, int index, const MarketParams& params,
                                   int horizon) {
    return generate_noise_path(rng::episode_seed(base_seed, static_cast<std::uint64_t>(index)),
                               horizon, params.sigma_eps_sq(), params.sigma_eta_sq());
}

/// episodes[i][j]: simulation i, strategy config.strategies[j].
using PairedEpisodes = std::vector<std::vector<RunResult>>;

inline PairedEpisodes run_paired_episodes(const MonteCarloConfig& config, const MarketParams& params,
                                          const ExecutionMandate& mandate) {
    if (config.n_sims < 1) throw std::invalid_argument("run_monte_carlo: n_sims >= 1 required");
    if (config.strategies.empty()) throw std::invalid_argument("run_monte_carlo: no strategies");

    PairedEpisodes episodes(static_cast<std::size_t>(config.n_sims));
    auto run_one = [&](int i) {
        const auto noise = paired_noise_path(config.base_seed, i, params, mandate.horizon());
        auto& row = episodes[static_cast<std::size_t>(i)];
        row.reserve(config.strategies.size());
        for (auto kind : config.strategies) {
            row.push_back(run_episode(kind, params, mandate, noise, params, config.options));
        }
    };

    const unsigned workers = std::clamp(config.workers, 1U, static_cast<unsigned>(config.n_sims));
    if (workers == 1) {
        for (int i = 0; i < config.n_sims; ++i) run_one(i);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = static_cast<int>(w); i < config.n_sims; i += static_cast<int>(workers)) {
                    run_one(i);
                }
            });
        }
    }
    return episodes;
}

struct StrategySummary {
    StrategyKind strategy = StrategyKind::naive;
    double benchmark_cost = 0.0;        // the strategy's own ex-ante expected cost
    double mean_actual_cost = 0.0;
    double mean_improvement = 0.0;      // vs the naive expected cost, per share
    double sd_improvement = 0.0;
    double mean_improvement_own_benchmark = 0.0;
    double mean_period_avg_improvement = 0.0;
    std::vector<double> mean_order;                 // periods 1..T
    std::vector<double> mean_accumulated_cost;      // periods 1..T
    std::vector<double> accumulated_cost_variance;  // of accumulated cost per share
};

struct SimulationRecord {
    int sim = 0;
    StrategyKind strategy = StrategyKind::naive;
    std::uint64_t seed = 0;
    std::uint64_t noise_digest = 0;
    double actual_cost = 0.0;
    double expected_cost = 0.0;
    double improvement_per_share = 0.0;   // vs own benchmark
    double improvement_vs_naive = 0.0;    // vs naive expected cost
};

struct MonteCarloSummary {
    int n_sims = 0;
    std::uint64_t base_seed = 0;
    int horizon = 0;
    double naive_benchmark_cost = 0.0;
    std::vector<StrategySummary> strategies;
    std::vector<SimulationRecord> simulations;  // sim-major, strategy order as configured

    const StrategySummary& of(StrategyKind kind) const {
        for (const auto& s : strategies) {
            if (s.strategy == kind) return s;
        }
        throw std::out_of_range("MonteCarloSummary: strategy not in study");
    }
};

namespace detail {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double variance = 0.0;
};

/// Sample moments with the n-1 divisor; a single value has zero spread.
inline Moments moments(std::span<const double> xs) {
    Moments m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.variance = ss / static_cast<double>(xs.size() - 1);
        m.sd = std::sqrt(m.variance);
    }
    return m;
}

}  // namespace detail

inline MonteCarloSummary summarize_monte_carlo(const PairedEpisodes& episodes,
                                               const MonteCarloConfig& config,
                                               const MarketParams& params,
                                               const ExecutionMandate& mandate) {
    const int horizon = mandate.horizon();
    const auto n = episodes.size();
    const double s0 = mandate.s0();

    MonteCarloSummary summary;
    summary.n_sims = static_cast<int>(n);
    summary.base_seed = config.base_seed;
    summary.horizon = horizon;
    summary.naive_benchmark_cost = naive_expected_cost(s0, mandate.p0(), 1, horizon, params.theta());

    std::vector<double> naive_path(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) {
        naive_path[static_cast<std::size_t>(t - 1)] =
            naive_expected_accumulated_cost(mandate, params.theta(), t);
    }

    for (std::size_t j = 0; j < config.strategies.size(); ++j) {
        StrategySummary s;
        s.strategy = config.strategies[j];
        std::vector<double> vs_naive(n), own(n), period_avg(n), actual(n);
        std::vector<std::vector<double>> orders(static_cast<std::size_t>(horizon), std::vector<double>(n));
        std::vector<std::vector<double>> acc(static_cast<std::size_t>(horizon), std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& run = episodes[i][j];
            s.benchmark_cost = run.expected_cost;
            actual[i] = run.actual_cost;
            own[i] = run.improvement_per_share;
            vs_naive[i] = per_share_improvement(summary.naive_benchmark_cost, run.actual_cost, s0);
            double gap = 0.0;
            for (int t = 1; t <= horizon; ++t) {
                const auto& row = run.blotter[static_cast<std::size_t>(t)];
                orders[static_cast<std::size_t>(t - 1)][i] = row.shares_bought;
                acc[static_cast<std::size_t>(t - 1)][i] = row.accumulated_cost / s0;
                gap += (naive_path[static_cast<std::size_t>(t - 1)] - row.accumulated_cost) / s0;
            }
            period_avg[i] = gap / horizon;
        }
        const auto imp = detail::moments(vs_naive);
        s.mean_improvement = imp.mean;
        s.sd_improvement = imp.sd;
        s.mean_improvement_own_benchmark = detail::moments(own).mean;
        s.mean_period_avg_improvement = detail::moments(period_avg).mean;
        s.mean_actual_cost = detail::moments(actual).mean;
        for (int t = 0; t < horizon; ++t) {
            s.mean_order.push_back(detail::moments(orders[static_cast<std::size_t>(t)]).mean);
            const auto a = detail::moments(acc[static_cast<std::size_t>(t)]);
            s.mean_accumulated_cost.push_back(a.mean * s0);
            s.accumulated_cost_variance.push_back(a.variance);
        }
        summary.strategies.push_back(std::move(s));
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& run : episodes[i]) {
            summary.simulations.push_back(
                {static_cast<int>(i), run.strategy, run.seed, run.noise_digest, run.actual_cost,
                 run.expected_cost, run.improvement_per_share,
                 per_share_improvement(summary.naive_benchmark_cost, run.actual_cost, s0)});
        }
    }
    return summary;
}

/// Common-random-numbers study: simulation i draws one noise path from
/// (base_seed, i) and every strategy replays it.
inline MonteCarloSummary run_monte_carlo(const MonteCarloConfig& config, const MarketParams& params,
                                         const ExecutionMandate& mandate) {
    return summarize_monte_carlo(run_paired_episodes(config, params, mandate), config, params, mandate);
}

struct EstimateStats {
    double mean = 0.0;
    double sd = 0.0;
};

struct ConvergenceRow {
    int period = 0;
    EstimateStats theta_hat;
    EstimateStats gamma_hat;
    EstimateStats rho_hat;
    EstimateStats sigma_eps_sq_hat;
    EstimateStats sigma_eta_sq_hat;
};

/// Cross-simulation mean and spread of each estimate, period by period.
/// Episodes must carry an estimate log (auto-regressive, log_estimates on).
inline std::vector<ConvergenceRow> summarize_convergence(std::span<const RunResult> episodes) {
    if (episodes.empty()) throw std::invalid_argument("summarize_convergence: no episodes");
    const auto periods = episodes.front().estimate_log.size();
    if (periods == 0) throw std::invalid_argument("summarize_convergence: episodes carry no estimate log");
    for (const auto& e : episodes) {
        if (e.estimate_log.size() != periods) {
            throw std::invalid_argument("summarize_convergence: estimate logs differ in length");
        }
    }

    std::vector<ConvergenceRow> rows;
    rows.reserve(periods);
    std::vector<double> buf(episodes.size());
    auto stats = [&](auto field, std::size_t t) {
        for (std::size_t i = 0; i < episodes.size(); ++i) buf[i] = field(episodes[i].estimate_log[t]);
        const auto m = detail::moments(buf);
        return EstimateStats{m.mean, m.sd};
    };
    for (std::size_t t = 0; t < periods; ++t) {
        ConvergenceRow row;
        row.period = static_cast<int>(t) + 1;
        row.theta_hat = stats([](const ParameterEstimates& e) { return e.theta_hat; }, t);
        row.gamma_hat = stats([](const ParameterEstimates& e) { return e.gamma_hat; }, t);
        row.rho_hat = stats([](const ParameterEstimates& e) { return e.rho_hat; }, t);
        row.sigma_eps_sq_hat = stats([](const ParameterEstimates& e) { return e.sigma_eps_sq_hat; }, t);
        row.sigma_eta_sq_hat = stats([](const ParameterEstimates& e) { return e.sigma_eta_sq_hat; }, t);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace execsim
