#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "execsim/simulation.hpp"

using namespace execsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const auto kBase = MarketParams::baseline();
const auto kMandate = ExecutionMandate::baseline();
const std::vector<StrategyKind> kAll{StrategyKind::naive, StrategyKind::informed, StrategyKind::autoregressive};

// Reference naive blotter (gamma = 0): prices and accumulated costs of periods 0..20.
const std::vector<double> kReferencePrices{
    50.00000, 50.17994, 50.40117, 50.84601, 51.10482, 51.37098, 51.83536, 52.14298, 52.23485, 52.39899, 52.59328,
    52.99629, 53.29127, 53.59137, 53.85520, 54.03572, 54.50908, 54.82132, 54.82549, 55.16316, 55.35406};
const std::vector<double> kReferenceCosts{
    0.0,       250899.7,  502905.5,  757135.6,  1012659.7, 1269514.6, 1528691.4, 1789406.3, 2050580.5, 2312575.5, 2575541.9,
    2840523.4, 3106979.7, 3374936.5, 3644212.5, 3914391.1, 4186936.6, 4461043.1, 4735170.6, 5010986.4, 5287756.7};

NoisePath silent(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }

}  // namespace

TEST_CASE("per-share improvement", "[metrics]") {
    CHECK_THAT(per_share_improvement(5262500.0, 5287756.7, 1e5), WithinAbs(-0.2525668, 1e-6));
    CHECK_THAT(per_share_improvement(5258727.0, 5223147.4, 1e5), WithinAbs(0.3557954, 1e-6));
    CHECK_THAT(per_share_improvement(5262500.0, 5271736.9, 1e5), WithinAbs(-0.09236862, 1e-6));
    CHECK(per_share_improvement(1.0, 1.0, 10.0) == 0.0);
    CHECK_THROWS_AS(per_share_improvement(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("naive episode replays the reference blotter", "[episode][reference]") {
    // back out the price shocks from the reference prices
    const double theta = 5e-5;
    std::vector<double> eps, eta(20, 0.0);
    for (int t = 1; t <= 20; ++t) eps.push_back(kReferencePrices[t] - kReferencePrices[t - 1] - theta * 5000.0);
    const NoisePath noise(eps, eta, 0);
    const MarketParams no_info(theta, 0.0, 0.5, 0.015625, 0.001);
    const auto run = run_episode(StrategyKind::naive, no_info, kMandate, noise);
    REQUIRE(run.blotter.size() == 21);
    for (int t = 0; t <= 20; ++t) {
        INFO("period " << t);
        CHECK_THAT(run.blotter[t].price, WithinAbs(kReferencePrices[t], 1e-9));
        CHECK_THAT(run.blotter[t].accumulated_cost, WithinAbs(kReferenceCosts[t], 0.06));
        CHECK(run.blotter[t].shares_bought == (t == 0 ? 0.0 : 5000.0));
    }
    CHECK(run.expected_cost == 5262500.0);
    CHECK_THAT(run.improvement_per_share, WithinAbs(-0.2525668, 1e-6));
}

TEST_CASE("noiseless naive episode costs the closed form", "[episode]") {
    const auto run = run_episode(StrategyKind::naive, kBase, kMandate, silent(20));
    CHECK(run.actual_cost == 5262500.0);
    CHECK(run.improvement_per_share == 0.0);
    CHECK(run.blotter.back().price == 55.0);
    for (int t = 1; t <= 20; ++t) {
        CHECK(run.blotter[t].accumulated_cost == naive_expected_accumulated_cost(kMandate, 5e-5, t));
    }
}

TEST_CASE("blotter rows follow the market recursions", "[episode]") {
    const auto noise = generate_noise_path(3, 20, kBase.sigma_eps_sq(), kBase.sigma_eta_sq());
    for (auto kind : kAll) {
        const auto run = run_episode(kind, kBase, kMandate, noise);
        double x = 0.0;
        for (int t = 1; t <= 20; ++t) {
            const auto& prev = run.blotter[t - 1];
            const auto& row = run.blotter[t];
            x = info_step(x, kBase.rho(), noise.eta_at(t));
            CHECK(row.market_information == x);
            CHECK(row.price == price_step(prev.price, row.shares_bought, x, kBase.theta(), kBase.gamma(), noise.eps_at(t)));
            CHECK(row.accumulated_cost == prev.accumulated_cost + row.price * row.shares_bought);
        }
        CHECK(run.actual_cost == run.blotter.back().accumulated_cost);
        CHECK(run.rationales.size() == 20);
        CHECK(run.rationales.back() == OrderRationale::final_period);
    }
}

TEST_CASE("shares are conserved in randomized episodes", "[episode][property]") {
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const MarketParams p(1e-5 + 1e-4 * u(gen), 10.0 * (u(gen) - 0.5), 1.8 * (u(gen) - 0.5), 0.05 * u(gen),
                             0.005 * u(gen));
        const ExecutionMandate m(1e3 + 2e5 * u(gen), 10.0 + 90.0 * u(gen), 1 + static_cast<int>(40 * u(gen)));
        const auto noise = generate_noise_path(gen(), m.horizon(), p.sigma_eps_sq(), p.sigma_eta_sq());
        for (auto kind : kAll) {
            const auto run = run_episode(kind, p, m, noise);
            double bought = 0.0;
            for (const auto& r : run.blotter) bought += r.shares_bought;
            CHECK_THAT(bought, WithinAbs(m.s0(), 1e-6));
            CHECK(run.blotter.back().shares_remaining == 0.0);
            CHECK(run.blotter.back().shares_bought == run.blotter[run.blotter.size() - 2].shares_remaining);
        }
    }
}

TEST_CASE("benchmarks per strategy", "[episode]") {
    const auto noise = generate_noise_path(1, 20, kBase.sigma_eps_sq(), kBase.sigma_eta_sq());
    const auto naive = run_episode(StrategyKind::naive, kBase, kMandate, noise);
    const auto informed = run_episode(StrategyKind::informed, kBase, kMandate, noise);
    const auto ar = run_episode(StrategyKind::autoregressive, kBase, kMandate, noise);
    CHECK(naive.expected_cost == 5262500.0);
    CHECK(ar.expected_cost == 5262500.0);
    CHECK_THAT(informed.expected_cost, WithinAbs(5258727.0, 5.0));
    CHECK(naive.noise_digest == informed.noise_digest);
    CHECK(naive.seed == ar.seed);
}

TEST_CASE("strategy beliefs are separate from the true market", "[episode]") {
    const auto noise = generate_noise_path(10, 20, kBase.sigma_eps_sq(), kBase.sigma_eta_sq());
    const MarketParams believed(5e-5, 0.0, 0.5, 0.015625, 0.001);
    const auto misled = run_episode(StrategyKind::informed, believed, kMandate, noise, kBase);
    const auto naive = run_episode(StrategyKind::naive, kBase, kMandate, noise);
    // believing gamma = 0 makes the informed strategy trade the uniform split
    for (int t = 1; t <= 20; ++t) CHECK_THAT(misled.blotter[t].shares_bought, WithinAbs(5000.0, 1e-9));
    CHECK_THAT(misled.actual_cost, WithinRel(naive.actual_cost, 1e-14));
}

TEST_CASE("zero noise makes every strategy identical", "[episode][degenerate]") {
    const auto quiet = kBase.with_noise(0.0, 0.0);
    const auto noise = generate_noise_path(5, 20, 0.0, 0.0);
    const auto reference = run_episode(StrategyKind::naive, quiet, kMandate, noise);
    for (auto kind : kAll) {
        const auto run = run_episode(kind, quiet, kMandate, noise);
        CHECK(run.blotter == reference.blotter);
        CHECK(run.improvement_per_share == 0.0);
    }
}

TEST_CASE("clamped episodes never sell", "[episode]") {
    const MarketParams wild(5e-5, 5.0, 0.9, 0.015625, 0.02);
    EpisodeOptions clamp;
    clamp.clamp_nonneg_orders = true;
    bool saw_negative_unclamped = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto noise = generate_noise_path(seed, 20, wild.sigma_eps_sq(), wild.sigma_eta_sq());
        const auto free_run = run_episode(StrategyKind::informed, wild, kMandate, noise);
        for (const auto& r : free_run.blotter) saw_negative_unclamped |= r.shares_bought < 0.0;
        const auto run = run_episode(StrategyKind::informed, wild, kMandate, noise, wild, clamp);
        for (int t = 1; t < 20; ++t) {
            CHECK(run.blotter[t].shares_bought >= 0.0);
            CHECK(run.blotter[t].shares_bought <= run.blotter[t - 1].shares_remaining);
        }
    }
    CHECK(saw_negative_unclamped);
}

TEST_CASE("auto-regressive estimates on a single information impulse", "[episode][autoregressive]") {
    // X_0 = 0 and only eta_1 is nonzero, so X_t = rho^(t-1) eta_1 with no price noise
    const double eta1 = 0.05;
    std::vector<double> eta(20, 0.0);
    eta[0] = eta1;
    const NoisePath noise(std::vector<double>(20, 0.0), eta, 0);
    EpisodeOptions opts;
    opts.log_estimates = true;
    const auto run = run_episode(StrategyKind::autoregressive, kBase, kMandate, noise, opts);
    REQUIRE(run.estimate_log.size() == 20);
    CHECK_FALSE(run.estimate_log[0].impact_valid);
    CHECK_FALSE(run.estimate_log[0].rho_valid);
    CHECK(run.rationales[0] == OrderRationale::naive_fallback);
    CHECK(run.rationales[1] == OrderRationale::naive_fallback);
    for (int t = 2; t <= 20; ++t) {
        const auto& e = run.estimate_log[t - 1];
        INFO("period " << t);
        REQUIRE(e.usable());
        CHECK_THAT(e.theta_hat, WithinRel(5e-5, 1e-9));
        CHECK_THAT(e.gamma_hat, WithinRel(5.0, 1e-9));
        CHECK_THAT(e.rho_hat, WithinRel(0.5, 1e-12));
        CHECK(e.sigma_eps_sq_hat == 0.0);
        CHECK_THAT(e.sigma_eta_sq_hat, WithinRel(eta1 * eta1 / (t - 1), 1e-12));
        CHECK(e.n_obs == static_cast<std::size_t>(t));
    }
    for (int t = 3; t < 20; ++t) CHECK(run.rationales[t - 1] == OrderRationale::autoregressive);
}

TEST_CASE("auto-regressive cost forecasts", "[episode][autoregressive]") {
    const auto noise = generate_noise_path(12, 20, kBase.sigma_eps_sq(), kBase.sigma_eta_sq());
    EpisodeOptions opts;
    opts.ar_value_toggle = true;
    const auto run = run_episode(StrategyKind::autoregressive, kBase, kMandate, noise, opts);
    REQUIRE(run.estimated_total_cost.size() == 20);
    CHECK_FALSE(run.estimated_total_cost.front().has_value());
    CHECK_FALSE(run.estimated_total_cost.back().has_value());
    int present = 0;
    for (const auto& v : run.estimated_total_cost) {
        if (!v) continue;
        ++present;
        CHECK(std::isfinite(*v));
        CHECK_THAT(*v, WithinRel(run.actual_cost, 0.2));
    }
    CHECK(present > 10);
    // forecasts do not change the trades
    const auto plain = run_episode(StrategyKind::autoregressive, kBase, kMandate, noise);
    CHECK(plain.blotter == run.blotter);
}

TEST_CASE("paired simulations share their noise", "[montecarlo]") {
    MonteCarloConfig cfg;
    cfg.n_sims = 8;
    const auto summary = run_monte_carlo(cfg, kBase, kMandate);
    REQUIRE(summary.simulations.size() == 24);
    for (std::size_t i = 0; i < summary.simulations.size(); i += 3) {
        CHECK(summary.simulations[i].noise_digest == summary.simulations[i + 1].noise_digest);
        CHECK(summary.simulations[i].noise_digest == summary.simulations[i + 2].noise_digest);
        CHECK(summary.simulations[i].sim == static_cast<int>(i / 3));
    }
    CHECK(summary.simulations[0].noise_digest != summary.simulations[3].noise_digest);
    CHECK(summary.naive_benchmark_cost == 5262500.0);
}

TEST_CASE("worker count does not change results", "[montecarlo]") {
    MonteCarloConfig one;
    one.n_sims = 37;
    auto many = one;
    many.workers = 4;
    const auto a = run_paired_episodes(one, kBase, kMandate);
    const auto b = run_paired_episodes(many, kBase, kMandate);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            CHECK(a[i][j].blotter == b[i][j].blotter);
            CHECK(a[i][j].noise_digest == b[i][j].noise_digest);
        }
    }
}

TEST_CASE("single simulation summary equals its episode", "[montecarlo]") {
    MonteCarloConfig cfg;
    cfg.n_sims = 1;
    cfg.base_seed = 99;
    const auto summary = run_monte_carlo(cfg, kBase, kMandate);
    const auto noise = paired_noise_path(99, 0, kBase, 20);
    for (auto kind : kAll) {
        const auto run = run_episode(kind, kBase, kMandate, noise);
        const auto& s = summary.of(kind);
        CHECK(s.mean_actual_cost == run.actual_cost);
        CHECK(s.sd_improvement == 0.0);
        CHECK(s.mean_improvement == per_share_improvement(5262500.0, run.actual_cost, 1e5));
        CHECK(s.mean_improvement_own_benchmark == run.improvement_per_share);
        CHECK(s.mean_order.size() == 20);
        CHECK(s.accumulated_cost_variance[5] == 0.0);
        CHECK(s.mean_accumulated_cost[19] == run.actual_cost);
    }
    CHECK_THROWS_AS(MonteCarloSummary{}.of(StrategyKind::naive), std::out_of_range);
}

TEST_CASE("naive expected path ends at the naive value", "[montecarlo]") {
    CHECK(naive_expected_accumulated_cost(kMandate, 5e-5, 20) == 5262500.0);
    CHECK(naive_expected_accumulated_cost(kMandate, 5e-5, 1) == 5000.0 * 50.25);
}

TEST_CASE("informed beats naive on paired paths", "[montecarlo][statistics]") {
    MonteCarloConfig cfg;
    cfg.n_sims = 400;
    cfg.strategies = {StrategyKind::naive, StrategyKind::informed};
    const auto summary = run_monte_carlo(cfg, kBase, kMandate);
    std::vector<double> diff;
    for (std::size_t i = 0; i < summary.simulations.size(); i += 2) {
        diff.push_back(summary.simulations[i + 1].improvement_vs_naive - summary.simulations[i].improvement_vs_naive);
    }
    double mean = 0.0, ss = 0.0;
    for (double d : diff) mean += d;
    mean /= diff.size();
    for (double d : diff) ss += (d - mean) * (d - mean);
    const double se = std::sqrt(ss / (diff.size() - 1) / diff.size());
    CHECK(mean > 3.0 * se);
    CHECK(summary.of(StrategyKind::naive).sd_improvement < summary.of(StrategyKind::informed).sd_improvement);
}

TEST_CASE("convergence summary", "[convergence]") {
    MonteCarloConfig cfg;
    cfg.n_sims = 1;
    cfg.strategies = {StrategyKind::autoregressive};
    cfg.options.log_estimates = true;
    const auto one = run_paired_episodes(cfg, kBase, kMandate);
    const std::vector<RunResult> single{one[0][0]};
    const auto rows = summarize_convergence(single);
    REQUIRE(rows.size() == 20);
    for (const auto& r : rows) {
        CHECK(r.theta_hat.sd == 0.0);
        CHECK(r.rho_hat.sd == 0.0);
    }
    CHECK(rows[19].theta_hat.mean == single[0].estimate_log[19].theta_hat);

    const std::vector<RunResult> none;
    CHECK_THROWS_AS(summarize_convergence(none), std::invalid_argument);
    const std::vector<RunResult> unlogged{run_episode(StrategyKind::naive, kBase, kMandate, silent(20))};
    CHECK_THROWS_AS(summarize_convergence(unlogged), std::invalid_argument);
}

TEST_CASE("rho estimates tighten over the horizon", "[convergence][statistics]") {
    MonteCarloConfig cfg;
    cfg.n_sims = 100;
    cfg.strategies = {StrategyKind::autoregressive};
    cfg.options.log_estimates = true;
    const auto paired = run_paired_episodes(cfg, kBase, kMandate);
    double early = 0.0, late = 0.0;
    for (const auto& row : paired) {
        early += std::fabs(row[0].estimate_log[2].rho_hat - 0.5);
        late += std::fabs(row[0].estimate_log[19].rho_hat - 0.5);
    }
    CHECK(late < early);
}
