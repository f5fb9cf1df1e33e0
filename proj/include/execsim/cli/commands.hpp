#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "execsim/cli/config.hpp"
#include "execsim/simulation.hpp"

namespace execsim::cli {

/// Output could not be written or read back.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kBlotterHeader =
    "period,price,shares_bought,shares_remaining,market_information,accumulated_cost";
inline constexpr std::string_view kConvergenceHeader =
    "period,theta_hat_mean,theta_hat_sd,gamma_hat_mean,gamma_hat_sd,rho_hat_mean,rho_hat_sd,"
    "sigma_eps_sq_hat_mean,sigma_eps_sq_hat_sd,sigma_eta_sq_hat_mean,sigma_eta_sq_hat_sd";
inline constexpr std::string_view kSimulationsHeader =
    "sim,strategy,seed,noise_digest,actual_cost,expected_cost,improvement_per_share,"
    "improvement_vs_naive_benchmark";

namespace detail {

using json = nlohmann::ordered_json;

inline std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string human(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Writes `content` to dir/name and checks the bytes landed.
inline std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                        const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError("out-dir: cannot create " + dir.string() + ": " + ec.message());
    const auto path = dir / name;
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("out-dir: cannot open " + path.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw OutputError("out-dir: write failed for " + path.string());
    }
    const auto size = std::filesystem::file_size(path, ec);
    if (ec || size != content.size()) throw OutputError("out-dir: verification failed for " + path.string());
    return path;
}

inline std::string strategy_columns(const std::vector<StrategyKind>& kinds) {
    std::string out;
    for (auto k : kinds) {
        out += ',';
        out += to_string(k);
    }
    return out;
}

}  // namespace detail

/// Blotter table followed by a `# {json}` footer line.
inline std::string render_blotter(const RunResult& run) {
    using execsim::cli::detail::number;
    std::ostringstream out;
    out << kBlotterHeader << '\n';
    for (const auto& r : run.blotter) {
        out << r.period << ',' << number(r.price) << ',' << number(r.shares_bought) << ','
            << number(r.shares_remaining) << ',' << number(r.market_information) << ','
            << number(r.accumulated_cost) << '\n';
    }
    detail::json footer;
    footer["actual_cost"] = run.actual_cost;
    footer["expected_cost"] = run.expected_cost;
    footer["improvement_per_share"] = run.improvement_per_share;
    footer["strategy"] = std::string(to_string(run.strategy));
    footer["seed"] = run.seed;
    footer["noise_digest"] = detail::hex(run.noise_digest);
    if (!run.estimated_total_cost.empty()) {
        auto& arr = footer["estimated_total_cost"] = detail::json::array();
        for (const auto& v : run.estimated_total_cost) {
            if (v) arr.push_back(*v);
            else arr.push_back(nullptr);
        }
    }
    out << "# " << footer.dump() << '\n';
    return out.str();
}

inline std::string render_convergence(const std::vector<ConvergenceRow>& rows) {
    using execsim::cli::detail::number;
    std::ostringstream out;
    out << kConvergenceHeader << '\n';
    for (const auto& r : rows) {
        out << r.period;
        for (const auto* s : {&r.theta_hat, &r.gamma_hat, &r.rho_hat, &r.sigma_eps_sq_hat, &r.sigma_eta_sq_hat}) {
            out << ',' << number(s->mean) << ',' << number(s->sd);
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_summary_json(const MonteCarloSummary& summary) {
    detail::json root;
    root["n_sims"] = summary.n_sims;
    root["base_seed"] = summary.base_seed;
    root["horizon"] = summary.horizon;
    root["naive_benchmark_cost"] = summary.naive_benchmark_cost;
    auto& arr = root["strategies"] = detail::json::array();
    for (const auto& s : summary.strategies) {
        detail::json o;
        o["strategy"] = std::string(to_string(s.strategy));
        o["benchmark_cost"] = s.benchmark_cost;
        o["mean_actual_cost"] = s.mean_actual_cost;
        o["mean_improvement"] = s.mean_improvement;
        o["sd_improvement"] = s.sd_improvement;
        o["mean_improvement_own_benchmark"] = s.mean_improvement_own_benchmark;
        o["mean_period_avg_improvement"] = s.mean_period_avg_improvement;
        arr.push_back(std::move(o));
    }
    return root.dump(2) + "\n";
}

/// period,<strategy...> table of one per-period series.
template <typename Series>
std::string render_period_table(const MonteCarloSummary& summary, Series series,
                                std::string_view first_extra_name = {},
                                const std::vector<double>* first_extra = nullptr) {
    using execsim::cli::detail::number;
    std::vector<StrategyKind> kinds;
    for (const auto& s : summary.strategies) kinds.push_back(s.strategy);
    std::ostringstream out;
    out << "period";
    if (first_extra) out << ',' << first_extra_name;
    out << detail::strategy_columns(kinds) << '\n';
    for (int t = 0; t < summary.horizon; ++t) {
        out << (t + 1);
        if (first_extra) out << ',' << number((*first_extra)[static_cast<std::size_t>(t)]);
        for (const auto& s : summary.strategies) out << ',' << number(series(s)[static_cast<std::size_t>(t)]);
        out << '\n';
    }
    return out.str();
}

inline std::string render_simulations(const MonteCarloSummary& summary) {
    using execsim::cli::detail::number;
    std::ostringstream out;
    out << kSimulationsHeader << '\n';
    for (const auto& r : summary.simulations) {
        out << r.sim << ',' << to_string(r.strategy) << ',' << r.seed << ',' << detail::hex(r.noise_digest)
            << ',' << number(r.actual_cost) << ',' << number(r.expected_cost) << ','
            << number(r.improvement_per_share) << ',' << number(r.improvement_vs_naive) << '\n';
    }
    return out.str();
}

/// One episode of the single selected strategy on simulation 0's noise path.
inline std::filesystem::path cmd_simulate(const RunSpec& spec, std::ostream& human) {
    if (spec.strategies.size() != 1) {
        throw ConfigError("strategy: simulate needs exactly one --strategy (got " +
                          std::to_string(spec.strategies.size()) + ")");
    }
    const auto params = spec.market();
    const auto mandate = spec.mandate();
    const auto kind = spec.strategies.front();
    const auto noise = paired_noise_path(spec.seed, 0, params, mandate.horizon());
    EpisodeOptions options;
    options.clamp_nonneg_orders = spec.clamp_nonneg_orders;
    options.ar_value_toggle = spec.ar_value_toggle;
    const auto run = run_episode(kind, params, mandate, noise, params, options);

    const auto path = detail::write_file(spec.out_dir, "blotter_" + std::string(to_string(kind)) + ".csv",
                                         render_blotter(run));
    human << "Strategy: " << to_string(kind) << '\n'
          << "Actual Cost: " << detail::human(run.actual_cost, 7) << '\n'
          << "Expected Cost: " << detail::human(run.expected_cost, 7) << '\n'
          << "Improvement: " << detail::human(run.improvement_per_share) << '\n'
          << "Wrote " << path.string() << '\n';
    return path;
}

/// Paired study: summary.json plus the per-period and per-simulation tables.
inline std::vector<std::filesystem::path> cmd_montecarlo(const RunSpec& spec, std::ostream& human) {
    const auto params = spec.market();
    const auto mandate = spec.mandate();
    const auto summary = run_monte_carlo(spec.monte_carlo(), params, mandate);

    std::vector<double> naive_expected;
    for (int t = 1; t <= mandate.horizon(); ++t) {
        naive_expected.push_back(naive_expected_accumulated_cost(mandate, params.theta(), t));
    }

    std::vector<std::filesystem::path> files;
    const std::filesystem::path dir = spec.out_dir;
    files.push_back(detail::write_file(dir, "summary.json", render_summary_json(summary)));
    files.push_back(detail::write_file(
        dir, "mean_orders.csv",
        render_period_table(summary, [](const StrategySummary& s) -> const auto& { return s.mean_order; })));
    files.push_back(detail::write_file(
        dir, "accumulated_cost_variance.csv",
        render_period_table(summary, [](const StrategySummary& s) -> const auto& {
            return s.accumulated_cost_variance;
        })));
    files.push_back(detail::write_file(
        dir, "mean_accumulated_cost.csv",
        render_period_table(
            summary, [](const StrategySummary& s) -> const auto& { return s.mean_accumulated_cost; },
            "naive_expected", &naive_expected)));
    files.push_back(detail::write_file(dir, "simulations.csv", render_simulations(summary)));

    human << "Simulations: " << summary.n_sims << "  base seed: " << summary.base_seed << '\n'
          << "Naive expected cost: " << detail::human(summary.naive_benchmark_cost, 7) << '\n';
    for (const auto& s : summary.strategies) {
        human << "  " << to_string(s.strategy) << ": mean improvement " << detail::human(s.mean_improvement)
              << " sd " << detail::human(s.sd_improvement) << " per share\n";
    }
    for (const auto& f : files) human << "Wrote " << f.string() << '\n';
    return files;
}

/// Auto-regressive estimate trajectories over n_sims paired paths.
inline std::filesystem::path cmd_convergence(const RunSpec& spec, std::ostream& human) {
    if (std::find(spec.strategies.begin(), spec.strategies.end(), StrategyKind::autoregressive) ==
        spec.strategies.end()) {
        throw ConfigError("strategy: convergence needs the ar strategy in the strategy list");
    }
    auto mc = spec.monte_carlo();
    mc.strategies = {StrategyKind::autoregressive};
    mc.options.log_estimates = true;
    const auto paired = run_paired_episodes(mc, spec.market(), spec.mandate());
    std::vector<RunResult> runs;
    runs.reserve(paired.size());
    for (const auto& row : paired) runs.push_back(row.front());
    const auto rows = summarize_convergence(runs);
    const auto path = detail::write_file(spec.out_dir, "convergence.csv", render_convergence(rows));
    human << "Wrote " << path.string() << '\n';
    return path;
}

inline int dispatch(const Invocation& inv, std::ostream& out) {
    switch (inv.command) {
        case Command::simulate: cmd_simulate(inv.spec, out); break;
        case Command::montecarlo: cmd_montecarlo(inv.spec, out); break;
        case Command::convergence: cmd_convergence(inv.spec, out); break;
    }
    return 0;
}

/// Exit codes: 0 success, 2 configuration error, 1 output or runtime failure.
inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(parse_command_line(args), out);
    } catch (const CLI::CallForHelp&) {
        Invocation inv;
        std::vector<std::string> names;
        CLI::App app{"execsim: block-order execution under permanent price impact", "execsim"};
        configure_app(app, inv, names);
        out << app.help();
        return 0;
    } catch (const ConfigError& e) {
        err << "execsim: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "execsim: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace execsim::cli
