#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "execsim/execution_policy.hpp"
#include "execsim/market_dynamics.hpp"
#include "execsim/simulation.hpp"

namespace execsim::cli {

/// Raised for any unusable configuration; the message is a single line naming the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { simulate, montecarlo, convergence };

inline std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::montecarlo: return "montecarlo";
        case Command::convergence: return "convergence";
    }
    return "unknown";
}

/// Everything a run needs. Defaults are the baseline calibration.
struct RunSpec {
    double theta = 5e-5;
    double gamma = 5.0;
    double rho = 0.5;
    double sigma_eps_sq = 0.125 * 0.125;
    double sigma_eta_sq = 0.001;

    double s0 = 100000.0;
    double p0 = 50.0;
    int horizon = 20;

    std::vector<StrategyKind> strategies{StrategyKind::naive, StrategyKind::informed,
                                         StrategyKind::autoregressive};
    int n_sims = 100;
    std::uint64_t seed = 1;

    std::string out_dir = ".";
    bool clamp_nonneg_orders = false;
    bool ar_value_toggle = false;
    unsigned workers = 1;

    MarketParams market() const { return {theta, gamma, rho, sigma_eps_sq, sigma_eta_sq}; }
    ExecutionMandate mandate() const { return {s0, p0, horizon}; }

    MonteCarloConfig monte_carlo() const {
        MonteCarloConfig mc;
        mc.n_sims = n_sims;
        mc.strategies = strategies;
        mc.base_seed = seed;
        mc.options.clamp_nonneg_orders = clamp_nonneg_orders;
        mc.options.ar_value_toggle = ar_value_toggle;
        mc.workers = workers;
        return mc;
    }

    bool operator==(const RunSpec&) const = default;
};

struct Invocation {
    Command command = Command::simulate;
    RunSpec spec;
};

namespace detail {

inline std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void require(bool ok, const std::string& field, const std::string& rule, const std::string& got) {
    if (!ok) throw ConfigError(field + ": " + rule + " (got " + got + ")");
}

}  // namespace detail

/// Checks every field against the type invariants.
inline void validate(const RunSpec& spec) {
    using detail::number;
    using detail::require;
    require(std::isfinite(spec.theta) && spec.theta > 0.0, "theta", "theta > 0 required", number(spec.theta));
    require(std::isfinite(spec.gamma), "gamma", "must be finite", number(spec.gamma));
    require(std::isfinite(spec.rho) && std::fabs(spec.rho) < 1.0, "rho", "|rho| < 1 required", number(spec.rho));
    require(std::isfinite(spec.sigma_eps_sq) && spec.sigma_eps_sq >= 0.0, "sigma-eps-sq",
            "variance >= 0 required", number(spec.sigma_eps_sq));
    require(std::isfinite(spec.sigma_eta_sq) && spec.sigma_eta_sq >= 0.0, "sigma-eta-sq",
            "variance >= 0 required", number(spec.sigma_eta_sq));
    require(std::isfinite(spec.s0) && spec.s0 > 0.0, "s0", "s0 > 0 required", number(spec.s0));
    require(std::isfinite(spec.p0) && spec.p0 > 0.0, "p0", "p0 > 0 required", number(spec.p0));
    require(spec.horizon >= 1, "horizon", "horizon >= 1 required", std::to_string(spec.horizon));
    require(spec.n_sims >= 1, "n-sims", "n-sims >= 1 required", std::to_string(spec.n_sims));
    require(!spec.strategies.empty(), "strategy", "at least one strategy required", "none");
    require(spec.workers >= 1, "workers", "workers >= 1 required", std::to_string(spec.workers));
    require(!spec.out_dir.empty(), "out-dir", "must not be empty", "\"\"");
}

/// Flat `key = value` text accepted by --config; keys are the long flag names.
inline std::string render_config(const RunSpec& spec) {
    using detail::number;
    std::ostringstream out;
    out << "theta = " << number(spec.theta) << '\n'
        << "gamma = " << number(spec.gamma) << '\n'
        << "rho = " << number(spec.rho) << '\n'
        << "sigma-eps-sq = " << number(spec.sigma_eps_sq) << '\n'
        << "sigma-eta-sq = " << number(spec.sigma_eta_sq) << '\n'
        << "s0 = " << number(spec.s0) << '\n'
        << "p0 = " << number(spec.p0) << '\n'
        << "horizon = " << spec.horizon << '\n'
        << "strategy = [";
    for (std::size_t i = 0; i < spec.strategies.size(); ++i) {
        out << (i ? ", " : "") << '"' << to_string(spec.strategies[i]) << '"';
    }
    out << "]\n"
        << "n-sims = " << spec.n_sims << '\n'
        << "seed = " << spec.seed << '\n'
        << "out-dir = \"" << spec.out_dir << "\"\n"
        << "clamp-nonneg-orders = " << (spec.clamp_nonneg_orders ? "true" : "false") << '\n'
        << "ar-value-toggle = " << (spec.ar_value_toggle ? "true" : "false") << '\n'
        << "workers = " << spec.workers << '\n';
    return out.str();
}

/// Builds the CLI11 application bound to `inv`. Precedence: flags, then the
/// --config file, then the defaults already held in `inv.spec`.
inline void configure_app(CLI::App& app, Invocation& inv, std::vector<std::string>& strategy_names,
                          bool require_command = true) {
    auto& s = inv.spec;
    app.set_config("--config", "", "flat `key = value` configuration file");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();
    app.require_subcommand(require_command ? 1 : 0, 1);

    app.add_option("--theta", s.theta, "price impact per share");
    app.add_option("--gamma", s.gamma, "price impact per unit of information");
    app.add_option("--rho", s.rho, "AR(1) coefficient of the information process");
    app.add_option("--sigma-eps-sq", s.sigma_eps_sq, "price noise variance per period");
    app.add_option("--sigma-eta-sq", s.sigma_eta_sq, "information noise variance per period");
    app.add_option("--s0", s.s0, "shares to acquire");
    app.add_option("--p0", s.p0, "initial price");
    app.add_option("--horizon", s.horizon, "number of trading periods");
    app.add_option("--strategy", strategy_names, "naive | informed | ar (repeatable)")
        ->check(CLI::IsMember({"naive", "informed", "ar"}))
        ->expected(1, 3);
    app.add_option("--n-sims", s.n_sims, "paired simulations");
    app.add_option("--seed", s.seed, "base seed");
    app.add_option("--out-dir", s.out_dir, "output directory");
    app.add_flag("--clamp-nonneg-orders", s.clamp_nonneg_orders, "clamp interior orders into [0, S_t]");
    app.add_flag("--ar-value-toggle", s.ar_value_toggle,
                 "log auto-regressive cost forecasts from the estimated schedule");
    app.add_option("--workers", s.workers, "worker threads for Monte Carlo runs");

    app.add_subcommand("simulate", "run one episode and write its blotter")
        ->callback([&inv] { inv.command = Command::simulate; });
    app.add_subcommand("montecarlo", "paired-noise study across strategies")
        ->callback([&inv] { inv.command = Command::montecarlo; });
    app.add_subcommand("convergence", "auto-regressive estimate trajectories")
        ->callback([&inv] { inv.command = Command::convergence; });
}

inline void finish_parse(Invocation& inv, const std::vector<std::string>& strategy_names) {
    if (!strategy_names.empty()) {
        inv.spec.strategies.clear();
        for (const auto& name : strategy_names) {
            const auto kind = parse_strategy(name);
            if (!kind) throw ConfigError("strategy: unknown strategy (got " + name + ")");
            if (std::find(inv.spec.strategies.begin(), inv.spec.strategies.end(), *kind) ==
                inv.spec.strategies.end()) {
                inv.spec.strategies.push_back(*kind);
            }
        }
    }
    validate(inv.spec);
}

namespace detail {

inline std::string one_line(std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    while (!msg.empty() && msg.back() == ' ') msg.pop_back();
    return msg;
}

inline Invocation parse(std::vector<std::string> args, bool require_command) {
    Invocation inv;
    std::vector<std::string> strategy_names;
    CLI::App app{"execsim: block-order execution under permanent price impact", "execsim"};
    configure_app(app, inv, strategy_names, require_command);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw;
    } catch (const CLI::ParseError& e) {
        throw ConfigError("config: " + detail::one_line(e.what()));
    }
    finish_parse(inv, strategy_names);
    return inv;
}

}  // namespace detail

/// Parses arguments (without the program name). Throws ConfigError on any
/// unparsable value, unknown key or invariant violation. CLI::CallForHelp
/// propagates for --help.
inline Invocation parse_command_line(std::vector<std::string> args) {
    return detail::parse(std::move(args), true);
}

/// Settings only; a subcommand is optional. No arguments gives the baseline.
inline RunSpec parse_config(std::vector<std::string> args) {
    return detail::parse(std::move(args), false).spec;
}

}  // namespace execsim::cli
