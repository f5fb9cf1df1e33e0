#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "execsim/random.hpp"

namespace execsim {

/// True constants of the additive permanent-impact market with AR(1) information.
class MarketParams {
public:
    MarketParams(double theta, double gamma, double rho, double sigma_eps_sq,
                 double sigma_eta_sq)
        : theta_(theta), gamma_(gamma), rho_(rho), sigma_eps_sq_(sigma_eps_sq),
          sigma_eta_sq_(sigma_eta_sq) {
        if (!std::isfinite(theta) || !std::isfinite(gamma) || !std::isfinite(rho) ||
            !std::isfinite(sigma_eps_sq) || !std::isfinite(sigma_eta_sq)) {
            throw std::domain_error("MarketParams: all fields must be finite");
        }
        if (sigma_eps_sq < 0.0) throw std::domain_error("MarketParams: sigma_eps_sq must be >= 0");
        if (sigma_eta_sq < 0.0) throw std::domain_error("MarketParams: sigma_eta_sq must be >= 0");
        if (!(std::fabs(rho) < 1.0)) throw std::domain_error("MarketParams: |rho| < 1 required");
    }

    /// theta = 5e-5, gamma = 5, rho = 0.5, sigma_eps = one 12.5 cent tick, sigma_eta^2 = 0.001.
    static MarketParams baseline() { return {5e-5, 5.0, 0.5, 0.125 * 0.125, 0.001}; }

    double theta() const noexcept { return theta_; }
    double gamma() const noexcept { return gamma_; }
    double rho() const noexcept { return rho_; }
    double sigma_eps_sq() const noexcept { return sigma_eps_sq_; }
    double sigma_eta_sq() const noexcept { return sigma_eta_sq_; }

    MarketParams with_noise(double sigma_eps_sq, double sigma_eta_sq) const {
        return {theta_, gamma_, rho_, sigma_eps_sq, sigma_eta_sq};
    }

    bool operator==(const MarketParams&) const = default;

private:
    double theta_;
    double gamma_;
    double rho_;
    double sigma_eps_sq_;
    double sigma_eta_sq_;
};

/// The block to acquire: s0 shares starting from price p0 over `horizon` periods.
class ExecutionMandate {
public:
    ExecutionMandate(double s0, double p0, int horizon) : s0_(s0), p0_(p0), horizon_(horizon) {
        if (!(std::isfinite(s0) && s0 > 0.0)) throw std::domain_error("ExecutionMandate: s0 > 0 required");
        if (!(std::isfinite(p0) && p0 > 0.0)) throw std::domain_error("ExecutionMandate: p0 > 0 required");
        if (horizon < 1) throw std::domain_error("ExecutionMandate: horizon >= 1 required");
    }

    static ExecutionMandate baseline() { return {100000.0, 50.0, 20}; }

    double s0() const noexcept { return s0_; }
    double p0() const noexcept { return p0_; }
    int horizon() const noexcept { return horizon_; }

    bool operator==(const ExecutionMandate&) const = default;

private:
    double s0_;
    double p0_;
    int horizon_;
};

/// Price and information shocks for periods 1..T (stored 0-based).
class NoisePath {
public:
    NoisePath(std::vector<double> eps, std::vector<double> eta, std::uint64_t seed)
        : eps_(std::move(eps)), eta_(std::move(eta)), seed_(seed) {
        if (eps_.size() != eta_.size()) {
            throw std::invalid_argument("NoisePath: eps and eta lengths differ");
        }
        if (eps_.empty()) throw std::invalid_argument("NoisePath: horizon must be >= 1");
    }

    std::span<const double> eps() const noexcept { return eps_; }
    std::span<const double> eta() const noexcept { return eta_; }
    std::uint64_t seed() const noexcept { return seed_; }
    int horizon() const noexcept { return static_cast<int>(eps_.size()); }

    /// Shock of 1-based period t.
    double eps_at(int t) const { return eps_.at(static_cast<std::size_t>(t - 1)); }
    double eta_at(int t) const { return eta_.at(static_cast<std::size_t>(t - 1)); }

    /// FNV-1a over the seed and the bit patterns of every shock.
    std::uint64_t digest() const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto feed = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        };
        feed(seed_);
        for (double e : eps_) feed(std::bit_cast<std::uint64_t>(e));
        for (double e : eta_) feed(std::bit_cast<std::uint64_t>(e));
        return h;
    }

    bool operator==(const NoisePath&) const = default;

private:
    std::vector<double> eps_;
    std::vector<double> eta_;
    std::uint64_t seed_;
};

/// Observable state at the start of period t (information X_t already revealed).
struct MarketState {
    int t = 1;
    double price = 0.0;             // P_{t-1}, the last traded price
    double info = 0.0;              // latest information value
    double shares_remaining = 0.0;  // S_t
};

/// Deterministic Gaussian shocks: eps_t ~ N(0, sigma_eps_sq), eta_t ~ N(0, sigma_eta_sq).
inline NoisePath generate_noise_path(std::uint64_t seed, int horizon, double sigma_eps_sq,
                                     double sigma_eta_sq) {
    if (horizon < 1) throw std::invalid_argument("generate_noise_path: horizon >= 1 required");
    if (sigma_eps_sq < 0.0 || sigma_eta_sq < 0.0) {
        throw std::invalid_argument("generate_noise_path: variances must be >= 0");
    }
    const double sd_eps = std::sqrt(sigma_eps_sq);
    const double sd_eta = std::sqrt(sigma_eta_sq);
    const auto eps_key = rng::stream_key(seed, rng::StreamTag::price_noise);
    const auto eta_key = rng::stream_key(seed, rng::StreamTag::information_noise);
    std::vector<double> eps(static_cast<std::size_t>(horizon));
    std::vector<double> eta(static_cast<std::size_t>(horizon));
    for (std::size_t k = 0; k < eps.size(); ++k) {
        eps[k] = sd_eps == 0.0 ? 0.0 : sd_eps * rng::standard_normal(eps_key, k);
        eta[k] = sd_eta == 0.0 ? 0.0 : sd_eta * rng::standard_normal(eta_key, k);
    }
    return {std::move(eps), std::move(eta), seed};
}

/// X_t = rho * X_{t-1} + eta_t
inline constexpr double info_step(double x_prev, double rho, double eta_t) noexcept {
    return rho * x_prev + eta_t;
}

/// P_t = P_{t-1} + theta * B_t + gamma * X_t + eps_t
inline constexpr double price_step(double p_prev, double order, double x_t, double theta,
                                   double gamma, double eps_t) noexcept {
    return p_prev + theta * order + gamma * x_t + eps_t;
}

/// Stationary standard deviation of gamma * X_t.
inline double stationary_info_component_std(double gamma, double rho, double sigma_eta_sq) {
    if (!(std::fabs(rho) < 1.0)) {
        throw std::domain_error("stationary_info_component_std: |rho| < 1 required");
    }
    return gamma * std::sqrt(sigma_eta_sq) / std::sqrt(1.0 - rho * rho);
}

}  // namespace execsim
