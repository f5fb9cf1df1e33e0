#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace execsim {

/// One completed period as seen by an uninformed trader.
struct Observation {
    int period = 0;
    double delta_price = 0.0;  // P_k - P_{k-1}
    double order = 0.0;        // B_k
    double info = 0.0;         // X_k, the information that moved P_k
    double price_level = 0.0;  // |P_k|, sets the rounding floor of delta_price
};

/// Append-only regression sample. The information series starts with the
/// pre-trade value X_0 and grows by one value per observation.
class ObservationHistory {
public:
    explicit ObservationHistory(double initial_info = 0.0) : info_series_{initial_info} {}

    void append(double delta_price, double order, double info, double price_level = 0.0) {
        observations_.push_back(
            {static_cast<int>(observations_.size()) + 1, delta_price, order, info, price_level});
        info_series_.push_back(info);
    }

    /// Records the move from price_prev to price caused by `order` under information `info`.
    void record(double price_prev, double price, double order, double info) {
        append(price - price_prev, order, info, std::max(std::fabs(price), std::fabs(price_prev)));
    }

    std::size_t size() const noexcept { return observations_.size(); }
    bool empty() const noexcept { return observations_.empty(); }
    std::span<const Observation> observations() const noexcept { return observations_; }
    /// X_0, X_1, ..., X_t
    std::span<const double> info_series() const noexcept { return info_series_; }

    /// The first n observations (and X_0..X_n).
    ObservationHistory prefix(std::size_t n) const {
        if (n > size()) throw std::out_of_range("ObservationHistory::prefix: n exceeds size");
        ObservationHistory out(info_series_.front());
        for (std::size_t k = 0; k < n; ++k) {
            const auto& o = observations_[k];
            out.append(o.delta_price, o.order, o.info, o.price_level);
        }
        return out;
    }

private:
    std::vector<Observation> observations_;
    std::vector<double> info_series_;
};

inline constexpr double kRhoClamp = 0.999;
inline constexpr double kMaxDesignCondition = 1e12;

/// Online OLS estimates. Values are sentinel zeros until the matching fit succeeds.
struct ParameterEstimates {
    double theta_hat = 0.0;
    double gamma_hat = 0.0;
    double rho_hat = 0.0;
    double sigma_eps_sq_hat = 0.0;
    double sigma_eta_sq_hat = 0.0;
    bool impact_valid = false;
    bool rho_valid = false;
    std::size_t n_obs = 0;

    bool usable() const noexcept { return impact_valid && rho_valid && theta_hat > 0.0; }
    bool operator==(const ParameterEstimates&) const = default;
};

struct ImpactFit {
    double theta_hat;
    double gamma_hat;
};

struct RhoFit {
    double rho_hat;  // clamped to [-0.999, 0.999]
    bool clamped;
};

/// 2-norm condition number of the symmetric PSD matrix [[p, q], [q, r]].
inline double gram_condition_number(double p, double q, double r) {
    const double half_trace = 0.5 * (p + r);
    const double spread = std::hypot(0.5 * (p - r), q);
    const double lambda_max = half_trace + spread;
    const double det = p * r - q * q;
    if (!(lambda_max > 0.0) || !(det > 0.0)) return std::numeric_limits<double>::infinity();
    return lambda_max * lambda_max / det;
}

/// Least-squares fit of dP_k = theta * B_k + gamma * X_k + eps_k.
///
/// Returns nullopt with fewer than two observations or when the Gram matrix
/// [[sum B^2, sum XB], [sum XB, sum X^2]] has condition number above 1e12.
/// The solve goes through a two-column Gram-Schmidt QR of the design rather
/// than the normal equations, which keeps noiseless recovery near machine
/// precision even when the Gram matrix is badly scaled.
inline std::optional<ImpactFit> fit_impact(const ObservationHistory& history) {
    const auto obs = history.observations();
    if (obs.size() < 2) return std::nullopt;

    double sbb = 0.0, sxb = 0.0, sxx = 0.0;
    for (const auto& o : obs) {
        sbb += o.order * o.order;
        sxb += o.info * o.order;
        sxx += o.info * o.info;
    }
    if (gram_condition_number(sbb, sxb, sxx) > kMaxDesignCondition) return std::nullopt;

    const std::size_t n = obs.size();
    const double r11 = std::sqrt(sbb);
    std::vector<double> q1(n), q2(n);
    for (std::size_t k = 0; k < n; ++k) q1[k] = obs[k].order / r11;

    double r12 = 0.0;
    for (std::size_t k = 0; k < n; ++k) r12 += q1[k] * obs[k].info;
    for (std::size_t k = 0; k < n; ++k) q2[k] = obs[k].info - r12 * q1[k];
    // one reorthogonalization pass; q2 stays unnormalized
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += q1[k] * q2[k];
    r12 += s;
    for (std::size_t k = 0; k < n; ++k) q2[k] -= s * q1[k];

    double r22 = 0.0;
    for (double v : q2) r22 += v * v;
    r22 = std::sqrt(r22);
    if (!(r22 > 0.0)) return std::nullopt;

    double z1 = 0.0, z2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        z1 += q1[k] * obs[k].delta_price;
        z2 += q2[k] * obs[k].delta_price;
    }
    const double gamma_hat = z2 / (r22 * r22);
    const double theta_hat = (z1 - r12 * gamma_hat) / r11;
    return ImpactFit{theta_hat, gamma_hat};
}

/// rho_hat = sum X_{k-1} X_k / sum X_{k-1}^2 over in-sample lags.
/// nullopt when fewer than two values or every lagged value is zero.
inline std::optional<RhoFit> fit_rho(std::span<const double> info_series) {
    if (info_series.size() < 2) return std::nullopt;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < info_series.size(); ++k) {
        num += info_series[k - 1] * info_series[k];
        den += info_series[k - 1] * info_series[k - 1];
    }
    if (!(den > 0.0)) return std::nullopt;
    const double raw = num / den;
    const double clamped = std::clamp(raw, -kRhoClamp, kRhoClamp);
    return RhoFit{clamped, clamped != raw};
}

namespace detail {

/// Residuals no larger than the rounding noise of the terms that formed them
/// are taken as exact zeros, so noiseless samples give zero variance.
inline double residual(double observed, double fitted_a, double fitted_b = 0.0, double level = 0.0) {
    const double r = observed - fitted_a - fitted_b;
    const double scale = std::fabs(observed) + std::fabs(fitted_a) + std::fabs(fitted_b) + level;
    return std::fabs(r) <= 64.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : r;
}

}  // namespace detail

/// sigma_eps_sq_hat = (1/(t-1)) sum (dP_k - theta B_k - gamma X_k)^2
inline std::optional<double> fit_price_noise_variance(const ObservationHistory& history,
                                                      double theta_hat, double gamma_hat) {
    const auto obs = history.observations();
    if (obs.size() < 2) return std::nullopt;
    double ss = 0.0;
    for (const auto& o : obs) {
        const double r = detail::residual(o.delta_price, theta_hat * o.order, gamma_hat * o.info, o.price_level);
        ss += r * r;
    }
    return ss / static_cast<double>(obs.size() - 1);
}

/// sigma_eta_sq_hat = (1/(t-1)) sum (X_k - rho X_{k-1})^2
inline std::optional<double> fit_info_noise_variance(const ObservationHistory& history,
                                                     double rho_hat) {
    const auto xs = history.info_series();
    if (history.size() < 2) return std::nullopt;
    double ss = 0.0;
    for (std::size_t k = 1; k < xs.size(); ++k) {
        const double r = detail::residual(xs[k], rho_hat * xs[k - 1]);
        ss += r * r;
    }
    return ss / static_cast<double>(history.size() - 1);
}

struct VarianceFit {
    std::optional<double> sigma_eps_sq_hat;
    std::optional<double> sigma_eta_sq_hat;
};

/// Both shock variances from the parameters held in `estimates`; a variance is
/// only produced when its parameter fit is valid.
inline VarianceFit fit_variances(const ObservationHistory& history,
                                 const ParameterEstimates& estimates) {
    VarianceFit out;
    if (estimates.impact_valid) {
        out.sigma_eps_sq_hat =
            fit_price_noise_variance(history, estimates.theta_hat, estimates.gamma_hat);
    }
    if (estimates.rho_valid) {
        out.sigma_eta_sq_hat = fit_info_noise_variance(history, estimates.rho_hat);
    }
    return out;
}

/// Refits every estimate on the full history. Failed fits clear their flag and
/// keep the values carried in `prior`.
inline ParameterEstimates estimate_all(const ObservationHistory& history,
                                       const ParameterEstimates& prior = {}) {
    ParameterEstimates est = prior;
    est.n_obs = history.size();

    if (const auto impact = fit_impact(history)) {
        est.theta_hat = impact->theta_hat;
        est.gamma_hat = impact->gamma_hat;
        est.impact_valid = true;
    } else {
        est.impact_valid = false;
    }

    if (const auto rho = fit_rho(history.info_series())) {
        est.rho_hat = rho->rho_hat;
        est.rho_valid = !rho->clamped;
    } else {
        est.rho_valid = false;
    }

    const auto variances = fit_variances(history, est);
    if (variances.sigma_eps_sq_hat) est.sigma_eps_sq_hat = *variances.sigma_eps_sq_hat;
    if (variances.sigma_eta_sq_hat) est.sigma_eta_sq_hat = *variances.sigma_eta_sq_hat;
    return est;
}

}  // namespace execsim
