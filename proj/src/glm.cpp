#include "segsafe/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace segsafe {

namespace {

constexpr double kEtaCap = 300.0;  // exp stays finite well inside double range

Eigen::VectorXd mean_from_eta(const Eigen::VectorXd& eta) {
    return eta.array().min(kEtaCap).exp();
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                      const Eigen::VectorXd& mu) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll += y[i] * eta[i] - mu[i] - std::lgamma(y[i] + 1.0);
    }
    return ll;
}

double count_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double kappa) {
    double dev = 0.0;
    if (kappa <= 0.0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double yi = y[i];
            dev += 2.0 * ((yi > 0 ? yi * std::log(yi / mu[i]) : 0.0) - (yi - mu[i]));
        }
    } else {
        const double theta = 1.0 / kappa;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double yi = y[i];
            dev += 2.0 * ((yi > 0 ? yi * std::log(yi / mu[i]) : 0.0) -
                          (yi + theta) * std::log((yi + theta) / (mu[i] + theta)));
        }
    }
    return dev;
}

double pearson_chi2(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double kappa) {
    double chi2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double var = mu[i] + kappa * mu[i] * mu[i];
        const double r = y[i] - mu[i];
        chi2 += r * r / var;
    }
    return chi2;
}

// Solves A x = b for symmetric positive definite A, escalating a relative
// diagonal ridge when the factorization reports trouble.
Eigen::MatrixXd solve_spd(Eigen::MatrixXd A, const Eigen::MatrixXd& b, bool& ridge_applied) {
    const double scale = A.trace() / static_cast<double>(A.rows());
    double jitter = 1e-10 * scale;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd x = llt.solve(b);
            if (x.allFinite()) return x;
        }
        A.diagonal().array() += jitter;
        jitter *= 10.0;
        ridge_applied = true;
    }
    throw std::runtime_error("weighted normal equations are numerically singular");
}

void check_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& offset) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n == 0 || p == 0) throw std::invalid_argument("empty design matrix");
    if (y.size() != n || offset.size() != n) throw std::invalid_argument("design size mismatch");
    if (n <= p) throw std::invalid_argument("need more observations than parameters");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw std::invalid_argument("design matrix is rank deficient");
}

struct IrlsOutcome {
    Eigen::VectorXd beta;
    Eigen::VectorXd mu;
    double deviance = 0.0;
    int iterations = 0;
    bool converged = false;
    bool ridge_applied = false;
};

// IRLS for the log link. kappa = 0 gives Poisson working weights mu;
// kappa > 0 gives NB weights mu / (1 + kappa mu).
IrlsOutcome run_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& offset, double kappa,
                     const Eigen::VectorXd& beta_start) {
    const Eigen::Index n = X.rows(), p = X.cols();
    IrlsOutcome out;
    out.beta = beta_start;

    Eigen::VectorXd eta = offset + X * out.beta;
    Eigen::VectorXd mu = mean_from_eta(eta);
    double dev = count_deviance(y, mu, kappa);

    for (int iter = 1; iter <= kIrlsMaxIterations; ++iter) {
        out.iterations = iter;
        Eigen::VectorXd w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = std::max(mu[i], 1e-12);
            w[i] = kappa > 0 ? m / (1.0 + kappa * m) : m;
            z[i] = (eta[i] - offset[i]) + (y[i] - m) / m;
        }
        const Eigen::MatrixXd Xw = w.asDiagonal() * X;
        const Eigen::MatrixXd xtwx = X.transpose() * Xw;
        const Eigen::VectorXd xtwz = Xw.transpose() * z;
        Eigen::VectorXd beta_new = solve_spd(xtwx, xtwz, out.ridge_applied);

        // Step-halve when the update overshoots into a worse or non-finite
        // deviance (rare, but possible far from the optimum).
        const Eigen::VectorXd step = beta_new - out.beta;
        double rho = 1.0;
        double dev_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd beta_try, eta_try, mu_try;
        for (int inner = 0; inner < 30; ++inner) {
            beta_try = out.beta + rho * step;
            eta_try = offset + X * beta_try;
            mu_try = mean_from_eta(eta_try);
            dev_new = count_deviance(y, mu_try, kappa);
            if (std::isfinite(dev_new) && dev_new <= dev + 1e-10 * (0.1 + std::abs(dev))) break;
            rho *= 0.5;
        }
        if (!std::isfinite(dev_new)) break;

        out.beta = beta_try;
        eta = eta_try;
        mu = mu_try;
        const double dev_change = std::abs(dev_new - dev) / (0.1 + std::abs(dev_new));
        dev = dev_new;
        if (dev_change < kIrlsTolerance) {
            out.converged = true;
            break;
        }
    }
    out.mu = mu;
    out.deviance = dev;
    return out;
}

Eigen::VectorXd default_start(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& offset) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    beta[0] = std::log((y.sum() + 0.5) / offset.array().exp().sum());
    return beta;
}

Eigen::MatrixXd fisher_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu,
                                  double kappa, bool& ridge_applied) {
    const Eigen::Index n = X.rows(), p = X.cols();
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = std::max(mu[i], 1e-12);
        w[i] = kappa > 0 ? m / (1.0 + kappa * m) : m;
    }
    const Eigen::MatrixXd xtwx = X.transpose() * (w.asDiagonal() * X);
    Eigen::MatrixXd cov = solve_spd(xtwx, Eigen::MatrixXd::Identity(p, p), ridge_applied);
    return (cov + cov.transpose()) / 2.0;  // enforce exact symmetry
}

// psi(y + theta) - psi(theta); the exact harmonic sum for small integer y
// avoids catastrophic cancellation when theta is large.
double digamma_diff(double y, double theta) {
    if (y == 0.0) return 0.0;
    if (y == std::floor(y) && y > 0 && y <= 64) {
        double s = 0.0;
        for (double j = 0; j < y; ++j) s += 1.0 / (theta + j);
        return s;
    }
    return digamma(y + theta) - digamma(theta);
}

// lgamma(y + theta) - lgamma(theta), same small-count treatment.
double lgamma_diff(double y, double theta) {
    if (y == 0.0) return 0.0;
    if (y == std::floor(y) && y > 0 && y <= 64) {
        double s = 0.0;
        for (double j = 0; j < y; ++j) s += std::log(theta + j);
        return s;
    }
    return std::lgamma(y + theta) - std::lgamma(theta);
}

// d loglik / d kappa at fixed beta, via theta = 1/kappa.
double nb_dloglik_dkappa(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double kappa) {
    const double theta = 1.0 / kappa;
    double dtheta = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        dtheta += digamma_diff(y[i], theta) + std::log(theta) + 1.0 - std::log(theta + mu[i]) -
                  (y[i] + theta) / (theta + mu[i]);
    }
    return -theta * theta * dtheta;
}

// Maximizes the NB log-likelihood over kappa in [kKappaLower, kKappaUpper]
// with bisection on the derivative sign (log-kappa scale).
double maximize_kappa(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    if (nb_dloglik_dkappa(y, mu, kKappaLower) <= 0.0) return kKappaLower;
    if (nb_dloglik_dkappa(y, mu, kKappaUpper) >= 0.0) return kKappaUpper;
    double lo = std::log(kKappaLower), hi = std::log(kKappaUpper);
    for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (nb_dloglik_dkappa(y, mu, std::exp(mid)) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace

ModelSpec ModelSpec::all_predictors() {
    ModelSpec spec;
    spec.predictors = {Predictor::hbe_rate,     Predictor::road_type, Predictor::num_lanes,
                       Predictor::has_ramp,     Predictor::lane_changes,
                       Predictor::cum_turn_angle};
    return spec;
}

std::vector<std::string> design_column_names(const ModelSpec& spec) {
    std::vector<std::string> names = {"(intercept)"};
    for (Predictor pred : spec.predictors) {
        switch (pred) {
            case Predictor::hbe_rate: names.push_back("hbe_rate"); break;
            case Predictor::road_type:
                names.push_back("road_type_local");
                names.push_back("road_type_arterial");
                names.push_back("road_type_highway");
                break;
            case Predictor::num_lanes: names.push_back("num_lanes"); break;
            case Predictor::has_ramp: names.push_back("has_ramp"); break;
            case Predictor::lane_changes: names.push_back("lane_changes"); break;
            case Predictor::cum_turn_angle: names.push_back("cum_turn_angle"); break;
        }
    }
    return names;
}

std::vector<double> encode_design_row(const AnalysisRow& row, const ModelSpec& spec) {
    std::vector<double> x = {1.0};
    for (Predictor pred : spec.predictors) {
        switch (pred) {
            case Predictor::hbe_rate:
                if (spec.hbe_transform == HbeTransform::log1p_scaled) {
                    x.push_back(std::log1p(row.hbe_rate / spec.hbe_floor));
                } else {
                    x.push_back(row.hbe_rate);
                }
                break;
            case Predictor::road_type:
                x.push_back(row.road_type == RoadType::local ? 1.0 : 0.0);
                x.push_back(row.road_type == RoadType::arterial ? 1.0 : 0.0);
                x.push_back(row.road_type == RoadType::highway ? 1.0 : 0.0);
                break;
            case Predictor::num_lanes: x.push_back(static_cast<double>(row.num_lanes)); break;
            case Predictor::has_ramp: x.push_back(row.has_ramp ? 1.0 : 0.0); break;
            case Predictor::lane_changes: x.push_back(static_cast<double>(row.lane_changes)); break;
            case Predictor::cum_turn_angle: x.push_back(row.cum_turn_angle_deg); break;
        }
    }
    return x;
}

Design build_design(const std::vector<AnalysisRow>& rows, const ModelSpec& spec) {
    if (rows.empty()) throw std::invalid_argument("cannot build a design from zero rows");
    Design design;
    design.names = design_column_names(spec);
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(design.names.size());
    design.X.resize(n, p);
    design.y.resize(n);
    design.offset.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const AnalysisRow& row = rows[i];
        if (!(row.exposure_mvmt > 0)) {
            throw std::invalid_argument("row " + row.segment_id + " has non-positive exposure");
        }
        const auto x = encode_design_row(row, spec);
        for (Eigen::Index j = 0; j < p; ++j) design.X(i, j) = x[j];
        design.y[i] = static_cast<double>(row.crash_count);
        design.offset[i] = std::log(row.exposure_mvmt * 1e6);
    }
    for (Eigen::Index j = 1; j < p; ++j) {
        if ((design.X.col(j).array() == design.X(0, j)).all()) {
            design.warnings.push_back("constant predictor column: " + design.names[j]);
        }
    }
    return design;
}

FitResult fit_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& offset) {
    check_design(X, y, offset);
    const IrlsOutcome irls = run_irls(X, y, offset, 0.0, default_start(X, y, offset));

    FitResult fit;
    fit.family = Family::poisson;
    fit.beta = irls.beta;
    fit.kappa = 0.0;
    fit.deviance = irls.deviance;
    fit.pearson_chi2 = pearson_chi2(y, irls.mu, 0.0);
    fit.log_likelihood = poisson_loglik(y, offset + X * irls.beta, irls.mu);
    fit.iterations = irls.iterations;
    fit.converged = irls.converged;
    fit.ridge_applied = irls.ridge_applied;
    fit.covariance = fisher_covariance(X, irls.mu, 0.0, fit.ridge_applied);
    return fit;
}

FitResult fit_negbin_fixed_kappa(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& offset, double kappa) {
    if (kappa < 0 || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 0");
    check_design(X, y, offset);
    const IrlsOutcome irls = run_irls(X, y, offset, kappa, default_start(X, y, offset));

    FitResult fit;
    fit.family = Family::negbin;
    fit.beta = irls.beta;
    fit.kappa = kappa;
    fit.deviance = irls.deviance;
    fit.pearson_chi2 = pearson_chi2(y, irls.mu, kappa);
    fit.log_likelihood = nb_loglik(irls.beta, kappa, X, y, offset);
    fit.iterations = irls.iterations;
    fit.converged = irls.converged;
    fit.ridge_applied = irls.ridge_applied;
    fit.covariance = fisher_covariance(X, irls.mu, kappa, fit.ridge_applied);
    return fit;
}

FitResult fit_negbin(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& offset) {
    check_design(X, y, offset);

    // Poisson fit supplies the beta warm start and the method-of-moments
    // kappa start from its Pearson residuals.
    const IrlsOutcome pois = run_irls(X, y, offset, 0.0, default_start(X, y, offset));
    double mom_num = 0.0, mom_den = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y[i] - pois.mu[i];
        mom_num += r * r - pois.mu[i];
        mom_den += pois.mu[i] * pois.mu[i];
    }
    double kappa = std::clamp(mom_den > 0 ? mom_num / mom_den : 1.0, 1e-4, 1e2);

    FitResult fit;
    fit.family = Family::negbin;
    fit.ridge_applied = pois.ridge_applied;

    Eigen::VectorXd beta = pois.beta;
    Eigen::VectorXd mu = pois.mu;
    double ll = nb_loglik(beta, kappa, X, y, offset);
    int total_iterations = pois.iterations;
    bool converged = false;

    for (int outer = 0; outer < kIrlsMaxIterations; ++outer) {
        const IrlsOutcome step = run_irls(X, y, offset, kappa, beta);
        beta = step.beta;
        mu = step.mu;
        total_iterations += step.iterations;
        fit.ridge_applied = fit.ridge_applied || step.ridge_applied;

        kappa = maximize_kappa(y, mu);

        const double ll_new = nb_loglik(beta, kappa, X, y, offset);
        const double change = std::abs(ll_new - ll) / (0.1 + std::abs(ll_new));
        ll = ll_new;
        if (change < kIrlsTolerance) {
            converged = step.converged;
            break;
        }
    }

    fit.beta = beta;
    fit.kappa = kappa;
    fit.kappa_at_lower = kappa <= kKappaLower * (1.0 + 1e-9);
    fit.kappa_at_upper = kappa >= kKappaUpper * (1.0 - 1e-9);
    fit.log_likelihood = ll;
    fit.deviance = count_deviance(y, mu, kappa);
    fit.pearson_chi2 = pearson_chi2(y, mu, kappa);
    fit.iterations = total_iterations;
    fit.converged = converged;
    fit.covariance = fisher_covariance(X, mu, kappa, fit.ridge_applied);
    return fit;
}

DispersionCheck dispersion_check(const FitResult& fit, Eigen::Index n, Eigen::Index p) {
    if (fit.family != Family::poisson) {
        throw std::invalid_argument("dispersion_check expects a Poisson fit");
    }
    if (n <= p) throw std::invalid_argument("dispersion_check requires n > p");
    DispersionCheck check;
    check.pearson_ratio = fit.pearson_chi2 / static_cast<double>(n - p);
    check.overdispersed = check.pearson_ratio > 1.5;
    return check;
}

double normal_two_sided_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::string significance_code(double p_value) {
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    if (p_value < 0.1) return ".";
    return "";
}

std::vector<CoefRow> wald_inference(const FitResult& fit, const std::vector<std::string>& names) {
    if (!fit.converged) throw std::invalid_argument("wald_inference requires a converged fit");
    if (static_cast<Eigen::Index>(names.size()) != fit.beta.size()) {
        throw std::invalid_argument("coefficient name count mismatch");
    }
    std::vector<CoefRow> rows;
    rows.reserve(names.size());
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        const double var = fit.covariance(j, j);
        if (!(var > 0)) throw std::domain_error("zero standard error for " + names[j]);
        CoefRow row;
        row.name = names[j];
        row.estimate = fit.beta[j];
        row.std_error = std::sqrt(var);
        row.z = row.estimate / row.std_error;
        row.p_value = normal_two_sided_p(row.z);
        row.signif = significance_code(row.p_value);
        rows.push_back(std::move(row));
    }
    return rows;
}

double nb_loglik(const Eigen::VectorXd& beta, double kappa, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y, const Eigen::VectorXd& offset) {
    if (!beta.allFinite() || !std::isfinite(kappa) || kappa < 0) {
        throw std::invalid_argument("nb_loglik requires finite beta and kappa >= 0");
    }
    const Eigen::VectorXd eta = offset + X * beta;
    const Eigen::VectorXd mu = mean_from_eta(eta);
    if (kappa == 0.0) return poisson_loglik(y, eta, mu);

    const double theta = 1.0 / kappa;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        // theta * ln(theta/(theta+mu)) = -theta * log1p(mu/theta), stable for
        // large theta.
        ll += lgamma_diff(yi, theta) - std::lgamma(yi + 1.0) -
              theta * std::log1p(mu[i] / theta) + yi * std::log(mu[i] / (theta + mu[i]));
    }
    return ll;
}

double digamma(double x) {
    double result = 0.0;
    while (x < 8.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
    return result;
}

}  // namespace segsafe
