#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "segsafe/types.hpp"

namespace segsafe {

enum class Family { poisson, negbin };

enum class Predictor { hbe_rate, road_type, num_lanes, has_ramp, lane_changes, cum_turn_angle };

enum class HbeTransform { identity, log1p_scaled };

// Count-regression specification: crash_count response, log(vehicle-miles)
// offset, log link. Controlled-access highways (type 4) are the dummy-coding
// reference for road_type.
struct ModelSpec {
    std::vector<Predictor> predictors;
    HbeTransform hbe_transform = HbeTransform::log1p_scaled;
    double hbe_floor = 1e-3;  // log1p_scaled maps r to ln(1 + r/hbe_floor)

    static ModelSpec all_predictors();
};

struct Design {
    Eigen::MatrixXd X;       // n x p, intercept column first
    Eigen::VectorXd y;       // crash counts
    Eigen::VectorXd offset;  // ln(exposure in vehicle-miles)
    std::vector<std::string> names;
    std::vector<std::string> warnings;
};

// Expands one row into a design vector (leading 1 for the intercept). The
// synthetic generator uses the same encoding, so generated and fitted designs
// can never drift apart.
std::vector<double> encode_design_row(const AnalysisRow& row, const ModelSpec& spec);
std::vector<std::string> design_column_names(const ModelSpec& spec);

// Requires nonempty rows with positive exposure. Constant predictor columns
// are kept but reported in warnings.
Design build_design(const std::vector<AnalysisRow>& rows, const ModelSpec& spec);

struct FitResult {
    Family family = Family::poisson;
    Eigen::VectorXd beta;        // intercept first
    Eigen::MatrixXd covariance;  // inverse Fisher information at the optimum
    double kappa = 0.0;          // overdispersion: Var = mu + kappa * mu^2
    double log_likelihood = 0.0;
    double deviance = 0.0;
    double pearson_chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool ridge_applied = false;   // normal equations needed diagonal jitter
    bool kappa_at_lower = false;  // effectively Poisson
    bool kappa_at_upper = false;  // severe overdispersion
};

inline constexpr double kIrlsTolerance = 1e-8;
inline constexpr int kIrlsMaxIterations = 100;
inline constexpr double kKappaLower = 1e-8;
inline constexpr double kKappaUpper = 1e4;

// Poisson log-link MLE via IRLS with offset. Throws std::invalid_argument on
// n <= p or a rank-deficient design; non-convergence is reported through the
// converged flag.
FitResult fit_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& offset);

// Negative Binomial MLE: alternates IRLS for beta at fixed kappa with a
// safeguarded 1-D maximization of the log-likelihood in kappa.
FitResult fit_negbin(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& offset);

// NB IRLS with kappa held fixed; kappa = 0 coincides with the Poisson fit.
FitResult fit_negbin_fixed_kappa(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& offset, double kappa);

struct DispersionCheck {
    double pearson_ratio = 0.0;
    bool overdispersed = false;  // ratio > 1.5
};

// Pearson chi^2 / (n - p) for a Poisson fit.
DispersionCheck dispersion_check(const FitResult& fit, Eigen::Index n, Eigen::Index p);

struct CoefRow {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double p_value = 0.0;
    std::string signif;  // ***, **, *, ., or empty
};

std::vector<CoefRow> wald_inference(const FitResult& fit, const std::vector<std::string>& names);

// Exact count log-likelihood with mean exp(offset + X beta) and variance
// mu + kappa mu^2; kappa = 0 evaluates the Poisson log-likelihood.
double nb_loglik(const Eigen::VectorXd& beta, double kappa, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y, const Eigen::VectorXd& offset);

double digamma(double x);

// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

std::string significance_code(double p_value);

}  // namespace segsafe
