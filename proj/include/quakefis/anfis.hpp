// ANFIS hybrid learning for a product-AND Sugeno system: full forward trace,
// global least squares on the consequents, backpropagated premise gradients.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quakefis/fuzzy.hpp"

namespace quakefis {

struct Sample {
    std::vector<double> x;
    double target = 0.0;
};

/// Every intermediate quantity of one forward pass.
struct LayerTrace {
    Eigen::MatrixXd degrees;      // N x R membership degrees
    Eigen::VectorXd firing;       // w_i
    Eigen::VectorXd normalized;   // w_i / sum(w)
    Eigen::VectorXd consequents;  // z_i
    double output = 0.0;          // z
};

/// Throws DomainError for non-product systems, NoRuleFiresError when every
/// firing strength is zero.
LayerTrace anfis_forward(const FuzzyInferenceSystem& fis, std::span<const double> x);

struct LmsFit {
    FuzzyInferenceSystem fis;
    std::vector<std::size_t> excluded;  // indices of samples that fired no rule
    double rmse = 0.0;                  // over the samples actually used
    Eigen::Index rank = 0;              // rank of the design matrix
};

/// Least-squares fit of all R*(N+1) consequent coefficients with the premise
/// parameters held fixed. Rank-deficient systems get the minimum-norm
/// solution. Throws std::invalid_argument if no sample fires a rule.
LmsFit fit_consequents_lms(const FuzzyInferenceSystem& fis, std::span<const Sample> data);

struct MfGradient {
    double d_width = 0.0;
    double d_slope = 0.0;
    double d_center = 0.0;
    bool one_sided = false;  // finite differences only: a probe hit the parameter floor
};

/// Partials of E = (z - target)^2, indexed [rule][input].
using PremiseGradient = std::vector<std::vector<MfGradient>>;

PremiseGradient premise_gradients(const FuzzyInferenceSystem& fis, std::span<const double> x,
                                  double target);

enum class StepScale { absolute, relative };

/// Central differences of E per premise parameter. With StepScale::relative the
/// probe for parameter t is h * max(1, |t|). Width and slope probes that would
/// leave the positive half-line fall back to a forward difference.
PremiseGradient finite_difference_gradient(const FuzzyInferenceSystem& fis,
                                           std::span<const double> x, double target, double h,
                                           StepScale scale = StepScale::relative);

/// Premise parameters flattened as [rule][input][width, slope, center].
std::vector<double> premise_parameters(const FuzzyInferenceSystem& fis);
FuzzyInferenceSystem with_premise_parameters(const FuzzyInferenceSystem& fis,
                                             std::span<const double> params);
std::vector<double> flatten(const PremiseGradient& g);

/// Root-mean-square error over the samples for which some rule fires.
/// Returns nullopt if none do.
std::optional<double> rmse(const FuzzyInferenceSystem& fis, std::span<const Sample> data);

enum class StepPolicy { fixed, step_adaptive };

const char* to_string(StepPolicy policy) noexcept;
StepPolicy step_policy_from_string(const std::string& name);

struct TrainingConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    StepPolicy policy = StepPolicy::step_adaptive;
    std::uint64_t seed = 0;
    double min_mf_width = 1e-3;
    double convergence_tol = 1e-9;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_rmse = 0.0;
    std::optional<double> val_rmse;
    double learning_rate = 0.0;  // step size applied after this epoch's LMS pass
};

struct TrainingReport {
    std::vector<EpochRecord> history;
    int epochs_run = 0;
    int best_epoch = 0;
    double best_rmse = 0.0;  // validation RMSE, or training RMSE without validation data
    bool selected_on_validation = false;
    std::size_t excluded_train = 0;
    std::uint64_t seed = 0;

    /// CSV with header `epoch,train_rmse,val_rmse,learning_rate`.
    std::string to_csv() const;
};

struct TrainingResult {
    FuzzyInferenceSystem fis;
    TrainingReport report;
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hybrid learning. Each epoch refits the consequents by least squares, records
/// train/validation RMSE, then takes one full-batch gradient step on the
/// premise parameters. Returns the snapshot with the lowest validation RMSE.
/// `epochs == 0` performs the least-squares pass only.
TrainingResult train(const FuzzyInferenceSystem& initial, std::span<const Sample> train_data,
                     std::span<const Sample> val_data, const TrainingConfig& config);

struct GridInit {
    FuzzyInferenceSystem fis;
    std::vector<std::string> warnings;
};

/// Paired-rule initialization: rule i uses the i-th membership function of
/// every input. Centers sit at evenly spaced quantiles of each input (25th and
/// 75th percentiles for two rules), widths are half the spacing between
/// neighbouring centers, slope 2, consequents zero.
GridInit init_fis_grid(std::span<const Sample> data, std::size_t rules, std::size_t input_dim,
                       double min_mf_width = 1e-3, std::vector<std::string> input_labels = {});

}  // namespace quakefis
