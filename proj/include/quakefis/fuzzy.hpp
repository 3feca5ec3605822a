// Sugeno-type fuzzy inference: generalized-bell membership functions,
// T-norm rule firing and weighted-average defuzzification.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace quakefis {

/// Raised for non-finite inputs and invalid parameter values.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an input vector does not match the system's input dimension.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Every rule's firing strength is exactly zero for this input, so the
/// weighted average is undefined. Carries the offending input.
class NoRuleFiresError : public std::runtime_error {
public:
    explicit NoRuleFiresError(std::vector<double> input);

    const std::vector<double>& input() const noexcept { return input_; }

private:
    std::vector<double> input_;
};

/// Generalized bell: mu(x) = 1 / (1 + |(x - c) / a|^(2b)).
///
/// Holds one linguistic variable. Width and slope are strictly positive;
/// the constructor rejects anything else.
class BellMembership {
public:
    BellMembership(double width, double slope, double center, std::string label = {});

    double width() const noexcept { return width_; }
    double slope() const noexcept { return slope_; }
    double center() const noexcept { return center_; }
    const std::string& label() const noexcept { return label_; }

    /// Degree of membership in (0, 1]. Throws DomainError for non-finite x.
    double operator()(double x) const;

    /// Copy with new shape parameters, same label.
    BellMembership with_params(double width, double slope, double center) const;

    friend bool operator==(const BellMembership&, const BellMembership&) = default;

private:
    double width_;
    double slope_;
    double center_;
    std::string label_;
};

double mf_eval(const BellMembership& mf, double x);

enum class AndOperator { product, minimum };

const char* to_string(AndOperator op) noexcept;
AndOperator and_operator_from_string(const std::string& name);

/// One rule: "if x_1 is L_1 and ... and x_N is L_N then z = p_0 + sum_j p_j x_j".
struct SugenoRule {
    std::vector<BellMembership> antecedents;
    std::vector<double> consequent;  // [p_0, p_1, ..., p_N]

    /// Linear consequent z_i evaluated at x (no dimension check).
    double consequent_at(std::span<const double> x) const noexcept;

    friend bool operator==(const SugenoRule&, const SugenoRule&) = default;
};

/// Combines already-computed antecedent degrees with the given T-norm.
double combine_degrees(std::span<const double> degrees, AndOperator op);

double firing_strength(const SugenoRule& rule, std::span<const double> x, AndOperator op);

/// Immutable rule base. Construction validates that every rule has one
/// antecedent per input and N+1 consequent coefficients.
class FuzzyInferenceSystem {
public:
    FuzzyInferenceSystem(std::size_t input_dim, std::vector<SugenoRule> rules,
                         AndOperator and_op = AndOperator::product,
                         std::vector<std::string> input_labels = {});

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t rule_count() const noexcept { return rules_.size(); }
    const std::vector<SugenoRule>& rules() const noexcept { return rules_; }
    AndOperator and_operator() const noexcept { return and_op_; }
    const std::vector<std::string>& input_labels() const noexcept { return input_labels_; }

    /// Throws DimensionError unless x.size() == input_dim().
    void check_input(std::span<const double> x) const;

    /// Firing strength w_i of every rule at x.
    std::vector<double> firing_strengths(std::span<const double> x) const;

    /// Weighted average of the rule consequents.
    double infer(std::span<const double> x) const;

    friend bool operator==(const FuzzyInferenceSystem&, const FuzzyInferenceSystem&) = default;

private:
    std::size_t input_dim_;
    std::vector<SugenoRule> rules_;
    AndOperator and_op_;
    std::vector<std::string> input_labels_;
};

/// (sum_i w_i z_i) / (sum_i w_i). Throws NoRuleFiresError (carrying x) when
/// every weight is zero.
double weighted_average(std::span<const double> firing, std::span<const double> consequents,
                        std::span<const double> x);

double sugeno_infer(const FuzzyInferenceSystem& fis, std::span<const double> x);

}  // namespace quakefis
