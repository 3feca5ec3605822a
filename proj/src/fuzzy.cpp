#include "quakefis/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quakefis {

namespace {

std::string describe_input(const std::vector<double>& x) {
    std::ostringstream os;
    os.precision(17);
    os << "no rule fires for input [";
    for (std::size_t j = 0; j < x.size(); ++j) {
        os << (j ? ", " : "") << x[j];
    }
    os << ']';
    return os.str();
}

}  // namespace

NoRuleFiresError::NoRuleFiresError(std::vector<double> input)
    : std::runtime_error(describe_input(input)), input_(std::move(input)) {}

BellMembership::BellMembership(double width, double slope, double center, std::string label)
    : width_(width), slope_(slope), center_(center), label_(std::move(label)) {
    if (!(std::isfinite(width) && width > 0.0)) {
        throw DomainError("membership width must be finite and > 0");
    }
    if (!(std::isfinite(slope) && slope > 0.0)) {
        throw DomainError("membership slope must be finite and > 0");
    }
    if (!std::isfinite(center)) {
        throw DomainError("membership center must be finite");
    }
}

double BellMembership::operator()(double x) const {
    if (!std::isfinite(x)) {
        throw DomainError("membership input must be finite");
    }
    const double s = std::abs((x - center_) / width_);
    return 1.0 / (1.0 + std::pow(s, 2.0 * slope_));
}

BellMembership BellMembership::with_params(double width, double slope, double center) const {
    return BellMembership(width, slope, center, label_);
}

double mf_eval(const BellMembership& mf, double x) { return mf(x); }

const char* to_string(AndOperator op) noexcept {
    switch (op) {
        case AndOperator::product: return "product";
        case AndOperator::minimum: return "minimum";
    }
    return "product";
}

AndOperator and_operator_from_string(const std::string& name) {
    if (name == "product") return AndOperator::product;
    if (name == "minimum") return AndOperator::minimum;
    throw DomainError("unknown AND operator '" + name + "'");
}

double SugenoRule::consequent_at(std::span<const double> x) const noexcept {
    double z = consequent[0];
    for (std::size_t j = 0; j < x.size(); ++j) {
        z += consequent[j + 1] * x[j];
    }
    return z;
}

double combine_degrees(std::span<const double> degrees, AndOperator op) {
    double w = 1.0;
    for (double mu : degrees) {
        w = op == AndOperator::product ? w * mu : std::min(w, mu);
    }
    return w;
}

double firing_strength(const SugenoRule& rule, std::span<const double> x, AndOperator op) {
    if (x.size() != rule.antecedents.size()) {
        throw DimensionError("input has " + std::to_string(x.size()) + " values, rule expects " +
                             std::to_string(rule.antecedents.size()));
    }
    double w = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double mu = rule.antecedents[j](x[j]);
        w = op == AndOperator::product ? w * mu : std::min(w, mu);
    }
    return w;
}

FuzzyInferenceSystem::FuzzyInferenceSystem(std::size_t input_dim, std::vector<SugenoRule> rules,
                                           AndOperator and_op,
                                           std::vector<std::string> input_labels)
    : input_dim_(input_dim),
      rules_(std::move(rules)),
      and_op_(and_op),
      input_labels_(std::move(input_labels)) {
    if (input_dim_ == 0) {
        throw DimensionError("input dimension must be positive");
    }
    if (rules_.empty()) {
        throw DimensionError("a fuzzy inference system needs at least one rule");
    }
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const auto& r = rules_[i];
        if (r.antecedents.size() != input_dim_) {
            throw DimensionError("rule " + std::to_string(i) + " has " +
                                 std::to_string(r.antecedents.size()) + " antecedents, expected " +
                                 std::to_string(input_dim_));
        }
        if (r.consequent.size() != input_dim_ + 1) {
            throw DimensionError("rule " + std::to_string(i) + " has " +
                                 std::to_string(r.consequent.size()) +
                                 " consequent coefficients, expected " +
                                 std::to_string(input_dim_ + 1));
        }
        for (double p : r.consequent) {
            if (!std::isfinite(p)) throw DomainError("consequent coefficients must be finite");
        }
    }
    if (input_labels_.empty()) {
        for (std::size_t j = 0; j < input_dim_; ++j) input_labels_.push_back("x" + std::to_string(j + 1));
    } else if (input_labels_.size() != input_dim_) {
        throw DimensionError("expected " + std::to_string(input_dim_) + " input labels");
    }
}

void FuzzyInferenceSystem::check_input(std::span<const double> x) const {
    if (x.size() != input_dim_) {
        throw DimensionError("input has " + std::to_string(x.size()) + " values, expected " +
                             std::to_string(input_dim_));
    }
}

std::vector<double> FuzzyInferenceSystem::firing_strengths(std::span<const double> x) const {
    check_input(x);
    std::vector<double> w;
    w.reserve(rules_.size());
    for (const auto& rule : rules_) w.push_back(firing_strength(rule, x, and_op_));
    return w;
}

double FuzzyInferenceSystem::infer(std::span<const double> x) const {
    const auto w = firing_strengths(x);
    std::vector<double> z;
    z.reserve(rules_.size());
    for (const auto& rule : rules_) z.push_back(rule.consequent_at(x));
    return weighted_average(w, z, x);
}

double weighted_average(std::span<const double> firing, std::span<const double> consequents,
                        std::span<const double> x) {
    double total = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < firing.size(); ++i) {
        total += firing[i];
        weighted += firing[i] * consequents[i];
    }
    if (total == 0.0) {
        throw NoRuleFiresError(std::vector<double>(x.begin(), x.end()));
    }
    // Rounding in the two sums can push the quotient one ulp outside the
    // consequent hull; the exact value never leaves it.
    const auto [lo, hi] = std::minmax_element(consequents.begin(), consequents.end());
    return std::clamp(weighted / total, *lo, *hi);
}

double sugeno_infer(const FuzzyInferenceSystem& fis, std::span<const double> x) {
    return fis.infer(x);
}

}  // namespace quakefis
