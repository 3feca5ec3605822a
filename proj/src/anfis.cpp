#include "quakefis/anfis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quakefis/csv_format.hpp"

namespace quakefis {

namespace {

constexpr double kCenterEpsilon = 1e-12;
constexpr double kMinSlope = 1e-3;
constexpr double kDivergenceFactor = 10.0;

struct BellTerms {
    double mu;
    double mu_tail;  // mu * (1 - mu) == u * mu^2, computed without cancellation
    double log_s;    // ln|(x - c) / a|, meaningless at the center
    bool at_center;
};

BellTerms bell_terms(const BellMembership& mf, double x) {
    const double diff = x - mf.center();
    const double s = std::abs(diff / mf.width());
    const double u = std::pow(s, 2.0 * mf.slope());
    BellTerms t{};
    t.mu = 1.0 / (1.0 + u);
    t.mu_tail = std::isinf(u) ? 0.0 : t.mu * (u / (1.0 + u));
    t.at_center = std::abs(diff) < kCenterEpsilon;
    t.log_s = t.at_center ? 0.0 : std::log(s);
    return t;
}

void require_product(const FuzzyInferenceSystem& fis) {
    if (fis.and_operator() != AndOperator::product) {
        throw DomainError("ANFIS learning requires the product AND operator");
    }
}

double squared_error(const FuzzyInferenceSystem& fis, std::span<const double> x, double target) {
    const double e = fis.infer(x) - target;
    return e * e;
}

}  // namespace

LayerTrace anfis_forward(const FuzzyInferenceSystem& fis, std::span<const double> x) {
    require_product(fis);
    fis.check_input(x);
    const auto n = static_cast<Eigen::Index>(fis.input_dim());
    const auto r = static_cast<Eigen::Index>(fis.rule_count());

    LayerTrace trace;
    trace.degrees.resize(n, r);
    trace.firing.resize(r);
    trace.consequents.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& rule = fis.rules()[static_cast<std::size_t>(i)];
        double w = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double mu = rule.antecedents[static_cast<std::size_t>(j)](x[static_cast<std::size_t>(j)]);
            trace.degrees(j, i) = mu;
            w *= mu;
        }
        trace.firing(i) = w;
        trace.consequents(i) = rule.consequent_at(x);
    }
    trace.output = weighted_average({trace.firing.data(), static_cast<std::size_t>(r)},
                                    {trace.consequents.data(), static_cast<std::size_t>(r)}, x);
    trace.normalized = trace.firing / trace.firing.sum();
    return trace;
}

LmsFit fit_consequents_lms(const FuzzyInferenceSystem& fis, std::span<const Sample> data) {
    const std::size_t n = fis.input_dim();
    const std::size_t r = fis.rule_count();
    const std::size_t cols = r * (n + 1);

    std::vector<std::size_t> used;
    std::vector<std::size_t> excluded;
    std::vector<std::vector<double>> weights;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto w = fis.firing_strengths(data[k].x);
        double total = 0.0;
        for (double v : w) total += v;
        if (total == 0.0) {
            excluded.push_back(k);
            continue;
        }
        std::vector<double> wn(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) wn[i] = w[i] / total;
        weights.push_back(std::move(wn));
        used.push_back(k);
    }
    if (used.empty()) {
        throw std::invalid_argument("least-squares fit has no sample that fires a rule");
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(used.size()));
    for (std::size_t row = 0; row < used.size(); ++row) {
        const auto& s = data[used[row]];
        const auto& wn = weights[row];
        const auto er = static_cast<Eigen::Index>(row);
        for (std::size_t i = 0; i < r; ++i) {
            const auto base = static_cast<Eigen::Index>(i * (n + 1));
            design(er, base) = wn[i];
            for (std::size_t j = 0; j < n; ++j) {
                design(er, base + static_cast<Eigen::Index>(j + 1)) = wn[i] * s.x[j];
            }
        }
        rhs(er) = s.target;
    }

    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::VectorXd coef = cod.solve(rhs);

    std::vector<SugenoRule> rules = fis.rules();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            rules[i].consequent[j] = coef(static_cast<Eigen::Index>(i * (n + 1) + j));
        }
    }
    FuzzyInferenceSystem fitted(n, std::move(rules), fis.and_operator(), fis.input_labels());

    double sse = 0.0;
    for (std::size_t k : used) sse += squared_error(fitted, data[k].x, data[k].target);
    const double fit_rmse = std::sqrt(sse / static_cast<double>(used.size()));
    return LmsFit{std::move(fitted), std::move(excluded), fit_rmse, cod.rank()};
}

PremiseGradient premise_gradients(const FuzzyInferenceSystem& fis, std::span<const double> x,
                                  double target) {
    const LayerTrace trace = anfis_forward(fis, x);
    const std::size_t n = fis.input_dim();
    const std::size_t r = fis.rule_count();
    const double total = trace.firing.sum();
    const double de_dz = 2.0 * (trace.output - target);

    PremiseGradient grad(r, std::vector<MfGradient>(n));
    for (std::size_t i = 0; i < r; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        const double de_dw = de_dz * (trace.consequents(ei) - trace.output) / total;
        const auto& rule = fis.rules()[i];
        for (std::size_t j = 0; j < n; ++j) {
            double others = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != j) others *= trace.degrees(static_cast<Eigen::Index>(k), ei);
            }
            const auto& mf = rule.antecedents[j];
            const BellTerms t = bell_terms(mf, x[j]);
            const double de_dmu = de_dw * others;
            auto& g = grad[i][j];
            g.d_width = de_dmu * 2.0 * mf.slope() * t.mu_tail / mf.width();
            if (!t.at_center) {
                g.d_slope = de_dmu * -2.0 * t.log_s * t.mu_tail;
                g.d_center = de_dmu * 2.0 * mf.slope() * t.mu_tail / (x[j] - mf.center());
            }
        }
    }
    return grad;
}

std::vector<double> premise_parameters(const FuzzyInferenceSystem& fis) {
    std::vector<double> p;
    p.reserve(fis.rule_count() * fis.input_dim() * 3);
    for (const auto& rule : fis.rules()) {
        for (const auto& mf : rule.antecedents) {
            p.push_back(mf.width());
            p.push_back(mf.slope());
            p.push_back(mf.center());
        }
    }
    return p;
}

FuzzyInferenceSystem with_premise_parameters(const FuzzyInferenceSystem& fis,
                                             std::span<const double> params) {
    if (params.size() != fis.rule_count() * fis.input_dim() * 3) {
        throw DimensionError("premise parameter vector has the wrong length");
    }
    std::vector<SugenoRule> rules = fis.rules();
    std::size_t k = 0;
    for (auto& rule : rules) {
        for (auto& mf : rule.antecedents) {
            mf = mf.with_params(params[k], params[k + 1], params[k + 2]);
            k += 3;
        }
    }
    return FuzzyInferenceSystem(fis.input_dim(), std::move(rules), fis.and_operator(),
                                fis.input_labels());
}

std::vector<double> flatten(const PremiseGradient& g) {
    std::vector<double> out;
    for (const auto& rule : g) {
        for (const auto& mf : rule) {
            out.push_back(mf.d_width);
            out.push_back(mf.d_slope);
            out.push_back(mf.d_center);
        }
    }
    return out;
}

PremiseGradient finite_difference_gradient(const FuzzyInferenceSystem& fis,
                                           std::span<const double> x, double target, double h,
                                           StepScale scale) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DomainError("finite-difference step must be finite and > 0");
    }
    const std::size_t n = fis.input_dim();
    const std::size_t r = fis.rule_count();
    std::vector<double> params = premise_parameters(fis);
    const double base = squared_error(fis, x, target);

    PremiseGradient grad(r, std::vector<MfGradient>(n));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double theta = params[k];
        const double step = scale == StepScale::relative ? h * std::max(1.0, std::abs(theta)) : h;
        const bool positive_param = (k % 3) != 2;  // width and slope must stay > 0
        const bool one_sided = positive_param && theta - step <= 0.0;

        params[k] = theta + step;
        const double up = squared_error(with_premise_parameters(fis, params), x, target);
        double d = 0.0;
        if (one_sided) {
            d = (up - base) / step;
        } else {
            params[k] = theta - step;
            const double down = squared_error(with_premise_parameters(fis, params), x, target);
            d = (up - down) / (2.0 * step);
        }
        params[k] = theta;

        auto& g = grad[k / (3 * n)][(k / 3) % n];
        switch (k % 3) {
            case 0: g.d_width = d; break;
            case 1: g.d_slope = d; break;
            default: g.d_center = d; break;
        }
        g.one_sided = g.one_sided || one_sided;
    }
    return grad;
}

std::optional<double> rmse(const FuzzyInferenceSystem& fis, std::span<const Sample> data) {
    double sse = 0.0;
    std::size_t count = 0;
    for (const auto& s : data) {
        try {
            sse += squared_error(fis, s.x, s.target);
            ++count;
        } catch (const NoRuleFiresError&) {
        }
    }
    if (count == 0) return std::nullopt;
    return std::sqrt(sse / static_cast<double>(count));
}

const char* to_string(StepPolicy policy) noexcept {
    return policy == StepPolicy::fixed ? "fixed" : "step-adaptive";
}

StepPolicy step_policy_from_string(const std::string& name) {
    if (name == "fixed") return StepPolicy::fixed;
    if (name == "step-adaptive") return StepPolicy::step_adaptive;
    throw std::invalid_argument("unknown learning-rate policy '" + name + "'");
}

void TrainingConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be finite and >= 0");
    }
    if (!(min_mf_width > 0.0) || !std::isfinite(min_mf_width)) {
        throw std::invalid_argument("minimum membership width must be finite and > 0");
    }
    if (!(convergence_tol >= 0.0)) throw std::invalid_argument("convergence tolerance must be >= 0");
}

std::string TrainingReport::to_csv() const {
    std::string out = "epoch,train_rmse,val_rmse,learning_rate\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch);
        out += ',';
        out += format_double(e.train_rmse);
        out += ',';
        if (e.val_rmse) out += format_double(*e.val_rmse);
        out += ',';
        out += format_double(e.learning_rate);
        out += '\n';
    }
    return out;
}

TrainingResult train(const FuzzyInferenceSystem& initial, std::span<const Sample> train_data,
                     std::span<const Sample> val_data, const TrainingConfig& config) {
    config.validate();
    require_product(initial);
    if (train_data.empty()) throw std::invalid_argument("training set is empty");

    TrainingReport report;
    report.seed = config.seed;
    FuzzyInferenceSystem current = initial;
    std::optional<FuzzyInferenceSystem> best;
    double best_score = std::numeric_limits<double>::infinity();
    double initial_rmse = 0.0;
    double lr = config.learning_rate;
    int decreases = 0;

    const int passes = std::max(config.epochs, 1);
    for (int epoch = 1; epoch <= passes; ++epoch) {
        LmsFit fit = fit_consequents_lms(current, train_data);
        current = std::move(fit.fis);
        report.excluded_train = fit.excluded.size();

        EpochRecord rec;
        rec.epoch = config.epochs == 0 ? 0 : epoch;
        rec.train_rmse = fit.rmse;
        rec.val_rmse = val_data.empty() ? std::nullopt : rmse(current, val_data);

        if (epoch == 1) {
            initial_rmse = rec.train_rmse;
        } else if (rec.train_rmse > kDivergenceFactor * initial_rmse + 1e-12) {
            std::ostringstream os;
            os << "training diverged at epoch " << epoch << ": RMSE " << rec.train_rmse
               << " exceeds " << kDivergenceFactor << "x the first-epoch RMSE " << initial_rmse
               << " (learning rate " << lr << ")";
            throw TrainingDiverged(os.str());
        }

        const double score = rec.val_rmse.value_or(rec.train_rmse);
        if (score < best_score) {
            best_score = score;
            best = current;
            report.best_epoch = rec.epoch;
            report.selected_on_validation = rec.val_rmse.has_value();
        }

        if (config.policy == StepPolicy::step_adaptive && !report.history.empty()) {
            const double prev = report.history.back().train_rmse;
            if (rec.train_rmse < prev) {
                if (++decreases == 4) {
                    lr *= 1.1;
                    decreases = 0;
                }
            } else if (rec.train_rmse > prev) {
                lr *= 0.9;
                decreases = 0;
            }
        }
        rec.learning_rate = lr;
        const bool converged = !report.history.empty() &&
                               std::abs(report.history.back().train_rmse - rec.train_rmse) <
                                   config.convergence_tol;
        report.history.push_back(rec);
        report.epochs_run = config.epochs == 0 ? 0 : epoch;
        if (epoch == passes || converged || config.epochs == 0) break;

        // Batch gradient over the training set, accumulated in input order.
        std::vector<double> grad(premise_parameters(current).size(), 0.0);
        for (const auto& s : train_data) {
            try {
                const auto g = flatten(premise_gradients(current, s.x, s.target));
                for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
            } catch (const NoRuleFiresError&) {
            }
        }
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm == 0.0 || lr == 0.0) continue;

        // Fixed-length step along the negative gradient.
        std::vector<double> params = premise_parameters(current);
        for (std::size_t k = 0; k < params.size(); ++k) {
            params[k] -= lr * grad[k] / norm;
            if (k % 3 == 0) params[k] = std::max(params[k], config.min_mf_width);
            if (k % 3 == 1) params[k] = std::max(params[k], kMinSlope);
        }
        current = with_premise_parameters(current, params);
    }

    report.best_rmse = best_score;
    return TrainingResult{std::move(*best), std::move(report)};
}

namespace {

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

GridInit init_fis_grid(std::span<const Sample> data, std::size_t rules, std::size_t input_dim,
                       double min_mf_width, std::vector<std::string> input_labels) {
    if (data.empty()) throw std::invalid_argument("cannot initialise from an empty dataset");
    if (rules == 0) throw std::invalid_argument("need at least one rule");
    if (!(min_mf_width > 0.0)) throw std::invalid_argument("minimum width must be > 0");

    GridInit out{FuzzyInferenceSystem(1, {SugenoRule{{BellMembership(1, 1, 0)}, {0, 0}}}), {}};
    std::vector<SugenoRule> rule_set(rules);
    for (auto& rule : rule_set) rule.consequent.assign(input_dim + 1, 0.0);

    const double rd = static_cast<double>(rules);
    for (std::size_t j = 0; j < input_dim; ++j) {
        std::vector<double> column;
        column.reserve(data.size());
        for (const auto& s : data) {
            if (s.x.size() != input_dim) throw DimensionError("sample has the wrong input dimension");
            column.push_back(s.x[j]);
        }
        std::sort(column.begin(), column.end());

        std::vector<double> centers;
        for (std::size_t i = 0; i < rules; ++i) {
            centers.push_back(quantile(column, (2.0 * static_cast<double>(i) + 1.0) / (2.0 * rd)));
        }
        const double spread = rules == 1 ? quantile(column, 0.75) - quantile(column, 0.25)
                                         : (centers.back() - centers.front()) / (rd - 1.0);
        double width = spread / 2.0;
        if (column.front() == column.back()) {
            out.warnings.push_back("input " + std::to_string(j + 1) +
                                   " is constant; membership width set to the floor");
            width = min_mf_width;
        }
        width = std::max(width, min_mf_width);
        for (std::size_t i = 0; i < rules; ++i) {
            const std::string label = "L_" + std::to_string(j + 1) + "^" + std::to_string(i + 1);
            rule_set[i].antecedents.emplace_back(width, 2.0, centers[i], label);
        }
    }
    out.fis = FuzzyInferenceSystem(input_dim, std::move(rule_set), AndOperator::product,
                                   std::move(input_labels));
    return out;
}

}  // namespace quakefis
