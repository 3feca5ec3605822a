#include "quakefis/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "quakefis/anfis.hpp"
#include "quakefis/catalog.hpp"
#include "quakefis/evaluation.hpp"
#include "quakefis/model_io.hpp"

namespace quakefis::cli {

namespace {

/// Invalid flag value or inconsistent run configuration (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_with_suffix(std::string_view text, std::string_view what,
                         std::initializer_list<std::pair<std::string_view, double>> units) {
    for (const auto& [suffix, factor] : units) {
        if (!suffix.empty() && text.ends_with(suffix)) {
            const auto v = parse_double(text.substr(0, text.size() - suffix.size()));
            if (!v) break;
            return *v * factor;
        }
    }
    if (const auto v = parse_double(text)) return *v;
    throw UsageError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
}

// Shortest round-trip form, rounded to `decimals`, always with a decimal point.
std::string compact(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    std::string s = format_double(std::round(value * scale) / scale);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

Timestamp require_time(const std::string& text, const char* flag) {
    const auto t = parse_iso8601(text);
    if (!t) throw UsageError(std::string(flag) + ": invalid timestamp '" + text + "'");
    return *t;
}

const std::vector<std::string> kFeatureLabels = {"x1_primary_mag", "x2_mate_mag", "x3_dt_days",
                                                 "x4_dist_km"};

struct CouplingOptions {
    std::string catalog;
    std::string couples_in;
    double min_mag = 5.0;
    std::string max_dt = "91.3d";
    std::string max_dist = "190mi";
    std::string horizon = "182.6d";
    double target_radius_km = 0.0;
    CLI::Option* target_radius_opt = nullptr;
    std::string out_dir = ".";

    CouplingConfig config() const {
        CouplingConfig c;
        c.min_mag = min_mag;
        c.max_dt_days = parse_duration_days(max_dt);
        c.max_dist_km = parse_distance_km(max_dist);
        c.horizon_days = parse_duration_days(horizon);
        if (target_radius_opt && target_radius_opt->count() > 0) c.target_radius_km = target_radius_km;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

struct SplitOptions {
    std::string train_before = "1985-01-01T00:00:00Z";
    std::string test_start = "1985-01-01T00:00:00Z";
    std::string test_end = "2001-01-01T00:00:00Z";
    double validation_fraction = 0.2;
};

struct TrainOptions {
    std::size_t rules = 2;
    TrainingConfig training;
    std::string policy = "step-adaptive";
};

struct Loaded {
    std::vector<SeismicEvent> events;
    CouplingConfig config;
    std::vector<CoupleRecord> couples;
};

Loaded load(const CouplingOptions& opt) {
    Loaded l;
    l.config = opt.config();
    l.events = read_catalog(opt.catalog);
    if (!opt.couples_in.empty()) {
        std::ifstream in(opt.couples_in, std::ios::binary);
        if (!in) throw std::ios_base::failure("cannot open couples file " + opt.couples_in);
        l.couples = parse_couples(in, l.events);
    } else {
        l.couples = assign_targets(extract_couples(l.events, l.config), l.events, l.config);
    }
    return l;
}

std::string banner(const CouplingConfig& c) {
    std::string s = "min_mag=" + compact(c.min_mag, 2) + " max_dt=" + compact(c.max_dt_days, 2) +
                    "d max_dist=" + compact(c.max_dist_km, 2) + "km horizon=" +
                    compact(c.horizon_days, 2) + "d";
    if (c.target_radius_km) s += " target_radius=" + compact(*c.target_radius_km, 2) + "km";
    return s;
}

std::filesystem::path out_path(const CouplingOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return std::filesystem::path(opt.out_dir) / name;
}

FuzzyInferenceSystem require_model(const std::string& path) {
    auto fis = load_model(path);
    if (fis.input_dim() != kFeatureLabels.size()) {
        throw ModelFormatError("model has " + std::to_string(fis.input_dim()) +
                               " inputs, couple features have " +
                               std::to_string(kFeatureLabels.size()));
    }
    return fis;
}

void add_coupling_options(CLI::App& cmd, CouplingOptions& opt, bool with_couples_input) {
    cmd.add_option("--catalog", opt.catalog, "Catalog CSV (id,origin_time,lat,lon,depth_km,mag)")
        ->required();
    if (with_couples_input) {
        cmd.add_option("--couples", opt.couples_in,
                       "Read couples from this CSV instead of extracting them from the catalog");
    }
    cmd.add_option("--min-mag", opt.min_mag,
                   "Minimum magnitude of both couple members [expert-elicited default]")
        ->capture_default_str();
    cmd.add_option("--max-dt", opt.max_dt,
                   "Maximum time between couple members, e.g. 91.3d or 3mo (1mo = 30.44d) "
                   "[expert-elicited default: three months]")
        ->capture_default_str();
    cmd.add_option("--max-dist", opt.max_dist,
                   "Maximum epicentral distance between couple members, e.g. 190mi or 305.8km "
                   "[expert-elicited default: 190 miles]")
        ->capture_default_str();
    cmd.add_option("--horizon", opt.horizon,
                   "Target and alarm look-ahead window, e.g. 182.6d or 6mo [default: six months]")
        ->capture_default_str();
    opt.target_radius_opt =
        cmd.add_option("--target-radius-km", opt.target_radius_km,
                       "Only events within this distance of the primary count as its target "
                       "(default: whole catalog)")
            ->check(CLI::PositiveNumber);
    cmd.add_option("--out-dir", opt.out_dir, "Directory for output files")->capture_default_str();
}

void add_split_options(CLI::App& cmd, SplitOptions& opt) {
    cmd.add_option("--train-before", opt.train_before,
                   "Couples strictly before this time form the training and validation sets "
                   "[default: 1985-01-01]")
        ->capture_default_str();
    cmd.add_option("--test-start", opt.test_start, "Start of the test period (inclusive)")
        ->capture_default_str();
    cmd.add_option("--test-end", opt.test_end,
                   "End of the test period (exclusive) [default: test period 1985 through 2000]")
        ->capture_default_str();
    cmd.add_option("--validation-fraction", opt.validation_fraction,
                   "Latest share of pre-boundary couples held out for model selection")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.99));
}

DatasetSplit make_split(const std::vector<CoupleRecord>& couples, const SplitOptions& s) {
    try {
        return split_by_epoch(couples, require_time(s.train_before, "--train-before"),
                              require_time(s.test_start, "--test-start"),
                              require_time(s.test_end, "--test-end"), s.validation_fraction);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// Effective settings of the command that ran, in a form `--config` accepts.
void echo_config(const CLI::App& app, const CouplingOptions& opt, const std::string& command) {
    std::istringstream all(app.config_to_str(true, false));
    std::string echoed;
    const std::string prefix = command + ".";
    for (std::string line; std::getline(all, line);) {
        if (line.starts_with(prefix) && !line.ends_with("=\"\"")) echoed += line + '\n';
    }
    write_file_atomic(out_path(opt, command + ".config.toml"), echoed);
}

int cmd_couples(const CLI::App& app, const CouplingOptions& opt, std::ostream& out) {
    const Loaded l = load(opt);
    std::size_t with_target = 0;
    std::size_t censored = 0;
    for (const auto& c : l.couples) {
        with_target += c.target.has_value();
        censored += c.censored;
    }
    write_file_atomic(out_path(opt, "couples.csv"), couples_to_csv(l.couples));
    echo_config(app, opt, "couples");
    out << banner(l.config) << '\n'
        << l.events.size() << " events read\n"
        << l.couples.size() << " couples\n"
        << with_target << " targets assigned\n"
        << censored << " censored\n";
    return 0;
}

int cmd_train(const CLI::App& app, const CouplingOptions& opt, const SplitOptions& split_opt,
              TrainOptions& topt, const std::string& model_path, std::ostream& out,
              std::ostream& err) {
    topt.training.policy = step_policy_from_string(topt.policy);
    try {
        topt.training.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Loaded l = load(opt);
    const DatasetSplit split = make_split(l.couples, split_opt);
    const auto train_samples = to_samples(split.train);
    const auto val_samples = to_samples(split.validation);
    if (train_samples.empty()) throw UsageError("training partition has no couples with a target");

    GridInit init = init_fis_grid(train_samples, topt.rules, kFeatureLabels.size(),
                                  topt.training.min_mf_width, kFeatureLabels);
    for (const auto& w : init.warnings) err << "warning: " << w << '\n';
    const TrainingResult result = train(init.fis, train_samples, val_samples, topt.training);

    const std::filesystem::path model =
        model_path.empty() ? out_path(opt, "model.json") : std::filesystem::path(model_path);
    const std::string model_text = model_to_json(result.fis);
    const std::string report_text = result.report.to_csv();
    write_file_atomic(model, model_text);
    write_file_atomic(out_path(opt, "training_report.csv"), report_text);
    echo_config(app, opt, "train");

    const auto& r = result.report;
    out << banner(l.config) << '\n'
        << train_samples.size() << " training samples, " << val_samples.size()
        << " validation samples, " << split.test.size() << " test couples\n"
        << "epochs run: " << r.epochs_run << '\n'
        << "final training RMSE: " << format_double(r.history.back().train_rmse) << '\n'
        << (r.selected_on_validation ? "best validation RMSE: " : "best training RMSE: ")
        << format_double(r.best_rmse) << " at epoch " << r.best_epoch << '\n'
        << "model written to " << model.string() << '\n';
    return 0;
}

std::vector<CoupleRecord> in_test_period(const std::vector<CoupleRecord>& couples,
                                         const SplitOptions& s) {
    const Timestamp start = require_time(s.test_start, "--test-start");
    const Timestamp end = require_time(s.test_end, "--test-end");
    std::vector<CoupleRecord> out;
    for (const auto& c : couples) {
        if (c.primary_time >= start && c.primary_time < end) out.push_back(c);
    }
    return out;
}

void report_skipped(const Prediction& p, std::ostream& err) {
    for (const auto& id : p.skipped) err << "skipped " << id << ": no rule fires\n";
}

int cmd_predict(const CLI::App& app, const CouplingOptions& opt, const SplitOptions& split_opt,
                const std::string& model_path, bool all, std::ostream& out, std::ostream& err) {
    const auto fis = require_model(model_path);
    const Loaded l = load(opt);
    const auto couples = all ? l.couples : in_test_period(l.couples, split_opt);
    const Prediction p = predict_couples(fis, couples, l.config.horizon_days);
    report_skipped(p, err);
    write_file_atomic(out_path(opt, "predictions.csv"), predictions_to_csv(p.alarms));
    echo_config(app, opt, "predict");
    out << banner(l.config) << '\n'
        << p.alarms.size() << " predictions, " << p.skipped.size() << " skipped\n";
    return 0;
}

int cmd_evaluate(const CLI::App& app, const CouplingOptions& opt, const SplitOptions& split_opt,
                 const std::string& model_path, const std::vector<double>& thresholds,
                 CLI::Option* match_radius_opt, double match_radius_km, std::ostream& out,
                 std::ostream& err) {
    const auto fis = require_model(model_path);
    const Loaded l = load(opt);
    const auto couples = in_test_period(l.couples, split_opt);
    const Prediction p = predict_couples(fis, couples, l.config.horizon_days);
    report_skipped(p, err);
    const ScoringPeriod period{require_time(split_opt.test_start, "--test-start"),
                               require_time(split_opt.test_end, "--test-end")};
    std::optional<double> radius;
    if (match_radius_opt->count() > 0) radius = match_radius_km;
    const EvaluationReport report = evaluate_alarms(p.alarms, l.events, thresholds, period, radius);
    const std::string text = report.to_text();
    write_file_atomic(out_path(opt, "evaluation.csv"), report.to_csv());
    write_file_atomic(out_path(opt, "evaluation.txt"), text);
    echo_config(app, opt, "evaluate");
    out << banner(l.config) << '\n'
        << couples.size() << " test couples, " << p.skipped.size() << " skipped\n"
        << text;
    return 0;
}

int cmd_plot_data(const CLI::App& app, const CouplingOptions& opt, const SplitOptions& split_opt,
                  const std::string& model_path, const std::string& from, const std::string& to,
                  std::ostream& out, std::ostream& err) {
    const auto fis = require_model(model_path);
    const Timestamp t0 = require_time(from.empty() ? split_opt.test_start : from, "--from");
    const Timestamp t1 = require_time(to.empty() ? split_opt.test_end : to, "--to");
    if (t1 < t0) throw UsageError("--to must not precede --from");
    const Loaded l = load(opt);
    const Prediction p = predict_couples(fis, l.couples, l.config.horizon_days);
    report_skipped(p, err);
    const auto rows = emit_plot_data(p.alarms, l.events, t0, t1);
    write_file_atomic(out_path(opt, "plot_data.csv"), plot_rows_to_csv(rows));
    echo_config(app, opt, "plot-data");
    out << rows.size() << " plot rows between " << format_iso8601(t0) << " and "
        << format_iso8601(t1) << '\n';
    return 0;
}

int cmd_model_show(const std::string& model_path, std::ostream& out) {
    const auto fis = load_model(model_path);
    out << "format version " << kModelFormatVersion << ", " << fis.input_dim() << " inputs, "
        << fis.rule_count() << " rules, AND = " << to_string(fis.and_operator()) << '\n';
    for (std::size_t i = 0; i < fis.rule_count(); ++i) {
        const auto& rule = fis.rules()[i];
        out << "rule " << i + 1 << ":\n";
        for (std::size_t j = 0; j < fis.input_dim(); ++j) {
            const auto& mf = rule.antecedents[j];
            out << "  if " << fis.input_labels()[j] << " is " << mf.label()
                << "  (bell a=" << format_double(mf.width()) << " b=" << format_double(mf.slope())
                << " c=" << format_double(mf.center()) << ")\n";
        }
        out << "  then z = " << format_double(rule.consequent[0]);
        for (std::size_t j = 0; j < fis.input_dim(); ++j) {
            out << " + " << format_double(rule.consequent[j + 1]) << "*" << fis.input_labels()[j];
        }
        out << '\n';
    }
    return 0;
}

}  // namespace

double parse_distance_km(std::string_view text) {
    return parse_with_suffix(text, "distance", {{"km", 1.0}, {"mi", kKmPerMile}});
}

double parse_duration_days(std::string_view text) {
    return parse_with_suffix(text, "duration", {{"mo", kDaysPerMonth}, {"d", 1.0}});
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::ios_base::failure("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            f.close();
            std::filesystem::remove(tmp);
            throw std::ios_base::failure("error writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coupled-earthquake fuzzy expert system: couple extraction, ANFIS training, "
                 "6-month magnitude alarms and false-alarm evaluation",
                 "quakefis"};
    app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    CouplingOptions coupling;
    SplitOptions split;
    TrainOptions topt;
    std::string model_path;
    bool predict_all = false;
    std::vector<double> thresholds = {5.5, 6.0};
    double match_radius_km = 0.0;
    std::string plot_from;
    std::string plot_to;

    auto* couples_cmd = app.add_subcommand("couples", "Extract coupled earthquakes and 6-month targets");
    add_coupling_options(*couples_cmd, coupling, false);

    auto* train_cmd = app.add_subcommand("train", "Train the two-rule fuzzy system with hybrid learning");
    add_coupling_options(*train_cmd, coupling, true);
    add_split_options(*train_cmd, split);
    train_cmd->add_option("--rules", topt.rules, "Number of paired rules")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", topt.training.epochs,
                          "Hybrid-learning epochs; 0 fits the consequents only")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--learning-rate", topt.training.learning_rate,
                          "Length of each premise-parameter gradient step")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lr-policy", topt.policy, "Step-size policy")
        ->capture_default_str()
        ->check(CLI::IsMember({"fixed", "step-adaptive"}));
    train_cmd->add_option("--seed", topt.training.seed, "Seed recorded with the run")
        ->capture_default_str();
    train_cmd->add_option("--min-mf-width", topt.training.min_mf_width,
                          "Floor for membership-function widths")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--convergence-tol", topt.training.convergence_tol,
                          "Stop when the epoch RMSE changes by less than this")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--model", model_path, "Model output path (default: <out-dir>/model.json)");

    auto* predict_cmd = app.add_subcommand("predict", "Predict 6-month magnitudes for test-period couples");
    add_coupling_options(*predict_cmd, coupling, true);
    add_split_options(*predict_cmd, split);
    predict_cmd->add_option("--model", model_path, "Trained model JSON")->required();
    predict_cmd->add_flag("--all", predict_all, "Predict every couple, not only the test period");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score alarms against the catalog");
    add_coupling_options(*evaluate_cmd, coupling, true);
    add_split_options(*evaluate_cmd, split);
    evaluate_cmd->add_option("--model", model_path, "Trained model JSON")->required();
    evaluate_cmd->add_option("--thresholds", thresholds, "Alarm magnitude thresholds")
        ->capture_default_str()
        ->delimiter(',');
    auto* match_radius_opt =
        evaluate_cmd->add_option("--match-radius-km", match_radius_km,
                                 "Only events within this distance of the alarm can confirm it "
                                 "(default: whole catalog)")
            ->check(CLI::PositiveNumber);

    auto* plot_cmd = app.add_subcommand("plot-data", "Emit actual and predicted magnitudes over time");
    add_coupling_options(*plot_cmd, coupling, true);
    add_split_options(*plot_cmd, split);
    plot_cmd->add_option("--model", model_path, "Trained model JSON")->required();
    plot_cmd->add_option("--from", plot_from, "Range start (default: --test-start)");
    plot_cmd->add_option("--to", plot_to, "Range end, exclusive (default: --test-end)");

    auto* show_cmd = app.add_subcommand("model-show", "Print a trained model's rules");
    show_cmd->add_option("--model", model_path, "Model JSON")->required();

    std::vector<std::string> argv_store = args;
    argv_store.insert(argv_store.begin(), "quakefis");
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*couples_cmd) return cmd_couples(app, coupling, out);
        if (*train_cmd) return cmd_train(app, coupling, split, topt, model_path, out, err);
        if (*predict_cmd) return cmd_predict(app, coupling, split, model_path, predict_all, out, err);
        if (*evaluate_cmd) {
            return cmd_evaluate(app, coupling, split, model_path, thresholds, match_radius_opt,
                                match_radius_km, out, err);
        }
        if (*plot_cmd) return cmd_plot_data(app, coupling, split, model_path, plot_from, plot_to, out, err);
        if (*show_cmd) return cmd_model_show(model_path, out);
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace quakefis::cli
