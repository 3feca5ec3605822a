#include "quakefis/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace quakefis {

using nlohmann::json;

std::string model_to_json(const FuzzyInferenceSystem& fis) {
    json rules = json::array();
    for (const auto& rule : fis.rules()) {
        json antecedents = json::array();
        for (const auto& mf : rule.antecedents) {
            antecedents.push_back(
                {{"a", mf.width()}, {"b", mf.slope()}, {"c", mf.center()}, {"label", mf.label()}});
        }
        rules.push_back({{"antecedents", std::move(antecedents)}, {"consequent", rule.consequent}});
    }
    json doc = {
        {"version", kModelFormatVersion},
        {"input_dim", fis.input_dim()},
        {"and_operator", to_string(fis.and_operator())},
        {"input_labels", fis.input_labels()},
        {"rules", std::move(rules)},
    };
    return doc.dump(2) + "\n";
}

FuzzyInferenceSystem model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("model is not valid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw ModelFormatError("unsupported model format version " + std::to_string(version) +
                                   " (expected version " + std::to_string(kModelFormatVersion) +
                                   ")");
        }
        const auto input_dim = doc.at("input_dim").get<std::size_t>();
        const auto and_op = and_operator_from_string(doc.at("and_operator").get<std::string>());
        auto labels = doc.at("input_labels").get<std::vector<std::string>>();
        std::vector<SugenoRule> rules;
        for (const auto& r : doc.at("rules")) {
            SugenoRule rule;
            for (const auto& a : r.at("antecedents")) {
                rule.antecedents.emplace_back(a.at("a").get<double>(), a.at("b").get<double>(),
                                              a.at("c").get<double>(),
                                              a.value("label", std::string{}));
            }
            rule.consequent = r.at("consequent").get<std::vector<double>>();
            rules.push_back(std::move(rule));
        }
        return FuzzyInferenceSystem(input_dim, std::move(rules), and_op, std::move(labels));
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model document: ") + e.what());
    } catch (const DomainError& e) {
        throw ModelFormatError(std::string("invalid model: ") + e.what());
    } catch (const DimensionError& e) {
        throw ModelFormatError(std::string("invalid model: ") + e.what());
    }
}

FuzzyInferenceSystem load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open model file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace quakefis
