// JSON persistence for FuzzyInferenceSystem.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "quakefis/fuzzy.hpp"

namespace quakefis {

inline constexpr int kModelFormatVersion = 1;

/// Model document is malformed or written by a different format version.
class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Serialize to the model JSON document. Doubles are written in shortest
/// round-trip form, so load(save(m)) reproduces every coefficient exactly.
std::string model_to_json(const FuzzyInferenceSystem& fis);
FuzzyInferenceSystem model_from_json(const std::string& text);

/// File helpers; I/O failures raise std::ios_base::failure.
FuzzyInferenceSystem load_model(const std::filesystem::path& path);

}  // namespace quakefis
