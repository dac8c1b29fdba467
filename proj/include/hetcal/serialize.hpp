#pragma once

#include <string>

#include "hetcal/fit.hpp"
#include "hetcal/inference.hpp"

namespace hetcal {

// Serialized fit: parameters with named blocks, likelihood components,
// optimizer report, the full design and model (so predictions need only this
// file), intervals / het test when supplied, and a provenance block (config
// and data hashes, seeds). No timestamps: identical inputs give identical
// bytes. Numbers survive the round trip bit-for-bit (17 significant digits).
std::string fit_to_json(const FitResult& fit,
                        const ConfidenceReport* ci = nullptr,
                        const HetTestResult* het = nullptr,
                        const std::string& config_text = "",
                        const std::string& data_path = "");

// Rebuilds a FitResult from fit_to_json output. The Monte Carlo basis is
// redrawn from its recorded seed, which reproduces the original exactly.
FitResult fit_from_json(const std::string& json_text);

// Hash of the design contents (locations + replicate values as serialized);
// stored under provenance.data_hash and checked before predicting.
std::string design_fingerprint(const ReplicatedDesign& design);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hetcal
