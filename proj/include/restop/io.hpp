#pragma once

#include <string>

#include "restop/curve.hpp"

namespace restop {

enum class CurveFormat { kJsonl, kCsv };

// "jsonl" or "csv"; throws DataError otherwise.
CurveFormat curve_format_from_name(const std::string& name);

// Chooses the format by file extension (.csv -> csv, anything else -> jsonl).
CurveFormat curve_format_from_path(const std::string& path);

// Parses a curve file. Every error message carries the offending line number.
CurveDataset load_curves(const std::string& path, CurveFormat format);

// JSONL serialization: one {"id", "values"[, "costs"]} object per line, LF
// endings. Deterministic byte-for-byte for a given dataset.
std::string curves_to_jsonl(const CurveDataset& dataset);
void save_curves_jsonl(const CurveDataset& dataset, const std::string& path);

}  // namespace restop
