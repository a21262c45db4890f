#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "graphon/experiment.hpp"

namespace graphon {

/// Header plus one line per record; absent optional values are empty fields.
std::string records_to_csv(const std::vector<CellRecord>& records);
std::vector<CellRecord> parse_records_csv(const std::string& text);

std::string summary_to_json(const ExperimentResult& result);

/// Line plot of the median error per init with a q10-q90 band, plus the oracle
/// median and the rate bound, on a log-scale error axis.
std::string render_svg(const ExperimentResult& result);

enum class OutputFormat { Csv, Json, Svg };

/// Writes records.csv, summary.json and plot.svg (as requested) into `dir`.
std::vector<std::filesystem::path> emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir,
                                                const std::vector<OutputFormat>& formats);

}  // namespace graphon
