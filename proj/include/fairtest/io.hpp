#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairtest/model.hpp"

namespace fairtest {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string read_text(const std::string& path);
/// Writes to a temporary sibling file, then renames over `path`.
void atomic_write(const std::string& path, std::string_view content);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fingerprint(std::string_view bytes);

struct LoadedData {
    Dataset data;
    std::vector<std::array<double, 2>> scores; ///< (score_0, score_1) per row when present
    bool from_labels = false;                  ///< y was derived as 1{w == label}
    std::vector<std::string> columns;
    std::string fingerprint;
};

/// Parses a CSV with header x1..xd,s,w and either y or label, plus optional
/// score_0,score_1. The covariate box is `box` when given, otherwise the data
/// range padded by 5%. Errors throw SchemaError naming the row and column.
LoadedData parse_dataset_csv(std::string_view text, const std::optional<CovariateSpace>& box = std::nullopt);
LoadedData read_dataset_csv(const std::string& path, const std::optional<CovariateSpace>& box = std::nullopt);

std::string dataset_to_csv(const Dataset& data, const std::vector<std::array<double, 2>>& scores = {});

} // namespace fairtest
