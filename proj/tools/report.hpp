#pragma once

// JSON forms of the library's reports, and atomic file output.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fbh/hardy.hpp"
#include "fbh/kernels.hpp"
#include "fbh/maximal.hpp"

namespace fbh::cli {

using Json = nlohmann::ordered_json;

Json to_json(const Interval& i);
Json to_json(const EstimateReport& r);
Json to_json(const UchiyamaReport& r);
Json to_json(const AtomCheck& r);
Json to_json(const Atom& a);
/// {family, atoms:[{kind, interval, j, height}], coefficients, sum_abs_coeff, reconstruction_l1_error}
Json to_json(const Decomposition& d);
Json to_json(const H1Report& r);
Json to_json(const AtomBatchReport& r);
Json duhamel_summary(const DuhamelResult& r);
Json error_report(const std::string& operation, const std::string& message);

/// Writes `text` to a sibling temporary and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& text);

}  // namespace fbh::cli
