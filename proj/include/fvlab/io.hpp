#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fvlab/assembly.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fvlab {

/// Matrix Market coordinate format, general symmetry, values with 17
/// significant digits so a round trip is bit-exact.
void write_matrix_market(const SpMat& A, const std::string& path);
SpMat read_matrix_market(const std::string& path);

/// Headerless single-column CSV, one value per line, 17 significant digits.
void write_csv_vector(const Eigen::VectorXd& v, const std::string& path);
Eigen::VectorXd read_csv_vector(const std::string& path);

/// System directory layout: A.mtx, b.csv, system.json.
void save_system(const LinearSystem& sys, const std::string& dir);
LinearSystem load_system(const std::string& dir);

std::string format_full(double v);  // %.17g

/// FNV-1a content digest of a file, as fixed-width hex.
std::string file_digest(const std::string& path);

/// Run manifest written beside every CLI output.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::vector<std::string>& input_paths,
                             std::int64_t wall_clock_ms);
void write_manifest(const nlohmann::json& manifest, const std::string& output_path);

extern const char* kToolVersion;

}  // namespace fvlab
