#include "fvlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fvlab/rng.hpp"

namespace fvlab {

const char* kToolVersion = "fvlab 0.1.0";

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  for (int r = 0; r < A.outerSize(); ++r)
    for (SpMat::InnerIterator it(A, r); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << format_full(it.value()) << "\n";
}

SpMat read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw IoError("missing MatrixMarket banner in '" + path + "'");
  const bool symmetric = line.find("symmetric") != std::string::npos;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream head(line);
  long rows = 0, cols = 0, nnz = 0;
  head >> rows >> cols >> nnz;
  if (rows <= 0 || cols <= 0) throw IoError("bad MatrixMarket size line");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nnz) * (symmetric ? 2 : 1));
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw IoError("truncated MatrixMarket body");
    trips.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) trips.emplace_back(j - 1, i - 1, v);
  }
  SpMat A(rows, cols);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

void write_csv_vector(const Eigen::VectorXd& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_full(v(i)) << "\n";
}

Eigen::VectorXd read_csv_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void save_system(const LinearSystem& sys, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_market(sys.matrix, dir + "/A.mtx");
  write_csv_vector(sys.rhs, dir + "/b.csv");
  nlohmann::json meta;
  meta["n"] = sys.size();
  meta["pinned_cell"] = sys.pinned_cell;
  meta["pure_neumann"] = sys.pure_neumann;
  std::ofstream out(dir + "/system.json");
  if (!out) throw IoError("cannot open '" + dir + "/system.json' for writing");
  out << meta.dump(2) << "\n";
}

LinearSystem load_system(const std::string& dir) {
  LinearSystem sys;
  sys.matrix = read_matrix_market(dir + "/A.mtx");
  sys.rhs = read_csv_vector(dir + "/b.csv");
  std::ifstream in(dir + "/system.json");
  if (!in) throw IoError("cannot open '" + dir + "/system.json'");
  nlohmann::json meta;
  in >> meta;
  sys.pinned_cell = meta.at("pinned_cell").get<int>();
  sys.pure_neumann = meta.at("pure_neumann").get<bool>();
  if (sys.matrix.rows() != sys.rhs.size()) throw IoError("system matrix/rhs size mismatch");
  return sys;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[19];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::vector<std::string>& input_paths,
                             std::int64_t wall_clock_ms) {
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config;
  nlohmann::json hashes = nlohmann::json::object();
  for (const std::string& p : input_paths) hashes[p] = file_digest(p);
  m["input_hashes"] = hashes;
  m["tool_version"] = kToolVersion;
  m["wall_clock_ms"] = wall_clock_ms;
  return m;
}

void write_manifest(const nlohmann::json& manifest, const std::string& output_path) {
  std::ofstream out(output_path + ".manifest.json");
  if (!out) throw IoError("cannot open manifest for '" + output_path + "'");
  out << manifest.dump(2) << "\n";
}

}  // namespace fvlab
