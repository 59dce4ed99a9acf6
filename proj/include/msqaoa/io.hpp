#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "msqaoa/finite_n.hpp"
#include "msqaoa/model.hpp"
#include "msqaoa/optimizer.hpp"

namespace msqaoa::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);
/// Strict full-string parse; throws ParseError.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<double> parse_double_list(std::string_view comma_list);
/// Accepts "3", "2,4,7" and ranges such as "2..8" (mixed freely).
std::vector<int> parse_int_list(std::string_view spec);

/// "min:max:count" grid; count >= 1, a single point sits at min.
std::vector<double> parse_grid(std::string_view spec);
std::vector<double> linspace(double lo, double hi, int count);

/// Contents of an instance file, before the full-shape check done by to_instance().
struct InstanceFile {
  int n = 0;
  int d = 0;
  std::vector<double> sigmas;
  std::uint64_t seed = 0;
  std::vector<Coupling> couplings;
};

/// Header `n=<n> d=<d> sigmas=<s1,...,sd> seed=<hex>`, then one `q i1,...,iq value` line
/// per coupling with 1-based spin indices.
void write_instance(std::ostream& out, const ProblemInstance& instance);
InstanceFile parse_instance_file(std::istream& in);
ProblemInstance to_instance(const InstanceFile& file);
ProblemInstance read_instance(std::istream& in);

/// Header row `beta\gamma,<gammas...>`, then one row per beta.
void write_grid_csv(std::ostream& out, std::span<const double> betas, std::span<const double> gammas,
                    const Eigen::MatrixXd& values);
struct Grid {
  std::vector<double> betas;
  std::vector<double> gammas;
  Eigen::MatrixXd values;
};
Grid read_grid_csv(std::istream& in);

/// Columns d,beta,gamma,value.
void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);

/// `n first second variance method beta gamma sigma_1 ... sigma_d`
std::string moment_report_line(const MomentReport& report);
MomentReport parse_moment_report_line(std::string_view line);

nlohmann::json to_json(const MixtureSpec& spec);
nlohmann::json to_json(const MomentReport& report);
nlohmann::json to_json(const Optimum& optimum);

std::string sha256_file(const std::filesystem::path& path);

struct ManifestOutput {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string timestamp;
  std::vector<ManifestOutput> outputs;
};

/// Records the digest of every output (paths relative to the manifest's directory).
RunManifest make_manifest(std::string command, nlohmann::json config, std::vector<std::uint64_t> seeds,
                          const std::filesystem::path& base, std::span<const std::filesystem::path> outputs);
nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Problems found when re-hashing the outputs a manifest lists; empty when consistent.
std::vector<std::string> validate_manifest(const std::filesystem::path& manifest_path);

}  // namespace msqaoa::io
