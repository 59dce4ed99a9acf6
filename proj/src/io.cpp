#include "msqaoa/io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

namespace msqaoa::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t j = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) parse_error("not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) parse_error("not an integer: '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_double_list(std::string_view comma_list) {
  std::vector<double> out;
  for (auto part : split(comma_list, ',')) out.push_back(parse_double(part));
  return out;
}

std::vector<int> parse_int_list(std::string_view spec) {
  std::vector<int> out;
  for (auto part : split(spec, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(static_cast<int>(parse_int(part)));
      continue;
    }
    const long long lo = parse_int(part.substr(0, dots));
    const long long hi = parse_int(part.substr(dots + 2));
    if (hi < lo) parse_error("empty range '" + std::string(part) + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw Error(ErrorCode::EmptyGrid, "grid needs at least one point");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) parse_error("grid must be min:max:count, got '" + std::string(spec) + "'");
  const long long count = parse_int(parts[2]);
  if (count < 1) throw Error(ErrorCode::EmptyGrid, "grid count must be positive");
  return linspace(parse_double(parts[0]), parse_double(parts[1]), static_cast<int>(count));
}

void write_instance(std::ostream& out, const ProblemInstance& instance) {
  const MixtureSpec& spec = instance.spec();
  out << "n=" << instance.num_spins() << " d=" << spec.degree() << " sigmas=";
  for (int q = 1; q <= spec.degree(); ++q) out << (q > 1 ? "," : "") << format_double(spec.sigma(q));
  std::ostringstream hex;
  hex << std::hex << instance.seed();
  out << " seed=" << hex.str() << '\n';
  for (const Coupling& c : instance.couplings()) {
    out << c.order << ' ';
    bool first = true;
    for (int k = 0; k < 64; ++k)
      if ((c.mask >> k) & 1ULL) {
        out << (first ? "" : ",") << (k + 1);
        first = false;
      }
    out << ' ' << format_double(c.value) << '\n';
  }
}

InstanceFile parse_instance_file(std::istream& in) {
  InstanceFile file;
  std::string line;
  if (!std::getline(in, line)) parse_error("empty instance file");
  bool has_n = false, has_d = false, has_s = false, has_seed = false;
  for (auto tok : split_ws(line)) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) parse_error("malformed header field '" + std::string(tok) + "'");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "n") {
      file.n = static_cast<int>(parse_int(val));
      has_n = true;
    } else if (key == "d") {
      file.d = static_cast<int>(parse_int(val));
      has_d = true;
    } else if (key == "sigmas") {
      file.sigmas = parse_double_list(val);
      has_s = true;
    } else if (key == "seed") {
      auto hex = val;
      if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
      const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), file.seed, 16);
      if (res.ec != std::errc() || res.ptr != hex.data() + hex.size()) parse_error("bad seed '" + std::string(val) + "'");
      has_seed = true;
    } else {
      parse_error("unknown header field '" + std::string(key) + "'");
    }
  }
  if (!(has_n && has_d && has_s && has_seed)) parse_error("header must define n, d, sigmas and seed");
  if (file.n < 1 || file.n > kMaxInstanceSpins) parse_error("n outside 1..63");
  if (static_cast<int>(file.sigmas.size()) != file.d) parse_error("sigmas list does not have d entries");

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 3) parse_error("line " + std::to_string(lineno) + ": expected 'q indices value'");
    Coupling c;
    c.order = static_cast<int>(parse_int(fields[0]));
    int count = 0;
    for (auto idx : split(fields[1], ',')) {
      const long long k = parse_int(idx);
      if (k < 1 || k > file.n) parse_error("line " + std::to_string(lineno) + ": index out of range");
      const std::uint64_t bit = 1ULL << (k - 1);
      if (c.mask & bit) parse_error("line " + std::to_string(lineno) + ": repeated index");
      c.mask |= bit;
      ++count;
    }
    if (count != c.order) parse_error("line " + std::to_string(lineno) + ": order does not match index count");
    c.value = parse_double(fields[2]);
    file.couplings.push_back(c);
  }
  return file;
}

ProblemInstance to_instance(const InstanceFile& file) {
  return ProblemInstance(file.n, make_mixture_spec(file.d, file.sigmas), file.seed, file.couplings);
}

ProblemInstance read_instance(std::istream& in) { return to_instance(parse_instance_file(in)); }

void write_grid_csv(std::ostream& out, std::span<const double> betas, std::span<const double> gammas,
                    const Eigen::MatrixXd& values) {
  if (values.rows() != static_cast<Eigen::Index>(betas.size()) || values.cols() != static_cast<Eigen::Index>(gammas.size()))
    throw Error(ErrorCode::LengthMismatch, "grid values do not match axes");
  out << "beta\\gamma";
  for (double g : gammas) out << ',' << format_double(g);
  out << '\n';
  for (std::size_t i = 0; i < betas.size(); ++i) {
    out << format_double(betas[i]);
    for (std::size_t j = 0; j < gammas.size(); ++j) out << ',' << format_double(values(i, j));
    out << '\n';
  }
}

Grid read_grid_csv(std::istream& in) {
  Grid g;
  std::string line;
  if (!std::getline(in, line)) parse_error("empty grid file");
  auto header = split(line, ',');
  if (header.empty() || header[0] != "beta\\gamma") parse_error("grid header must start with beta\\gamma");
  for (std::size_t j = 1; j < header.size(); ++j) g.gammas.push_back(parse_double(header[j]));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != g.gammas.size() + 1) parse_error("grid row has wrong number of cells");
    g.betas.push_back(parse_double(cells[0]));
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_double(cells[j]));
    rows.push_back(std::move(row));
  }
  g.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g.gammas.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < g.gammas.size(); ++j) g.values(i, j) = rows[i][j];
  return g;
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "d,beta,gamma,value\n";
  for (const auto& r : rows)
    out << r.d << ',' << format_double(r.optimum.angles.beta) << ',' << format_double(r.optimum.angles.gamma) << ','
        << format_double(r.optimum.value) << '\n';
}

std::string moment_report_line(const MomentReport& r) {
  std::ostringstream out;
  out << r.n << ' ' << format_double(r.first) << ' ' << format_double(r.second) << ' ' << format_double(r.variance)
      << ' ' << to_string(r.method) << ' ' << format_double(r.angles.beta) << ' ' << format_double(r.angles.gamma);
  for (int q = 1; q <= r.spec.degree(); ++q) out << ' ' << format_double(r.spec.sigma(q));
  return out.str();
}

MomentReport parse_moment_report_line(std::string_view line) {
  const auto f = split_ws(line);
  if (f.size() < 8) parse_error("moment record needs at least 8 fields");
  MomentMethod method;
  if (f[4] == "sketch") method = MomentMethod::Sketch;
  else if (f[4] == "sketch-direct") method = MomentMethod::SketchDirect;
  else if (f[4] == "oracle") method = MomentMethod::Oracle;
  else parse_error("unknown method '" + std::string(f[4]) + "'");
  std::vector<double> sigmas;
  for (std::size_t i = 7; i < f.size(); ++i) sigmas.push_back(parse_double(f[i]));
  const int n = static_cast<int>(parse_int(f[0]));
  const double first = parse_double(f[1]), second = parse_double(f[2]), variance = parse_double(f[3]);
  const Angles angles{parse_double(f[5]), parse_double(f[6])};
  return MomentReport{n, first, second, variance, false, method,
                      make_mixture_spec(static_cast<int>(sigmas.size()), sigmas), angles};
}

nlohmann::json to_json(const MixtureSpec& spec) {
  nlohmann::json j;
  j["d"] = spec.degree();
  j["sigmas"] = std::vector<double>(spec.sigmas().data(), spec.sigmas().data() + spec.degree());
  return j;
}

nlohmann::json to_json(const MomentReport& r) {
  return {{"n", r.n},
          {"first", r.first},
          {"second", r.second},
          {"variance", r.variance},
          {"variance_clamped", r.variance_clamped},
          {"method", std::string(to_string(r.method))},
          {"beta", r.angles.beta},
          {"gamma", r.angles.gamma},
          {"spec", to_json(r.spec)}};
}

nlohmann::json to_json(const Optimum& o) {
  return {{"beta", o.angles.beta},
          {"gamma", o.angles.gamma},
          {"value", o.value},
          {"grid_value", o.grid_value},
          {"grid_resolution", {o.beta_points, o.gamma_points}},
          {"refinement_iterations", o.refinement_iterations},
          {"evaluations", o.evaluations},
          {"gradient_norm", o.gradient_norm},
          {"converged", o.converged}};
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

RunManifest make_manifest(std::string command, nlohmann::json config, std::vector<std::uint64_t> seeds,
                          const std::filesystem::path& base, std::span<const std::filesystem::path> outputs) {
  RunManifest m;
  m.command = std::move(command);
  m.config = std::move(config);
  m.seeds = std::move(seeds);
  m.version = MSQAOA_VERSION;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  m.timestamp = ts.str();
  for (const auto& p : outputs) m.outputs.push_back({std::filesystem::relative(p, base).generic_string(), sha256_file(p)});
  return m;
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  return {{"command", m.command}, {"config", m.config}, {"seeds", m.seeds},   {"version", m.version},
          {"timestamp", m.timestamp}, {"outputs", outs}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.version = j.at("version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string("manifest: ") + e.what());
  }
  return manifest_from_json(j);
}

std::vector<std::string> validate_manifest(const std::filesystem::path& manifest_path) {
  std::vector<std::string> problems;
  const RunManifest m = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  for (const auto& o : m.outputs) {
    const auto p = base / o.path;
    if (!std::filesystem::exists(p)) {
      problems.push_back("missing output " + o.path);
      continue;
    }
    if (sha256_file(p) != o.sha256) problems.push_back("digest mismatch for " + o.path);
  }
  return problems;
}

}  // namespace msqaoa::io
