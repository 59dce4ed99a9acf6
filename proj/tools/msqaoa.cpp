// msqaoa: landscapes, optimal angles, finite-n moments and self-checks for depth-1 QAOA
// on mixed-spin SK models.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/error.hpp"
#include "msqaoa/finite_n.hpp"
#include "msqaoa/io.hpp"
#include "msqaoa/model.hpp"
#include "msqaoa/optimizer.hpp"
#include "msqaoa/simulator.hpp"
#include "msqaoa/verify.hpp"

namespace fs = std::filesystem;
using namespace msqaoa;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;
constexpr int kExitVerify = 4;

struct SpecFlags {
  bool sk = false;
  std::string sigmas;
  std::string cs;
  std::string pure_d;

  void add_to(CLI::App& cmd) {
    auto* a = cmd.add_flag("--sk", sk, "Sherrington-Kirkpatrick model (sigma_2 = 1)");
    auto* b = cmd.add_option("--sigmas", sigmas, "Comma-separated sigma_1,...,sigma_d");
    auto* c = cmd.add_option("--cs", cs, "Comma-separated mixture coefficients c_1,...,c_d");
    auto* d = cmd.add_option("--pure-d", pure_d, "Pure d-spin model(s), e.g. 3, 2,4 or 2..8");
    a->excludes(b)->excludes(c)->excludes(d);
    b->excludes(c)->excludes(d);
    c->excludes(d);
  }

  struct Labeled {
    std::string label;
    int d;
    MixtureSpec spec;
  };

  std::vector<Labeled> resolve() const {
    std::vector<Labeled> out;
    if (sk) {
      out.push_back({"sk", 2, make_mixture_spec(2, {0.0, 1.0})});
    } else if (!sigmas.empty()) {
      const auto s = io::parse_double_list(sigmas);
      out.push_back({"mixed", static_cast<int>(s.size()), make_mixture_spec(static_cast<int>(s.size()), s)});
    } else if (!cs.empty()) {
      const auto c = io::parse_double_list(cs);
      out.push_back({"mixed", static_cast<int>(c.size()), from_mixture_function(static_cast<int>(c.size()), c)});
    } else if (!pure_d.empty()) {
      for (int d : io::parse_int_list(pure_d)) out.push_back({"pure_d" + std::to_string(d), d, pure_d_spec(d)});
    } else {
      throw Error(ErrorCode::ParseError, "one of --sk, --sigmas, --cs or --pure-d is required");
    }
    return out;
  }

  nlohmann::json config() const {
    return {{"sk", sk}, {"sigmas", sigmas}, {"cs", cs}, {"pure_d", pure_d}};
  }
};

// Tracks files a command writes so they can be removed if it fails part-way.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
  }

  const fs::path& dir() const { return dir_; }

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    files_.push_back(p);
    std::ofstream out(p);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out.exceptions(std::ios::badbit | std::ios::failbit);
    return out;
  }

  void commit(const std::string& command, nlohmann::json config, std::vector<std::uint64_t> seeds) {
    const std::vector<fs::path> outputs = files_;
    const fs::path manifest = dir_ / (command + ".manifest.json");
    files_.push_back(manifest);
    io::write_manifest(manifest, io::make_manifest(command, std::move(config), std::move(seeds), dir_, outputs));
    committed_ = true;
    std::cerr << "wrote " << outputs.size() << " output(s) and " << manifest.string() << '\n';
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

struct LandscapeArgs {
  SpecFlags spec;
  std::string modes = "infinite";
  std::string n_list;
  std::uint64_t seed = 1;
  std::string beta = "-0.78539816339744828:0.78539816339744828:65";
  std::string gamma = "-1.5:1.5:65";
  std::string out;
  int budget = SketchOptions{}.budget;
  int threads = 0;
};

int run_landscape(const LandscapeArgs& args) {
  const auto specs = args.spec.resolve();
  const auto betas = io::parse_grid(args.beta);
  const auto gammas = io::parse_grid(args.gamma);
  std::vector<std::string> modes;
  for (std::size_t start = 0;;) {
    const auto pos = args.modes.find(',', start);
    modes.push_back(args.modes.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::vector<int> ns;
  for (const auto& m : modes) {
    if (m != "infinite" && m != "instance" && m != "finite_n")
      throw Error(ErrorCode::ParseError, "unknown mode '" + m + "' (infinite, instance, finite_n)");
    if (m != "infinite" && args.n_list.empty()) throw Error(ErrorCode::ParseError, "mode " + m + " needs --n");
  }
  if (!args.n_list.empty()) ns = io::parse_int_list(args.n_list);

  const SketchOptions sketch{args.budget, args.threads};
  OutputSet outputs(args.out);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : specs)
    for (const auto& mode : modes) {
      const std::vector<int> sizes = mode == "infinite" ? std::vector<int>{0} : ns;
      for (int n : sizes) {
        Eigen::MatrixXd values(betas.size(), gammas.size());
        std::string name = "landscape_" + s.label + "_" + mode;
        if (mode == "infinite") {
          for (std::size_t i = 0; i < betas.size(); ++i)
            for (std::size_t j = 0; j < gammas.size(); ++j)
              values(i, j) = energy_sigma_form(s.spec, Angles{betas[i], gammas[j]});
        } else if (mode == "instance") {
          name += "_n" + std::to_string(n) + "_seed" + std::to_string(args.seed);
          if (n > kSimulatorMaxSpins) throw Error(ErrorCode::TooLarge, "instance mode supports n <= 24");
          values = landscape_instance(sample_instance(s.spec, n, args.seed), betas, gammas, args.threads);
          if (seeds.empty()) seeds.push_back(args.seed);
        } else {
          name += "_n" + std::to_string(n);
          for (std::size_t i = 0; i < betas.size(); ++i)
            for (std::size_t j = 0; j < gammas.size(); ++j)
              values(i, j) = sketch_moments(s.spec, Angles{betas[i], gammas[j]}, n, sketch).first;
        }
        auto out = outputs.open(name + ".csv");
        io::write_grid_csv(out, betas, gammas, values);
      }
    }
  nlohmann::json config = {{"spec", args.spec.config()}, {"modes", args.modes}, {"n", args.n_list},
                           {"seed", args.seed},           {"beta", args.beta},   {"gamma", args.gamma},
                           {"budget", args.budget},       {"generator", kGaussianGenerator}};
  outputs.commit("landscape", std::move(config), std::move(seeds));
  return 0;
}

struct OptimizeArgs {
  SpecFlags spec;
  std::string mode = "infinite";
  int n = 0;
  std::uint64_t seed = 1;
  std::optional<double> ground_state;
  int grid = SearchConfig{}.beta_points;
  std::string out;
  SearchConfig search;
};

int run_optimize(OptimizeArgs& args) {
  const auto specs = args.spec.resolve();
  if (args.mode != "infinite" && args.mode != "instance")
    throw Error(ErrorCode::ParseError, "optimize mode must be infinite or instance");
  args.search.beta_points = args.search.gamma_points = args.grid;
  std::vector<CurveRow> rows;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& s : specs) {
    const Optimum o = args.mode == "infinite" ? optimize_closed_form(s.spec, args.search)
                                              : optimize_instance(sample_instance(s.spec, args.n, args.seed), args.search);
    rows.push_back({s.d, o});
    nlohmann::json rec = io::to_json(o);
    rec["d"] = s.d;
    rec["spec"] = io::to_json(s.spec);
    if (args.ground_state) rec["approximation_factor"] = approximation_factor(o.value, *args.ground_state);
    records.push_back(rec);
    std::cout << "d=" << s.d << " beta=" << io::format_double(o.angles.beta)
              << " gamma=" << io::format_double(o.angles.gamma) << " value=" << io::format_double(o.value);
    if (args.ground_state) std::cout << " factor=" << io::format_double(approximation_factor(o.value, *args.ground_state));
    if (!o.converged) std::cout << " (not converged, gradient " << io::format_double(o.gradient_norm) << ")";
    std::cout << '\n';
  }
  if (args.out.empty()) return 0;
  OutputSet outputs(args.out);
  {
    auto csv = outputs.open("optimize.csv");
    io::write_curve_csv(csv, rows);
  }
  {
    auto json = outputs.open("optimize.json");
    json << records.dump(2) << '\n';
  }
  nlohmann::json config = {{"spec", args.spec.config()},
                           {"mode", args.mode},
                           {"n", args.n},
                           {"seed", args.seed},
                           {"beta_points", args.search.beta_points},
                           {"gamma_points", args.search.gamma_points},
                           {"max_evaluations", args.search.max_evaluations}};
  std::vector<std::uint64_t> seeds;
  if (args.mode == "instance") seeds.push_back(args.seed);
  outputs.commit("optimize", std::move(config), std::move(seeds));
  return 0;
}

struct MomentsArgs {
  SpecFlags spec;
  std::string n_list = "16,32,64,128";
  double beta = M_PI / 8;
  double gamma = -0.5;
  std::string method = "sketch";
  std::string out;
  int budget = SketchOptions{}.budget;
  int threads = 0;
};

int run_moments(const MomentsArgs& args) {
  const auto specs = args.spec.resolve();
  if (specs.size() != 1) throw Error(ErrorCode::ParseError, "moments takes a single model");
  const MixtureSpec& spec = specs.front().spec;
  const Angles angles{args.beta, args.gamma};
  const SketchOptions options{args.budget, args.threads};
  const double limit = energy_sigma_form(spec, angles);
  std::vector<std::string> lines;
  nlohmann::json records = nlohmann::json::array();
  for (int n : io::parse_int_list(args.n_list)) {
    MomentReport r = args.method == "sketch"          ? sketch_moments(spec, angles, n, options)
                     : args.method == "sketch-direct" ? sketch_moments_direct(spec, angles, n, options)
                     : args.method == "oracle"
                         ? oracle_moments(spec, angles, n)
                         : throw Error(ErrorCode::ParseError, "method must be sketch, sketch-direct or oracle");
    lines.push_back(io::moment_report_line(r));
    nlohmann::json rec = io::to_json(r);
    rec["gap_to_limit"] = r.first - limit;
    records.push_back(rec);
    std::cout << lines.back() << '\n';
  }
  std::cout << "# infinite-n limit " << io::format_double(limit) << '\n';
  if (args.out.empty()) return 0;
  OutputSet outputs(args.out);
  {
    auto txt = outputs.open("moments.txt");
    for (const auto& l : lines) txt << l << '\n';
  }
  {
    auto json = outputs.open("moments.json");
    json << nlohmann::json{{"limit", limit}, {"reports", records}}.dump(2) << '\n';
  }
  outputs.commit("moments",
                 {{"spec", args.spec.config()}, {"n", args.n_list}, {"beta", args.beta}, {"gamma", args.gamma},
                  {"method", args.method}, {"budget", args.budget}},
                 {});
  return 0;
}

struct VerifyArgs {
  std::string level = "quick";
  std::optional<double> sk_reference;
  std::string out;
};

int run_verify(const VerifyArgs& args) {
  verify::Options options;
  if (args.level == "quick") options.level = verify::Level::Quick;
  else if (args.level == "full") options.level = verify::Level::Full;
  else throw Error(ErrorCode::ParseError, "level must be quick or full");
  if (args.sk_reference) options.sk_reference = *args.sk_reference;
  const auto results = verify::run(options);
  for (const auto& r : results) std::cout << verify::format_line(r) << '\n';
  const bool ok = verify::all_passed(results);
  std::cout << (ok ? "all checks passed" : "verification FAILED") << '\n';
  if (!args.out.empty()) {
    OutputSet outputs(args.out);
    {
      auto json = outputs.open("verify.json");
      json << verify::to_json(results, options.level).dump(2) << '\n';
    }
    outputs.commit("verify", {{"level", args.level}, {"sk_reference", options.sk_reference}}, {});
  }
  return ok ? 0 : kExitVerify;
}

struct FitArgs {
  std::string file;
  std::string out;
};

int run_fit(const FitArgs& args) {
  std::ifstream in(args.file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + args.file);
  const io::InstanceFile file = io::parse_instance_file(in);
  const SpecFit fit = fit_mixture_spec(file.d, file.couplings);
  std::cout << "sigmas=";
  for (int q = 1; q <= fit.spec.degree(); ++q) std::cout << (q > 1 ? "," : "") << io::format_double(fit.spec.sigma(q));
  std::cout << '\n';
  nlohmann::json degrees = nlohmann::json::array();
  for (const auto& d : fit.degrees) {
    std::cout << "q=" << d.order << " count=" << d.count << " mean=" << io::format_double(d.mean)
              << " stddev=" << io::format_double(d.stddev) << " mean_se=" << io::format_double(d.mean_standard_error)
              << '\n';
    degrees.push_back({{"q", d.order}, {"count", d.count}, {"mean", d.mean}, {"stddev", d.stddev},
                       {"mean_standard_error", d.mean_standard_error}});
  }
  std::vector<std::string> warnings;
  for (auto w : fit.warnings) {
    warnings.emplace_back(to_string(w));
    std::cerr << "warning: " << to_string(w) << '\n';
  }
  if (args.out.empty()) return 0;
  OutputSet outputs(args.out);
  {
    auto json = outputs.open("fit.json");
    json << nlohmann::json{{"spec", io::to_json(fit.spec)}, {"degrees", degrees}, {"warnings", warnings}}.dump(2)
         << '\n';
  }
  outputs.commit("fit-spec", {{"file", args.file}}, {file.seed});
  return 0;
}

struct SampleArgs {
  SpecFlags spec;
  int n = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_sample(const SampleArgs& args) {
  const auto specs = args.spec.resolve();
  if (specs.size() != 1) throw Error(ErrorCode::ParseError, "sample takes a single model");
  const ProblemInstance instance = sample_instance(specs.front().spec, args.n, args.seed);
  OutputSet outputs(args.out);
  {
    auto out = outputs.open("instance_n" + std::to_string(args.n) + "_seed" + std::to_string(args.seed) + ".txt");
    io::write_instance(out, instance);
  }
  outputs.commit("sample",
                 {{"spec", args.spec.config()}, {"n", args.n}, {"seed", args.seed}, {"generator", kGaussianGenerator}},
                 {args.seed});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-1 QAOA on mixed-spin SK models"};
  app.set_version_flag("--version", MSQAOA_VERSION);
  app.require_subcommand(1);

  LandscapeArgs land;
  auto* landscape = app.add_subcommand("landscape", "Energy landscape grids as CSV");
  land.spec.add_to(*landscape);
  landscape->add_option("--mode", land.modes, "infinite, instance, finite_n (comma-separated)");
  landscape->add_option("--n", land.n_list, "Problem sizes for instance and finite_n modes");
  landscape->add_option("--seed", land.seed, "Instance seed");
  landscape->add_option("--beta", land.beta, "beta grid min:max:count");
  landscape->add_option("--gamma", land.gamma, "gamma grid min:max:count");
  landscape->add_option("--out", land.out, "Output directory")->required();
  landscape->add_option("--budget", land.budget, "Largest n for finite_n mode");
  landscape->add_option("--threads", land.threads, "Worker threads (default MSQAOA_THREADS or all cores)");

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Optimal depth-1 angles");
  opt.spec.add_to(*optimize);
  optimize->add_option("--mode", opt.mode, "infinite (closed form) or instance (statevector)");
  optimize->add_option("--n", opt.n, "Problem size for instance mode");
  optimize->add_option("--seed", opt.seed, "Instance seed");
  optimize->add_option("--ground-state", opt.ground_state, "Ground-state energy per spin, to report the ratio");
  optimize->add_option("--grid", opt.grid, "Coarse grid points per axis");
  optimize->add_option("--out", opt.out, "Output directory");

  MomentsArgs mom;
  auto* moments = app.add_subcommand("moments", "Finite-n disorder-averaged moments");
  mom.spec.add_to(*moments);
  moments->add_option("--n", mom.n_list, "Problem sizes");
  moments->add_option("--beta", mom.beta, "beta");
  moments->add_option("--gamma", mom.gamma, "gamma");
  moments->add_option("--method", mom.method, "sketch, sketch-direct or oracle");
  moments->add_option("--out", mom.out, "Output directory");
  moments->add_option("--budget", mom.budget, "Largest n accepted");
  moments->add_option("--threads", mom.threads, "Worker threads");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in acceptance checks");
  verify_cmd->add_option("--level", ver.level, "quick or full");
  verify_cmd->add_option("--sk-reference", ver.sk_reference, "Override the SK reference value (negative control)");
  verify_cmd->add_option("--out", ver.out, "Output directory for the JSON report");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-spec", "Estimate sigma_q from an instance file");
  fit_cmd->add_option("file", fit.file, "Instance file")->required();
  fit_cmd->add_option("--out", fit.out, "Output directory");

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Draw an instance and write it to a file");
  smp.spec.add_to(*sample);
  sample->add_option("--n", smp.n, "Number of spins")->required();
  sample->add_option("--seed", smp.seed, "Seed");
  sample->add_option("--out", smp.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*landscape) return run_landscape(land);
    if (*optimize) return run_optimize(opt);
    if (*moments) return run_moments(mom);
    if (*verify_cmd) return run_verify(ver);
    if (*fit_cmd) return run_fit(fit);
    if (*sample) return run_sample(smp);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_cap_error(e.code()) ? kExitCap : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
