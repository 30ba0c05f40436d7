#include "r2d2/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "r2d2/config.hpp"
#include "r2d2/errors.hpp"
#include "r2d2/estimation.hpp"
#include "r2d2/image_io.hpp"
#include "r2d2/metrics.hpp"
#include "r2d2/pipeline.hpp"
#include "r2d2/remote_score.hpp"

namespace r2d2 {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kScoreAddrEnv = "R2D2_SCORE_ADDR";
constexpr const char* kRawExt = ".r2d2";

/// Marks errors caused by the invocation rather than the run.
struct UsageError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

void emit_error(std::ostream& err, const char* kind, const std::string& message) {
  Json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  err << j.dump() << '\n';
}

struct Flags {
  std::string command;
  std::string input;
  std::string config_path;
  std::string out_dir = ".";
  std::string report_path;
  bool timings = false;
  std::vector<std::string> assignments;  // key=value pairs in flag order
};

const char* clamp_name(InverseTime::Clamp c) {
  switch (c) {
    case InverseTime::Clamp::low: return "low";
    case InverseTime::Clamp::high: return "high";
    default: return "none";
  }
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  unsigned long rows = 0, cols = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> rows >> sep >> cols) || sep != 'x' || rows == 0 || cols == 0 || !in.eof()) {
    throw DomainError("size must look like ROWSxCOLS, got '" + text + "'");
  }
  return {rows, cols};
}

std::vector<GmmPriorScore::Component> parse_gmm(const std::string& text, std::size_t rows,
                                                std::size_t cols) {
  std::vector<GmmPriorScore::Component> comps;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    double w = 0, m = 0, s = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> w >> c1 >> m >> c2 >> s) || c1 != ':' || c2 != ':') {
      throw DomainError("gmm components must look like weight:mean:std;..., got '" + text + "'");
    }
    comps.push_back({w, Image(rows, cols, m), s});
  }
  return comps;
}

std::unique_ptr<ScoreModel> make_score(const RunConfig& cfg, const DenoiseConfig& dcfg,
                                       std::size_t rows, std::size_t cols,
                                       const Image* input, std::string& resolved) {
  const std::string& kind = cfg.get("score");
  if (kind == "gaussian") {
    resolved = "gaussian";
    Image mean_image;
    if (cfg.has_value("prior_mean_image")) {
      mean_image = load_image(cfg.get("prior_mean_image"));
    } else {
      const double m = cfg.has_value("prior_mean") ? cfg.get_double("prior_mean")
                       : input != nullptr      ? mean(*input)
                                               : 0.5;
      mean_image = Image(rows, cols, m);
    }
    return std::make_unique<GaussianPriorScore>(std::move(mean_image), cfg.get_double("prior_std"));
  }
  if (kind == "gmm") {
    resolved = "gmm";
    return std::make_unique<GmmPriorScore>(parse_gmm(cfg.get("gmm"), rows, cols));
  }
  if (kind == "remote" || kind.starts_with("remote:")) {
    std::string address = kind.size() > 7 ? kind.substr(7) : std::string();
    if (const char* env = std::getenv(kScoreAddrEnv); env != nullptr && *env != '\0') address = env;
    if (address.empty()) {
      throw DomainError("remote score needs an address (remote:<addr> or $R2D2_SCORE_ADDR)");
    }
    resolved = "remote:" + address;
    return connect_remote_score(address, rows, cols, dcfg.schedule);
  }
  throw InternalError("unvalidated score kind");
}

void check_score_kind(const std::string& kind) {
  if (kind == "gaussian" || kind == "gmm" || kind == "remote" || kind.starts_with("remote:")) return;
  throw UsageError("--score must be gaussian, gmm or remote:<addr>, got '" + kind + "'");
}

Json plan_json(const StepPlan& plan) {
  Json j;
  j["sigma_est"] = plan.sigma_est;
  j["sigma_est_255"] = plan.sigma_est * 255.0;
  j["sigma_source"] = plan.from_override ? "override" : "estimator";
  if (plan.estimate) {
    j["n_patches_used"] = plan.estimate->n_patches_used;
    j["estimator_converged"] = plan.estimate->converged;
  }
  j["t_prime"] = plan.t_prime;
  j["n_prime"] = plan.n_prime;
  j["clamp"] = clamp_name(plan.clamp);
  return j;
}

Json metrics_json(const Image& img, const RoiSet& rois, const RunConfig& cfg) {
  Json j;
  Json snrs = Json::array();
  double snr_sum = 0.0;
  int snr_count = 0;
  for (const auto& roi : rois.signal) {
    Json e = {{"center", {roi.row, roi.col}}, {"radius", roi.radius}};
    try {
      const double v = snr(img, roi, cfg.std_kind());
      e["snr"] = v;
      snr_sum += v;
      ++snr_count;
    } catch (const DegenerateRoiError& ex) {
      e["snr"] = nullptr;
      e["error"] = ex.what();
    }
    snrs.push_back(e);
  }
  Json cnrs = Json::array();
  double cnr_sum = 0.0;
  int cnr_count = 0;
  for (std::size_t s = 0; s < rois.signal.size(); ++s) {
    for (std::size_t b = 0; b < rois.background.size(); ++b) {
      Json e = {{"signal", s}, {"background", b}};
      try {
        const double v = cnr(img, rois.signal[s], rois.background[b], cfg.cnr_mode(), cfg.std_kind());
        e["cnr"] = v;
        cnr_sum += v;
        ++cnr_count;
      } catch (const DegenerateRoiError& ex) {
        e["cnr"] = nullptr;
        e["error"] = ex.what();
      }
      cnrs.push_back(e);
    }
  }
  j["snr"] = snrs;
  j["cnr"] = cnrs;
  j["mean_snr"] = snr_count > 0 ? Json(snr_sum / snr_count) : Json(nullptr);
  j["mean_cnr"] = cnr_count > 0 ? Json(cnr_sum / cnr_count) : Json(nullptr);
  return j;
}

class Runner {
 public:
  Runner(const Flags& flags, RunConfig cfg, std::ostream& out)
      : flags_(flags), cfg_(std::move(cfg)), out_(out) {
    dcfg_ = cfg_.denoise_config();
    check_score_kind(cfg_.get("score"));
    if (cfg_.has_value("rois")) rois_ = load_rois(cfg_.get("rois"));
    report_["command"] = flags_.command;
    report_["input"] = flags_.input.empty() ? Json(nullptr) : Json(flags_.input);
    Json config;
    for (const auto& [k, v] : cfg_.values()) config[k] = v;
    report_["config"] = config;
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    out_dir_ = flags_.out_dir;
    if (flags_.command != "metrics" && flags_.command != "estimate-noise") {
      fs::create_directories(out_dir_);
    }
    const std::string& c = flags_.command;
    if (c == "estimate-noise") estimate_noise();
    else if (c == "tweedie") tweedie();
    else if (c == "denoise") denoise(false);
    else if (c == "denoise-sr") denoise(true);
    else if (c == "sweep-alpha") sweep();
    else if (c == "uncertainty") uncertainty();
    else if (c == "generate") generate_cmd();
    else if (c == "metrics") metrics_cmd();
    else throw UsageError("unknown subcommand '" + c + "'");
    if (flags_.timings) {
      timings_["total_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report_["timings"] = timings_;
    }
    report_["warnings"] = warnings_;
    write_report();
    return kExitOk;
  }

 private:
  const Image& input() {
    if (!input_) {
      if (flags_.input.empty()) throw UsageError(flags_.command + " requires an input image");
      input_ = load_image(flags_.input);
      report_["input_shape"] = {input_->rows(), input_->cols()};
    }
    return *input_;
  }

  const ScoreModel& score(std::size_t rows, std::size_t cols) {
    if (!score_) {
      std::string resolved;
      score_ = make_score(cfg_, dcfg_, rows, cols, input_ ? &*input_ : nullptr, resolved);
      report_["score"] = resolved;
    }
    return *score_;
  }

  fs::path out_path(const std::string& stem, const char* ext) const {
    return out_dir_ / (stem + ext);
  }

  Json save_pair(const Image& img, const std::string& stem) {
    const auto raw = out_path(stem, kRawExt);
    const auto png = out_path(stem, ".png");
    save_image(img, raw, ImageFormat::raw);
    save_image(img, png, ImageFormat::png16);
    return {{"raw", raw.string()}, {"png", png.string()}};
  }

  void note_plan(const StepPlan& plan) {
    report_["plan"] = plan_json(plan);
    if (plan.clamp == InverseTime::Clamp::high) {
      warnings_.push_back("noise estimate above sigma_max; t' clamped to 1");
    } else if (plan.clamp == InverseTime::Clamp::low) {
      warnings_.push_back("noise estimate at or below sigma_min; returning the input unchanged");
    }
  }

  void note_sanity(bool exceeded) {
    if (exceeded) warnings_.push_back("output magnitude exceeds max|input| + 5 sigma_max");
  }

  void attach_metrics(const Image& in, const Image* result) {
    if (!rois_) return;
    Json m;
    m["input"] = metrics_json(in, *rois_, cfg_);
    if (result != nullptr) m["output"] = metrics_json(*result, *rois_, cfg_);
    report_["metrics"] = m;
  }

  void estimate_noise() {
    const Image& x = input();
    const int stride = default_patch_stride(x);
    const NoiseEstimate est = estimate_noise_std(x, dcfg_.patch_size, stride);
    Json j;
    j["sigma_est"] = est.sigma_est;
    j["sigma_est_255"] = est.sigma_est * 255.0;
    j["n_patches_used"] = est.n_patches_used;
    j["converged"] = est.converged;
    j["patch_size"] = dcfg_.patch_size;
    j["stride"] = stride;
    report_["estimate"] = j;
    out_ << j.dump() << '\n';
  }

  void tweedie() {
    const Image& x = input();
    const StepPlan plan = plan_steps(x, dcfg_);
    report_["plan"] = plan_json(plan);
    if (!(plan.sigma_est > 0.0)) throw DomainError("tweedie needs a positive noise level");
    const Image result = tweedie_denoise(x, score(x.rows(), x.cols()), plan.sigma_est);
    note_sanity(exceeds_sanity_bound(x, result, dcfg_.schedule));
    report_["outputs"] = save_pair(result, "tweedie");
    attach_metrics(x, &result);
  }

  void denoise(bool with_sr) {
    const Image& x = input();
    DenoiseConfig run_cfg = dcfg_;
    if (!with_sr) run_cfg.sr_steps = 0;
    const ScoreModel& model = score(x.rows(), x.cols());
    const StepPlan plan = plan_steps(x, run_cfg);
    note_plan(plan);
    const R2d2Result res = r2d2_plus(x, model, run_cfg, NoiseSource(run_cfg.seed), plan);
    note_sanity(res.sanity_exceeded);
    timings_["denoise_seconds"] = res.denoise_seconds;
    timings_["sr_seconds"] = res.sr_seconds;
    report_["outputs"] = save_pair(res.image, with_sr ? "denoised_sr" : "denoised");
    attach_metrics(x, &res.image);
  }

  void sweep() {
    const Image& x = input();
    const ScoreModel& model = score(x.rows(), x.cols());
    const auto alphas = cfg_.get_doubles("alphas");
    std::optional<RoiSpec> sig, bg;
    if (rois_ && !rois_->signal.empty()) sig = rois_->signal.front();
    if (rois_ && !rois_->background.empty()) bg = rois_->background.front();
    const auto entries = sweep_alpha(x, model, dcfg_, alphas, sig, bg);
    Json list = Json::array();
    for (const auto& e : entries) {
      char stem[64];
      std::snprintf(stem, sizeof(stem), "sweep_alpha_%.4g", e.alpha);
      Json j;
      j["alpha"] = e.alpha;
      j["n_prime"] = e.plan.n_prime;
      j["seed"] = e.seed;
      j["rms_change"] = e.rms_change;
      if (e.snr) j["snr"] = *e.snr;
      if (e.cnr) j["cnr"] = *e.cnr;
      j["outputs"] = save_pair(e.image, stem);
      note_sanity(exceeds_sanity_bound(x, e.image, dcfg_.schedule));
      list.push_back(j);
    }
    if (!entries.empty()) note_plan(replan(entries.front().plan, dcfg_, dcfg_.alpha));
    report_["sweep"] = list;
    attach_metrics(x, nullptr);
  }

  void uncertainty() {
    const Image& x = input();
    const ScoreModel& model = score(x.rows(), x.cols());
    const int k = cfg_.get_int("samples");
    const auto start = std::chrono::steady_clock::now();
    const PosteriorEnsemble ens = posterior_ensemble(x, model, dcfg_, k);
    timings_["ensemble_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    note_plan(ens.plan);
    Json outputs;
    outputs["mean"] = save_pair(ens.mean_map, "posterior_mean");
    const auto std_raw = out_path("posterior_std", kRawExt);
    save_image(ens.std_map, std_raw, ImageFormat::raw);
    const double max_std = max_abs(ens.std_map);
    Image scaled = ens.std_map;
    if (max_std > 0.0) scaled *= 1.0 / max_std;
    const auto std_png = out_path("posterior_std", ".png");
    save_image(scaled, std_png, ImageFormat::png16);
    outputs["std"] = {{"raw", std_raw.string()}, {"png", std_png.string()}, {"png_scale", max_std}};
    Json samples = Json::array();
    for (int i = 0; i < k; ++i) {
      const auto p = out_path("sample_" + std::to_string(i), kRawExt);
      save_image(ens.samples[static_cast<std::size_t>(i)], p, ImageFormat::raw);
      samples.push_back({{"seed", ens.sample_seeds[static_cast<std::size_t>(i)]}, {"raw", p.string()}});
      note_sanity(exceeds_sanity_bound(x, ens.samples[static_cast<std::size_t>(i)], dcfg_.schedule));
    }
    outputs["samples"] = samples;
    report_["outputs"] = outputs;
    report_["mean_std"] = mean(ens.std_map);
    attach_metrics(x, &ens.mean_map);
  }

  void generate_cmd() {
    const auto [rows, cols] = parse_size(cfg_.get("size"));
    const ScoreModel& model = score(rows, cols);
    const Image x = generate(rows, cols, model, dcfg_.schedule, dcfg_.sampler, NoiseSource(dcfg_.seed));
    report_["outputs"] = save_pair(x, "generated");
  }

  void metrics_cmd() {
    const Image& x = input();
    if (!rois_) throw UsageError("metrics requires --rois <file.json>");
    const Json m = metrics_json(x, *rois_, cfg_);
    report_["metrics"] = m;
    out_ << m.dump() << '\n';
  }

  void write_report() {
    fs::path path = flags_.report_path.empty() ? out_dir_ / "report.json" : fs::path(flags_.report_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, report_.dump(2) + "\n");
  }

  const Flags& flags_;
  RunConfig cfg_;
  DenoiseConfig dcfg_;
  std::ostream& out_;
  fs::path out_dir_;
  std::optional<Image> input_;
  std::unique_ptr<ScoreModel> score_;
  std::optional<RoiSet> rois_;
  Json report_;
  Json warnings_ = Json::array();
  Json timings_ = Json::object();
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regularized reverse-diffusion denoising and super-resolution", "r2d2"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Flags flags;
  // flags that map one-to-one onto config keys
  struct Bound {
    const char* key;
    std::optional<std::string> value;
  };
  std::vector<Bound> bound = {
      {"alpha", {}},       {"lambda", {}},     {"n_steps", {}},    {"sr_factor", {}},
      {"sr_steps", {}},    {"samples", {}},    {"seed", {}},       {"sigma", {}},
      {"score", {}},       {"rois", {}},       {"alphas", {}},     {"prior_mean", {}},
      {"prior_std", {}},   {"prior_mean_image", {}}, {"size", {}}, {"patch_size", {}},
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"estimate-noise", "Estimate the Gaussian noise level of an image"},
      {"tweedie", "One-step posterior-mean denoising"},
      {"denoise", "Regularized reverse-diffusion denoising"},
      {"denoise-sr", "Denoising followed by diffusion super-resolution"},
      {"sweep-alpha", "Run denoise-sr over a grid of alpha values"},
      {"uncertainty", "Posterior ensemble mean and standard-deviation maps"},
      {"generate", "Unconditional sampling from the score model"},
      {"metrics", "ROI SNR/CNR of an image"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&flags, n = name] { flags.command = n; });
    if (name != "generate") sub->add_option("input", flags.input, "Input image (.png or raw)");
    sub->add_option("--config", flags.config_path, "key=value config file");
    sub->add_option("--out-dir", flags.out_dir, "Output directory");
    sub->add_option("--report", flags.report_path, "Run report path (default <out-dir>/report.json)");
    sub->add_flag("--timings", flags.timings, "Record wall times in the report");
    sub->add_option("--set", flags.assignments, "Override any config key: key=value");
    for (auto& b : bound) {
      std::string flag_name = std::string("--") + b.key;
      for (auto& ch : flag_name) if (ch == '_') ch = '-';
      sub->add_option(flag_name, b.value, std::string("Config key ") + b.key);
    }
  }

  std::vector<const char*> argv{"r2d2"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  }

  RunConfig cfg;
  std::unique_ptr<Runner> runner;
  try {
    if (!flags.config_path.empty()) cfg.merge_file(flags.config_path);
    for (const auto& b : bound) {
      if (b.value) cfg.set(b.key, *b.value);
    }
    for (const auto& a : flags.assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + a + "'");
      cfg.set(a.substr(0, eq), a.substr(eq + 1));
    }
    runner = std::make_unique<Runner>(flags, cfg, out);
  } catch (const IoError& e) {
    emit_error(err, e.kind(), e.what());
    return kExitRuntime;
  } catch (const Error& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    return runner->run();
  } catch (const UsageError& e) {
    emit_error(err, e.kind(), e.what());
    return kExitUsage;
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    emit_error(err, "runtime", e.what());
    return kExitRuntime;
  }
}

}  // namespace r2d2
