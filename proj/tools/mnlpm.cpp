// mnlpm: command-line front end for multilayer latent position models.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "mnlpm/crossval.hpp"
#include "mnlpm/diagnostics.hpp"
#include "mnlpm/model.hpp"
#include "mnlpm/network.hpp"
#include "mnlpm/postprocess.hpp"
#include "mnlpm/samples_io.hpp"
#include "mnlpm/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mnlpm::cli {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

constexpr const char* kOutputs = R"(Outputs (CSV, header row first, 1-based indices):
  consensus.csv            actor,<label 1>,...,<label I>   model consensus, I x I
  empirical_consensus.csv  same layout, proportion of layers with an edge
  correlation.csv          j,jp,mean,lo,hi                 one row per layer pair j < jp
  delta.csv                i,mean,lo,hi,significant
  positions.csv            i,j,k,mean,var                  j = 0 holds the averages eta
  ppc.csv                  layer,statistic,observed,mean,lo,hi,contained
  waic.csv                 K,waic,p_waic,lppd
  convergence.csv          parameter,ess,mean,sd,geweke_z
  cv.csv                   variant,K,fold,auc
  cv_summary.csv           variant,K,mean_auc,waic
  loglik.csv               iteration,loglik
  accept.csv               block,proposed,accepted,rate,step
Exit codes: 0 ok, 1 internal error, 2 usage, 3 data, 4 numeric failure.)";

/// Resolved options: defaults < MNLPM_SEED < preset < config file < flags.
class Settings {
 public:
  void set(const std::string& key, json value) { values_[key] = std::move(value); }
  void overlay(const json& obj) {
    for (const auto& [k, v] : obj.items())
      if (values_.contains(k)) values_[k] = v;
  }
  const json& resolved() const { return values_; }

  bool has(const std::string& key) const {
    return values_.contains(key) && !values_.at(key).is_null() &&
           !(values_.at(key).is_string() && values_.at(key).get<std::string>().empty());
  }
  std::string str(const std::string& key) const {
    const auto& v = at(key);
    return v.is_string() ? v.get<std::string>() : v.dump();
  }
  long integer(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_number_integer()) return v.get<long>();
    return parse<long>(key, [](const std::string& s, std::size_t* p) { return std::stol(s, p); });
  }
  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long>() >= 0) return v.get<std::uint64_t>();
    return parse<std::uint64_t>(key,
                                [](const std::string& s, std::size_t* p) { return std::stoull(s, p); });
  }
  double real(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_number()) return v.get<double>();
    return parse<double>(key, [](const std::string& s, std::size_t* p) { return std::stod(s, p); });
  }
  bool boolean(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_boolean()) return v.get<bool>();
    const std::string s = str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("--" + key + " expects true/false");
  }

 private:
  const json& at(const std::string& key) const {
    if (!values_.contains(key)) throw std::logic_error("unknown setting " + key);
    return values_.at(key);
  }
  template <typename T, typename F>
  T parse(const std::string& key, F f) const {
    const std::string s = str(key);
    try {
      std::size_t pos = 0;
      const T value = f(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      return value;
    } catch (const std::exception&) {
      throw std::invalid_argument("--" + key + ": cannot parse '" + s + "'");
    }
  }

  json values_ = json::object();
};

/// Numbers and booleans typed on the command line are stored as such.
json typed(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && (j.is_number() || j.is_boolean())) return j;
  return text;
}

/// A subcommand with string-valued options that are merged into Settings.
struct Command {
  CLI::App* app = nullptr;
  json defaults = json::object();
  std::map<std::string, std::string> raw;
  std::map<std::string, bool> flags;
  std::string config_path;
  std::string preset;
  bool with_fit_options = false;

  void option(const std::string& name, const std::string& help, json default_value) {
    defaults[name] = std::move(default_value);
    std::string text = help;
    if (!defaults[name].is_null() && !(defaults[name].is_string() && defaults[name].get<std::string>().empty()))
      text += " [" + (defaults[name].is_string() ? defaults[name].get<std::string>() : defaults[name].dump()) + "]";
    app->add_option("--" + name, raw[name], text);
  }
  void flag(const std::string& name, const std::string& help) {
    defaults[name] = false;
    flags[name] = false;
    app->add_flag("--" + name, flags[name], help);
  }

  Settings resolve() const {
    Settings s;
    for (const auto& item : defaults.items()) s.set(item.key(), item.value());
    if (defaults.contains("seed"))
      if (const char* env = std::getenv("MNLPM_SEED"); env && *env) s.set("seed", std::string(env));
    if (!preset.empty()) {
      if (preset != "quick") throw std::invalid_argument("unknown preset '" + preset + "' (quick)");
      if (with_fit_options) s.overlay(json{{"burn", 5000}, {"thin", 5}, {"keep", 1000}});
    }
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw DataError("cannot read config " + config_path);
      json doc = json::parse(in, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) throw DataError("config is not a JSON object: " + config_path);
      // A run manifest carries its resolved options under "config".
      if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
      s.overlay(doc);
    }
    for (const auto& [k, v] : raw)
      if (app->count("--" + k) > 0) s.set(k, typed(v));
    for (const auto& [k, v] : flags)
      if (app->count("--" + k) > 0) s.set(k, v);
    return s;
  }
};

Command make_command(CLI::App& root, const std::string& name, const std::string& help) {
  Command c;
  c.app = root.add_subcommand(name, help);
  c.app->add_option("--config", c.config_path, "JSON file (or run manifest) with option values");
  return c;
}

void add_fit_options(Command& c) {
  c.with_fit_options = true;
  c.option("variant", "MNLPM, IFLPM or GMLPM", "MNLPM");
  c.option("theta0", "prior edge probability used for elicitation", 0.1);
  c.option("burn", "burn-in sweeps", 100000);
  c.option("thin", "keep every n-th sweep", 10);
  c.option("keep", "retained samples B", 10000);
  c.option("seed", "RNG seed (fallback: MNLPM_SEED)", 1);
  c.option("target-accept", "Metropolis target acceptance", 0.35);
  c.option("adapt-decay", "adaptation gain exponent", 0.8);
  c.app->add_option("--preset", c.preset, "option bundle: quick (burn 5000, thin 5, keep 1000)");
}

FitConfig fit_config(const Settings& s, int K) {
  FitConfig c;
  c.variant = parse_variant(s.str("variant"));
  c.K = K;
  c.n_burn = s.integer("burn");
  c.n_thin = s.integer("thin");
  c.n_keep = s.integer("keep");
  c.seed = s.unsigned_integer("seed");
  c.adapt.target_accept = s.real("target-accept");
  c.adapt.adapt_rate_decay = s.real("adapt-decay");
  c.check();
  return c;
}

MultilayerNetwork load_data(const Settings& s, RunManifest* manifest) {
  if (!s.has("data")) throw std::invalid_argument("--data is required");
  const fs::path path = s.str("data");
  MultilayerNetwork net = load_network(path, parse_network_format(s.str("format")));
  if (manifest) manifest->add_input(path);
  if (s.has("mask")) {
    const fs::path mask = s.str("mask");
    net = apply_mask_file(net, mask);
    if (manifest) manifest->add_input(mask);
  }
  return net;
}

void add_data_options(Command& c, bool mask) {
  c.option("data", "network file", "");
  c.option("format", "edge-list or adjacency-matrix", "edge-list");
  if (mask) c.option("mask", "file listing missing triples (edge-list grammar)", "");
}

std::vector<int> parse_k_range(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size() || v < 1) throw std::invalid_argument("bad --k-range '" + text + "'");
    return v;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots)), hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("bad --k-range '" + text + "'");
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  if (out.empty()) throw std::invalid_argument("empty --k-range");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

/// Runs `body` between manifest start and finish; maps exceptions to exit codes.
int guarded(RunManifest* manifest, const std::function<void()>& body) {
  int code = 0;
  std::string message;
  try {
    if (manifest) manifest->start();
    body();
  } catch (const std::invalid_argument& e) {
    code = kExitUsage;
    message = e.what();
  } catch (const DataError& e) {
    code = kExitData;
    message = e.what();
  } catch (const NumericError& e) {
    code = kExitNumeric;
    message = e.what();
  } catch (const std::domain_error& e) {
    code = kExitUsage;
    message = e.what();
  } catch (const std::exception& e) {
    code = 1;
    message = e.what();
  }
  if (!message.empty()) std::cerr << "mnlpm: " << message << '\n';
  if (manifest) {
    try {
      manifest->finish(code, message);
    } catch (const std::exception& e) {
      std::cerr << "mnlpm: " << e.what() << '\n';
    }
  }
  return code;
}

// elicit ---------------------------------------------------------------------

int cmd_elicit(const Command& c) {
  std::optional<RunManifest> manifest;
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] { s = c.resolve(); })) return code;
  const std::string out = s->str("out");
  if (out != "-") manifest.emplace("elicit", s->resolved(), out + ".manifest.json");
  return guarded(manifest ? &*manifest : nullptr, [&] {
    const long K = s->integer("k");
    if (K < 1) throw std::invalid_argument("--k must be >= 1");
    const Hyperparameters h = elicit(static_cast<int>(K), s->real("theta0"));
    const std::string text = json(h).dump(2) + "\n";
    if (out == "-") {
      std::cout << text;
    } else {
      auto f = open_output(out);
      f << text;
      manifest->add_output(out);
    }
    const auto r = elicitation_row(h);
    std::ostringstream row;
    row << std::fixed << std::setprecision(3) << "K=" << r.K << " E[d]=" << r.mean_distance
        << " sd[d]=" << r.sd_distance << " b_zeta=" << r.b_zeta << " b_theta=" << r.b_theta
        << " b_sigma=" << r.b_sigma << " b_kappa=" << r.b_kappa << " v_zeta=" << r.v_zeta
        << " v_theta=" << r.v_theta << " v_nu=" << r.v_nu;
    std::cerr << row.str() << '\n';
  });
}

// fit ------------------------------------------------------------------------

void print_fit_summary(const PosteriorSamples& samples) {
  double lo = 1, hi = 0;
  for (const auto& a : samples.acceptance)
    if (!std::isnan(a.rate)) {
      lo = std::min(lo, a.rate);
      hi = std::max(hi, a.rate);
    }
  double mean = 0;
  for (double ll : samples.loglik) mean += ll;
  mean /= static_cast<double>(samples.loglik.size());
  std::cerr << "retained " << samples.size() << " samples; mean loglik " << mean
            << "; acceptance " << lo << ".." << hi << '\n';
}

int cmd_fit(const Command& c) {
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] {
        s = c.resolve();
        if (!s->has("out-dir")) throw std::invalid_argument("--out-dir is required");
      }))
    return code;
  const fs::path dir = s->str("out-dir");
  RunManifest manifest("fit", s->resolved(), dir / "manifest.json");
  return guarded(&manifest, [&] {
    const MultilayerNetwork net = load_data(*s, &manifest);
    Hyperparameters hyper;
    const long K = s->integer("k");
    if (K < 1) throw std::invalid_argument("--k must be >= 1");
    if (s->has("hyper")) {
      std::ifstream in(s->str("hyper"));
      if (!in) throw DataError("cannot read " + s->str("hyper"));
      const json j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw DataError("malformed hyperparameter file " + s->str("hyper"));
      try {
        j.get_to(hyper);
      } catch (const json::exception& e) {
        throw DataError("malformed hyperparameter file: " + std::string(e.what()));
      }
      if (hyper.K != K) throw std::invalid_argument("hyperparameter file K differs from --k");
      manifest.add_input(s->str("hyper"));
    } else {
      hyper = elicit(static_cast<int>(K), s->real("theta0"));
    }
    const FitConfig config = fit_config(*s, static_cast<int>(K));

    RunHooks hooks;
    const fs::path checkpoint = dir / "checkpoint.bin";
    hooks.checkpoint_every = s->integer("checkpoint-every");
    if (hooks.checkpoint_every < 0) throw std::invalid_argument("--checkpoint-every must be >= 0");
    hooks.on_checkpoint = [&](const ChainSnapshot& snap) { save_checkpoint(snap, checkpoint); };
    fs::create_directories(dir);

    PosteriorSamples samples;
    if (s->boolean("resume")) {
      ChainSnapshot snap = load_checkpoint(checkpoint);
      if (!(snap.config == config) || !(snap.hyper == hyper))
        throw std::invalid_argument("checkpoint was written with different settings");
      std::cerr << "resuming at sweep " << snap.iteration << '\n';
      samples = resume_mcmc(net, std::move(snap), hooks);
    } else {
      samples = run_mcmc(net, hyper, config, hooks);
    }
    save_samples(samples, dir);
    if (fs::exists(checkpoint)) fs::remove(checkpoint);
    for (const char* f : {"samples.bin", "loglik.csv", "accept.csv", "config.json"})
      manifest.add_output(dir / f);
    print_fit_summary(samples);
  });
}

// report ---------------------------------------------------------------------

const std::vector<std::string> kReports = {"consensus", "correlation", "delta",      "positions",
                                           "ppc",       "waic",        "convergence"};

std::vector<std::string> which_reports(const Settings& s) {
  std::vector<std::string> which = split_list(s.str("which"));
  if (which.empty()) throw std::invalid_argument("--which is required");
  for (const auto& w : which)
    if (w != "all" && std::find(kReports.begin(), kReports.end(), w) == kReports.end())
      throw std::invalid_argument("unknown report '" + w + "'");
  return which;
}

std::vector<std::pair<int, fs::path>> scan_directories(const fs::path& root) {
  std::vector<std::pair<int, fs::path>> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "samples.bin")) continue;
    std::ifstream in(entry.path() / "config.json");
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) continue;
    out.emplace_back(j["fit"].value("K", 0), entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_report(const Command& c) {
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] {
        s = c.resolve();
        if (!s->has("samples")) throw std::invalid_argument("--samples is required");
      }))
    return code;
  const fs::path sdir = s->str("samples");
  const fs::path out_dir = s->has("out-dir") ? fs::path(s->str("out-dir")) : sdir;
  RunManifest manifest("report", s->resolved(), out_dir / "report_manifest.json");
  return guarded(&manifest, [&] {
    auto which = which_reports(*s);
    const bool all = std::find(which.begin(), which.end(), "all") != which.end();
    auto wants = [&](const std::string& w) {
      return all || std::find(which.begin(), which.end(), w) != which.end();
    };
    std::optional<MultilayerNetwork> net;
    if (s->has("data")) net = load_data(*s, &manifest);
    auto need_data = [&](const std::string& w) -> const MultilayerNetwork& {
      if (!net) throw std::invalid_argument("--which " + w + " needs --data");
      return *net;
    };
    auto emit = [&](const std::string& name) {
      manifest.add_output(out_dir / name);
      return open_output(out_dir / name);
    };

    // A scan directory holds one sample directory per K.
    if (!fs::exists(sdir / "samples.bin")) {
      if (!(wants("waic") && (all || which.size() == 1)))
        throw std::invalid_argument(sdir.string() + " has no samples.bin; only --which waic works on a scan directory");
      const auto& data = need_data("waic");
      std::vector<WaicScanRow> rows;
      for (const auto& [K, dir] : scan_directories(sdir)) {
        const auto w = waic(load_samples(dir), data);
        rows.push_back({K, w.waic, w.p_waic, w.lppd, {}});
      }
      if (rows.empty()) throw DataError("no sample directories under " + sdir.string());
      auto out = emit("waic.csv");
      write_waic_csv(out, rows);
      const auto best = std::min_element(rows.begin(), rows.end(),
                                         [](const auto& a, const auto& b) { return a.waic < b.waic; });
      std::cout << "best_K " << best->K << " waic " << best->waic << '\n';
      return;
    }

    const PosteriorSamples samples = load_samples(sdir);
    manifest.add_input(sdir / "samples.bin");
    const Variant v = samples.variant();
    std::optional<AlignedSamples> aligned;
    auto get_aligned = [&]() -> const AlignedSamples& {
      if (!aligned) aligned = align_samples(samples);
      return *aligned;
    };
    const int J = samples.states.front().n_layers();
    const int I = samples.states.front().n_actors();
    std::vector<ActorInfo> actors = net ? net->actors() : std::vector<ActorInfo>{};
    std::vector<std::string> layers = net ? net->layer_labels() : std::vector<std::string>{};

    if (wants("consensus") && (!all || v == Variant::mnlpm)) {
      auto out = emit("consensus.csv");
      write_consensus_csv(out, consensus_network(samples), actors);
      if (net) {
        auto emp = emit("empirical_consensus.csv");
        write_consensus_csv(emp, empirical_consensus(*net), actors);
      }
    }
    if (wants("correlation")) {
      const auto r = layer_correlation(get_aligned(), parse_position_stat(s->str("stat")));
      auto out = emit("correlation.csv");
      write_correlation_csv(out, r);
      if (r.excluded.sum() > 0)
        std::cerr << "correlation: " << r.excluded.sum() / 2
                  << " sample-pairs excluded (zero-variance summaries)\n";
    }
    if (wants("delta") && (!all || J == I)) {
      const auto d = assessment_index(get_aligned());
      auto out = emit("delta.csv");
      write_delta_csv(out, d);
    }
    if (wants("positions")) {
      const auto p = position_summary(get_aligned());
      auto out = emit("positions.csv");
      write_positions_csv(out, p);
      if (s->boolean("svg")) {
        auto svg = emit("positions.svg");
        write_positions_svg(svg, p, actors, layers);
      }
    }
    if (wants("ppc") && (!all || net)) {
      const long n = s->integer("replicates") > 0 ? s->integer("replicates") : samples.size();
      const auto r = posterior_predictive_check(samples, need_data("ppc"), n, s->unsigned_integer("seed"));
      auto out = emit("ppc.csv");
      write_ppc_csv(out, r, layers);
    }
    if (wants("waic") && (!all || net)) {
      const auto w = waic(samples, need_data("waic"));
      auto out = emit("waic.csv");
      write_waic_csv(out, {{samples.config.K, w.waic, w.p_waic, w.lppd, {}}});
      std::cout << "waic " << w.waic << " p_waic " << w.p_waic << " lppd " << w.lppd << '\n';
    }
    if (wants("convergence")) {
      auto out = emit("convergence.csv");
      write_convergence_csv(out, convergence_report(samples));
    }
  });
}

// waic-scan ------------------------------------------------------------------

int cmd_waic_scan(const Command& c) {
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] {
        s = c.resolve();
        if (!s->has("out-dir")) throw std::invalid_argument("--out-dir is required");
      }))
    return code;
  const fs::path dir = s->str("out-dir");
  RunManifest manifest("waic-scan", s->resolved(), dir / "manifest.json");
  return guarded(&manifest, [&] {
    const MultilayerNetwork net = load_data(*s, &manifest);
    const auto Ks = parse_k_range(s->str("k-range"));
    const FitConfig base = fit_config(*s, Ks.front());
    const long jobs = s->integer("jobs");
    if (jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    const bool save = !s->boolean("no-samples");
    const auto scan = waic_scan(net, base.variant, Ks, base, s->real("theta0"), static_cast<int>(jobs),
                                [&](int K, const PosteriorSamples& samples) {
                                  if (save) save_samples(samples, dir / ("K" + std::to_string(K)));
                                });
    auto out = open_output(dir / "waic.csv");
    write_waic_csv(out, scan.rows);
    manifest.add_output(dir / "waic.csv");
    for (const auto& r : scan.rows)
      if (!r.error.empty()) std::cerr << "K=" << r.K << " failed: " << r.error << '\n';
    if (scan.best_K == 0) throw NumericError("every K failed");
    std::cout << "best_K " << scan.best_K << '\n';
  });
}

// cv -------------------------------------------------------------------------

int cmd_cv(const Command& c) {
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] {
        s = c.resolve();
        if (!s->has("out-dir")) throw std::invalid_argument("--out-dir is required");
        if (s->integer("folds") < 2) throw std::invalid_argument("--folds must be >= 2");
      }))
    return code;
  const fs::path dir = s->str("out-dir");
  RunManifest manifest("cv", s->resolved(), dir / "manifest.json");
  return guarded(&manifest, [&] {
    const MultilayerNetwork net = load_data(*s, &manifest);
    std::vector<Variant> variants;
    for (const auto& name : split_list(s->str("variants"))) variants.push_back(parse_variant(name));
    if (variants.empty()) throw std::invalid_argument("--variants is empty");
    const auto Ks = parse_k_range(s->str("k-range"));
    const FitConfig base = fit_config(*s, Ks.front());
    const long jobs = s->integer("jobs");
    if (jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    const double theta0 = s->real("theta0");
    const int folds = static_cast<int>(s->integer("folds"));

    const auto table = compare_variants(net, variants, Ks, base, folds, theta0, static_cast<int>(jobs));
    std::vector<CvResult> results;
    for (const auto& cmp : table) {
      const std::string name = "waic_" + to_string(cmp.variant) + ".csv";
      auto w = open_output(dir / name);
      write_waic_csv(w, cmp.scan.rows);
      manifest.add_output(dir / name);
      if (cmp.cv) results.push_back(*cmp.cv);
      if (!cmp.error.empty()) std::cerr << to_string(cmp.variant) << ": " << cmp.error << '\n';
    }
    {
      auto out = open_output(dir / "cv.csv");
      write_cv_csv(out, results);
      auto sum = open_output(dir / "cv_summary.csv");
      write_cv_summary_csv(sum, results);
      manifest.add_output(dir / "cv.csv");
      manifest.add_output(dir / "cv_summary.csv");
    }
    std::cout << "variant K mean_auc waic\n";
    for (const auto& r : results)
      std::cout << to_string(r.variant) << ' ' << r.K << ' ' << r.mean_auc << ' ' << r.waic_full_fit
                << '\n';
    if (results.size() != variants.size()) throw NumericError("some variants failed; see above");
  });
}

// simulate -------------------------------------------------------------------

int cmd_simulate(const Command& c) {
  std::optional<Settings> s;
  if (const int code = guarded(nullptr, [&] { s = c.resolve(); })) return code;
  const std::string out = s->str("out");
  std::optional<RunManifest> manifest;
  if (out != "-") manifest.emplace("simulate", s->resolved(), out + ".manifest.json");
  return guarded(manifest ? &*manifest : nullptr, [&] {
    const long I = s->integer("actors"), J = s->integer("layers");
    if (I < 2 || J < 1) throw std::invalid_argument("need --actors >= 2 and --layers >= 1");
    const std::uint64_t seed = s->unsigned_integer("seed");
    MultilayerNetwork net;
    if (s->boolean("from-prior")) {
      if (s->has("prob")) throw std::invalid_argument("--prob and --from-prior are exclusive");
      const long K = s->integer("k");
      if (K < 1) throw std::invalid_argument("--k must be >= 1");
      const Variant v = parse_variant(s->str("variant"));
      Rng rng(seed);
      const auto state = sample_prior(elicit(static_cast<int>(K), s->real("theta0")),
                                      static_cast<int>(I), static_cast<int>(J), v, rng);
      net = replicate_network(state, v, MultilayerNetwork(static_cast<int>(I), static_cast<int>(J)), rng);
    } else {
      if (!s->has("prob")) throw std::invalid_argument("give --prob or --from-prior");
      net = erdos_renyi(static_cast<int>(I), static_cast<int>(J), s->real("prob"), seed);
    }
    if (out == "-") {
      write_edge_list(std::cout, net);
    } else {
      save_network(net, out, NetworkFormat::edge_list);
      manifest->add_output(out);
    }
  });
}

}  // namespace
}  // namespace mnlpm::cli

int main(int argc, char** argv) {
  using namespace mnlpm::cli;
  CLI::App app{"Bayesian multilayer network latent position models"};
  app.footer(kOutputs);
  app.require_subcommand(1);

  Command elicit_cmd = make_command(app, "elicit", "elicit hyperparameters for latent dimension K");
  elicit_cmd.option("k", "latent dimension", 2);
  elicit_cmd.option("theta0", "prior edge probability", 0.1);
  elicit_cmd.option("out", "output JSON file, - for stdout", "-");

  Command fit_cmd = make_command(app, "fit", "run the MCMC sampler");
  add_data_options(fit_cmd, true);
  fit_cmd.option("k", "latent dimension", 2);
  add_fit_options(fit_cmd);
  fit_cmd.option("hyper", "hyperparameter JSON (default: elicited)", "");
  fit_cmd.option("out-dir", "sample directory", "");
  fit_cmd.option("checkpoint-every", "write a resumable checkpoint every N sweeps (0 = off)", 0);
  fit_cmd.flag("resume", "continue from <out-dir>/checkpoint.bin");

  Command report_cmd = make_command(app, "report", "summaries of a sample directory");
  report_cmd.option("samples", "sample directory, or a waic-scan directory", "");
  add_data_options(report_cmd, true);
  report_cmd.option("which", "comma list of consensus,correlation,delta,positions,ppc,waic,convergence or all", "");
  report_cmd.option("stat", "per-actor summary for correlation: max or median", "max");
  report_cmd.option("replicates", "posterior predictive replicates (0 = B)", 0);
  report_cmd.option("seed", "RNG seed for replicates (fallback: MNLPM_SEED)", 1);
  report_cmd.option("out-dir", "output directory (default: the sample directory)", "");
  report_cmd.flag("svg", "also write positions.svg");

  Command scan_cmd = make_command(app, "waic-scan", "fit each K and tabulate WAIC");
  add_data_options(scan_cmd, true);
  scan_cmd.option("k-range", "K values: lo..hi or a comma list", "1..6");
  add_fit_options(scan_cmd);
  scan_cmd.option("jobs", "parallel fits", 1);
  scan_cmd.option("out-dir", "output directory", "");
  scan_cmd.flag("no-samples", "do not keep per-K sample directories");

  Command cv_cmd = make_command(app, "cv", "cross-validated link prediction across variants");
  add_data_options(cv_cmd, false);
  cv_cmd.option("variants", "comma list of variants", "IFLPM,GMLPM,MNLPM");
  cv_cmd.option("k-range", "K values: lo..hi or a comma list", "1..6");
  cv_cmd.option("folds", "number of folds", 5);
  add_fit_options(cv_cmd);
  cv_cmd.option("jobs", "parallel fits", 1);
  cv_cmd.option("out-dir", "output directory", "");

  Command sim_cmd = make_command(app, "simulate", "generate a synthetic multilayer network");
  sim_cmd.option("actors", "number of actors I", 14);
  sim_cmd.option("layers", "number of layers J", 4);
  sim_cmd.option("prob", "Erdos-Renyi edge probability", "");
  sim_cmd.flag("from-prior", "draw parameters from the prior and replicate");
  sim_cmd.option("k", "latent dimension for --from-prior", 2);
  sim_cmd.option("theta0", "prior edge probability for --from-prior", 0.1);
  sim_cmd.option("variant", "variant for --from-prior", "MNLPM");
  sim_cmd.option("seed", "RNG seed (fallback: MNLPM_SEED)", 1);
  sim_cmd.option("out", "output edge-list file, - for stdout", "-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (elicit_cmd.app->parsed()) return cmd_elicit(elicit_cmd);
  if (fit_cmd.app->parsed()) return cmd_fit(fit_cmd);
  if (report_cmd.app->parsed()) return cmd_report(report_cmd);
  if (scan_cmd.app->parsed()) return cmd_waic_scan(scan_cmd);
  if (cv_cmd.app->parsed()) return cmd_cv(cv_cmd);
  if (sim_cmd.app->parsed()) return cmd_simulate(sim_cmd);
  return 2;
}
