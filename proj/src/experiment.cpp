#include "mfilab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "mfilab/config.hpp"
#include "mfilab/error.hpp"
#include "mfilab/estimators.hpp"
#include "mfilab/gaussian.hpp"
#include "mfilab/inclusions.hpp"
#include "mfilab/io.hpp"
#include "mfilab/tail.hpp"

namespace mfilab {

namespace fs = std::filesystem;
using nlohmann::json;

WeightFunction weight_from_json(const json& j, const std::string& key, const FieldModel& model) {
  ConfigView v(j, key);
  const int d = model.box().dim;
  const std::string family =
      v.choice("family", {"exponential", "stretched-exp", "exp-log", "compact", "gaussian",
                          "radius-law", "tabulated"});
  WeightFunction w;
  if (family == "exponential") {
    w = exponential_weight(v.number("c", 1.0));
  } else if (family == "stretched-exp") {
    w = stretched_exp_weight(v.number("c", 1.0), d);
  } else if (family == "exp-log") {
    w = exp_log_weight(v.number("c", 1.0));
  } else if (family == "compact") {
    w = compact_weight(v.number("r0", 1.0), d);
  } else if (family == "gaussian") {
    if (v.has("covariance")) {
      w = gaussian_weight(covariance_from_json(v.raw("covariance"), v.key("covariance")));
    } else if (const auto* g = dynamic_cast<const GaussianModel*>(&model)) {
      w = gaussian_weight(g->covariance());
    } else {
      throw Error(ErrorCode::ConfigValidation,
                  v.key("covariance") + ": required unless the model is gaussian");
    }
  } else if (family == "radius-law") {
    if (v.has("radius")) {
      w = gamma_weight(ScalarLaw::from_json(v.raw("radius"), v.key("radius")),
                       v.number("intensity", 1.0), d);
    } else if (const auto* m = dynamic_cast<const PoissonInclusionModel*>(&model)) {
      w = gamma_weight(m->spec().radius, m->spec().intensity, d);
    } else {
      throw Error(ErrorCode::ConfigValidation,
                  v.key("radius") + ": required unless the model is inclusions");
    }
  } else {
    const std::vector<double> ell = v.numbers("ell", {});
    const std::vector<double> values = v.numbers("values", {});
    if (ell.size() < 2 || ell.size() != values.size()) {
      throw Error(ErrorCode::ConfigValidation,
                  v.key("values") + ": needs at least two nodes matching " + v.key("ell"));
    }
    try {
      w = tabulated_weight(ell, values);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigValidation, v.key("ell") + ": " + e.what());
    }
  }
  const double norm = v.number("normalization", 1.0);
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::ConfigValidation, v.key("normalization") + ": must be positive");
  }
  v.finish();
  return norm == 1.0 ? w : w.scaled(norm);
}

std::vector<Observable> observables_from_json(const BoxSpec& box, const json& j,
                                              const std::string& key) {
  std::vector<std::pair<long, const json*>> items;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) items.emplace_back(static_cast<long>(i), &j[i]);
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      char* end = nullptr;
      const long idx = std::strtol(it.key().c_str(), &end, 10);
      if (it.key().empty() || *end != '\0' || idx < 0) {
        throw Error(ErrorCode::ConfigValidation,
                    key + "." + it.key() + ": observables are indexed 0, 1, ...");
      }
      items.emplace_back(idx, &it.value());
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  } else {
    throw Error(ErrorCode::ConfigValidation, key + ": expected a list of observables");
  }
  std::vector<Observable> out;
  for (const auto& [idx, obj] : items) {
    out.push_back(Observable::from_json(box, *obj, key + "." + std::to_string(idx)));
  }
  if (out.empty()) {
    throw Error(ErrorCode::ConfigValidation, key + ": at least one observable is required");
  }
  return out;
}

namespace {

std::string numbered(const std::string& stem, long i, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04ld", i);
  return stem + buf + ext;
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}
  void put(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

Point default_point(const BoxSpec& box) {
  return Point::Constant(box.dim, std::floor(box.side / 2.0) + 0.5);
}

Point point_from(ConfigView& v, const std::string& name, const BoxSpec& box) {
  if (!v.has(name)) return default_point(box);
  const std::vector<double> x = v.numbers(name, {});
  if (static_cast<int>(x.size()) != box.dim) {
    throw Error(ErrorCode::ConfigValidation,
                v.key(name) + ": expected " + std::to_string(box.dim) + " coordinates");
  }
  return Eigen::Map<const Eigen::VectorXd>(x.data(), box.dim);
}

std::vector<double> to_vector(const Point& p) { return {p.data(), p.data() + p.size()}; }

long positive(ConfigView& v, const std::string& name, long fallback, long minimum = 1) {
  const long n = v.integer(name, fallback);
  if (n < minimum) {
    throw Error(ErrorCode::ConfigValidation,
                v.key(name) + ": must be at least " + std::to_string(minimum));
  }
  return n;
}

struct RadiusSamples {
  std::vector<double> values;
  long boundary_hits = 0;
};

RadiusSamples sample_radii(const FieldModel& model, const Point& x, double ell, long n,
                           bool drop_hits, const RngStream& rng, int workers) {
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  std::vector<char> hit(static_cast<std::size_t>(n), 0);
  parallel_for(n, workers, [&](long i) {
    try {
      r[static_cast<std::size_t>(i)] =
          empirical_action_radius(model, x, ell, realization_stream(rng, i));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BoundaryHit || !drop_hits) throw;
      hit[static_cast<std::size_t>(i)] = 1;
    }
  });
  RadiusSamples out;
  for (long i = 0; i < n; ++i) {
    if (hit[static_cast<std::size_t>(i)]) {
      ++out.boundary_hits;
    } else {
      out.values.push_back(r[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

std::string samples_csv(const std::vector<double>& v) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rows.push_back({std::to_string(i), format_double(v[i])});
  }
  return csv_document({"trial", "rho"}, rows);
}

std::function<double(const Eigen::VectorXd&)> scalar_functional(ConfigView& v, long n,
                                                                json& resolved) {
  const std::string type =
      v.choice("type", "linear", {"linear", "max", "min", "sum-squares", "tanh-sum",
                                  "log-sum-exp"});
  resolved = {{"type", type}};
  if (type == "linear") {
    std::vector<double> a = v.numbers("coefficients", std::vector<double>(n, 1.0));
    if (static_cast<long>(a.size()) != n) {
      throw Error(ErrorCode::ConfigValidation,
                  v.key("coefficients") + ": expected " + std::to_string(n) + " entries");
    }
    resolved["coefficients"] = a;
    return [a](const Eigen::VectorXd& x) {
      double s = 0.0;
      for (long i = 0; i < x.size(); ++i) s += a[static_cast<std::size_t>(i)] * x[i];
      return s;
    };
  }
  if (type == "max") return [](const Eigen::VectorXd& x) { return x.maxCoeff(); };
  if (type == "min") return [](const Eigen::VectorXd& x) { return x.minCoeff(); };
  if (type == "sum-squares") return [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  if (type == "tanh-sum") {
    return [](const Eigen::VectorXd& x) { return x.array().tanh().sum(); };
  }
  return [](const Eigen::VectorXd& x) {
    const double m = x.maxCoeff();
    return m + std::log((x.array() - m).exp().sum());
  };
}

void run_generate(ConfigView& v, const FieldModel& model, const RngStream& rng, json& m,
                  Writer& w) {
  const long n = positive(v, "n", 1);
  const auto* pm = dynamic_cast<const PointFieldModel*>(&model);
  const bool points = v.boolean("points", pm != nullptr);
  if (points && !pm) {
    throw Error(ErrorCode::ConfigValidation, v.key("points") + ": the model has no points");
  }
  m["n"] = n;
  m["points"] = points;
  for (long i = 0; i < n; ++i) {
    const Keys keys = model.draw_keys(realization_stream(rng, i).substream("field"));
    w.put(numbered("field", i, ".csv"), field_csv(model.render(keys)));
    if (points) w.put(numbered("points", i, ".csv"), points_csv(pm->points(keys)));
  }
}

void run_action_radius(ConfigView& v, const FieldModel& model, const RngStream& rng, json& m,
                       Writer& w, int workers, bool fit) {
  const long n = positive(v, "n", fit ? 500 : 100);
  const double ell = v.number("ell", 0.0);
  if (!(ell >= 0.0)) {
    throw Error(ErrorCode::ConfigValidation, v.key("ell") + ": must be nonnegative");
  }
  const Point x = point_from(v, "x", model.box());
  const std::string hits = v.choice("boundary_hits", "error", {"error", "drop"});
  m["n"] = n;
  m["ell"] = ell;
  m["x"] = to_vector(x);
  m["boundary_hits"] = hits;
  TailFamily family;
  long bootstrap = 200;
  if (fit) {
    family = TailFamily::from_json(v.raw("fit"), v.key("fit"));
    bootstrap = v.integer("bootstrap", 200);
    if (bootstrap < 0) {
      throw Error(ErrorCode::ConfigValidation, v.key("bootstrap") + ": must be nonnegative");
    }
    json f = {{"family", family.name()}};
    if (family.kind == TailFamily::Kind::Weibull) f["shape"] = family.shape;
    m["fit"] = f;
    m["bootstrap"] = bootstrap;
  }
  const RadiusSamples s =
      sample_radii(model, x, ell, n, hits == "drop", rng.substream("radius"), workers);
  w.put("samples.csv", samples_csv(s.values));
  json summary = {{"n_requested", n},
                  {"n_samples", s.values.size()},
                  {"boundary_hits", s.boundary_hits}};
  if (!s.values.empty()) {
    summary["max"] = *std::max_element(s.values.begin(), s.values.end());
    double mean = 0.0;
    for (double r : s.values) mean += r;
    summary["mean"] = mean / static_cast<double>(s.values.size());
  }
  if (fit) {
    const TailEstimate t =
        tail_fit(s.values, family, rng.substream("bootstrap"), static_cast<int>(bootstrap));
    json tj = t.to_json();
    tj["boundary_hits"] = s.boundary_hits;
    w.put("tail.json", json_text(tj));
  } else {
    w.put("summary.json", json_text(summary));
  }
}

void run_verify(ConfigView& v, const FieldModel& model, const RngStream& rng, json& m,
                Writer& w, int workers) {
  const Inequality ineq =
      inequality_from_string(v.choice("inequality", {"MSG", "MLSI", "MCI"}));
  const std::vector<Observable> obs =
      observables_from_json(model.box(), v.raw("observables"), v.key("observables"));
  const WeightFunction weight = weight_from_json(v.raw("weight"), v.key("weight"), model);
  VerifySettings s;
  s.n = positive(v, "n", 4000, 2);
  ConfigView r = v.child("rhs");
  s.rhs.n = positive(r, "n", 200, 2);
  s.rhs.K = static_cast<int>(positive(r, "K", 32, 2));
  s.rhs.refine = static_cast<int>(positive(r, "refine", 0, 0));
  s.rhs.scales = r.numbers("scales", {});
  const std::string deriv =
      r.choice("derivative", "auto", {"auto", "oscillation", "functional"});
  s.rhs.derivative = deriv == "oscillation"  ? DerivativeKind::Oscillation
                     : deriv == "functional" ? DerivativeKind::Functional
                                             : DerivativeKind::Automatic;
  r.finish();
  s.rhs.workers = workers;

  json oj = json::array();
  for (const auto& o : obs) oj.push_back(o.to_json());
  m["inequality"] = to_string(ineq);
  m["observables"] = oj;
  m["weight"] = weight.to_json();
  m["n"] = s.n;
  m["rhs"] = {{"n", s.rhs.n},
              {"K", s.rhs.K},
              {"refine", s.rhs.refine},
              {"scales", s.rhs.scales},
              {"derivative", deriv}};

  const std::vector<MfiReport> reports = verify(ineq, model, obs, weight, s, rng);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    w.put(numbered("report", static_cast<long>(i), ".json"), json_text(reports[i].to_json()));
    rows.push_back(reports[i].csv_row());
  }
  w.put("reports.csv", csv_document(MfiReport::csv_header(), rows));
}

void run_efron_stein(ConfigView& v, const RngStream& rng, json& m, Writer& w) {
  const long n_vars = positive(v, "n_vars", 2);
  const long n = positive(v, "n", 10000, 3);
  const ScalarLaw law = v.has("law") ? ScalarLaw::from_json(v.raw("law"), v.key("law"))
                                     : ScalarLaw::uniform(0.0, 1.0);
  ConfigView fv = v.child("functional");
  json fj;
  const auto f = scalar_functional(fv, n_vars, fj);
  fv.finish();
  m["n_vars"] = n_vars;
  m["n"] = n;
  m["law"] = law.to_json();
  m["functional"] = fj;
  const EfronStein es = efron_stein_check(static_cast<int>(n_vars), law, f, n, rng);
  w.put("efron_stein.json", json_text({{"lhs", es.lhs.to_json()},
                                       {"rhs", es.rhs.to_json()},
                                       {"ratio", es.ratio.to_json()}}));
}

void run_brascamp_lieb(ConfigView& v, json& m, Writer& w) {
  const json& rows = v.raw("matrix");
  Eigen::MatrixXd f;
  bool ok = rows.is_array() && !rows.empty() && rows[0].is_array() && !rows[0].empty();
  if (ok) {
    f.resize(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
    for (std::size_t i = 0; ok && i < rows.size(); ++i) {
      ok = rows[i].is_array() && rows[i].size() == rows[0].size();
      for (std::size_t k = 0; ok && k < rows[i].size(); ++k) {
        ok = rows[i][k].is_number();
        if (ok) f(static_cast<long>(i), static_cast<long>(k)) = rows[i][k].get<double>();
      }
    }
  }
  if (!ok) {
    throw Error(ErrorCode::ConfigValidation, v.key("matrix") + ": expected a rectangular array of rows");
  }
  const long level = positive(v, "level", 6, 2);
  ConfigView fv = v.child("functional");
  json fj;
  const auto z = scalar_functional(fv, f.rows(), fj);
  fv.finish();
  m["matrix"] = rows;
  m["level"] = level;
  m["functional"] = fj;
  const BrascampLieb bl = brascamp_lieb_oracle(f, z, static_cast<int>(level));
  w.put("brascamp_lieb.json",
        json_text({{"lhs", bl.lhs}, {"rhs", bl.rhs}, {"holds", bl.lhs <= bl.rhs}}));
}

std::uint64_t seed_from(ConfigView& v) {
  const json& s = v.raw("seed");
  if (!v.has("seed")) {
    throw Error(ErrorCode::ConfigValidation, "seed: required");
  }
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<long>() >= 0) return static_cast<std::uint64_t>(s.get<long>());
  throw Error(ErrorCode::ConfigValidation, "seed: expected a nonnegative integer");
}

}  // namespace

RunOutcome run_experiment(const json& config, const std::optional<fs::path>& out, int workers) {
  const json cfg = unflatten(config);
  ConfigView v(cfg, "");
  const std::string kind = v.choice(
      "kind", {"generate", "action-radius", "tail", "verify", "efron-stein", "brascamp-lieb"});
  const std::uint64_t seed = seed_from(v);
  const std::string dir = v.text("output", "mfi-lab-out");
  const RngStream rng(seed);
  json m = {{"kind", kind}, {"seed", seed}};

  // Unknown keys are rejected before any work is done.
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"generate", {"model", "n", "points"}},
      {"action-radius", {"model", "n", "ell", "x", "boundary_hits"}},
      {"tail", {"model", "n", "ell", "x", "boundary_hits", "fit", "bootstrap"}},
      {"verify", {"model", "inequality", "observables", "weight", "n", "rhs"}},
      {"efron-stein", {"n_vars", "n", "law", "functional"}},
      {"brascamp-lieb", {"matrix", "level", "functional"}},
  };
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& k = it.key();
    if (k != "kind" && k != "seed" && k != "output" && !kKeys.at(kind).count(k)) {
      throw Error(ErrorCode::ConfigValidation, k + ": unknown key for kind " + kind);
    }
  }

  std::unique_ptr<FieldModel> model;
  const bool needs_model = kind != "efron-stein" && kind != "brascamp-lieb";
  if (needs_model) {
    if (!v.has("model")) {
      throw Error(ErrorCode::ConfigValidation, "model: required for kind " + kind);
    }
    model = make_model(v.raw("model"));
    m["model"] = model->describe();
  }
  Writer w(out ? *out : fs::path(dir));
  if (kind == "generate") {
    run_generate(v, *model, rng, m, w);
  } else if (kind == "action-radius" || kind == "tail") {
    run_action_radius(v, *model, rng, m, w, workers, kind == "tail");
  } else if (kind == "verify") {
    run_verify(v, *model, rng, m, w, workers);
  } else if (kind == "efron-stein") {
    run_efron_stein(v, rng, m, w);
  } else {
    run_brascamp_lieb(v, m, w);
  }
  v.finish();
  m["artifacts"] = w.names();
  w.put("manifest.json", json_text(m));
  return {w.dir(), w.names(), m};
}

std::string report_table(const std::vector<fs::path>& files) {
  if (files.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no report files");
  }
  std::vector<MfiReport> reports;
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_text(f));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigValidation, f.string() + ": " + e.what());
    }
    reports.push_back(MfiReport::from_json(j));
  }
  for (const auto& r : reports) {
    if (r.inequality != reports.front().inequality) {
      throw Error(ErrorCode::MixedReportKinds,
                  to_string(reports.front().inequality) + " and " + to_string(r.inequality) +
                      " reports cannot share a table");
    }
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MfiReport& a, const MfiReport& b) { return a.model < b.model; });
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) rows.push_back(r.csv_row());
  return csv_document(MfiReport::csv_header(), rows);
}

}  // namespace mfilab
