#include "hkl/harness/benchmark_runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "hkl/error.hpp"
#include "hkl/harness/synthetic.hpp"

namespace hkl::harness {
namespace {

const std::set<std::string> kKnownKeys = {
    "methods", "p_values", "n",          "r",         "snr",     "replicates", "n_test", "seed",
    "lambda_grid", "beta_grid", "folds", "max_folds", "kernel", "kernel_q", "kernel_alpha", "kernel_a",
    "kernel_b", "loss", "epsilon", "eps_gap", "q_max", "threads"};

template <class T>
T integer(const toml::node_view<const toml::node>& node, const std::string& key, T fallback) {
  if (!node) return fallback;
  const auto v = node.value<std::int64_t>();
  if (!v) throw InvalidArgument("config key '" + key + "' must be an integer");
  if (*v < 0) throw InvalidArgument("config key '" + key + "' must be nonnegative");
  return static_cast<T>(*v);
}

double number(const toml::node_view<const toml::node>& node, const std::string& key, double fallback) {
  if (!node) return fallback;
  const auto v = node.value<double>();  // integers convert
  if (!v) throw InvalidArgument("config key '" + key + "' must be a number");
  return *v;
}

std::vector<double> number_array(const toml::node_view<const toml::node>& node, const std::string& key,
                                 std::vector<double> fallback) {
  if (!node) return fallback;
  const toml::array* arr = node.as_array();
  if (arr == nullptr) throw InvalidArgument("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& el : *arr) {
    const auto v = el.value<double>();
    if (!v) throw InvalidArgument("config key '" + key + "' must hold numbers");
    out.push_back(*v);
  }
  return out;
}

BenchConfig from_table(const toml::table& tbl) {
  for (const auto& [key, value] : tbl) {
    (void)value;
    if (kKnownKeys.count(std::string(key.str())) == 0)
      throw InvalidArgument("unknown config key '" + std::string(key.str()) + "'");
  }
  const toml::node_view<const toml::node> root{tbl};
  BenchConfig c;
  if (const auto node = root["methods"]) {
    const toml::array* arr = node.as_array();
    if (arr == nullptr) throw InvalidArgument("config key 'methods' must be an array");
    c.methods.clear();
    for (const auto& el : *arr) {
      const auto v = el.value<std::string>();
      if (!v) throw InvalidArgument("config key 'methods' must hold strings");
      c.methods.push_back(parse_method(*v));
    }
  }
  if (const auto node = root["p_values"]) {
    c.p_values.clear();
    for (double v : number_array(node, "p_values", {})) {
      if (v != std::floor(v)) throw InvalidArgument("config key 'p_values' must hold integers");
      c.p_values.push_back(static_cast<int>(v));
    }
  }
  c.n = integer(root["n"], "n", c.n);
  c.r = integer(root["r"], "r", c.r);
  c.snr = number(root["snr"], "snr", c.snr);
  c.replicates = integer(root["replicates"], "replicates", c.replicates);
  c.n_test = integer(root["n_test"], "n_test", c.n_test);
  c.seed = integer<std::uint64_t>(root["seed"], "seed", c.seed);
  c.lambda_grid = number_array(root["lambda_grid"], "lambda_grid", c.lambda_grid);
  c.beta_grid = number_array(root["beta_grid"], "beta_grid", c.beta_grid);
  c.folds = integer(root["folds"], "folds", c.folds);
  c.max_folds = integer(root["max_folds"], "max_folds", c.max_folds);
  if (const auto node = root["kernel"]) {
    const auto v = node.value<std::string>();
    if (!v) throw InvalidArgument("config key 'kernel' must be a string");
    c.kernel = parse_kernel_kind(*v);
  }
  c.kernel_params.q = integer(root["kernel_q"], "kernel_q", c.kernel_params.q);
  c.kernel_params.alpha = number(root["kernel_alpha"], "kernel_alpha", c.kernel_params.alpha);
  c.kernel_params.a = number(root["kernel_a"], "kernel_a", c.kernel_params.a);
  c.kernel_params.b = number(root["kernel_b"], "kernel_b", c.kernel_params.b);
  LossKind loss_kind = c.loss.kind();
  if (const auto node = root["loss"]) {
    const auto v = node.value<std::string>();
    if (!v) throw InvalidArgument("config key 'loss' must be a string");
    loss_kind = parse_loss_kind(*v);
  }
  c.loss = Loss(loss_kind, number(root["epsilon"], "epsilon", c.loss.epsilon()));
  c.eps_gap = number(root["eps_gap"], "eps_gap", c.eps_gap);
  c.q_max = integer<std::size_t>(root["q_max"], "q_max", c.q_max);
  c.threads = integer<std::size_t>(root["threads"], "threads", c.threads);
  c.validate();
  return c;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void BenchConfig::validate() const {
  if (methods.empty()) throw InvalidArgument("methods must not be empty");
  if (p_values.empty()) throw InvalidArgument("p_values must not be empty");
  for (int p : p_values)
    if (p < r || p < 1) throw InvalidArgument("every p must be at least r and positive");
  if (replicates < 1) throw InvalidArgument("replicates must be positive");
  if (n_test < 1) throw InvalidArgument("n_test must be positive");
  if (lambda_grid.empty() || beta_grid.empty()) throw InvalidArgument("grids must not be empty");
  if (!(eps_gap > 0.0)) throw InvalidArgument("eps_gap must be positive");
  if (q_max < 1) throw InvalidArgument("q_max must be positive");
  if (folds < 2 || n < folds) throw InvalidArgument("folds must be at least 2 and at most n");
  if (max_folds < 0) throw InvalidArgument("max_folds must be nonnegative");
  SyntheticSpec spec;
  spec.p = p_values.front();
  spec.r = r;
  spec.n = n;
  spec.snr = snr;
  spec.validate();
}

BenchConfig BenchConfig::from_toml_file(const std::filesystem::path& path) {
  try {
    return from_table(toml::parse_file(path.string()));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "cannot parse " << path.string() << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw InvalidArgument(msg.str());
  }
}

BenchConfig BenchConfig::from_toml_string(const std::string& text) {
  try {
    return from_table(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "cannot parse config: " << e.description() << " (line " << e.source().begin.line << ")";
    throw InvalidArgument(msg.str());
  }
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

bool ResultsTable::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.ok; });
}

std::vector<SummaryRow> ResultsTable::summary() const {
  std::vector<SummaryRow> out;
  std::vector<std::pair<Method, int>> keys;
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    const std::pair<int, int> key{static_cast<int>(r.method), r.p};
    if (groups.count(key) == 0) keys.emplace_back(r.method, r.p);
    auto& g = groups[key];
    if (r.ok) g.push_back(r.test_mse);
  }
  for (const auto& [method, p] : keys) {
    const auto& g = groups[{static_cast<int>(method), p}];
    SummaryRow s;
    s.method = method;
    s.p = p;
    s.count = g.size();
    if (!g.empty()) {
      s.median = quantile(g, 0.5);
      s.lower_quartile = quantile(g, 0.25);
      s.upper_quartile = quantile(g, 0.75);
    }
    out.push_back(s);
  }
  return out;
}

std::string ResultsTable::to_csv() const {
  std::ostringstream os;
  os << "method,p,replicate,seed,status,test_mse,cv_score,lambda,beta,w_size\n";
  for (const ResultRow& r : rows) {
    os << to_string(r.method) << ',' << r.p << ',' << r.replicate << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
    if (r.ok) {
      os << ',' << format_double(r.test_mse) << ',' << format_double(r.cv_score) << ',' << format_double(r.lambda)
         << ',' << format_double(r.beta) << ',' << r.w_size;
    } else {
      os << ",,,,,";
    }
    os << '\n';
  }
  return os.str();
}

std::string ResultsTable::summary_csv() const {
  std::ostringstream os;
  os << "method,p,count,median,lower_quartile,upper_quartile\n";
  for (const SummaryRow& s : summary())
    os << to_string(s.method) << ',' << s.p << ',' << s.count << ',' << format_double(s.median) << ','
       << format_double(s.lower_quartile) << ',' << format_double(s.upper_quartile) << '\n';
  return os.str();
}

std::string ResultsTable::to_json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json j;
    j["method"] = to_string(r.method);
    j["p"] = r.p;
    j["replicate"] = r.replicate;
    j["seed"] = r.seed;
    j["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      j["test_mse"] = r.test_mse;
      j["cv_score"] = r.cv_score;
      j["lambda"] = r.lambda;
      j["beta"] = r.beta;
      j["w_size"] = r.w_size;
    } else {
      j["error"] = r.error;
    }
    rows_json.push_back(std::move(j));
  }
  nlohmann::ordered_json summary_json = nlohmann::ordered_json::array();
  for (const SummaryRow& s : summary()) {
    nlohmann::ordered_json j;
    j["method"] = to_string(s.method);
    j["p"] = s.p;
    j["count"] = s.count;
    j["median"] = s.median;
    j["lower_quartile"] = s.lower_quartile;
    j["upper_quartile"] = s.upper_quartile;
    summary_json.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(rows_json);
  doc["summary"] = std::move(summary_json);
  return doc.dump(2) + "\n";
}

ResultRow run_single(const BenchConfig& config, Method method, int p, int replicate) {
  ResultRow row;
  row.method = method;
  row.p = p;
  row.replicate = replicate;
  row.seed = config.seed + static_cast<std::uint64_t>(replicate);
  const auto start = std::chrono::steady_clock::now();
  try {
    SyntheticSpec spec;
    spec.p = p;
    spec.r = config.r;
    spec.n = config.n;
    spec.snr = config.snr;
    spec.seed = row.seed;
    spec.n_test = config.n_test;
    const SyntheticData data = gen_synthetic(spec);

    FitConfig fit_cfg;
    fit_cfg.eps_gap = config.eps_gap;
    fit_cfg.q_max = config.q_max;
    fit_cfg.loss = config.loss;
    fit_cfg.kernel = config.kernel;
    fit_cfg.kernel_params = config.kernel_params;
    fit_cfg.weights.beta = config.beta_grid.front();
    CvOptions cv;
    cv.lambda_grid = config.lambda_grid;
    cv.beta_grid = config.beta_grid;
    cv.folds = config.folds;
    cv.max_folds = config.max_folds;
    cv.seed = row.seed;
    cv.threads = 1;
    cv.greedy.seed = row.seed;
    const CvResult res = cross_validate(data.x, data.y, method, fit_cfg, cv);
    row.test_mse = prediction_score(config.loss, data.y_test, decision_function(res.model, data.x_test));
    row.cv_score = res.score;
    row.lambda = res.lambda;
    row.beta = res.beta;
    row.w_size = method == Method::l2 ? 1 : res.model.w_active.size();
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

ResultsTable run_benchmark(const BenchConfig& config, const std::filesystem::path& out_dir, std::ostream* progress) {
  config.validate();
  struct Job {
    Method method;
    int p;
    int replicate;
  };
  std::vector<Job> jobs;
  for (Method m : config.methods)
    for (int p : config.p_values)
      for (int k = 0; k < config.replicates; ++k) jobs.push_back({m, p, k});

  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    log.open(out_dir / "bench.log");
    if (!log) throw InvalidArgument("cannot write " + (out_dir / "bench.log").string());
  }
  std::mutex log_mutex;
  auto note = [&](const std::string& line) {
    std::lock_guard<std::mutex> lock(log_mutex);
    if (log.is_open()) log << line << std::endl;
    if (progress != nullptr) *progress << line << std::endl;
  };

  ResultsTable table;
  table.rows.resize(jobs.size());
  std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = std::min(threads, jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  const auto start = std::chrono::steady_clock::now();
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      table.rows[i] = run_single(config, job.method, job.p, job.replicate);
      const ResultRow& r = table.rows[i];
      std::ostringstream line;
      line << '[' << ++done << '/' << jobs.size() << "] " << to_string(r.method) << " p=" << r.p
           << " replicate=" << r.replicate << ' ';
      if (r.ok) {
        line << "test_mse=" << r.test_mse << " lambda=" << r.lambda << " beta=" << r.beta << " |W|=" << r.w_size;
      } else {
        line << "FAILED: " << r.error;
      }
      line << " time=" << std::fixed << std::setprecision(2) << r.wall_time << "s";
      note(line.str());
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    std::ostringstream line;
    line << "total time " << std::fixed << std::setprecision(2) << total << "s";
    note(line.str());
  }

  if (!out_dir.empty()) {
    std::ofstream(out_dir / "results.csv") << table.to_csv();
    std::ofstream(out_dir / "results.json") << table.to_json();
    std::ofstream(out_dir / "summary.csv") << table.summary_csv();
  }
  return table;
}

}  // namespace hkl::harness
