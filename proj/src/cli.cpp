#include "isomech/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <map>
#include <sstream>

#include "isomech/csv.hpp"
#include "isomech/error.hpp"
#include "isomech/estimation.hpp"
#include "isomech/family_json.hpp"
#include "isomech/icml.hpp"
#include "isomech/isotonic.hpp"
#include "isomech/mechanism.hpp"
#include "isomech/minimax.hpp"
#include "isomech/order.hpp"

namespace isomech {

using nlohmann::json;

Family parse_family_spec(const std::string& spec) {
  const auto parts = csv::split(spec, ':');
  const std::string& kind = parts[0];
  if (parts.size() > 2) throw ValidationError("family \"" + spec + "\": too many ':' fields");
  const bool has_arg = parts.size() == 2;
  if (kind == "gaussian") return Family::gaussian(has_arg ? csv::parse_double(parts[1]) : 1.0);
  if (kind == "poisson") {
    if (has_arg) throw ValidationError("family poisson takes no parameter");
    return Family::poisson();
  }
  if (!has_arg) throw ValidationError("family \"" + kind + "\" needs a parameter, e.g. " + kind + ":10");
  if (kind == "binomial") return Family::binomial(static_cast<int>(csv::parse_integer(parts[1])));
  if (kind == "gamma") return Family::gamma(csv::parse_double(parts[1]));
  throw ValidationError("unknown family \"" + kind + "\"");
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    const auto parts = csv::split(spec, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ValidationError("range \"" + spec + "\": expected start:stop[:step]");
    const long long start = csv::parse_integer(parts[0]);
    const long long stop = csv::parse_integer(parts[1]);
    const long long step = parts.size() == 3 ? csv::parse_integer(parts[2]) : 1;
    if (step <= 0) throw ValidationError("range \"" + spec + "\": step must be positive");
    for (long long v = start; v <= stop; v += step) out.push_back(static_cast<int>(v));
  } else {
    for (const auto& token : csv::split(spec, ',')) out.push_back(static_cast<int>(csv::parse_integer(token)));
  }
  if (out.empty()) throw ValidationError("empty list \"" + spec + "\"");
  return out;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  for (const auto& token : csv::split(spec, ',')) out.push_back(csv::parse_double(token));
  return out;
}

namespace {

// ---- effective configuration -------------------------------------------

json& slot(json& cfg, const std::string& key, const json& fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = fallback;
  return cfg[key];
}

std::string get_string(json& cfg, const std::string& key, const std::string& fallback) {
  const json& v = slot(cfg, key, fallback);
  if (!v.is_string()) throw ValidationError("config \"" + key + "\": expected a string");
  return v.get<std::string>();
}

double get_double(json& cfg, const std::string& key, double fallback) {
  const json& v = slot(cfg, key, fallback);
  if (!v.is_number()) throw ValidationError("config \"" + key + "\": expected a number");
  return v.get<double>();
}

long long get_integer(json& cfg, const std::string& key, long long fallback) {
  const json& v = slot(cfg, key, fallback);
  if (!v.is_number_integer()) throw ValidationError("config \"" + key + "\": expected an integer");
  return v.get<long long>();
}

std::uint64_t get_seed(json& cfg) {
  if (!cfg.contains("seed") || cfg["seed"].is_null()) {
    std::uint64_t seed = 0;
    if (const char* env = std::getenv("ISOMECH_SEED"); env != nullptr && *env != '\0') {
      const long long v = csv::parse_integer(env);
      if (v < 0) throw ValidationError("ISOMECH_SEED must be non-negative");
      seed = static_cast<std::uint64_t>(v);
    }
    cfg["seed"] = seed;
  }
  const json& v = cfg["seed"];
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ValidationError("config \"seed\": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::int64_t get_trials(json& cfg, long long fallback) {
  const long long t = get_integer(cfg, "trials", fallback);
  if (t < 1) throw ValidationError("trials must be >= 1");
  return t;
}

unsigned get_threads(json& cfg) {
  const long long t = get_integer(cfg, "threads", 0);
  if (t < 0) throw ValidationError("threads must be >= 0");
  return static_cast<unsigned>(t);
}

Family get_family(json& cfg, const std::string& fallback) {
  json& v = slot(cfg, "family", fallback);
  const Family f = v.is_string() ? parse_family_spec(v.get<std::string>()) : family_from_json(v);
  v = family_to_json(f);
  return f;
}

std::vector<int> get_int_list(json& cfg, const std::string& key, const std::string& fallback) {
  json& v = slot(cfg, key, fallback);
  std::vector<int> out;
  if (v.is_string()) {
    out = parse_int_list(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ValidationError("config \"" + key + "\": expected integers");
      out.push_back(e.get<int>());
    }
  } else {
    throw ValidationError("config \"" + key + "\": expected a list");
  }
  v = out;
  return out;
}

std::vector<double> get_double_list(json& cfg, const std::string& key, const std::string& fallback) {
  json& v = slot(cfg, key, fallback);
  std::vector<double> out;
  if (v.is_string()) {
    out = parse_double_list(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError("config \"" + key + "\": expected numbers");
      out.push_back(e.get<double>());
    }
  } else {
    throw ValidationError("config \"" + key + "\": expected a list");
  }
  v = out;
  return out;
}

std::string require_path(json& cfg, const std::string& key) {
  const std::string p = get_string(cfg, key, "");
  if (p.empty()) throw ValidationError("missing required input --" + key);
  return p;
}

// ---- input files ---------------------------------------------------------

// index,<column> with indices forming 1..n; returns scores ordered by index.
Eigen::VectorXd read_scores(const std::string& path, const std::string& column) {
  const csv::Table t = csv::read_file(path);
  const int ic = t.column("index");
  const int sc = t.column(column);
  const std::size_t n = t.rows.size();
  if (n == 0) throw ValidationError(path + ": no score rows");
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  std::vector<bool> seen(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    const long long idx = t.integer(r, ic);
    if (idx < 1 || idx > static_cast<long long>(n)) {
      throw ValidationError(t.where(r) + fmt::format("index {} outside 1..{}", idx, n));
    }
    if (seen[static_cast<std::size_t>(idx - 1)]) throw ValidationError(t.where(r) + fmt::format("duplicate index {}", idx));
    seen[static_cast<std::size_t>(idx - 1)] = true;
    x[idx - 1] = t.number(r, sc);
    if (!std::isfinite(x[idx - 1])) throw ValidationError(t.where(r) + "score must be finite");
  }
  return x;
}

// rank,index (1 = best).
Ranking read_ranking(const std::string& path, int n) {
  const csv::Table t = csv::read_file(path);
  const int rc = t.column("rank");
  const int ic = t.column("index");
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long rank = t.integer(r, rc);
    const long long idx = t.integer(r, ic);
    if (idx < 1 || idx > n) {
      throw ValidationError(t.where(r) + fmt::format("index {} does not exist in the scores (n = {})", idx, n));
    }
    if (rank < 1 || rank > n) throw ValidationError(t.where(r) + fmt::format("rank {} outside 1..{}", rank, n));
    if (perm[static_cast<std::size_t>(rank - 1)] != -1) throw ValidationError(t.where(r) + fmt::format("duplicate rank {}", rank));
    if (used[static_cast<std::size_t>(idx - 1)]) throw ValidationError(t.where(r) + fmt::format("index {} ranked twice", idx));
    perm[static_cast<std::size_t>(rank - 1)] = static_cast<int>(idx - 1);
    used[static_cast<std::size_t>(idx - 1)] = true;
  }
  for (int i = 0; i < n; ++i) {
    if (!used[static_cast<std::size_t>(i)]) throw ValidationError(path + fmt::format(": index {} is not ranked", i + 1));
  }
  return Ranking(perm);
}

// index,block (block 1 = best).
CoarseRanking read_blocks(const std::string& path, int n) {
  const csv::Table t = csv::read_file(path);
  const int ic = t.column("index");
  const int bc = t.column("block");
  std::map<long long, std::vector<int>> blocks;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long idx = t.integer(r, ic);
    const long long block = t.integer(r, bc);
    if (idx < 1 || idx > n) {
      throw ValidationError(t.where(r) + fmt::format("index {} does not exist in the scores (n = {})", idx, n));
    }
    if (used[static_cast<std::size_t>(idx - 1)]) throw ValidationError(t.where(r) + fmt::format("index {} listed twice", idx));
    if (block < 1) throw ValidationError(t.where(r) + "block numbers start at 1");
    used[static_cast<std::size_t>(idx - 1)] = true;
    blocks[block].push_back(static_cast<int>(idx - 1));
  }
  for (int i = 0; i < n; ++i) {
    if (!used[static_cast<std::size_t>(i)]) throw ValidationError(path + fmt::format(": index {} has no block", i + 1));
  }
  long long expect = 1;
  std::vector<std::vector<int>> out;
  for (auto& [b, items] : blocks) {
    if (b != expect++) throw ValidationError(path + fmt::format(": block numbers must be 1..K without gaps (missing {})", expect - 1));
    out.push_back(std::move(items));
  }
  return CoarseRanking(out);
}

// A single numeric column: "score", "value", or the only column; ordered by
// "index" when present.
std::vector<double> read_values(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  int col = -1;
  if (t.has_column("score")) {
    col = t.column("score");
  } else if (t.has_column("value")) {
    col = t.column("value");
  } else if (t.header.size() == 1) {
    col = 0;
  } else {
    throw ValidationError(path + ":1: expected a \"score\" or \"value\" column");
  }
  if (t.rows.empty()) throw ValidationError(path + ": no rows");
  if (t.has_column("index")) {
    const Eigen::VectorXd x = read_scores(path, t.header[static_cast<std::size_t>(col)]);
    return {x.data(), x.data() + x.size()};
  }
  std::vector<double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(t.number(r, col));
  return out;
}

std::vector<ReviewRecord> read_reviews(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const int ic = t.column("submission_id"), sc = t.column("score"), cc = t.column("confidence");
  std::vector<ReviewRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.cell(r, ic).empty()) throw ValidationError(t.where(r) + "empty submission_id");
    out.push_back({t.cell(r, ic), t.number(r, sc), static_cast<int>(t.integer(r, cc))});
  }
  return out;
}

std::vector<AuthorRecord> read_authors(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const int ac = t.column("author_id"), sc = t.column("submission_ids"), rc = t.column("ranking");
  std::vector<AuthorRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    AuthorRecord a;
    a.author_id = t.cell(r, ac);
    a.submission_ids = csv::split(t.cell(r, sc), ';');
    for (const auto& token : csv::split(t.cell(r, rc), ';')) {
      try {
        a.ranking.push_back(static_cast<int>(csv::parse_integer(token)));
      } catch (const ValidationError& e) {
        throw ValidationError(t.where(r) + "ranking: " + e.what());
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---- results ---------------------------------------------------------------

struct Result {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string verdict;  // set by check-majorization instead of a table
  json report = json::object();  // extra run facts for the sidecar
};

std::string num(double v) { return csv::format_number(v); }

std::string join(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

json cell_to_json(const std::string& cell) {
  if (cell == "NA") return nullptr;
  if (cell == "true") return true;
  if (cell == "false") return false;
  try {
    return csv::parse_double(cell);
  } catch (const ValidationError&) {
    return cell;
  }
}

void emit(const Result& res, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json j;
    if (!res.verdict.empty()) {
      j["verdict"] = res.verdict == "true";
    } else {
      j["columns"] = res.header;
      j["rows"] = json::array();
      for (const auto& r : res.rows) {
        json row = json::object();
        for (std::size_t c = 0; c < r.size(); ++c) row[res.header[c]] = cell_to_json(r[c]);
        j["rows"].push_back(row);
      }
    }
    os << j.dump(2) << '\n';
  } else if (!res.verdict.empty()) {
    os << res.verdict << '\n';
  } else {
    csv::write(os, res.header, res.rows);
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError(path + ": cannot write");
  f << j.dump(2) << '\n';
}

// ---- commands --------------------------------------------------------------

Result cmd_fit(json& cfg) {
  get_trials(cfg, 1);
  get_seed(cfg);
  const std::string scores = require_path(cfg, "scores");
  const std::string column = get_string(cfg, "column", "score");
  const std::string ranking_path = get_string(cfg, "ranking", "");
  const std::string blocks_path = get_string(cfg, "blocks", "");
  if (ranking_path.empty() == blocks_path.empty()) {
    throw ValidationError("fit: give exactly one of --ranking or --blocks");
  }
  const Eigen::VectorXd x = read_scores(scores, column);
  const int n = static_cast<int>(x.size());

  std::optional<Family> family;
  if (cfg.contains("family") && !cfg["family"].is_null()) family = get_family(cfg, "");

  IsotonicFit fit;
  Ranking order;
  if (!ranking_path.empty()) {
    order = read_ranking(ranking_path, n);
    fit = isotonic_mechanism(x, order);
  } else {
    const CoarseRanking blocks = read_blocks(blocks_path, n);
    fit = coarse_isotonic_mechanism(x, blocks);
    order = fit.order;
  }
  std::optional<Eigen::VectorXd> theta;
  if (family) theta = ranking_constrained_mle(*family, x, order).theta_hat;

  Result res;
  res.header = {"index", "raw_score", "adjusted_score"};
  if (theta) res.header.push_back("theta_hat");
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> row{std::to_string(i + 1), num(x[i]), num(fit.mu_hat[i])};
    if (theta) row.push_back(num((*theta)[i]));
    res.rows.push_back(std::move(row));
  }
  return res;
}

Result cmd_truthfulness(json& cfg) {
  const Family f = get_family(cfg, "binomial:10");
  const std::vector<double> mu_list = get_double_list(cfg, "mu", "8,7,6,4");
  const UtilityFn u = UtilityFn::parse(get_string(cfg, "utility", "relu_square"));
  cfg["utility"] = u.name();
  MonteCarloOptions opts;
  opts.scores_per_item = static_cast<int>(get_integer(cfg, "scores_per_item", 3));
  opts.trials = get_trials(cfg, 100000);
  opts.seed = get_seed(cfg);
  opts.threads = get_threads(cfg);
  const Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu_list.data(), static_cast<Eigen::Index>(mu_list.size()));
  const Ranking truth = truthful_ranking(mu);

  Result res;
  res.header = {"ranking", "mean", "std_error", "gap_to_best", "gap_std_error", "truthful"};
  for (const RankedUtility& r : rank_all_utilities(f, mu, u, opts)) {
    res.rows.push_back({join(r.ranking.one_based(), ';'), num(r.estimate.mean), num(r.estimate.std_error),
                        num(r.gap_to_best.mean), num(r.gap_to_best.std_error),
                        r.ranking == truth ? "true" : "false"});
  }
  return res;
}

Result cmd_estimation(json& cfg) {
  EstimationConfig ec;
  ec.family = get_family(cfg, "binomial:10");
  ec.n_grid = get_int_list(cfg, "n_grid", "10:200:10");
  const std::string gen = get_string(cfg, "generator", "ramp");
  if (gen == "ramp") {
    ec.generator = LinearRamp{get_double(cfg, "hi", 9.0), get_double(cfg, "lo", 3.0)};
  } else if (gen == "pool") {
    ec.generator = PoolResample{read_values(require_path(cfg, "pool"))};
  } else {
    throw ValidationError("generator must be \"ramp\" or \"pool\"");
  }
  ec.scores_per_item = static_cast<int>(get_integer(cfg, "scores_per_item", 3));
  ec.trials = get_trials(cfg, 1000);
  ec.seed = get_seed(cfg);
  ec.threads = get_threads(cfg);

  Result res;
  res.header = {"n", "mse_im", "mse_raw", "se_im", "se_raw", "se_gap"};
  for (const EstimationPoint& p : estimation_error_curve(ec)) {
    res.rows.push_back({std::to_string(p.n), num(p.mse_im), num(p.mse_raw), num(p.se_im), num(p.se_raw),
                        num(p.se_gap)});
  }
  return res;
}

json construction_to_json(const LowerBoundConstruction& lb, const LowerBoundCheck& check) {
  json j;
  j["family"] = family_to_json(lb.family);
  j["v_min"] = lb.bounds.v_min;
  j["v_max"] = lb.bounds.v_max;
  j["certificate"] = {{"v_tilde_min", lb.certificate.v_tilde_min},
                      {"v_tilde_max", lb.certificate.v_tilde_max},
                      {"c_int", lb.certificate.c_int},
                      {"c_var", lb.certificate.c_var},
                      {"sigma_sq", lb.certificate.sigma_sq}};
  j["n"] = lb.n;
  j["k"] = lb.k;
  j["c"] = lb.c;
  j["gamma"] = lb.gamma;
  j["block_sizes"] = lb.block_sizes;
  j["code_dimension"] = lb.basis.size();
  j["omega_size"] = lb.omega_size();
  j["attempts"] = lb.attempts;
  j["basis"] = lb.basis;
  j["checks"] = {{"min_hamming", check.min_hamming},
                 {"hamming_required", check.hamming_required},
                 {"min_sq_distance", check.min_sq_distance},
                 {"sq_distance_required", check.sq_distance_required},
                 {"max_kl", check.max_kl},
                 {"kl_limit", check.kl_limit},
                 {"kl_chain_bound", check.kl_chain_bound},
                 {"in_range", check.in_range},
                 {"ok", check.ok()}};
  return j;
}

Result cmd_minimax(json& cfg, const std::string& out_path, std::ostream& err) {
  const Family f = get_family(cfg, "binomial:10");
  const double default_hi = f.kind() == FamilyKind::Binomial ? f.parameter() : 0.0;
  const ScoreBounds bounds{get_double(cfg, "v_min", 0.0), get_double(cfg, "v_max", default_hi)};
  const std::vector<int> grid = get_int_list(cfg, "n_grid", "64,128,256,512,1024,2048,4096");
  const std::int64_t trials = get_trials(cfg, 500);
  const std::uint64_t seed = get_seed(cfg);
  const int spi = static_cast<int>(get_integer(cfg, "scores_per_item", 1));
  const unsigned threads = get_threads(cfg);
  const int construction_n = static_cast<int>(get_integer(cfg, "construction_n", 64));
  const double c = get_double(cfg, "c", 0.0);
  std::string construction_path = get_string(cfg, "construction", "");
  if (construction_path.empty() && !out_path.empty() && out_path != "-") {
    construction_path = (std::filesystem::path(out_path).parent_path() / "construction.json").string();
  }

  const LowerBoundConstruction lb = build_lower_bound(f, bounds, construction_n, c, seed);
  const LowerBoundCheck check = verify_lower_bound(lb);
  const RateReport rate = rate_check(f, bounds, grid, trials, seed, spi, threads);

  json cj = construction_to_json(lb, check);
  cj["rate"] = {{"slope", rate.slope}, {"intercept", rate.intercept}};
  if (!construction_path.empty()) write_json_file(construction_path, cj);
  err << fmt::format("slope {:.6f} (target 1/3), construction {}\n", rate.slope, check.ok() ? "verified" : "FAILED");

  Result res;
  res.header = {"n", "risk", "std_error"};
  for (const RatePoint& p : rate.points) res.rows.push_back({std::to_string(p.n), num(p.risk), num(p.std_error)});
  res.report["slope"] = rate.slope;
  res.report["intercept"] = rate.intercept;
  res.report["construction_ok"] = check.ok();
  return res;
}

Result cmd_icml(json& cfg, std::ostream& err) {
  get_trials(cfg, 1);
  const std::uint64_t seed = get_seed(cfg);
  const auto reviews = read_reviews(require_path(cfg, "reviews"));
  const auto authors = read_authors(require_path(cfg, "authors"));
  const SurrogateReport rep = surrogate_eval(reviews, authors, seed);
  for (const auto& line : rep.log) err << line << '\n';

  Result res;
  res.header = {"n", "sample_size", "mse_raw", "mse_im", "improvement"};
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); };
  for (const SurrogateRow& r : rep.rows) {
    res.rows.push_back({std::to_string(r.n), std::to_string(r.sample_size), opt(r.mse_raw), opt(r.mse_im),
                        opt(r.improvement)});
  }
  res.report = {{"submissions_used", rep.submissions_used},
                {"submissions_skipped", rep.submissions_skipped},
                {"authors_used", rep.authors_used},
                {"authors_malformed", rep.authors_malformed},
                {"authors_uninformative", rep.authors_uninformative},
                {"authors_too_few", rep.authors_too_few}};
  json ties = json::array();
  for (const TieBreak& t : rep.tie_breaks) {
    ties.push_back({{"submission_id", t.submission_id}, {"chosen_review", t.chosen_review}, {"candidates", t.candidates}});
  }
  res.report["tie_breaks"] = ties;
  return res;
}

Result cmd_synthetic(json& cfg) {
  const std::vector<int> grid = get_int_list(cfg, "n_grid", "2:17");
  const std::int64_t trials = get_trials(cfg, 1000);
  const std::uint64_t seed = get_seed(cfg);
  const unsigned threads = get_threads(cfg);
  std::vector<double> pool;
  const std::string pool_path = get_string(cfg, "pool", "");
  if (!pool_path.empty()) {
    pool = read_values(pool_path);
  } else {
    const std::vector<double> spec = get_double_list(cfg, "uniform_pool", "3,8,1000");
    if (spec.size() != 3 || spec[2] < 1 || spec[2] != std::floor(spec[2])) {
      throw ValidationError("uniform_pool must be lo,hi,size");
    }
    pool = uniform_pool(static_cast<std::size_t>(spec[2]), spec[0], spec[1], seed);
  }
  Result res;
  res.header = {"n", "mean_mse_im", "std_mse_im", "mean_mse_raw", "std_mse_raw", "improvement"};
  for (const SyntheticRow& r : synthetic_icml_study(pool, grid, trials, seed, threads)) {
    res.rows.push_back({std::to_string(r.n), num(r.mean_mse_im), num(r.std_mse_im), num(r.mean_mse_raw),
                        num(r.std_mse_raw), num(r.improvement)});
  }
  return res;
}

Result cmd_check_majorization(json& cfg) {
  get_trials(cfg, 1);
  get_seed(cfg);
  const std::vector<double> a = read_values(require_path(cfg, "a"));
  const std::vector<double> b = read_values(require_path(cfg, "b"));
  const std::string mode_name = get_string(cfg, "mode", "standard");
  MajorizationMode mode;
  if (mode_name == "standard") {
    mode = MajorizationMode::Standard;
  } else if (mode_name == "natural") {
    mode = MajorizationMode::NaturalOrder;
  } else if (mode_name == "weak") {
    mode = MajorizationMode::Weak;
  } else {
    throw ValidationError("mode must be standard, natural or weak");
  }
  if (a.size() != b.size()) throw ValidationError("check-majorization: vectors differ in length");
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
  Result res;
  res.verdict = check_majorization(va, vb, mode) ? "true" : "false";
  return res;
}

// Runs a command on an effective config and writes its outputs.
void execute(const std::string& command, json cfg, std::ostream& out, std::ostream& err) {
  const std::string format = get_string(cfg, "format", "csv");
  if (format != "csv" && format != "json") throw ValidationError("format must be csv or json");
  const std::string out_path = get_string(cfg, "out", "-");

  Result res;
  if (command == "fit") {
    res = cmd_fit(cfg);
  } else if (command == "truthfulness") {
    res = cmd_truthfulness(cfg);
  } else if (command == "estimation") {
    res = cmd_estimation(cfg);
  } else if (command == "minimax") {
    res = cmd_minimax(cfg, out_path, err);
  } else if (command == "icml") {
    res = cmd_icml(cfg, err);
  } else if (command == "synthetic") {
    res = cmd_synthetic(cfg);
  } else if (command == "check-majorization") {
    res = cmd_check_majorization(cfg);
  } else {
    throw ValidationError("unknown command \"" + command + "\"");
  }

  if (out_path == "-") {
    emit(res, format, out);
    return;
  }
  {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ValidationError(out_path + ": cannot write");
    emit(res, format, f);
  }
  json sidecar = {{"command", command}, {"config", cfg}};
  if (!res.report.empty()) sidecar["report"] = res.report;
  write_json_file(out_path + ".json", sidecar);
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(path + ": cannot open file");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Flags are kept as strings and converted into config values only when given,
// so that a --config file supplies everything the command line leaves out.
struct FlagSet {
  struct Flag {
    std::string key;
    CLI::Option* option;
    std::string* value;
    std::function<json(const std::string&)> convert;
  };
  std::list<std::string> storage;
  std::vector<Flag> flags;

  void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help,
           std::function<json(const std::string&)> convert) {
    storage.emplace_back();
    std::string* v = &storage.back();
    flags.push_back({key, app->add_option(name, *v, help), v, std::move(convert)});
  }

  void apply(json& cfg) const {
    for (const auto& f : flags) {
      if (f.option->count() > 0) cfg[f.key] = f.convert(*f.value);
    }
  }
};

json as_string(const std::string& s) { return s; }
json as_integer(const std::string& s) { return csv::parse_integer(s); }
json as_double(const std::string& s) { return csv::parse_double(s); }
json as_seed(const std::string& s) {
  const long long v = csv::parse_integer(s);
  if (v < 0) throw ValidationError("--seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return 2;
  if (dynamic_cast<const json::exception*>(&e) != nullptr) return 2;
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isotonic Mechanism toolkit", "isomech"};
  app.require_subcommand(1);
  std::map<std::string, FlagSet> flagsets;
  std::map<std::string, std::string> config_paths;

  struct Spec {
    const char* name;
    const char* help;
  };
  const std::vector<Spec> commands = {
      {"fit", "Adjust scores under a ranking or block partition"},
      {"truthfulness", "Expected utility of every ranking"},
      {"estimation", "Estimation error of adjusted and raw scores across n"},
      {"minimax", "Risk growth rate and the lower-bound packing"},
      {"icml", "Surrogate-truth evaluation on review data"},
      {"synthetic", "Resampled-pool study of adjusted vs raw scores"},
      {"check-majorization", "Majorization verdict for two vectors"},
  };
  for (const Spec& s : commands) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    FlagSet& fs = flagsets[s.name];
    sub->add_option("--config", config_paths[s.name], "JSON config; flags override its values");
    fs.add(sub, "--seed", "seed", "Random seed (fallback: ISOMECH_SEED, then 0)", as_seed);
    fs.add(sub, "--trials", "trials", "Monte-Carlo trials", as_integer);
    fs.add(sub, "--threads", "threads", "Worker threads (0 = all cores)", as_integer);
    fs.add(sub, "--format", "format", "csv or json", as_string);
    fs.add(sub, "--out", "out", "Output file; a <out>.json replay sidecar is written next to it", as_string);
    const std::string name = s.name;
    if (name != "icml" && name != "check-majorization" && name != "synthetic") {
      fs.add(sub, "--family", "family", "gaussian[:var], binomial:m, poisson, gamma:m", as_string);
    }
    if (name == "fit") {
      fs.add(sub, "--scores", "scores", "CSV with index,score", as_string);
      fs.add(sub, "--column", "column", "Score column to read (default score)", as_string);
      fs.add(sub, "--ranking", "ranking", "CSV with rank,index", as_string);
      fs.add(sub, "--blocks", "blocks", "CSV with index,block", as_string);
    } else if (name == "truthfulness") {
      fs.add(sub, "--mu", "mu", "True means, comma separated", as_string);
      fs.add(sub, "--utility", "utility", "relu_square, identity, exp:<a>, hinge:<t>", as_string);
      fs.add(sub, "--scores-per-item", "scores_per_item", "Reviews averaged per item", as_integer);
    } else if (name == "estimation") {
      fs.add(sub, "--n-grid", "n_grid", "Sizes: a,b,c or start:stop:step", as_string);
      fs.add(sub, "--generator", "generator", "ramp or pool", as_string);
      fs.add(sub, "--hi", "hi", "Ramp top mean", as_double);
      fs.add(sub, "--lo", "lo", "Ramp bottom mean", as_double);
      fs.add(sub, "--pool", "pool", "One-column CSV of means to resample", as_string);
      fs.add(sub, "--scores-per-item", "scores_per_item", "Reviews averaged per item", as_integer);
    } else if (name == "minimax") {
      fs.add(sub, "--v-min", "v_min", "Lower score bound", as_double);
      fs.add(sub, "--v-max", "v_max", "Upper score bound", as_double);
      fs.add(sub, "--n-grid", "n_grid", "Sizes: a,b,c or start:stop:step", as_string);
      fs.add(sub, "--scores-per-item", "scores_per_item", "Reviews averaged per item", as_integer);
      fs.add(sub, "--construction-n", "construction_n", "n for the packing construction", as_integer);
      fs.add(sub, "--c", "c", "Packing constant (0 = C_var/16)", as_double);
      fs.add(sub, "--construction", "construction", "Path for construction.json", as_string);
    } else if (name == "icml") {
      fs.add(sub, "--reviews", "reviews", "CSV with submission_id,score,confidence", as_string);
      fs.add(sub, "--authors", "authors", "CSV with author_id,submission_ids,ranking", as_string);
    } else if (name == "synthetic") {
      fs.add(sub, "--pool", "pool", "One-column CSV score pool", as_string);
      fs.add(sub, "--uniform-pool", "uniform_pool", "lo,hi,size for a generated pool", as_string);
      fs.add(sub, "--n-grid", "n_grid", "Sizes: a,b,c or start:stop:step", as_string);
    } else if (name == "check-majorization") {
      fs.add(sub, "--a", "a", "First vector CSV", as_string);
      fs.add(sub, "--b", "b", "Second vector CSV", as_string);
      fs.add(sub, "--mode", "mode", "standard, natural or weak", as_string);
    }
  }
  CLI::App* replay = app.add_subcommand("replay", "Rerun a command from its JSON sidecar");
  std::string sidecar_path, replay_out;
  replay->add_option("sidecar", sidecar_path, "Sidecar written by an earlier run")->required();
  replay->add_option("--out", replay_out, "Write here instead of the recorded output path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (replay->parsed()) {
      const json sidecar = load_json(sidecar_path);
      if (!sidecar.contains("command") || !sidecar["command"].is_string() || !sidecar.contains("config")) {
        throw ValidationError(sidecar_path + ": not a replay sidecar");
      }
      json cfg = sidecar["config"];
      if (!replay_out.empty()) cfg["out"] = replay_out;
      execute(sidecar["command"].get<std::string>(), cfg, out, err);
      return 0;
    }
    for (const Spec& s : commands) {
      CLI::App* sub = app.get_subcommand(s.name);
      if (!sub->parsed()) continue;
      json cfg = json::object();
      if (!config_paths[s.name].empty()) {
        cfg = load_json(config_paths[s.name]);
        if (cfg.contains("config") && cfg.contains("command")) cfg = cfg["config"];
        if (!cfg.is_object()) throw ValidationError(config_paths[s.name] + ": config must be a JSON object");
      }
      flagsets[s.name].apply(cfg);
      execute(s.name, cfg, out, err);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace isomech
