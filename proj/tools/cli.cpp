// Copyright 2026 The lossbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "box_records.hpp"
#include "lossbench/bev_geometry.hpp"
#include "lossbench/detection_metrics.hpp"
#include "lossbench/grid_io.hpp"
#include "lossbench/io_error.hpp"
#include "lossbench/loss_theory.hpp"
#include "lossbench/number_format.hpp"
#include "lossbench/sgd_lab.hpp"
#include "lossbench/synthetic_bench.hpp"
#include "nlohmann/json.hpp"
#include "svg_plot.hpp"

#ifndef LOSSBENCH_VERSION
#define LOSSBENCH_VERSION "0.0.0"
#endif

namespace lossbench::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Flag values we reject after CLI11 accepted them.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  bool deterministic = false;
  unsigned threads = 0;
  std::string config;
};

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double parse_number(const std::string& token, const std::string& flag) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError("--" + flag + ": '" + token + "' is not a number");
  }
  return v;
}

// Comma-separated numbers; an item "lo:hi:n" expands to n evenly spaced
// values from lo to hi inclusive.
std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      values.push_back(parse_number(item, flag));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("--" + flag + ": range needs lo:hi:n");
    const double lo = parse_number(item.substr(0, c1), flag);
    const double hi = parse_number(item.substr(c1 + 1, c2 - c1 - 1), flag);
    const double n = parse_number(item.substr(c2 + 1), flag);
    if (n < 1 || n != std::floor(n)) throw UsageError("--" + flag + ": bad point count");
    if (n == 1) {
      values.push_back(lo);
      continue;
    }
    for (int i = 0; i < static_cast<int>(n); ++i) {
      values.push_back(lo + (hi - lo) * i / (n - 1.0));
    }
  }
  if (values.empty()) throw UsageError("--" + flag + ": empty list");
  return values;
}

// Minimal RFC-4180 field splitter for the small auxiliary CSV inputs.
std::vector<std::string> parse_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  fields.push_back(trim(field));
  return fields;
}

// Non-comment, non-blank CSV rows with their line numbers.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv_file(
    const fs::path& path) {
  // Line errors from the splitter get the file name attached here.
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      rows.emplace_back(line_no, parse_csv_line(line, line_no));
    } catch (const ParseError& e) {
      throw ParseError(e.message(), e.line(), path.string());
    }
  }
  return rows;
}

// ---------------------------------------------------------------- output

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string fixed4(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
  return std::string(buf, res.ptr);
}

template <typename... Ts>
void csv_row(std::ostream& os, const Ts&... fields) {
  bool first = true;
  ((os << (first ? "" : ",") << csv_field(fields), first = false), ...);
  os << '\n';
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw OutputError("cannot write '" + path + "'");
    path_ = path;
  }
  std::ostream& stream() { return path_.empty() ? fallback_ : file_; }
  bool is_file() const { return !path_.empty(); }
  void close() {
    if (path_.empty()) {
      fallback_.flush();
      return;
    }
    file_.flush();
    if (!file_) throw OutputError("write failed for '" + path_ + "'");
    file_.close();
  }

 private:
  std::ostream& fallback_;
  std::ofstream file_;
  std::string path_;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json typed_value(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  const char* end = s.data() + s.size();
  if (s.find_first_of(".eEn") == std::string::npos) {
    long long i = 0;
    const auto r = std::from_chars(s.data(), end, i);
    if (r.ec == std::errc() && r.ptr == end) return i;
  }
  double d = 0.0;
  const auto r = std::from_chars(s.data(), end, d);
  if (r.ec == std::errc() && r.ptr == end && std::isfinite(d)) return d;
  return s;
}

// The resolved command line as JSON; feeding it back through --config
// reproduces the run.
Json run_config(const CLI::App& sub, const Globals& g) {
  Json flags = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->get_type_size() == 0) {
      flags[name] = opt->count() > 0;
      continue;
    }
    const std::string value = opt->count() ? opt->as<std::string>() : opt->get_default_str();
    if (!value.empty()) flags[name] = typed_value(value);
  }
  Json config;
  config["command"] = sub.get_name();
  config["seed"] = g.seed;
  config["format"] = g.format;
  if (!g.out.empty()) config["out"] = g.out;
  config["flags"] = flags;
  return config;
}

struct Context {
  Globals globals;
  Json config;
  std::ostream& out;
  std::ostream& err;

  std::vector<std::string> header(const std::vector<std::string>& warnings = {}) const {
    std::vector<std::string> lines{"lossbench " + version(),
                                   "run_config: " + config.dump()};
    if (!globals.deterministic) lines.push_back("timestamp: " + utc_timestamp());
    for (const auto& w : warnings) lines.push_back("warning: " + w);
    return lines;
  }

  void write_header(std::ostream& os, const std::vector<std::string>& warnings = {}) const {
    for (const auto& line : header(warnings)) os << "# " << line << '\n';
  }

  // Human summary: plain on stdout when the data went to a file, otherwise
  // appended to the stream as comment lines.
  void write_summary(const Output& output, std::ostream& os,
                     const std::vector<std::string>& lines) const {
    for (const auto& line : lines) {
      if (output.is_file()) {
        out << line << '\n';
      } else {
        os << "# " << line << '\n';
      }
    }
  }

  bool wants_svg() const { return globals.format == "csv+svg"; }
};

fs::path svg_path_for(const std::string& out) {
  if (out.empty()) throw UsageError("--format csv+svg needs --out");
  fs::path p(out);
  if (p.extension() == ".svg") throw UsageError("--out must not end in .svg with csv+svg");
  return p.replace_extension(".svg");
}

void write_svg(const Context& ctx, const std::vector<Series>& series, PlotSpec spec,
               const std::vector<std::string>& warnings = {}) {
  const fs::path path = svg_path_for(ctx.globals.out);
  spec.header_lines = ctx.header(warnings);
  std::ofstream svg(path, std::ios::binary | std::ios::trunc);
  if (!svg) throw OutputError("cannot write '" + path.string() + "'");
  svg << render_line_plot(series, spec);
  svg.flush();
  if (!svg) throw OutputError("write failed for '" + path.string() + "'");
}

SgdMode parse_mode(const std::string& mode) {
  if (mode == "idealized") return SgdMode::kIdealized;
  if (mode == "literal") return SgdMode::kLiteral;
  throw UsageError("--mode must be idealized or literal");
}

StepSchedule parse_schedule(const std::string& kind, double scale) {
  StepSchedule s;
  s.scale = scale;
  if (kind == "inverse") s.kind = StepSchedule::Kind::kInverseJ;
  else if (kind == "constant") s.kind = StepSchedule::Kind::kConstant;
  else throw UsageError("--schedule must be inverse or constant");
  return s;
}

// ---------------------------------------------------------------- commands

struct VarianceOpts {
  std::string loss = "l1,l2,dice";
  std::string length = "12";
  std::string sigma = "1";
  double beta = 1.0;
  std::int64_t samples = 1'000'000;
};

int cmd_variance(const Context& ctx, const VarianceOpts& o) {
  const auto losses = split_list(o.loss);
  const auto lengths = parse_number_list(o.length, "length");
  const auto sigmas = parse_number_list(o.sigma, "sigma");
  if (losses.empty()) throw UsageError("--loss: empty list");
  if (o.samples < 2) throw UsageError("--samples must be >= 2");

  struct Row {
    std::string loss, length, sigma;
    std::optional<double> closed;
    VarianceEstimate est;
  };
  std::vector<Row> rows;
  for (const std::string& name : losses) {
    const bool dice = name == "dice";
    for (std::size_t li = 0; li < (dice ? lengths.size() : 1); ++li) {
      const LossKind kind = LossKind::parse(name, dice ? lengths[li] : o.beta);
      for (double sigma : sigmas) {
        const NoiseModel noise(sigma);
        rows.push_back({name, dice ? fmt(lengths[li]) : "", fmt(sigma),
                        closed_form_variance(kind, noise),
                        empirical_gradient_variance(kind, sigma, o.samples,
                                                    ctx.globals.seed)});
      }
    }
  }
  Output output(ctx.globals.out, ctx.out);
  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "loss", "length", "sigma", "var_closed", "var_empirical", "std_err");
  for (const Row& r : rows) {
    csv_row(os, r.loss, r.length, r.sigma, fmt(r.closed), fmt(r.est.variance),
            fmt(r.est.std_error));
  }
  output.close();
  return kExitOk;
}

struct ThresholdOpts {
  std::string length = "4,12";
};

int cmd_threshold(const Context& ctx, const ThresholdOpts& o) {
  std::vector<ThresholdResult> results;
  for (double length : parse_number_list(o.length, "length")) {
    if (!(length > 0.0)) throw UsageError("--length must be > 0");
    results.push_back(sigma_c(length));
  }
  Output output(ctx.globals.out, ctx.out);
  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "length", "sigma_m", "sigma_l1", "sigma_c", "solver_residual", "iterations");
  for (const auto& r : results) {
    csv_row(os, fmt(r.length), fmt(r.sigma_m), fmt(r.sigma_l1), fmt(r.sigma_c),
            fmt(r.solver_residual), std::to_string(r.iterations));
  }
  output.close();
  return kExitOk;
}

std::vector<SweepLoss> parse_sweep_losses(const std::string& text, double beta) {
  std::vector<SweepLoss> losses;
  for (const std::string& name : split_list(text)) {
    const LossKind kind = LossKind::parse(name, name == "smoothl1" ? beta : 1.0);
    losses.push_back({kind.family(), beta});
  }
  if (losses.empty()) throw UsageError("--losses: empty list");
  return losses;
}

struct SweepOpts {
  std::string lengths = "12";
  std::string sigmas = "0.05:2:20";
  std::string losses = "l1,l2,dice";
  double beta = 1.0;
  int trials = 200;
  std::int64_t steps = 1000;
  int dim = 8;
  std::string mode = "idealized";
  std::int64_t samples = 200'000;
  bool log_y = false;
};

int cmd_sweep(const Context& ctx, const SweepOpts& o) {
  const auto lengths = parse_number_list(o.lengths, "lengths");
  const auto sigmas = parse_number_list(o.sigmas, "sigmas");
  const auto losses = parse_sweep_losses(o.losses, o.beta);
  SgdConfig t;
  t.dim = o.dim;
  t.steps = o.steps;
  t.trials = o.trials;
  t.mode = parse_mode(o.mode);
  t.base_seed = ctx.globals.seed;
  t.variance_samples = o.samples;
  t.threads = ctx.globals.threads;
  t.validate();
  if (ctx.wants_svg()) svg_path_for(ctx.globals.out);

  Output output(ctx.globals.out, ctx.out);
  const auto rows = sweep(lengths, sigmas, losses, t);
  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "loss", "length", "sigma", "var_closed", "var_empirical", "mean_dev", "std_err");
  for (const SweepRow& r : rows) {
    csv_row(os, r.loss.name(), fmt(r.length), fmt(r.sigma), fmt(r.var_closed),
            fmt(r.var_empirical), fmt(r.mean_deviation), fmt(r.std_error));
  }
  output.close();

  if (ctx.wants_svg()) {
    std::vector<Series> series;
    std::map<std::string, std::size_t> index;
    for (const SweepRow& r : rows) {
      const std::string label = r.loss.name() + " l=" + fmt(r.length);
      auto [it, inserted] = index.try_emplace(label, series.size());
      if (inserted) series.push_back({label, {}});
      series[it->second].points.emplace_back(r.sigma, r.var_closed.value_or(r.var_empirical));
    }
    write_svg(ctx, series, {"Gradient variance vs noise", "sigma (m)", "Var(eps)", o.log_y, {}});
  }
  return kExitOk;
}

struct SgdOpts {
  std::string loss = "l2";
  double length = 12.0;
  double beta = 1.0;
  double sigma = 1.0;
  int dim = 8;
  std::int64_t steps = 5000;
  int trials = 2000;
  std::string mode = "idealized";
  std::string schedule = "inverse";
  double scale = 1.0;
  std::int64_t samples = 200'000;
};

int cmd_sgd(const Context& ctx, const SgdOpts& o) {
  SgdConfig c;
  c.loss = LossKind::parse(o.loss, o.loss == "dice" ? o.length : o.beta);
  c.sigma = o.sigma;
  c.dim = o.dim;
  c.steps = o.steps;
  c.trials = o.trials;
  c.mode = parse_mode(o.mode);
  c.schedule = parse_schedule(o.schedule, o.scale);
  c.base_seed = ctx.globals.seed;
  c.variance_samples = o.samples;
  c.threads = ctx.globals.threads;
  c.validate();

  Output output(ctx.globals.out, ctx.out);
  const EnsembleStats stats = run_ensemble(c);
  const auto closed = closed_form_variance(c.loss, NoiseModel(c.sigma));
  const double predicted = c.schedule.cumulative_square_sum(c.steps) * c.dim *
                           closed.value_or(stats.empirical_grad_variance);
  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "loss", "length", "sigma", "dim", "steps", "trials", "mode", "var_closed",
          "var_empirical", "mean_dev", "std_err", "predicted_dev");
  csv_row(os, c.loss.name(), o.loss == "dice" ? fmt(o.length) : "", fmt(c.sigma),
          std::to_string(c.dim), std::to_string(c.steps), std::to_string(c.trials), o.mode,
          fmt(closed), fmt(stats.empirical_grad_variance), fmt(stats.mean_deviation_sq),
          fmt(stats.std_error), fmt(predicted));
  output.close();
  return kExitOk;
}

struct DiceAdvantageOpts {
  std::string length = "12";
  std::string sigma = "0.5";
  int seeds = 20;
  int objects = 10'000;
  int dim = 16;
  std::int64_t steps = 5000;
  double z_min = 5.0;
  double z_max = 60.0;
  bool full_box_iou = false;
};

int cmd_dice_advantage(const Context& ctx, const DiceAdvantageOpts& o) {
  const auto lengths = parse_number_list(o.length, "length");
  const auto sigmas = parse_number_list(o.sigma, "sigma");
  DiceAdvantageConfig c;
  c.lengths = lengths;
  c.n_seeds = o.seeds;
  c.objects = o.objects;
  c.z_min = o.z_min;
  c.z_max = o.z_max;
  c.seed = ctx.globals.seed;
  c.full_box_iou = o.full_box_iou;
  c.sgd.dim = o.dim;
  c.sgd.steps = o.steps;
  c.sgd.threads = ctx.globals.threads;
  c.sgd.validate();
  if (ctx.wants_svg()) svg_path_for(ctx.globals.out);

  std::vector<std::string> warnings;
  for (double length : lengths) {
    if (!(length > 0.0)) throw UsageError("--length must be > 0");
    const double sc = sigma_c(length).sigma_c;
    for (double sigma : sigmas) {
      if (sigma < sc) {
        warnings.push_back("precondition sigma >= sigma_c not met for length=" + fmt(length) +
                           " sigma=" + fmt(sigma) + " (sigma_c=" + fmt(sc) + ")");
      }
    }
  }

  Output output(ctx.globals.out, ctx.out);
  std::vector<DiceAdvantageReport> reports;
  for (double sigma : sigmas) {
    c.sigma = sigma;
    reports.push_back(dice_advantage_experiment(c));
  }

  std::ostream& os = output.stream();
  ctx.write_header(os, warnings);
  csv_row(os, "loss", "length", "sigma", "seed", "ap50", "ap25", "mean_abs_err");
  for (const DiceAdvantageReport& r : reports) {
    for (const SeedOutcome& s : r.seeds) {
      csv_row(os, s.loss, fmt(s.length), fmt(r.sigma), std::to_string(s.seed), fmt(s.ap50),
              fmt(s.ap25), fmt(s.mean_abs_err));
    }
  }

  std::vector<std::string> summary;
  for (const DiceAdvantageReport& r : reports) {
    for (const LengthReport& lr : r.lengths) {
      summary.push_back("length " + fmt(lr.length) + " sigma " + fmt(r.sigma) + ": sigma_c " +
                        fmt(lr.threshold.sigma_c) +
                        (lr.precondition_met ? " (precondition met)" : " (precondition NOT met)"));
      std::ostringstream head;
      head << "  " << std::left << std::setw(6) << "loss" << std::setw(12) << "mean_ap50"
           << std::setw(10) << "se" << std::setw(12) << "mean_ap25" << "mean_abs_err";
      summary.push_back(head.str());
      for (const LossSummary& ls : lr.losses) {
        std::ostringstream line;
        line << "  " << std::left << std::setw(6) << ls.loss << std::setw(12)
             << fixed4(ls.mean_ap50) << std::setw(10) << fixed4(ls.ap50_std_error)
             << std::setw(12) << fixed4(ls.mean_ap25) << fixed4(ls.mean_abs_err);
        summary.push_back(line.str());
      }
      for (const DiceComparison& dc : lr.comparisons) {
        summary.push_back("  dice vs " + dc.versus + ": win rate " + fixed4(dc.win_rate) +
                          ", mean ap50 difference " + fixed4(dc.mean_ap50_difference));
      }
      summary.push_back("  dice beats both: " + fixed4(lr.win_rate_both));
    }
  }
  ctx.write_summary(output, os, summary);
  output.close();

  if (ctx.wants_svg()) {
    std::vector<Series> series;
    std::map<std::string, std::size_t> index;
    for (const DiceAdvantageReport& r : reports) {
      for (const LengthReport& lr : r.lengths) {
        for (const LossSummary& ls : lr.losses) {
          const std::string label = ls.loss + " l=" + fmt(lr.length);
          auto [it, inserted] = index.try_emplace(label, series.size());
          if (inserted) series.push_back({label, {}});
          series[it->second].points.emplace_back(r.sigma, ls.mean_ap50);
        }
      }
    }
    write_svg(ctx, series, {"AP3D@0.5 vs noise", "sigma (m)", "mean AP3D@0.5", false, {}},
              warnings);
  }
  return kExitOk;
}

std::vector<LengthBin> parse_bins(const std::string& text) {
  std::vector<LengthBin> bins{LengthBin{0.0, std::numeric_limits<double>::infinity(), true}};
  if (trim(text).empty() || text == "none") return bins;
  const auto edges = parse_number_list(text, "bins");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i] < 0.0 || (i && edges[i] <= edges[i - 1])) {
      throw UsageError("--bins: edges must be non-negative and increasing");
    }
    const double hi = i + 1 < edges.size() ? edges[i + 1] : std::numeric_limits<double>::infinity();
    bins.push_back({edges[i], hi, false});
  }
  return bins;
}

std::map<std::string, std::string> load_groups(const std::string& path) {
  std::map<std::string, std::string> groups;
  bool first = true;
  for (const auto& [line, fields] : read_csv_file(path)) {
    if (first && fields.size() == 2 && fields[0] == "category" && fields[1] == "group") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected two columns category,group", line, path);
    }
    groups[fields[0]] = fields[1];
  }
  return groups;
}

struct EvalOpts {
  std::string pred;
  std::string gt;
  std::string iou = "0.5,0.25";
  std::string bins = "0,5,10,15";
  std::string groups;
  std::string metric = "iou3d";
};

int cmd_eval(const Context& ctx, const EvalOpts& o) {
  EvalOptions opt;
  opt.thresholds = parse_number_list(o.iou, "iou");
  for (double t : opt.thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw UsageError("--iou thresholds must lie in (0, 1]");
  }
  opt.bins = parse_bins(o.bins);
  if (o.metric == "iou3d") opt.iou = iou3d;
  else if (o.metric == "bev") opt.iou = bev_iou;
  else if (o.metric == "depth") opt.iou = depth_ray_iou;
  else throw UsageError("--metric must be iou3d, bev or depth");

  Output output(ctx.globals.out, ctx.out);
  if (!o.groups.empty()) opt.groups = load_groups(o.groups);
  const auto preds = load_box_records(o.pred);
  const auto gts = load_box_records(o.gt);
  const auto frames = assemble_frames(preds, gts);
  const ApReport report = evaluate(frames, opt);

  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "category", "threshold", "bin", "ap", "n_gt", "n_pred");
  for (const ApEntry& e : report.entries) {
    csv_row(os, e.category, fmt(e.threshold), e.bin, fmt(e.curve.ap), std::to_string(e.n_gt),
            std::to_string(e.n_pred));
  }
  auto aggregate_counts = [&](const ApAggregate& a, const std::string& group) {
    std::size_t n_gt = 0, n_pred = 0;
    for (const ApEntry& e : report.entries) {
      if (e.threshold != a.threshold || e.bin != a.bin || e.n_gt == 0) continue;
      if (!group.empty()) {
        const auto it = opt.groups.find(e.category);
        if (it == opt.groups.end() || it->second != group) continue;
      }
      n_gt += e.n_gt;
      n_pred += e.n_pred;
    }
    return std::pair{n_gt, n_pred};
  };
  for (const ApAggregate& a : report.mean_ap) {
    const auto [n_gt, n_pred] = aggregate_counts(a, "");
    csv_row(os, "mAP", fmt(a.threshold), a.bin, fmt(a.ap), std::to_string(n_gt),
            std::to_string(n_pred));
  }
  for (const ApAggregate& a : report.group_ap) {
    const auto [n_gt, n_pred] = aggregate_counts(a, a.name);
    csv_row(os, "group:" + a.name, fmt(a.threshold), a.bin, fmt(a.ap), std::to_string(n_gt),
            std::to_string(n_pred));
  }

  // One table per threshold: rows are categories, columns are bins.
  std::vector<std::string> summary;
  std::vector<std::string> categories;
  for (const ApEntry& e : report.entries) {
    if (std::find(categories.begin(), categories.end(), e.category) == categories.end()) {
      categories.push_back(e.category);
    }
  }
  for (double t : opt.thresholds) {
    summary.push_back("AP@" + fmt(t));
    std::ostringstream head;
    head << "  " << std::left << std::setw(14) << "category";
    for (const LengthBin& b : opt.bins) head << std::setw(10) << b.label();
    summary.push_back(head.str());
    auto row = [&](const std::string& name, auto&& lookup) {
      std::ostringstream line;
      line << "  " << std::left << std::setw(14) << name;
      for (const LengthBin& b : opt.bins) {
        const std::optional<double> ap = lookup(b.label());
        line << std::setw(10) << (ap ? fixed4(*ap) : "-");
      }
      summary.push_back(line.str());
    };
    for (const std::string& c : categories) {
      row(c, [&](const std::string& bin) -> std::optional<double> {
        const ApEntry* e = report.find(c, t, bin);
        if (!e || e->n_gt == 0) return std::nullopt;
        return e->curve.ap;
      });
    }
    row("mAP", [&](const std::string& bin) -> std::optional<double> {
      const ApAggregate* a = report.find_mean(t, bin);
      if (!a) return std::nullopt;
      return a->ap;
    });
  }
  ctx.write_summary(output, os, summary);
  output.close();
  return kExitOk;
}

struct NmsOpts {
  std::string input;
  double radius = 4.0;
};

int cmd_nms(const Context& ctx, const NmsOpts& o) {
  if (!(o.radius > 0.0)) throw UsageError("--radius must be > 0");
  Output output(ctx.globals.out, ctx.out);
  const auto records = load_box_records(o.input);
  std::vector<std::string> frame_order;
  std::map<std::string, std::vector<std::size_t>> by_frame;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].box.score) throw ParseError("nms input needs scored boxes", records[i].line, o.input);
    auto [it, inserted] = by_frame.try_emplace(records[i].frame);
    if (inserted) frame_order.push_back(records[i].frame);
    it->second.push_back(i);
  }

  auto same_box = [](const Box3D& a, const Box3D& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z && a.l == b.l && a.w == b.w && a.h == b.h &&
           a.yaw == b.yaw && a.category == b.category && a.score == b.score;
  };
  std::vector<std::size_t> kept;
  for (const std::string& frame : frame_order) {
    const auto& idx = by_frame[frame];
    std::vector<Box3D> boxes;
    for (std::size_t i : idx) boxes.push_back(records[i].box);
    std::vector<bool> used(idx.size(), false);
    // Survivors are boxes from the input; map each back to its first unused
    // identical record so unknown keys survive the round trip.
    for (const Box3D& b : center_nms(boxes, o.radius)) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (!used[k] && same_box(boxes[k], b)) {
          used[k] = true;
          kept.push_back(idx[k]);
          break;
        }
      }
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return *records[a].box.score > *records[b].box.score;
  });

  std::ostream& os = output.stream();
  ctx.write_header(os);
  for (std::size_t i : kept) write_box_record(os, records[i]);
  output.close();
  return kExitOk;
}

struct RasterizeOpts {
  std::string input;
  std::string frame;
  std::string category;
  std::string source = "all";
  std::size_t rows = 200;
  std::size_t cols = 200;
  double x_min = -40.0;
  double x_max = 40.0;
  double z_min = 0.0;
  double z_max = 80.0;
};

int cmd_rasterize(const Context& ctx, const RasterizeOpts& o) {
  if (o.source != "all" && o.source != "pred" && o.source != "gt") {
    throw UsageError("--source must be all, pred or gt");
  }
  const BevGrid grid_template(o.rows, o.cols, GridExtent{o.x_min, o.x_max, o.z_min, o.z_max});
  Output output(ctx.globals.out, ctx.out);
  const auto records = load_box_records(o.input);

  std::set<std::string> frames;
  for (const BoxRecord& r : records) frames.insert(r.frame);
  if (o.frame.empty() && frames.size() > 1) {
    throw UsageError("input holds " + std::to_string(frames.size()) +
                     " frames; choose one with --frame");
  }
  std::vector<Box3D> boxes;
  for (const BoxRecord& r : records) {
    if (!o.frame.empty() && r.frame != o.frame) continue;
    if (!o.category.empty() && r.box.category != o.category) continue;
    if (o.source == "pred" && !r.box.score) continue;
    if (o.source == "gt" && r.box.score) continue;
    boxes.push_back(r.box);
  }
  const BevGrid grid = rasterize(boxes, grid_template);

  std::ostream& os = output.stream();
  if (fs::path(ctx.globals.out).extension() == ".bevg") {
    write_grid_binary(os, grid);
  } else {
    ctx.write_header(os);
    write_grid_csv(os, grid);
  }
  output.close();
  return kExitOk;
}

bool parse_foreground(const std::string& text, std::size_t line, const std::string& source) {
  if (text == "1" || text == "true" || text == "fg" || text == "foreground") return true;
  if (text == "0" || text == "false" || text == "bg" || text == "background") return false;
  throw ParseError("foreground must be 1/0, true/false or fg/bg", line, source);
}

BevGrid load_grid_file(const fs::path& path) {
  try {
    return load_grid(path);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

struct SegIouOpts {
  std::string pairs;
  double threshold = 0.5;
  bool per_frame = false;
};

int cmd_seg_iou(const Context& ctx, const SegIouOpts& o) {
  Output output(ctx.globals.out, ctx.out);
  const fs::path base = fs::path(o.pairs).parent_path();
  std::vector<CategoryGrids> categories;
  std::map<std::string, std::size_t> index;
  bool first = true;
  for (const auto& [line, f] : read_csv_file(o.pairs)) {
    if (first && !f.empty() && f[0] == "category") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() != 4) throw ParseError("expected category,foreground,pred,gt", line, o.pairs);
    const bool fg = parse_foreground(f[1], line, o.pairs);
    auto [it, inserted] = index.try_emplace(f[0], categories.size());
    if (inserted) categories.push_back({f[0], fg, {}});
    CategoryGrids& cat = categories[it->second];
    if (cat.foreground != fg) throw ParseError("conflicting foreground flag", line, o.pairs);
    BevGrid pred = load_grid_file(base / f[2]);
    BevGrid gt = load_grid_file(base / f[3]);
    if (!pred.same_shape(gt)) throw ParseError("grid shapes differ", line, o.pairs);
    cat.frames.emplace_back(std::move(pred), std::move(gt));
  }
  const SegIoUReport report = seg_miou(categories, o.threshold, o.per_frame);

  std::ostream& os = output.stream();
  ctx.write_header(os);
  csv_row(os, "category", "foreground", "iou");
  for (const auto& e : report.categories) {
    csv_row(os, e.category, e.foreground ? "1" : "0", fmt(e.iou));
  }
  csv_row(os, "mean_foreground", "", fmt(report.mean_foreground));
  csv_row(os, "mean_all", "", fmt(report.mean_all));
  output.close();
  return kExitOk;
}

// ---------------------------------------------------------------- config

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void append_config_tokens(const Json& obj, std::vector<std::string>& tokens) {
  for (const auto& [key, value] : obj.items()) {
    if (key == "command" || key == "config") continue;
    if (key == "flags" && value.is_object()) {
      append_config_tokens(value, tokens);
      continue;
    }
    if (value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    std::string text;
    if (value.is_array()) {
      for (const auto& item : value) {
        text += (text.empty() ? "" : ",") + json_scalar_text(item);
      }
    } else if (value.is_object()) {
      throw ParseError("config key '" + key + "' must not be an object", 0);
    } else {
      text = json_scalar_text(value);
    }
    tokens.push_back("--" + key);
    tokens.push_back(text);
  }
}

// Splices the --config document into the argument list right after the
// command name, so explicit flags (parsed later, last one wins) override it.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::set<std::string>& commands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  if (!doc.is_object()) throw ParseError(path + ": config must be a JSON object", 0);

  std::vector<std::string> extra;
  append_config_tokens(doc, extra);
  std::vector<std::string> result = args;
  auto cmd = std::find_if(result.begin(), result.end(),
                          [&](const std::string& a) { return commands.count(a) > 0; });
  if (cmd == result.end()) {
    if (!doc.contains("command") || !doc["command"].is_string()) return result;
    result.insert(result.begin(), doc["command"].get<std::string>());
    cmd = result.begin();
  }
  result.insert(cmd + 1, extra.begin(), extra.end());
  return result;
}

}  // namespace

std::string version() { return LOSSBENCH_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lossbench: loss-variance theory, SGD simulation and BEV detection metrics",
               "lossbench"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", version());

  Globals g;
  app.add_option("--seed", g.seed, "Base seed for every stochastic step")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "csv or csv+svg")
      ->check(CLI::IsMember({"csv", "csv+svg"}))
      ->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "Omit the timestamp from headers");
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--config", g.config, "JSON document of flags; explicit flags win");

  VarianceOpts variance;
  auto* s_var = app.add_subcommand("variance", "Closed-form and Monte Carlo gradient variance");
  s_var->add_option("--loss", variance.loss, "Losses: l1,l2,smoothl1,dice")->capture_default_str();
  s_var->add_option("--length", variance.length, "Dice object length(s)")->capture_default_str();
  s_var->add_option("--sigma", variance.sigma, "Noise level(s)")->capture_default_str();
  s_var->add_option("--beta", variance.beta, "SmoothL1 transition point")->capture_default_str();
  s_var->add_option("--samples", variance.samples, "Monte Carlo draws")->capture_default_str();

  ThresholdOpts threshold;
  auto* s_thr = app.add_subcommand("threshold", "Noise thresholds sigma_m, sigma_l1, sigma_c");
  s_thr->add_option("--length", threshold.length, "Object length(s)")->capture_default_str();

  SweepOpts sw;
  auto* s_sweep = app.add_subcommand("sweep", "Variance and SGD deviation over (loss, length, sigma)");
  s_sweep->add_option("--lengths", sw.lengths)->capture_default_str();
  s_sweep->add_option("--sigmas", sw.sigmas, "List or lo:hi:n")->capture_default_str();
  s_sweep->add_option("--losses", sw.losses)->capture_default_str();
  s_sweep->add_option("--beta", sw.beta)->capture_default_str();
  s_sweep->add_option("--trials", sw.trials)->capture_default_str();
  s_sweep->add_option("--steps", sw.steps)->capture_default_str();
  s_sweep->add_option("--dim", sw.dim)->capture_default_str();
  s_sweep->add_option("--mode", sw.mode, "idealized or literal")->capture_default_str();
  s_sweep->add_option("--samples", sw.samples, "Draws per variance estimate")->capture_default_str();
  s_sweep->add_flag("--log-y", sw.log_y, "Logarithmic y axis in the SVG");

  SgdOpts sgd;
  auto* s_sgd = app.add_subcommand("sgd", "One SGD ensemble");
  s_sgd->add_option("--loss", sgd.loss)->capture_default_str();
  s_sgd->add_option("--length", sgd.length)->capture_default_str();
  s_sgd->add_option("--beta", sgd.beta)->capture_default_str();
  s_sgd->add_option("--sigma", sgd.sigma)->capture_default_str();
  s_sgd->add_option("--dim", sgd.dim)->capture_default_str();
  s_sgd->add_option("--steps", sgd.steps)->capture_default_str();
  s_sgd->add_option("--trials", sgd.trials)->capture_default_str();
  s_sgd->add_option("--mode", sgd.mode)->capture_default_str();
  s_sgd->add_option("--schedule", sgd.schedule, "inverse or constant")->capture_default_str();
  s_sgd->add_option("--scale", sgd.scale)->capture_default_str();
  s_sgd->add_option("--samples", sgd.samples)->capture_default_str();

  DiceAdvantageOpts th;
  auto* s_th = app.add_subcommand("theorem1", "Dice versus regression AP on synthetic scenes");
  s_th->add_option("--length", th.length)->capture_default_str();
  s_th->add_option("--sigma", th.sigma)->capture_default_str();
  s_th->add_option("--seeds", th.seeds)->capture_default_str();
  s_th->add_option("--objects", th.objects)->capture_default_str();
  s_th->add_option("--dim", th.dim)->capture_default_str();
  s_th->add_option("--steps", th.steps)->capture_default_str();
  s_th->add_option("--z-min", th.z_min)->capture_default_str();
  s_th->add_option("--z-max", th.z_max)->capture_default_str();
  s_th->add_flag("--full-box-iou", th.full_box_iou, "Match with iou3d instead of depth IoU");

  EvalOpts ev;
  auto* s_eval = app.add_subcommand("eval", "AP per category, threshold and length bin");
  s_eval->add_option("--pred", ev.pred)->required();
  s_eval->add_option("--gt", ev.gt)->required();
  s_eval->add_option("--iou", ev.iou)->capture_default_str();
  s_eval->add_option("--bins", ev.bins, "Bin edges ('none': only all)")->capture_default_str();
  s_eval->add_option("--groups", ev.groups, "CSV category,group");
  s_eval->add_option("--metric", ev.metric, "iou3d, bev or depth")->capture_default_str();

  NmsOpts nms;
  auto* s_nms = app.add_subcommand("nms", "Center-distance NMS per frame and category");
  s_nms->add_option("--input", nms.input)->required();
  s_nms->add_option("--radius", nms.radius)->capture_default_str();

  RasterizeOpts ra;
  auto* s_ra = app.add_subcommand("rasterize", "Rasterize boxes into a BEV occupancy grid");
  s_ra->add_option("--input", ra.input)->required();
  s_ra->add_option("--frame", ra.frame);
  s_ra->add_option("--category", ra.category);
  s_ra->add_option("--source", ra.source, "all, pred or gt")->capture_default_str();
  s_ra->add_option("--rows", ra.rows)->capture_default_str();
  s_ra->add_option("--cols", ra.cols)->capture_default_str();
  s_ra->add_option("--x-min", ra.x_min)->capture_default_str();
  s_ra->add_option("--x-max", ra.x_max)->capture_default_str();
  s_ra->add_option("--z-min", ra.z_min)->capture_default_str();
  s_ra->add_option("--z-max", ra.z_max)->capture_default_str();

  SegIouOpts seg;
  auto* s_seg = app.add_subcommand("seg-iou", "BEV segmentation IoU from grid pairs");
  s_seg->add_option("--pairs", seg.pairs, "CSV category,foreground,pred,gt")->required();
  s_seg->add_option("--threshold", seg.threshold)->capture_default_str();
  s_seg->add_flag("--per-frame", seg.per_frame, "Average per-frame IoUs");

  try {
    std::set<std::string> commands;
    for (const CLI::App* sub : app.get_subcommands({})) commands.insert(sub->get_name());
    std::vector<std::string> tokens = expand_config(args, commands);
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    const CLI::App* sub = app.get_subcommands().front();
    if (g.format == "csv+svg" && sub != s_sweep && sub != s_th) {
      throw UsageError("--format csv+svg applies to sweep and theorem1 only");
    }
    const Context ctx{g, run_config(*sub, g), out, err};
    if (sub == s_var) return cmd_variance(ctx, variance);
    if (sub == s_thr) return cmd_threshold(ctx, threshold);
    if (sub == s_sweep) return cmd_sweep(ctx, sw);
    if (sub == s_sgd) return cmd_sgd(ctx, sgd);
    if (sub == s_th) return cmd_dice_advantage(ctx, th);
    if (sub == s_eval) return cmd_eval(ctx, ev);
    if (sub == s_nms) return cmd_nms(ctx, nms);
    if (sub == s_ra) return cmd_rasterize(ctx, ra);
    if (sub == s_seg) return cmd_seg_iou(ctx, seg);
    throw UsageError("unknown command");
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitOutput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace lossbench::cli
