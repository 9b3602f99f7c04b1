#include "paretoscope/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "paretoscope/divergence.hpp"
#include "paretoscope/error.hpp"
#include "paretoscope/explorer.hpp"
#include "paretoscope/image_io.hpp"
#include "paretoscope/manifest.hpp"
#include "paretoscope/run_log.hpp"
#include "paretoscope/selection.hpp"
#include "paretoscope/trajectory.hpp"

namespace paretoscope {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Output helpers

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw invalid_input("cannot create output directory " + dir.string());
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_front_csv(std::ostream& out, const ParetoFront& front) {
  std::vector<std::string> header;
  if (!front.members.empty())
    for (const auto& a : front.members.front().point.assignment) header.push_back(a.name);
  for (const auto& n : front.objective_names) header.push_back(n);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
  out << '\n';
  for (const auto& m : front.members) {
    bool first = true;
    for (const auto& a : m.point.assignment) {
      out << (first ? "" : ",") << csv_field(to_string(a.value));
      first = false;
    }
    for (double v : m.objectives) {
      out << (first ? "" : ",") << num(v);
      first = false;
    }
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<ProgressRecord>& trace) {
  out << "batch,evaluations,hypervolume\n";
  for (const auto& p : trace) out << p.batch << ',' << p.evaluations << ',' << num(p.hypervolume) << '\n';
}

// ---------------------------------------------------------------------------
// Run-log helpers

struct LoadedRun {
  LoadedLog log;
  std::vector<std::string> objective_names;
  std::optional<ParameterSpace> space;
  ParetoFront front;
};

LoadedRun load_run(const fs::path& path, std::ostream& err) {
  LoadedRun run;
  run.log = load_run_log(path);
  for (const auto& w : run.log.warnings) err << "warning: " << w << '\n';
  if (run.log.header) {
    for (const auto& o : run.log.header->objectives) run.objective_names.push_back(o.name);
    if (run.log.header->space.is_object()) run.space = parse_space(run.log.header->space);
  } else {
    for (const auto& e : run.log.evaluations) {
      if (!e.ok()) continue;
      for (const auto& [name, _] : e.objectives) run.objective_names.push_back(name);
      break;
    }
  }
  std::vector<FrontMember> feasible;
  for (const auto& e : run.log.evaluations)
    if (e.ok()) feasible.push_back({e.point, e.objective_vector()});
  run.front = pareto_front(feasible, run.objective_names);
  return run;
}

std::vector<double> read_error_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read error CSV " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw invalid_input(path.string() + ": empty error CSV");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  }
  const auto it = std::find(cols.begin(), cols.end(), "error");
  if (it == cols.end()) throw invalid_input(path.string() + ": no 'error' column");
  const auto col = static_cast<std::size_t>(it - cols.begin());
  std::vector<double> errors;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    for (std::size_t i = 0; i <= col; ++i)
      if (!std::getline(ls, field, ',')) throw invalid_input(path.string() + ":" + std::to_string(lineno) + ": short row");
    try {
      errors.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw invalid_input(path.string() + ":" + std::to_string(lineno) + ": bad error value '" + field + "'");
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Commands

struct Options {
  std::string path, path_b, out, out_dir;
  std::string errors_a, errors_b;
  std::vector<std::string> max_bounds;
  std::string minimize;
  std::string align = "none";
  double tol = 0.02;
  std::size_t bins = 20;
  unsigned parallelism = 0;
  unsigned threads = 1;
  bool no_timestamps = false;
};

int cmd_space_validate(const Options& o, std::ostream& out) {
  const ParameterSpace space = load_space(o.path);
  const Cardinality c = space.cardinality();
  out << "valid: " << space.dimension() << " parameter" << (space.dimension() == 1 ? "" : "s") << ", cardinality "
      << c.count << (c.overflow ? " (overflow, saturated)" : "") << '\n';
  for (const auto& p : space.params())
    out << "  " << p.name() << " [" << p.kind_name() << "] " << p.size() << " values, default "
        << to_string(p.default_value()) << '\n';
  return kExitOk;
}

int cmd_explore(const Options& o, std::ostream& out) {
  RunManifest m = load_manifest(o.path);
  if (auto s = seed_from_environment()) {
    m.seed = *s;
    m.exploration.seed = *s;
  }
  if (o.parallelism > 0) m.exploration.parallelism = o.parallelism;
  const fs::path dir = o.out_dir;
  ensure_dir(dir);
  const std::optional<std::string> created = o.no_timestamps ? std::nullopt : std::optional(utc_now());

  {
    auto mf = open_output(dir / "manifest.json");
    mf << to_json(m, created).dump(2) << '\n';
  }

  RunLogHeader header;
  header.objectives = m.evaluator.objectives;
  header.space = to_json(m.space);
  header.created = created;
  header.extra["seed"] = m.seed;
  header.extra["evaluator"] = to_json(m.evaluator);
  header.extra["exploration"] = to_json(m.exploration);
  RunLogWriter writer(dir / "run.jsonl", header);

  std::vector<ProgressRecord> trace;
  ExploreHooks hooks;
  hooks.on_evaluation = [&](const Evaluation& e) {
    if (o.no_timestamps) {
      Evaluation copy = e;
      copy.wall_time = 0.0;
      writer.append(copy);
    } else {
      writer.append(e);
    }
  };
  hooks.on_progress = [&](const ProgressRecord& p) {
    writer.append(p);
    trace.push_back(p);
  };
  const RunState state = explore(m.space, m.evaluator, m.exploration, hooks);

  {
    auto tf = open_output(dir / "hv_trace.csv");
    write_trace_csv(tf, trace);
  }
  {
    auto ff = open_output(dir / "front.csv");
    write_front_csv(ff, state.front);
  }
  std::size_t failed = 0;
  for (const auto& e : state.evaluations) failed += !e.ok();
  out << "evaluations " << state.evaluations.size() << " failed " << failed << " front " << state.front.members.size()
      << " hypervolume " << num(state.hv_trace.empty() ? 0.0 : state.hv_trace.back())
      << (state.space_exhausted ? " (space exhausted)" : "") << '\n';
  return kExitOk;
}

int cmd_pareto(const Options& o, std::ostream& out, std::ostream& err) {
  const LoadedRun run = load_run(o.path, err);
  if (o.out.empty()) {
    write_front_csv(out, run.front);
  } else {
    auto f = open_output(o.out);
    write_front_csv(f, run.front);
  }
  return kExitOk;
}

int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
  const LoadedRun run = load_run(o.path, err);
  Constraints constraints;
  for (const auto& b : o.max_bounds) {
    const auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0) throw invalid_input("--max expects <objective>=<value>, got '" + b + "'");
    try {
      std::size_t used = 0;
      const std::string value = b.substr(eq + 1);
      constraints[b.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw invalid_input("--max bound for '" + b.substr(0, eq) + "' is not a number");
    }
  }
  const Selection sel = select_config(run.front, constraints, o.minimize, run.space ? &*run.space : nullptr);
  for (const auto& a : sel.member.point.assignment) out << a.name << '=' << to_string(a.value) << '\n';
  for (std::size_t i = 0; i < run.objective_names.size(); ++i)
    err << "# " << run.objective_names[i] << " = " << num(sel.member.objectives[i]) << '\n';
  return kExitOk;
}

int cmd_complexity(const Options& o, std::ostream& out) {
  const fs::path input = o.path;
  const std::vector<GrayImage> frames = fs::is_directory(input) ? read_pgm_directory(input) : read_raw_frames(input);
  const SequenceComplexity sc = sequence_complexity(frames, o.threads);
  out << num(sc.score.max) << ' ' << num(sc.score.mean) << ' ' << num(sc.score.variance) << '\n';
  if (!o.out_dir.empty()) {
    ensure_dir(o.out_dir);
    auto f = open_output(fs::path(o.out_dir) / "divergence.csv");
    f << "frame,divergence\n";
    for (std::size_t t = 0; t < sc.divergences.size(); ++t) f << t << ',' << num(sc.divergences[t]) << '\n';
  }
  return kExitOk;
}

void write_histogram_csv(std::ostream& f, const ErrorHistogram& h) {
  f << "bin,lo,hi,count\n";
  const double w = h.bin_width();
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    f << b << ',' << num(h.lo + w * static_cast<double>(b)) << ','
      << num(b + 1 == h.counts.size() ? h.hi : h.lo + w * static_cast<double>(b + 1)) << ',' << h.counts[b] << '\n';
}

int cmd_ate(const Options& o, std::ostream& out) {
  AteOptions opts;
  if (o.align == "none")
    opts.align = Alignment::none;
  else if (o.align == "first-pose")
    opts.align = Alignment::first_pose;
  else
    throw invalid_input("--align must be 'none' or 'first-pose'");
  opts.tol = o.tol;
  const ErrorDistribution d = ate(read_tum(o.path), read_tum(o.path_b), opts);
  out << "mean_ate " << num(d.mean) << " rmse " << num(d.rmse) << " pairs " << d.errors.size() << " unmatched "
      << d.unmatched << '\n';
  if (!o.out_dir.empty()) {
    ensure_dir(o.out_dir);
    auto f = open_output(fs::path(o.out_dir) / "ate_errors.csv");
    f << "index,timestamp,error\n";
    for (std::size_t i = 0; i < d.errors.size(); ++i) f << i << ',' << num(d.timestamps[i]) << ',' << num(d.errors[i]) << '\n';
    auto h = open_output(fs::path(o.out_dir) / "ate_histogram.csv");
    write_histogram_csv(h, error_histogram(d, o.bins));
  }
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<LoadedRun> runs;
  runs.push_back(load_run(o.path, err));
  if (!o.path_b.empty()) runs.push_back(load_run(o.path_b, err));
  const char* labels[] = {"a", "b"};
  const fs::path dir = o.out_dir;
  ensure_dir(dir);

  std::ostringstream md;
  md << "# Exploration report\n\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    auto f = open_output(dir / ("front_" + std::string(labels[r]) + ".csv"));
    write_front_csv(f, runs[r].front);
    std::size_t failed = 0;
    for (const auto& e : runs[r].log.evaluations) failed += !e.ok();
    md << "## Run " << labels[r] << ": " << (r == 0 ? o.path : o.path_b) << "\n\n"
       << "- evaluations: " << runs[r].log.evaluations.size() << " (" << failed << " failed)\n"
       << "- front size: " << runs[r].front.members.size() << "\n";
    if (!runs[r].log.progress.empty())
      md << "- final hypervolume (own reference): " << num(runs[r].log.progress.back().hypervolume) << "\n";
    md << "\n```\n";
    write_front_csv(md, runs[r].front);
    md << "```\n\n";
  }

  // Both runs scored against one reference so their hypervolumes compare.
  if (runs.size() == 2 && runs[0].objective_names == runs[1].objective_names && !runs[0].objective_names.empty()) {
    std::vector<ObjectiveVector> all;
    for (const auto& run : runs)
      for (const auto& m : run.front.members) all.push_back(m.objectives);
    if (!all.empty()) {
      ObjectiveVector ref = default_reference_point(all);
      for (const auto& run : runs)
        if (!run.log.progress.empty() && run.log.progress.back().reference.size() == ref.size())
          for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = std::max(ref[i], run.log.progress.back().reference[i]);
      md << "## Common-reference hypervolume\n\nreference:";
      for (double v : ref) md << ' ' << num(v);
      md << "\n\n";
      for (std::size_t r = 0; r < 2; ++r) md << "- run " << labels[r] << ": " << num(hypervolume(runs[r].front, ref).value) << "\n";
      md << "\n";
    }
  }

  {
    auto f = open_output(dir / "hv_trace.csv");
    f << "batch";
    for (std::size_t r = 0; r < runs.size(); ++r) f << ",evaluations_" << labels[r] << ",hypervolume_" << labels[r];
    f << '\n';
    std::size_t rows = 0;
    for (const auto& run : runs) rows = std::max(rows, run.log.progress.size());
    for (std::size_t i = 0; i < rows; ++i) {
      f << i;
      for (const auto& run : runs) {
        if (i < run.log.progress.size())
          f << ',' << run.log.progress[i].evaluations << ',' << num(run.log.progress[i].hypervolume);
        else
          f << ",,";
      }
      f << '\n';
    }
  }

  std::vector<std::string> error_paths;
  if (!o.errors_a.empty()) error_paths.push_back(o.errors_a);
  if (!o.errors_b.empty()) {
    if (o.errors_a.empty()) throw invalid_input("--errors-b requires --errors-a");
    error_paths.push_back(o.errors_b);
  }
  if (!error_paths.empty()) {
    std::vector<ErrorDistribution> dists;
    double hi = 0.0;
    for (const auto& p : error_paths) {
      dists.push_back(error_distribution(read_error_csv(p)));
      hi = std::max(hi, dists.back().max);
    }
    std::vector<ErrorHistogram> hists;
    for (const auto& d : dists) hists.push_back(error_histogram(d, o.bins, std::pair{0.0, hi}));
    auto f = open_output(dir / "error_histogram.csv");
    f << "bin,lo,hi";
    for (std::size_t r = 0; r < hists.size(); ++r) f << ",count_" << labels[r];
    f << '\n';
    const double w = hists.front().bin_width();
    for (std::size_t b = 0; b < o.bins; ++b) {
      f << b << ',' << num(w * static_cast<double>(b)) << ',' << num(b + 1 == o.bins ? hi : w * static_cast<double>(b + 1));
      for (const auto& h : hists) f << ',' << h.counts[b];
      f << '\n';
    }
    auto mf = open_output(dir / "error_means.csv");
    mf << "run,mean,rmse,frames\n";
    md << "## Absolute trajectory error\n\n";
    for (std::size_t r = 0; r < dists.size(); ++r) {
      mf << labels[r] << ',' << num(dists[r].mean) << ',' << num(dists[r].rmse) << ',' << dists[r].errors.size() << '\n';
      md << "- run " << labels[r] << ": mean " << num(dists[r].mean) << " m, rmse " << num(dists[r].rmse) << " m over "
         << dists[r].errors.size() << " frames\n";
    }
    md << "\n";
  }

  auto rf = open_output(dir / "report.md");
  rf << md.str();
  out << md.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"paretoscope: multi-objective design-space exploration and SLAM metrics", "paretoscope"};
  app.require_subcommand(1);
  Options o;

  auto* space = app.add_subcommand("space", "Parameter-space tools");
  space->require_subcommand(1);
  auto* validate = space->add_subcommand("validate", "Validate a parameter-space document");
  validate->add_option("path", o.path, "Space JSON document")->required();

  auto* explore_cmd = app.add_subcommand("explore", "Run an exploration from a manifest");
  explore_cmd->add_option("manifest", o.path, "Run manifest JSON")->required();
  explore_cmd->add_option("-o,--out-dir", o.out_dir, "Output directory")->required();
  explore_cmd->add_flag("--no-timestamps", o.no_timestamps, "Omit timestamps and wall times for reproducible logs");
  explore_cmd->add_option("--parallelism", o.parallelism, "Concurrent evaluations (overrides the manifest)")
      ->check(CLI::PositiveNumber);

  auto* pareto_cmd = app.add_subcommand("pareto", "Print the Pareto front of a run log as CSV");
  pareto_cmd->add_option("log", o.path, "Run log (JSON Lines)")->required();
  pareto_cmd->add_option("-o,--out", o.out, "Write the CSV here instead of stdout");

  auto* select_cmd = app.add_subcommand("select", "Choose a front configuration under constraints");
  select_cmd->add_option("log", o.path, "Run log (JSON Lines)")->required();
  select_cmd->add_option("--max", o.max_bounds, "Upper bound <objective>=<value> (repeatable)");
  select_cmd->add_option("--minimize", o.minimize, "Objective to minimize")->required();

  auto* complexity_cmd = app.add_subcommand("complexity", "Frame-by-frame divergence statistics");
  complexity_cmd->add_option("frames", o.path, "Directory of P5 PGM frames or a raw frame stack")->required();
  complexity_cmd->add_option("-o,--out-dir", o.out_dir, "Write divergence.csv here");
  complexity_cmd->add_option("--threads", o.threads, "Histogram threads")->check(CLI::PositiveNumber);

  auto* ate_cmd = app.add_subcommand("ate", "Absolute trajectory error of an estimate against ground truth");
  ate_cmd->add_option("estimate", o.path, "Estimated trajectory (TUM format)")->required();
  ate_cmd->add_option("ground_truth", o.path_b, "Ground-truth trajectory (TUM format)")->required();
  ate_cmd->add_option("--align", o.align, "none | first-pose");
  ate_cmd->add_option("--tol", o.tol, "Association tolerance in seconds")->check(CLI::PositiveNumber);
  ate_cmd->add_option("--bins", o.bins, "Histogram bins")->check(CLI::PositiveNumber);
  ate_cmd->add_option("-o,--out-dir", o.out_dir, "Write ate_errors.csv and ate_histogram.csv here");

  auto* report_cmd = app.add_subcommand("report", "Comparative report over one or two run logs");
  report_cmd->add_option("log_a", o.path, "First run log")->required();
  report_cmd->add_option("log_b", o.path_b, "Second run log");
  report_cmd->add_option("-o,--out-dir", o.out_dir, "Output directory")->required();
  report_cmd->add_option("--errors-a", o.errors_a, "Per-frame ATE CSV for run a (from `ate`)");
  report_cmd->add_option("--errors-b", o.errors_b, "Per-frame ATE CSV for run b");
  report_cmd->add_option("--bins", o.bins, "Error histogram bins")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }

  try {
    if (*validate) return cmd_space_validate(o, out);
    if (*explore_cmd) return cmd_explore(o, out);
    if (*pareto_cmd) return cmd_pareto(o, out, err);
    if (*select_cmd) return cmd_select(o, out, err);
    if (*complexity_cmd) return cmd_complexity(o, out);
    if (*ate_cmd) return cmd_ate(o, out);
    if (*report_cmd) return cmd_report(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::invalid_input:
        return kExitInvalidInput;
      case ErrorKind::infeasible:
        return kExitInfeasible;
      case ErrorKind::spawn_failure:
        return kExitSpawnFailure;
      case ErrorKind::runtime:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace paretoscope
