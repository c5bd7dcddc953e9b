#include "rase/cli_commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "rase/analysis.hpp"
#include "rase/errors.hpp"
#include "rase/record_io.hpp"
#include "rase/version.hpp"

namespace rase {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataFormatError("cannot open output file: " + path);
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t fnv64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot hash file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open table: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = cells;
      first = false;
    } else {
      table.rows.push_back(cells);
    }
  }
  if (first) throw DataFormatError("empty table: " + path);
  return table;
}

double cell_to_double(const std::string& s, const std::string& path) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataFormatError("non-numeric cell '" + s + "' in " + path);
  }
}

}  // namespace

std::string resolve_out_dir(const std::string& cli_out, const ExperimentConfig& cfg,
                            const std::string& subcommand) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* root = std::getenv("RASE_OUT_ROOT"); root && *root) {
    return (fs::path(root) / subcommand).string();
  }
  return (fs::path("rase_out") / subcommand).string();
}

void cmd_curves(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const GainFeature& g = cfg.gain();

  {
    auto out = open_output(out_dir, "variance_vs_alpha.csv");
    out << "alpha_l,ase_variance\n";
    for (double a : linspace(0.0, 2.5, 51)) {
      const GainFeature gi(a, g.transmission_l, g.reph_transmission, g.linewidth_hz);
      out << fmt(a) << "," << fmt(ase_variance(gi)) << "\n";
    }
  }
  {
    auto out = open_output(out_dir, "efficiency_vs_alpha.csv");
    out << "alpha_l,eta_model,model_defined\n";
    for (double a : linspace(0.05, 2.5, 50)) {
      out << fmt(a) << "," << fmt(rase_efficiency(a)) << ","
          << (rase_efficiency_defined(a) ? 1 : 0) << "\n";
    }
  }
  {
    auto out = open_output(out_dir, "insep_vs_b.csv");
    out << "b,total_variance\n";
    const int n = std::max(1, static_cast<int>(std::llround(1.0 / cfg.analysis.b_grid_step)));
    std::vector<double> grid = linspace(0.0, 1.0, n + 1);
    for (const InsepPoint& pt : insep_curve(g, grid)) {
      out << fmt(pt.b) << "," << fmt(pt.total_variance) << "\n";
    }
    const InsepPoint min = find_min_b(g);
    out << "# minimum," << fmt(min.b) << "," << fmt(min.total_variance) << "\n";
  }
  {
    auto out = open_output(out_dir, "level_scheme.csv");
    out << "ground,excited,relative_oscillator_strength\n";
    for (const auto& t : cfg.levels.transitions) {
      out << t.ground << "," << t.excited << "," << fmt(t.strength) << "\n";
    }
  }
}

SimulateResult cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                            int n_threads) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  SimulateResult result;
  result.config_hash = config_hash(cfg);
  result.dump_path = (fs::path(out_dir) / "run.rdump").string();
  result.manifest_path = (fs::path(out_dir) / "manifest.json").string();

  {
    RunDump dump;
    dump.header_json = config_to_json(cfg);
    dump.records = synthesize_run(cfg.sequence, cfg.noise, n_threads);
    write_dump_file(result.dump_path, dump);
  }

  if (cfg.background_shots > 0) {
    result.background_path = (fs::path(out_dir) / "background.rdump").string();
    ExperimentConfig bg = cfg;
    bg.sequence.n_shots = cfg.background_shots;
    RunDump dump;
    dump.header_json = config_to_json(bg);
    dump.records =
        synthesize_background_run(cfg.sequence, cfg.noise, cfg.background_shots, n_threads);
    write_dump_file(result.background_path, dump);
  }

  nlohmann::json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["dump_format_version"] = kDumpFormatVersion;
  manifest["config_hash"] = hex64(result.config_hash);
  manifest["rng_seed"] = cfg.sequence.rng_seed;
  manifest["n_shots"] = cfg.sequence.n_shots;
  manifest["dump_file"] = fs::path(result.dump_path).filename().string();
  manifest["dump_fnv64"] = hex64(fnv64_file(result.dump_path));
  if (!result.background_path.empty()) {
    manifest["background_file"] = fs::path(result.background_path).filename().string();
    manifest["background_fnv64"] = hex64(fnv64_file(result.background_path));
  }
  manifest["created_utc"] = utc_now();

  auto out = open_output(out_dir, "manifest.json");
  out << manifest.dump(2) << "\n";
  return result;
}

void cmd_analyze(const std::string& dump_path, const AnalyzeOverrides& overrides,
                 const std::string& out_dir) {
  const RunDump dump = read_dump_file(dump_path);
  ExperimentConfig cfg = parse_config_json(dump.header_json);
  if (overrides.window_us) cfg.analysis.window_us = *overrides.window_us;
  if (overrides.bootstrap) cfg.analysis.bootstrap = *overrides.bootstrap;

  VacuumNormalization norm;
  if (!overrides.background_dump.empty()) {
    const RunDump bg = read_dump_file(overrides.background_dump);
    SpectralWindow wa = default_window(cfg.sequence, FieldKind::Ase);
    SpectralWindow wr = default_window(cfg.sequence, FieldKind::Rase);
    wa.window_function = wr.window_function = cfg.analysis.window_function;
    if (cfg.analysis.window_us > 0.0) {
      wa.time_window_us = wr.time_window_us = cfg.analysis.window_us;
    }
    norm = calibrate_vacuum(bg.records, cfg.sequence, cfg.noise, wa, wr);
  }

  const RunAnalysis run = analyze_records(dump.records, cfg.sequence, cfg.noise,
                                          cfg.analysis, norm);

  {
    auto out = open_output(out_dir, "quadratures.csv");
    out << "shot_id,field,x,p\n";
    for (const auto& q : run.ase_pairs) {
      out << q.shot_id << ",ASE," << fmt(q.x) << "," << fmt(q.p) << "\n";
    }
    for (const auto& q : run.rase_pairs) {
      out << q.shot_id << ",RASE," << fmt(q.x) << "," << fmt(q.p) << "\n";
    }
  }

  if (cfg.sequence.kind == SequenceKind::Rase) {
    {
      auto out = open_output(out_dir, "summary.csv");
      out << "field,mean_var,se,n_shots\n";
      out << "ASE," << fmt(run.ase_var.mean_var) << "," << fmt(run.ase_var.se) << ","
          << run.ase_var.n_shots << "\n";
      out << "RASE," << fmt(run.rase_var.mean_var) << "," << fmt(run.rase_var.se) << ","
          << run.rase_var.n_shots << "\n";
    }
    {
      auto out = open_output(out_dir, "efficiency.csv");
      out << "alpha_l,eta,eta_se,eta_model,kind,flags\n";
      if (run.efficiency) {
        const double a = cfg.gain().alpha_l;
        const bool defined = rase_efficiency_defined(a);
        out << fmt(a) << "," << fmt(run.efficiency->eta) << "," << fmt(run.efficiency->se)
            << "," << fmt(defined ? rase_efficiency(a) : std::nan("")) << ",RASE,"
            << (defined ? "" : "model_undefined") << "\n";
      }
    }
    {
      auto out = open_output(out_dir, "insep_curve.csv");
      out << "b,total_variance,se,sigma_violation,model\n";
      const std::vector<OverlayRow> overlay = overlay_model(run.insep_curve, cfg.gain());
      for (std::size_t i = 0; i < overlay.size(); ++i) {
        out << fmt(overlay[i].b) << "," << fmt(overlay[i].measured) << ","
            << fmt(overlay[i].measured_se) << "," << fmt(run.insep_curve[i].sigma_violation)
            << "," << fmt(overlay[i].model) << "\n";
      }
    }
    {
      auto out = open_output(out_dir, "insep_minimum.csv");
      out << "b,total_variance,se,sigma_violation\n";
      out << fmt(run.insep_min.b) << "," << fmt(run.insep_min.total_variance) << ","
          << fmt(run.insep_min.se) << "," << fmt(run.insep_min.sigma_violation) << "\n";
    }
  } else {
    auto out = open_output(out_dir, "efficiency.csv");
    out << "alpha_l,eta_raw,eta_scaled,eta_se,eta_model,kind,flags\n";
    const double a = cfg.gain().alpha_l;
    const double factor = scale_efficiency(1.0, cfg.decay);
    const bool defined = rase_efficiency_defined(a);
    out << fmt(a) << "," << fmt(run.i4le_area_ratio) << ","
        << fmt(std::clamp(run.i4le_area_ratio, 0.0, 1.0) * factor) << ","
        << fmt(run.i4le_area_ratio_se * factor) << ","
        << fmt(defined ? rase_efficiency(a) : std::nan("")) << ",I4LE_scaled,"
        << (defined ? "" : "model_undefined") << "\n";
  }
}

void cmd_fit(const std::string& table_path, const std::string& out_dir) {
  const CsvTable table = read_csv(table_path);
  if (table.header.size() < 2 || table.header[0] != "alpha_l" ||
      (table.header[1] != "variance" && table.header[1] != "ase_variance")) {
    throw DataFormatError("fit table must have header alpha_l,variance[,se]: " + table_path);
  }
  if (table.rows.empty()) throw ConfigError("fit table has no data rows: " + table_path);
  const bool has_se = table.header.size() >= 3 && table.header[2] == "se";

  std::vector<VariancePoint> points;
  points.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.size() < table.header.size()) {
      throw DataFormatError("short row in " + table_path);
    }
    VariancePoint pt;
    pt.alpha_l = cell_to_double(row[0], table_path);
    pt.variance = cell_to_double(row[1], table_path);
    pt.se = has_se ? cell_to_double(row[2], table_path) : 0.0;
    points.push_back(pt);
  }

  LossFit fit;
  try {
    fit = fit_loss(points);
  } catch (const NumericalError& e) {
    // Residual diagnostics help debugging degenerate inputs.
    throw NumericalError(std::string(e.what()) + " (" + std::to_string(points.size()) +
                         " input points)");
  }

  {
    auto out = open_output(out_dir, "loss_fit.csv");
    out << "transmission_l,se,chi2,n_points\n";
    out << fmt(fit.transmission_l) << "," << fmt(fit.se) << "," << fmt(fit.chi2) << ","
        << fit.n_points << "\n";
  }
  {
    auto out = open_output(out_dir, "alpha_derived.csv");
    out << "alpha_probe,variance,alpha_from_ase,untrusted_alpha\n";
    for (const auto& pt : points) {
      const AlphaAnnotation ann = annotate_alpha(pt.alpha_l, pt.variance, fit.transmission_l);
      out << fmt(ann.alpha_input) << "," << fmt(pt.variance) << "," << fmt(ann.alpha_from_ase)
          << "," << (ann.untrusted ? 1 : 0) << "\n";
    }
  }
}

}  // namespace rase
