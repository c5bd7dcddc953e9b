#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rase/cli_commands.hpp"
#include "rase/config.hpp"
#include "rase/errors.hpp"
#include "rase/record_io.hpp"
#include "rase/version.hpp"

using namespace rase;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rase_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<char> slurp_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

#ifdef RASE_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(RASE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("config text round trip") {
  ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  cfg.sequence.kind = SequenceKind::I4le;
  cfg.sequence.tau_s_us = 3.25;
  cfg.sequence.rng_seed = 123456789;
  cfg.noise.excess_noise = 0.125;
  cfg.noise.visibility_separate = true;
  cfg.decay = DecayScaling(59.2, 10.0, 20.0, DecayScaling::Kind::Amplitude);
  cfg.analysis.window_us = 4.0;
  cfg.analysis.window_function = WindowFn::Hann;
  cfg.analysis.bootstrap = true;
  cfg.background_shots = 512;
  cfg.out_dir = "some/dir";

  const ExperimentConfig back = parse_config_text(config_to_text(cfg));
  CHECK(config_equal(cfg, back));
  CHECK(back.sequence.kind == SequenceKind::I4le);
  CHECK(back.sequence.tau_s_us == 3.25);
  CHECK(back.noise.visibility_separate);
  CHECK(back.decay.kind == DecayScaling::Kind::Amplitude);
  CHECK(back.analysis.window_function == WindowFn::Hann);
  CHECK(back.background_shots == 512);
  CHECK(back.out_dir == "some/dir");
  CHECK(config_hash(cfg) == config_hash(back));
}

TEST_CASE("config json round trip") {
  ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  cfg.sequence.gain = GainFeature(1.6, 0.11, 0.0186);
  cfg.sequence.n_shots = 4321;
  const ExperimentConfig back = parse_config_json(config_to_json(cfg));
  CHECK(config_equal(cfg, back));
}

TEST_CASE("config hash tracks every field") {
  const ExperimentConfig base = ExperimentConfig::paper_defaults();
  ExperimentConfig changed = base;
  changed.sequence.rng_seed += 1;
  CHECK(config_hash(base) != config_hash(changed));
  changed = base;
  changed.analysis.b_grid_step = 0.02;
  CHECK(config_hash(base) != config_hash(changed));
}

TEST_CASE("unknown keys are rejected with their location") {
  const std::string text =
      "format_version = 1\n"
      "[sequence]\n"
      "kind = RASE\n"
      "frobnicate = 3\n";
  try {
    parse_config_text(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 4") != std::string::npos);
    CHECK(what.find("frobnicate") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("format_version = 99\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[sequence]\nkind = WAT\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[sequence]\nn_shots = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("junk line\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("{\"sequence\": {\"frobnicate\": 1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
}

TEST_CASE("invalid field combinations fail validation on load") {
  CHECK_THROWS_AS(parse_config_text("[sequence]\nsample_rate_hz = 1e6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[gain]\ntransmission_l = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[noise]\nvisibility = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[analysis]\nb_grid_step = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[levels]\ng1_e1 = 0\n"), ConfigError);
}

TEST_CASE("paper defaults carry the published run parameters") {
  const ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  CHECK(cfg.sequence.gain.alpha_l == 0.8);
  CHECK(cfg.sequence.gain.transmission_l == 0.11);
  CHECK(cfg.sequence.ase_window_us == 10.0);
  CHECK(cfg.sequence.rase_window_us == 10.0);
  CHECK(cfg.sequence.tau_s_us == 5.0);
  CHECK(cfg.sequence.pi1_len_us == 1.7);
  CHECK(cfg.sequence.pi2_len_us == 2.5);
  CHECK(cfg.sequence.n_shots == 9000);
  CHECK(cfg.noise.visibility == 0.90);
  CHECK(cfg.decay.tau_us == 59.2);
  CHECK(cfg.decay.t_target_us == 20.0);

  const LevelScheme& lv = cfg.levels;
  REQUIRE(lv.transitions.size() == 5);
  const auto strength = [&](const char* g, const char* e) {
    for (const auto& t : lv.transitions) {
      if (t.ground == g && t.excited == e) return t.strength;
    }
    return -1.0;
  };
  CHECK(strength("g1", "e1") == 0.05);
  CHECK(strength("g2", "e1") == 0.40);
  CHECK(strength("g3", "e1") == 0.55);
  CHECK(strength("g2", "e2") == 0.60);
  CHECK(strength("g3", "e2") == 0.38);
  CHECK_NOTHROW(lv.validate());

  LevelScheme dup = lv;
  dup.transitions.push_back({"g1", "e1", 0.3});
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

#ifdef RASE_SOURCE_DIR
TEST_CASE("shipped defaults file matches the built-in defaults") {
  const fs::path path = fs::path(RASE_SOURCE_DIR) / "configs" / "paper_defaults.cfg";
  REQUIRE(fs::exists(path));
  const ExperimentConfig from_file = load_config_file(path.string());
  CHECK(config_equal(from_file, ExperimentConfig::paper_defaults()));
}
#endif

TEST_CASE("record dump round trip and format guards") {
  const fs::path dir = temp_dir("dump");
  ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  cfg.sequence.n_shots = 5;

  RunDump dump;
  dump.header_json = config_to_json(cfg);
  dump.records = synthesize_run(cfg.sequence, cfg.noise);
  const std::string path = (dir / "t.rdump").string();
  write_dump_file(path, dump);

  const RunDump back = read_dump_file(path);
  CHECK(back.header_json == dump.header_json);
  REQUIRE(back.records.size() == dump.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].shot_id == dump.records[i].shot_id);
    CHECK(back.records[i].truth.interferometer_phase_rad ==
          dump.records[i].truth.interferometer_phase_rad);
    CHECK(back.records[i].trace == dump.records[i].trace);
  }

  SUBCASE("bad magic") {
    std::ofstream out(dir / "junk.rdump", std::ios::binary);
    out << "NOTADUMPxxxxxxxxxxxxxxxx";
    out.close();
    CHECK_THROWS_AS(read_dump_file((dir / "junk.rdump").string()), DataFormatError);
  }

  SUBCASE("future version asks for migration") {
    RunDump future = dump;
    future.format_version = 2;
    const std::string fpath = (dir / "future.rdump").string();
    write_dump_file(fpath, future);
    try {
      read_dump_file(fpath);
      FAIL("expected DataFormatError");
    } catch (const DataFormatError& e) {
      CHECK(std::string(e.what()).find("migration") != std::string::npos);
    }
  }

  SUBCASE("truncation") {
    const auto bytes = slurp_bytes(path);
    std::ofstream out(dir / "trunc.rdump", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(read_dump_file((dir / "trunc.rdump").string()), DataFormatError);
  }
}

TEST_CASE("cmd_curves writes the model tables") {
  const fs::path dir = temp_dir("curves");
  const ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  cmd_curves(cfg, dir.string());

  const std::string var = slurp(dir / "variance_vs_alpha.csv");
  CHECK(var.find("alpha_l,ase_variance") == 0);
  CHECK(var.find("\n0,1\n") != std::string::npos);  // zero depth row

  const std::string eff = slurp(dir / "efficiency_vs_alpha.csv");
  CHECK(eff.find("\n1,0.341132205394,1\n") != std::string::npos);

  const std::string insep = slurp(dir / "insep_vs_b.csv");
  const GaussianState st = lossy_tmsv_state(cfg.gain());
  // Endpoint rows: b = 0 is twice the RASE arm variance, b = 1 twice the ASE
  // arm variance.
  CHECK(insep.find("\n0,2.038") != std::string::npos);
  CHECK(insep.find("\n1,2.539") != std::string::npos);
  CHECK(quadrature_stats(st, 1).var_x == doctest::Approx(1.019278).epsilon(1e-5));
  CHECK(quadrature_stats(st, 0).var_x == doctest::Approx(1.269619).epsilon(1e-5));

  const std::string levels = slurp(dir / "level_scheme.csv");
  CHECK(levels.find("g2,e2,0.6") != std::string::npos);
}

TEST_CASE("cmd_simulate is byte-reproducible; cmd_analyze consumes the dump") {
  ExperimentConfig cfg = ExperimentConfig::paper_defaults();
  cfg.sequence.n_shots = 40;
  cfg.background_shots = 40;

  const fs::path d1 = temp_dir("sim1");
  const fs::path d2 = temp_dir("sim2");
  const SimulateResult r1 = cmd_simulate(cfg, d1.string());
  const SimulateResult r2 = cmd_simulate(cfg, d2.string());
  CHECK(slurp_bytes(r1.dump_path) == slurp_bytes(r2.dump_path));
  CHECK(slurp_bytes(r1.background_path) == slurp_bytes(r2.background_path));
  CHECK(r1.config_hash == r2.config_hash);

  // Manifests may differ only in the timestamp line.
  const std::string m1 = slurp(r1.manifest_path);
  CHECK(m1.find("config_hash") != std::string::npos);
  CHECK(m1.find("dump_fnv64") != std::string::npos);

  const fs::path an = temp_dir("an");
  AnalyzeOverrides overrides;
  overrides.background_dump = r1.background_path;
  cmd_analyze(r1.dump_path, overrides, an.string());
  CHECK(fs::exists(an / "quadratures.csv"));
  CHECK(fs::exists(an / "summary.csv"));
  CHECK(fs::exists(an / "insep_curve.csv"));
  CHECK(fs::exists(an / "insep_minimum.csv"));
  const std::string quads = slurp(an / "quadratures.csv");
  CHECK(quads.find("shot_id,field,x,p") == 0);
}

TEST_CASE("cmd_fit recovers the transmission from a noiseless table") {
  const fs::path dir = temp_dir("fit");
  const fs::path table = dir / "var.csv";
  {
    std::ofstream out(table);
    out << std::setprecision(17) << "alpha_l,variance\n";
    for (double a : {0.4, 0.8, 1.4, 2.0, 2.3}) {
      out << a << "," << ase_variance(GainFeature(a, 0.11)) << "\n";
    }
  }
  cmd_fit(table.string(), dir.string());
  const std::string fit = slurp(dir / "loss_fit.csv");
  CHECK(fit.find("\n0.11,") != std::string::npos);

  const std::string derived = slurp(dir / "alpha_derived.csv");
  CHECK(derived.find("alpha_probe,variance,alpha_from_ase,untrusted_alpha") == 0);
  // Depths at or above 2.0 carry the untrusted flag.
  CHECK(derived.find("\n2,") != std::string::npos);
  std::istringstream lines(derived);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const bool flagged = line.back() == '1';
    const double alpha = std::stod(line.substr(0, line.find(',')));
    CHECK(flagged == (alpha >= 2.0));
  }
}

TEST_CASE("cmd_fit rejects unusable tables") {
  const fs::path dir = temp_dir("fitbad");
  {
    std::ofstream out(dir / "empty.csv");
    out << "alpha_l,variance\n";
  }
  CHECK_THROWS_AS(cmd_fit((dir / "empty.csv").string(), dir.string()), ConfigError);
  {
    std::ofstream out(dir / "head.csv");
    out << "foo,bar\n1,2\n";
  }
  CHECK_THROWS_AS(cmd_fit((dir / "head.csv").string(), dir.string()), DataFormatError);
  {
    std::ofstream out(dir / "degenerate.csv");
    out << "alpha_l,variance\n0.8,1.2\n0.8,1.25\n";
  }
  CHECK_THROWS_AS(cmd_fit((dir / "degenerate.csv").string(), dir.string()), NumericalError);
}

#ifdef RASE_CLI_PATH
TEST_CASE("CLI exit codes") {
  const fs::path dir = temp_dir("cli");

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("curves --out " + (dir / "c").string()) == 0);
  CHECK(run_cli("") == 2);                    // missing subcommand
  CHECK(run_cli("nosuchcommand") == 2);       // unknown subcommand
  CHECK(run_cli("analyze missing.rdump") == 2);  // nonexistent input

  {
    std::ofstream out(dir / "bad.cfg");
    out << "[sequence]\nfrobnicate = 1\n";
  }
  CHECK(run_cli("curves --config " + (dir / "bad.cfg").string()) == 2);

  {
    std::ofstream out(dir / "junk.rdump", std::ios::binary);
    out << "garbage bytes here, long enough to read a header from";
  }
  CHECK(run_cli("analyze " + (dir / "junk.rdump").string()) == 3);

  {
    std::ofstream out(dir / "degenerate.csv");
    out << "alpha_l,variance\n0.8,1.2\n0.8,1.25\n";
  }
  CHECK(run_cli("fit " + (dir / "degenerate.csv").string() + " --out " + (dir / "f").string()) == 4);

  CHECK(run_cli("simulate --shots 5 --out " + (dir / "s").string()) == 0);
  CHECK(run_cli("analyze " + (dir / "s" / "run.rdump").string() + " --out " +
                (dir / "a").string()) == 0);
}
#endif
