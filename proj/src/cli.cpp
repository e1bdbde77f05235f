#include "tauber/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "tauber/asymptotics.hpp"
#include "tauber/combining.hpp"
#include "tauber/montecarlo.hpp"
#include "tauber/regvar.hpp"

namespace tauber::cli {

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::uint64_t draws = 10'000'000;
  double tol = kExactRelTol;
  unsigned threads = 0;
  std::string out;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

class Csv {
 public:
  explicit Csv(std::ostream& os) : os_(os) {}

  void meta(const std::string& key, const std::string& value) {
    os_ << "# " << key << ": " << value << '\n';
  }
  void meta(const std::string& key, double value) { meta(key, fmt(value)); }
  void header() { os_ << "snr_db,value,method,ci_halfwidth\n"; }
  void row(double db, double value, std::string_view method, std::optional<double> ci = {}) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      os_ << "# skipped " << method << " at " << fmt(db) << " dB: value " << fmt(value) << '\n';
      return;
    }
    os_ << fmt(db) << ',' << fmt(value) << ',' << method << ',' << (ci ? fmt(*ci) : "") << '\n';
  }

 private:
  std::ostream& os_;
};

// Writes to --out when given, else to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void provenance(Csv& csv, const std::string& command) {
  csv.meta("tauber", kVersion);
  csv.meta("command", command);
}

McConfig mc_config(const Globals& g) {
  McConfig cfg;
  cfg.seed = g.seed;
  cfg.draws = g.draws;
  cfg.threads = g.threads;
  return cfg;
}

void describe(Csv& csv, const AsymptoticEstimate& e) {
  csv.meta("d", e.exponent);
  csv.meta("C1", e.multiplier);
  csv.meta("C2", e.scale);
  csv.meta("A", e.coefficient);
}

// SNR (dB) where fn crosses `target`, searched on [-10, 80] dB.
double crossing(const RealFn& value_at_rho, double target = 1e-6) {
  return solve_crossing_db([&](double db) { return value_at_rho(db_to_linear(db)); }, target,
                           -10.0, 80.0, 1e-6);
}

// ---------------------------------------------------------------------------

struct FigureSeries {
  std::string file;
  std::string title;
  RealFn asymptote;
  RealFn exact;
  RealFn wang;  // empty for combining figures
  Sampler sampler;
  const ErrorRateModel* model = nullptr;
  std::vector<std::pair<std::string, std::string>> meta;
};

void write_series(const FigureSeries& s, const std::vector<double>& grid, const Globals& g,
                  bool with_mc, const std::filesystem::path& dir, std::ostream& log) {
  const auto path = dir / s.file;
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file '" + path.string() + "'");
  Csv csv(file);
  provenance(csv, "figure");
  csv.meta("series", s.title);
  for (const auto& [k, v] : s.meta) csv.meta(k, v);
  const double gap = crossing(s.asymptote) - crossing(s.exact);
  csv.meta("gap_db_at_1e-6", gap);
  if (with_mc) csv.meta("seed", std::to_string(g.seed));
  csv.header();
  for (double db : grid) csv.row(db, s.exact(db_to_linear(db)), "exact");
  for (double db : grid) csv.row(db, s.asymptote(db_to_linear(db)), "asymptote");
  if (s.wang)
    for (double db : grid) csv.row(db, s.wang(db_to_linear(db)), "wang");
  if (with_mc) {
    for (const auto& p : mc_curve(*s.model, s.sampler, grid, mc_config(g), true))
      csv.row(p.snr_db, p.result.estimate, "montecarlo", p.result.ci_halfwidth);
  }
  log << path.string() << ": asymptote-exact gap at 1e-6 = " << fmt(gap) << " dB\n";
}

void cmd_figure(int n, const std::string& snr, bool no_mc, const Globals& g, std::ostream& out) {
  if (n < 1 || n > 4) throw std::invalid_argument("figure: number must be 1, 2, 3 or 4");
  const std::filesystem::path dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
  std::filesystem::create_directories(dir);
  const auto grid = parse_grid(snr);
  const ErrorRateModel bpsk = bpsk_ber();
  const ErrorRateModel dpsk = dpsk_ber();
  const std::string tag = "fig" + std::to_string(n) + "_";

  if (n <= 2) {
    const double m = n == 1 ? 2.0 : 3.0;
    const auto ch = std::make_shared<ChannelModel>(make_channel("nakagami:m=" + fmt(m)));
    const double a = std::pow(m, m) / gamma_fn(m);
    for (const ErrorRateModel* model : {&dpsk, &bpsk}) {
      const auto est = asymptote(*model, *ch);
      const WangEstimate w = model == &dpsk ? wang_estimate_exponential(a, m, 1.0, 0.5)
                                            : wang_estimate(a, m, 2.0, 1.0);
      FigureSeries s;
      s.file = tag + model->label() + ".csv";
      s.title = model->label() + " over " + ch->name;
      s.asymptote = est;
      s.exact = [model, ch, &g](double rho) { return exact_average(*model, *ch, rho, g.tol); };
      s.wang = w;
      s.sampler = ch->sampler;
      s.model = model;
      s.meta = {{"d", fmt(est.exponent)}, {"C1", fmt(est.multiplier)}, {"C2", fmt(est.scale)},
                {"A", fmt(est.coefficient)}, {"wang_gain", fmt(w.array_gain)}};
      write_series(s, grid, g, !no_mc, dir, out);
    }
    return;
  }

  std::vector<ChannelModel> branches;
  for (const char* m : {"0.5", "1", "1.5"}) branches.push_back(make_channel(std::string("nakagami:m=") + m));
  const std::vector<Scheme> schemes =
      n == 3 ? std::vector<Scheme>{Scheme::mrc, Scheme::sc} : std::vector<Scheme>{Scheme::egc};
  for (Scheme sc : schemes) {
    const auto cc = std::make_shared<CombinedChannel>(combine(sc, branches));
    const auto est = combined_asymptote(bpsk, *cc);
    FigureSeries s;
    s.file = tag + to_string(sc) + ".csv";
    s.title = "bpsk over " + cc->label;
    s.asymptote = est;
    const double tol = std::max(g.tol, 1e-9);
    s.exact = [&bpsk, cc, tol](double rho) {
      return combined_exact_average_quadrature(bpsk, *cc, rho, tol);
    };
    s.sampler = cc->sampler;
    s.model = &bpsk;
    s.meta = {{"d_c", fmt(cc->exponent)}, {"prefactor", fmt(cc->prefactor)},
              {"A", fmt(est.coefficient)}};
    write_series(s, grid, g, !no_mc, dir, out);
  }
}

void cmd_exponent(const std::string& channel, std::ostream& out) {
  const ChannelModel ch = make_channel(channel);
  const ExponentReport r = exponent_from_cdf(ch.cdf, {1e-8, 1e-5});
  out << "channel: " << ch.name << '\n';
  if (r.rapidly_varying) {
    out << "estimate: rapidly varying (d=inf)\n";
  } else {
    out << "estimate: " << fmt(r.estimate) << " (stderr " << fmt(r.stderr_) << ")\n";
  }
  out << "method: " << to_string(r.method) << '\n';
  out << "window: [" << fmt(r.window.first) << ", " << fmt(r.window.second) << "]\n";
  out << "ratio_estimate: " << fmt(r.ratio_estimate) << '\n';
  out << "window_slopes: " << fmt(r.window_slopes[0]) << ' ' << fmt(r.window_slopes[1]) << ' '
      << fmt(r.window_slopes[2]) << '\n';
  if (r.rapidly_varying || !ch.finite_exponent()) {
    out << "tauberian: skipped (rapidly varying)\n";
    return;
  }
  const TauberianReport t = tauberian_check(ch);
  out << "tauberian: " << (t.pass ? "pass" : "fail") << " (cdf " << fmt(t.cdf_side.estimate)
      << ", transform " << fmt(t.transform_exponent) << ", tol " << fmt(t.tolerance) << ")\n";
}

void cmd_tauberian(const std::string& channel, std::ostream& out) {
  const ChannelModel ch = make_channel(channel);
  const TauberianReport t = tauberian_check(ch);
  out << "channel: " << ch.name << '\n';
  out << "cdf_exponent: " << fmt(t.cdf_side.estimate) << " (stderr " << fmt(t.cdf_side.stderr_) << ")\n";
  out << "transform_exponent: " << fmt(t.transform_exponent) << " (stderr "
      << fmt(t.transform_stderr) << ")\n";
  out << "tolerance: " << fmt(t.tolerance) << '\n';
  if (t.ratio_checked)
    out << "ratio_at_1e6: " << fmt(t.ratio) << (t.ratio_ok ? " (ok)" : " (outside [0.98, 1.02])") << '\n';
  else
    out << "ratio_at_1e6: skipped (divergent slowly varying part)\n";
  out << "result: " << (t.pass ? "pass" : "fail") << '\n';
}

void cmd_offset(const std::string& channel, const std::string& mod1, const std::string& mod2,
                const Globals& g, std::ostream& out) {
  const ChannelModel ch = make_channel(channel);
  const ErrorRateModel m1 = make_modulation(mod1);
  const ErrorRateModel m2 = make_modulation(mod2);
  const double off = snr_offset_db(asymptote(m1, ch), asymptote(m2, ch));
  const double gap = crossing([&](double rho) { return exact_average(m1, ch, rho, g.tol); }) -
                     crossing([&](double rho) { return exact_average(m2, ch, rho, g.tol); });
  out << "channel: " << ch.name << '\n';
  out << "offset_db: " << fmt(off) << '\n';
  out << "empirical_gap_db_at_1e-6: " << fmt(gap) << '\n';
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw SpecError("bad SNR grid '" + text + "' (expected lo:hi:step in dB)");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw SpecError("bad SNR grid '" + text + "' (expected lo:hi:step with hi >= lo, step > 0)");
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  if (n > 100000) throw SpecError("SNR grid '" + text + "' has too many points");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = parts[0] + static_cast<double>(i) * parts[2];
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymptotic average error rates over fading channels", "tauber"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--seed", g.seed, "Monte Carlo master seed");
  app.add_option("--draws", g.draws, "Monte Carlo draws per point")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "relative tolerance of quadrature oracles")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");
  app.add_option("--out", g.out, "output path (figure: directory); default stdout");

  std::string channel = "rayleigh", mod = "bpsk", mod2 = "dpsk", snr = "0:40:2";
  std::string scheme = "mrc", branches = "rayleigh,rayleigh";
  double importance = 0.0;
  int figure = 1;
  bool no_mc = false, with_mc = false;

  auto with_globals = [](CLI::App* sub) { sub->fallthrough(); return sub; };
  auto* c_asym = with_globals(app.add_subcommand("asymptote", "asymptotic average error rate"));
  auto* c_exact = with_globals(app.add_subcommand("exact", "exact average by quadrature"));
  auto* c_mc = with_globals(app.add_subcommand("mc", "Monte Carlo average"));
  for (auto* c : {c_asym, c_exact, c_mc}) {
    c->add_option("--channel", channel, "channel descriptor, e.g. nakagami:m=2")->required();
    c->add_option("--mod", mod, "modulation: dpsk, bpsk, mpsk:M=8, mqam:M=16")->required();
    c->add_option("--snr", snr, "SNR grid lo:hi:step in dB");
  }
  c_mc->add_option("--importance", importance, "share of draws forced into the deep-fade region");

  auto* c_fig = with_globals(app.add_subcommand("figure", "write figure curves as CSV files"));
  c_fig->add_option("number", figure, "figure number 1-4")->required();
  c_fig->add_option("--snr", snr, "SNR grid lo:hi:step in dB");
  c_fig->add_flag("--no-mc", no_mc, "skip Monte Carlo columns");

  auto* c_expo = with_globals(app.add_subcommand("exponent", "estimate the variation exponent"));
  c_expo->add_option("--channel", channel)->required();
  auto* c_taub = with_globals(app.add_subcommand("tauberian", "CDF/transform exponent check"));
  c_taub->add_option("--channel", channel)->required();

  auto* c_off = with_globals(app.add_subcommand("offset", "asymptotic SNR offset between modulations"));
  c_off->add_option("--channel", channel)->required();
  c_off->add_option("--mod1", mod)->required();
  c_off->add_option("--mod2", mod2)->required();

  auto* c_comb = with_globals(app.add_subcommand("combine", "diversity-combined asymptote"));
  c_comb->add_option("--scheme", scheme, "mrc, egc or sc")->required();
  c_comb->add_option("--branches", branches, "comma-separated branch channels")->required();
  c_comb->add_option("--mod", mod)->required();
  c_comb->add_option("--snr", snr, "SNR grid lo:hi:step in dB");
  c_comb->add_flag("--with-mc", with_mc, "add Monte Carlo rows");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "tauber " << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (c_fig->parsed()) {
      if (c_fig->count("--snr") == 0) snr = figure <= 2 ? "0:40:1" : "0:30:1";
      cmd_figure(figure, snr, no_mc, g, out);
      return 0;
    }
    if (c_expo->parsed()) {
      Sink sink(g.out, out);
      cmd_exponent(channel, sink.get());
      return 0;
    }
    if (c_taub->parsed()) {
      Sink sink(g.out, out);
      cmd_tauberian(channel, sink.get());
      return 0;
    }
    if (c_off->parsed()) {
      Sink sink(g.out, out);
      cmd_offset(channel, mod, mod2, g, sink.get());
      return 0;
    }

    const auto grid = parse_grid(snr);
    if (c_comb->parsed()) {
      std::vector<ChannelModel> models;
      for (const auto& spec : parse_branch_list(branches)) models.push_back(make_channel(spec));
      const CombinedChannel cc = combine(parse_scheme(scheme), std::move(models));
      const ErrorRateModel model = make_modulation(mod);
      const auto est = combined_asymptote(model, cc);
      Sink sink(g.out, out);
      Csv csv(sink.get());
      provenance(csv, "combine");
      csv.meta("channel", cc.label);
      csv.meta("mod", model.label());
      csv.meta("prefactor", cc.prefactor);
      describe(csv, est);
      // Leading rho^{-d_c} coefficient, when every branch has a pure power law.
      bool pure = true;
      double lead = est.coefficient * cc.prefactor;
      for (const auto& b : cc.branches) {
        pure = pure && !b.divergent_slowly_varying;
        if (pure) lead *= cdf_asymptote(b, 1.0);
      }
      if (pure) csv.meta("rho_coefficient", lead);
      if (with_mc) csv.meta("seed", std::to_string(g.seed));
      csv.header();
      for (double db : grid) csv.row(db, est(db_to_linear(db)), "asymptote");
      if (with_mc)
        for (const auto& p : mc_curve(model, cc.sampler, grid, mc_config(g), true))
          csv.row(p.snr_db, p.result.estimate, "montecarlo", p.result.ci_halfwidth);
      return 0;
    }

    const ChannelModel ch = make_channel(channel);
    const ErrorRateModel model = make_modulation(mod);
    if (c_asym->parsed()) {
      const auto est = asymptote(model, ch);
      Sink sink(g.out, out);
      Csv csv(sink.get());
      provenance(csv, "asymptote");
      csv.meta("channel", ch.name);
      csv.meta("mod", model.label());
      csv.meta("class", std::string(to_string(model.kind())));
      describe(csv, est);
      csv.header();
      for (double db : grid) csv.row(db, est(db_to_linear(db)), "asymptote");
    } else if (c_exact->parsed()) {
      std::vector<double> values;
      for (double db : grid) values.push_back(exact_average(model, ch, db_to_linear(db), g.tol));
      Sink sink(g.out, out);
      Csv csv(sink.get());
      provenance(csv, "exact");
      csv.meta("channel", ch.name);
      csv.meta("mod", model.label());
      csv.meta("rel_tol", g.tol);
      csv.header();
      for (std::size_t i = 0; i < grid.size(); ++i) csv.row(grid[i], values[i], "exact");
    } else if (c_mc->parsed()) {
      McConfig cfg = mc_config(g);
      cfg.importance_fraction = importance;
      std::vector<McCurvePoint> pts;
      if (importance > 0.0) {
        for (double db : grid) pts.push_back({db, mc_average_error(model, ch, db_to_linear(db), cfg)});
      } else {
        pts = mc_curve(model, ch.sampler, grid, cfg, true);
      }
      Sink sink(g.out, out);
      Csv csv(sink.get());
      provenance(csv, "mc");
      csv.meta("channel", ch.name);
      csv.meta("mod", model.label());
      csv.meta("seed", std::to_string(g.seed));
      csv.meta("draws", std::to_string(g.draws));
      csv.header();
      for (const auto& p : pts) csv.row(p.snr_db, p.result.estimate, "montecarlo", p.result.ci_halfwidth);
    }
    return 0;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    err << "error: " << msg << '\n';
    return 1;
  }
}

}  // namespace tauber::cli
