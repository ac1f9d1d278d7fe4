#pragma once

// Command-line front end. Exit codes: 0 success, 1 invalid input, 2 domain/runtime failure.

#include <qkdrates/qkdrates.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qkdrates::cli {

/// "3", "2,3,5" or "2..7".
inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse '" + s + "' as an integer in list '" + text + "'");
    }
    if (pos != s.size()) throw ValidationError("cannot parse '" + s + "' as an integer in list '" + text + "'");
    return v;
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const int lo = to_int(item.substr(0, dots));
      const int hi = to_int(item.substr(dots + 2));
      detail::require(lo <= hi, "range '" + item + "' is empty");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(to_int(item));
    }
  }
  detail::require(!out.empty(), "empty list '" + text + "'");
  return out;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::int64_t as_count(double v, const std::string& name) {
  detail::require(std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e18, name + " must be an integer");
  return static_cast<std::int64_t>(v);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Flat `key = value` file; blank lines and lines starting with '#' are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

/// Opens `path` for writing, or returns `fallback` for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Options {
  std::string config;
  // shared
  std::string d_list = "2..7";
  int d = 7;
  int mubs = 2;
  double q = 0.05;
  double eps = 1e-10;
  int threads = 0;
  std::string out = "-";
  // asymptotic
  double qmax = 0.5;
  double step = 0.001;
  // finite
  double nmin = 1e3;
  double nmax = 1e9;
  int points = 60;
  std::string bounds;
  std::string svg;
  double f_ec = 1.0;
  // simulate
  double rounds = 1e6;
  std::uint64_t seed = 0;
  std::string bound = "second-order";
  double key_prob = 0.9;
  // render
  int grid = 512;
  double extent = 5.0;
  int tile = 128;
  std::string format = "png";
  std::string palette = "viridis";
};

inline void cmd_mub_check(const Options& o, std::ostream& out) {
  detail::require(o.d >= 2, "d must be at least 2");
  std::vector<MubBasis> bases;
  for (Basis b : kAllBases) bases.push_back(mub_eigenbasis(o.d, b));
  out << "basis_a,basis_b,i,j,deviation\n";
  for (std::size_t a = 0; a < bases.size(); ++a)
    for (std::size_t b = a + 1; b < bases.size(); ++b) {
      const Eigen::MatrixXd dev = unbiasedness_deviation(bases[a], bases[b]);
      for (int i = 0; i < o.d; ++i)
        for (int j = 0; j < o.d; ++j)
          out << to_string(bases[a].id) << ',' << to_string(bases[b].id) << ',' << i << ',' << j << ','
              << format_double(dev(i, j)) << '\n';
    }
}

inline void cmd_channel(const Options& o, std::ostream& out) {
  const ChannelCoefficients c = solve_channel(o.d, o.mubs, o.q);
  nlohmann::ordered_json j;
  for (int a = 0; a < o.d; ++a)
    for (int b = 0; b < o.d; ++b) j[std::to_string(a) + "," + std::to_string(b)] = c.at(a, b);
  out << j.dump(2) << '\n';
}

inline void cmd_entropy(const Options& o, std::ostream& out) {
  validate_family(o.d, o.mubs);
  const ConditionalEntropy ce = key_entropy(o.d, o.mubs, o.q);
  nlohmann::ordered_json j{{"d", o.d}, {"mubs", o.mubs}, {"Q", o.q}, {"H", ce.h}, {"V", ce.v}};
  out << j.dump(2) << '\n';
}

inline void cmd_asymptotic(const Options& o, std::ostream& out) {
  validate_family(2, o.mubs);
  const auto ds = parse_int_list(o.d_list);
  for (int d : ds) validate_family(d, o.mubs);
  const auto grid = make_q_grid(o.qmax, o.step);
  const auto rows = sweep_asymptotic(ds, o.mubs, grid, resolve_threads(o.threads));
  Sink sink(o.out, out);
  auto& s = sink.get();
  s << "d,mubs,Q,rate,lambda_q\n";
  for (const auto& r : rows)
    s << r.d << ',' << r.mubs << ',' << format_double(r.q) << ',' << format_double(r.rate) << ','
      << format_double(r.lambda_q) << '\n';
}

inline void cmd_threshold(const Options& o, std::ostream& out) {
  validate_family(2, o.mubs);
  const auto ds = parse_int_list(o.d_list);
  for (int d : ds) validate_family(d, o.mubs);
  if (ds.size() == 1) {
    out << format_double(threshold(ds[0], o.mubs), 12) << '\n';
    return;
  }
  out << "d,mubs,threshold\n";
  for (int d : ds) out << d << ',' << o.mubs << ',' << format_double(threshold(d, o.mubs), 12) << '\n';
}

inline void cmd_finite(const Options& o, std::ostream& out) {
  validate_family(2, o.mubs);
  const auto ds = parse_int_list(o.d_list);
  for (int d : ds) validate_family(d, o.mubs);
  std::vector<Bound> bounds;
  if (o.bounds.empty())
    bounds = applicable_bounds(o.mubs);
  else
    for (const auto& b : split(o.bounds, ',')) bounds.push_back(parse_bound(b));
  for (Bound b : bounds) validate_bound(b, o.mubs);
  const auto ngrid = make_n_grid(o.nmin, o.nmax, o.points);
  const auto rows = sweep_finite(ds, o.mubs, o.q, o.eps, ngrid, bounds, resolve_threads(o.threads), o.f_ec);

  {
    Sink sink(o.out, out);
    auto& s = sink.get();
    s << "d,mubs,bound,Q,eps,N,k_opt,nu,rate,secret_bits\n";
    for (const auto& r : rows)
      s << r.params.d << ',' << r.params.mubs << ',' << to_string(r.bound) << ',' << format_double(r.params.q) << ','
        << format_double(r.params.eps) << ',' << r.params.n_sifted << ',' << r.k_opt << ',' << format_double(r.nu)
        << ',' << format_double(r.rate) << ',' << format_double(r.secret_bits) << '\n';
  }

  if (!o.svg.empty()) {
    SemilogPlot plot{"Finite-key rate, " + std::to_string(o.mubs) + " bases, Q=" + format_double(o.q) +
                         ", eps=" + format_double(o.eps),
                     "sifted length N", "rate [bits per sifted symbol]", {}};
    std::map<std::pair<int, Bound>, PlotSeries> series;
    for (const auto& r : rows) {
      auto key = std::make_pair(r.params.d, r.bound);
      auto [it, fresh] = series.try_emplace(key);
      if (fresh) {
        const auto di = static_cast<std::size_t>(std::find(ds.begin(), ds.end(), r.params.d) - ds.begin());
        it->second.label = "d=" + std::to_string(r.params.d) + " " + std::string(to_string(r.bound));
        it->second.colour = series_colours()[di % series_colours().size()];
        it->second.dash = r.bound == Bound::renner ? "2,3" : r.bound == Bound::second_order ? "6,3" : "";
      }
      it->second.points.emplace_back(static_cast<double>(r.params.n_sifted), r.rate);
    }
    for (auto& [k, s] : series) plot.series.push_back(std::move(s));
    write_svg(plot, o.svg);
  }
}

inline nlohmann::ordered_json to_json(const SessionReport& r) {
  nlohmann::ordered_json tallies = nlohmann::ordered_json::array();
  for (const auto& t : r.tallies)
    tallies.push_back({{"basis", std::string(to_string(t.basis))},
                       {"sifted", t.sifted},
                       {"errors", t.errors},
                       {"error_rate", t.rate()}});
  return {{"rounds", r.rounds},       {"N_sifted", r.n_sifted},
          {"k_used", r.k_used},       {"empirical_Q", r.empirical_q},
          {"nu", r.nu},               {"chosen_bound", std::string(to_string(r.chosen_bound))},
          {"feasible", r.feasible},   {"rate", r.rate},
          {"secret_bits", r.secret_bits}, {"tallies", tallies}};
}

inline void cmd_simulate(const Options& o, std::ostream& out) {
  ProtocolConfig cfg;
  cfg.d = o.d;
  cfg.mubs = o.mubs;
  cfg.q = o.q;
  cfg.eps = o.eps;
  cfg.rounds = as_count(o.rounds, "rounds");
  cfg.key_basis_prob = o.key_prob;
  cfg.seed = o.seed;
  cfg.f_ec = o.f_ec;
  validate_family(cfg.d, cfg.mubs);
  cfg.bound = parse_bound(o.bound);
  const SessionReport rep = run_session(cfg);
  nlohmann::ordered_json j = to_json(rep);
  j = nlohmann::ordered_json{{"d", cfg.d},   {"mubs", cfg.mubs},         {"Q", cfg.q},
                             {"eps", cfg.eps}, {"key_basis_prob", cfg.key_basis_prob}, {"seed", cfg.seed},
                             {"report", j}};
  Sink sink(o.out, out);
  sink.get() << j.dump(2) << '\n';
}

inline void cmd_render(const Options& o, std::ostream& out) {
  detail::require(o.out != "-", "render-mubs needs an output directory (--out dir/)");
  SheetOptions opt;
  opt.grid = GridSpec{o.grid, o.grid, o.extent};
  opt.tile = o.tile;
  opt.format = parse_image_format(o.format);
  opt.palette = parse_palette(o.palette);
  opt.threads = resolve_threads(o.threads);
  const SheetReport rep = render_mub_sheet(o.d, o.out, opt);
  out << "wrote " << rep.tiles << " tiles for d=" << rep.d << " and " << rep.montage.string() << '\n';
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Secret-key rates for qudit QKD with two or three mutually unbiased bases", "qkdrates"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Flat key=value file supplying options not given on the command line");
  };

  auto* mub = app.add_subcommand("mub-check", "Print the unbiasedness deviation matrices as CSV");
  mub->add_option("d", o.d, "Dimension")->required();

  auto* chan = app.add_subcommand("channel", "Print the channel coefficients as JSON");
  chan->add_option("d", o.d, "Dimension")->required();
  chan->add_option("mubs", o.mubs, "Number of bases (2 or 3)")->required();
  chan->add_option("Q", o.q, "Error rate")->required();

  auto* ent = app.add_subcommand("entropy", "Print H(X|E) and V(X|E) as JSON");
  ent->add_option("d", o.d, "Dimension")->required();
  ent->add_option("mubs", o.mubs, "Number of bases (2 or 3)")->required();
  ent->add_option("Q", o.q, "Error rate")->required();

  auto* asym = app.add_subcommand("asymptotic", "Asymptotic rate sweep as CSV");
  asym->add_option("--d", o.d_list, "Dimensions, e.g. 2..7 or 2,3")->capture_default_str();
  asym->add_option("--mubs", o.mubs, "Number of bases (2 or 3)")->required();
  asym->add_option("--qmax", o.qmax, "Largest error rate")->capture_default_str();
  asym->add_option("--step", o.step, "Error-rate step")->capture_default_str();
  asym->add_option("--out", o.out, "Output CSV, - for stdout")->capture_default_str();
  asym->add_option("--threads", o.threads, "Worker threads, 0 = auto")->capture_default_str();
  add_common(asym);

  auto* thr = app.add_subcommand("threshold", "Error rate at which the asymptotic rate vanishes");
  thr->add_option("--d", o.d_list, "Dimension(s)")->required();
  thr->add_option("--mubs", o.mubs, "Number of bases (2 or 3)")->required();
  add_common(thr);

  auto* fin = app.add_subcommand("finite", "Finite-key rate sweep as CSV");
  fin->add_option("--d", o.d_list, "Dimensions, e.g. 2..7 or 2,3")->capture_default_str();
  fin->add_option("--mubs", o.mubs, "Number of bases (2 or 3)")->required();
  fin->add_option("--q", o.q, "Observed error rate")->capture_default_str();
  fin->add_option("--eps", o.eps, "Security parameter")->capture_default_str();
  fin->add_option("--nmin", o.nmin, "Smallest sifted length")->capture_default_str();
  fin->add_option("--nmax", o.nmax, "Largest sifted length")->capture_default_str();
  fin->add_option("--points", o.points, "Number of N values (log-spaced)")->capture_default_str();
  fin->add_option("--bounds", o.bounds, "Comma-separated: uncertainty, renner, second-order");
  fin->add_option("--out", o.out, "Output CSV, - for stdout")->capture_default_str();
  fin->add_option("--svg", o.svg, "Also write a rate-vs-N plot");
  fin->add_option("--f-ec", o.f_ec, "Reconciliation efficiency multiplier (>= 1)")->capture_default_str();
  fin->add_option("--threads", o.threads, "Worker threads, 0 = auto")->capture_default_str();
  add_common(fin);

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo protocol session, JSON report");
  sim->add_option("--d", o.d, "Dimension")->required();
  sim->add_option("--mubs", o.mubs, "Number of bases (2 or 3)")->required();
  sim->add_option("--q", o.q, "Channel error rate")->capture_default_str();
  sim->add_option("--eps", o.eps, "Security parameter")->capture_default_str();
  sim->add_option("--rounds", o.rounds, "Transmitted symbols")->capture_default_str();
  sim->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sim->add_option("--bound", o.bound, "uncertainty, renner or second-order")->capture_default_str();
  sim->add_option("--key-prob", o.key_prob, "Probability of the key basis")->capture_default_str();
  sim->add_option("--f-ec", o.f_ec, "Reconciliation efficiency multiplier (>= 1)")->capture_default_str();
  sim->add_option("--out", o.out, "Output JSON, - for stdout")->capture_default_str();
  add_common(sim);

  auto* ren = app.add_subcommand("render-mubs", "Intensity/phase images of all basis modes plus a montage");
  ren->add_option("--d", o.d, "Dimension")->capture_default_str();
  ren->add_option("--grid", o.grid, "Pixels per side")->capture_default_str();
  ren->add_option("--extent", o.extent, "Half-width in beam waists")->capture_default_str();
  ren->add_option("--out", o.out, "Output directory")->required();
  ren->add_option("--tile", o.tile, "Montage tile size in pixels")->capture_default_str();
  ren->add_option("--format", o.format, "png or pnm")->capture_default_str();
  ren->add_option("--palette", o.palette, "viridis or gray")->capture_default_str();
  ren->add_option("--threads", o.threads, "Worker threads, 0 = auto")->capture_default_str();
  add_common(ren);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Values from --config are appended as flags unless already present on the command line.
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size())
        path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        path = args[i].substr(9);
      if (path.empty() || args.empty()) continue;
      CLI::App* target = nullptr;
      for (const auto& a : args)
        for (auto* sub : app.get_subcommands({}))
          if (sub->get_name() == a && !target) target = sub;
      detail::require(target != nullptr, "--config needs a subcommand");
      std::vector<std::string> extra;
      for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        if (key == "config" || !target->get_option_no_throw(flag))
          throw ValidationError("unknown key '" + key + "' in " + path + " for " + target->get_name());
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!given) {
          extra.push_back(flag);
          extra.push_back(value);
        }
      }
      args.insert(args.end(), extra.begin(), extra.end());
      break;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (mub->parsed()) cmd_mub_check(o, out);
    else if (chan->parsed()) cmd_channel(o, out);
    else if (ent->parsed()) cmd_entropy(o, out);
    else if (asym->parsed()) cmd_asymptotic(o, out);
    else if (thr->parsed()) cmd_threshold(o, out);
    else if (fin->parsed()) cmd_finite(o, out);
    else if (sim->parsed()) cmd_simulate(o, out);
    else if (ren->parsed()) cmd_render(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace qkdrates::cli
