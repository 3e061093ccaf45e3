// lcfpp: command-line front end for field synthesis, Liouville sampling, FPP
// distances, the block-nest program, level-set percolation and experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcf/lcf.hpp"

namespace {

using namespace lcf;

Vertex parse_vertex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("vertex must be written as x,y, got '" + s + "'");
  try {
    std::size_t a = 0, b = 0;
    const std::string xs = s.substr(0, comma), ys = s.substr(comma + 1);
    const Vertex v{std::stoll(xs, &a), std::stoll(ys, &b)};
    if (a != xs.size() || b != ys.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("vertex must be written as x,y, got '" + s + "'");
  }
}

Rect parse_rect(const std::string& s) {
  std::vector<std::int64_t> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stoll(item));
    } catch (...) {
      throw Error("rectangle must be x0,y0,x1,y1, got '" + s + "'");
    }
  }
  if (v.size() != 4) throw Error("rectangle must be x0,y0,x1,y1, got '" + s + "'");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string vstr(Vertex v) { return std::to_string(v.x) + "," + std::to_string(v.y); }

Direction parse_direction(const std::string& s) {
  if (s == "lr") return Direction::left_right;
  if (s == "ud") return Direction::up_down;
  throw Error("direction must be lr or ud");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

SiteMask xi_for(const FieldSample& field, const std::string& path) {
  if (path.empty()) return gen_xi(field.spec(), XiMode{}, 0);
  SiteMask xi = load_mask(path);
  if (xi.width() != field.spec().N) throw Error("mask size does not match the field");
  return xi;
}

LatticePath corpus_path(const GridSpec& spec, const std::string& kind, std::uint64_t seed, double delta, std::int64_t q) {
  const NestParams p = nest_params(spec, delta, q);
  const std::int64_t need = 4 * (std::int64_t{1} << (p.j0 * p.k));
  Rng rng(seed);
  if (kind == "staircase") return random_staircase_path(spec, rng, need);
  if (kind == "walk") return random_loop_erased_path(spec, rng, need);
  throw Error("--random must be staircase or walk");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-correlated fields, Liouville FPP and level-set percolation"};
  app.require_subcommand(1);

  // ---- field
  auto* field = app.add_subcommand("field", "Field synthesis and covariance");
  field->require_subcommand(1);
  int n = 8, k = 1;
  std::uint64_t seed = 0;
  std::string out, kind = "coarse", z_s, w_s;
  int threads = 1;
  bool strict = false;
  auto* fgen = field->add_subcommand("gen", "Sample a field and write it in LGF1 format");
  fgen->add_option("--n", n, "log2 of the side length")->required();
  fgen->add_option("--k", k, "coarseness exponent, K = 2^k")->required();
  fgen->add_option("--seed", seed, "seed")->required();
  fgen->add_option("--out", out, "output file")->required();
  fgen->add_option("--kind", kind, "coarse or mbrw")->check(CLI::IsMember({"coarse", "mbrw"}));
  fgen->add_option("--threads", threads, "worker threads");
  auto* fcov = field->add_subcommand("cov", "Analytic covariance of two sites");
  fcov->add_option("--n", n)->required();
  fcov->add_option("--k", k)->required();
  fcov->add_option("--z", z_s, "site x,y")->required();
  fcov->add_option("--w", w_s, "site x,y")->required();
  auto* fver = field->add_subcommand("verify-bounds", "Check the log-covariance bounds over all pairs");
  fver->add_option("--n", n)->required();
  fver->add_option("--k", k)->required();
  fver->add_flag("--strict", strict, "exit nonzero on a violation");

  // ---- measure
  auto* measure = app.add_subcommand("measure", "Liouville measure");
  measure->require_subcommand(1);
  std::string field_path, mode = "exact", fractions_s = "0.25,0.5,0.75";
  double gamma = 0.2;
  std::uint64_t count = 1, samples = 100000;
  std::int64_t threshold = 1;
  auto* msample = measure->add_subcommand("sample", "Draw vertex pairs from mu x mu");
  msample->add_option("--field", field_path)->required();
  msample->add_option("--gamma", gamma)->required();
  msample->add_option("--seed", seed);
  msample->add_option("--count", count);
  auto* mstats = measure->add_subcommand("stats", "Partition function and high points");
  mstats->add_option("--field", field_path)->required();
  mstats->add_option("--gamma", gamma)->required();
  mstats->add_option("--fractions", fractions_s, "comma-separated fractions of m_N");
  auto* mpair = measure->add_subcommand("pair-fraction", "mu x mu mass of pairs closer than a threshold");
  mpair->add_option("--field", field_path)->required();
  mpair->add_option("--gamma", gamma)->required();
  mpair->add_option("--threshold", threshold)->required();
  mpair->add_option("--mode", mode)->check(CLI::IsMember({"exact", "mc"}));
  mpair->add_option("--samples", samples);
  mpair->add_option("--seed", seed);

  // ---- fpp
  auto* fpp = app.add_subcommand("fpp", "First passage percolation");
  fpp->require_subcommand(1);
  std::string u_s, v_s, path_out;
  auto* fdist = fpp->add_subcommand("dist", "FPP distance between two vertices");
  fdist->add_option("--field", field_path)->required();
  fdist->add_option("--gamma", gamma)->required();
  fdist->add_option("--u", u_s)->required();
  fdist->add_option("--v", v_s)->required();
  fdist->add_option("--path-out", path_out, "write the geodesic");
  auto* fsssp = fpp->add_subcommand("sssp", "Distances from one source to every vertex");
  fsssp->add_option("--field", field_path)->required();
  fsssp->add_option("--gamma", gamma)->required();
  fsssp->add_option("--source", u_s)->required();
  fsssp->add_option("--out", out, "CSV x,y,dist");

  // ---- blocknest
  auto* bn = app.add_subcommand("blocknest", "k-block-nest program");
  bn->require_subcommand(1);
  std::string random_kind, path_in;
  double delta = 0.4, kappa = 0.05, c = 7.0 * 0.45;
  std::int64_t q = 1;
  auto add_bn = [&](CLI::App* s) {
    s->add_option("--path", path_in, "input path file");
    s->add_option("--random", random_kind, "generate a path: staircase or walk");
    s->add_option("--seed", seed);
    s->add_option("--n", n)->required();
    s->add_option("--k", k)->required();
    s->add_option("--delta", delta);
    s->add_option("--q", q);
  };
  auto* brun = bn->add_subcommand("run", "Extract Q from a path");
  add_bn(brun);
  brun->add_option("--out", out, "write Q as a vertex list");
  auto* bver = bn->add_subcommand("verify", "Run and check separation, counts and coherence");
  add_bn(bver);

  // ---- perco
  auto* perco = app.add_subcommand("perco", "Level-set percolation");
  perco->require_subcommand(1);
  std::string mask_path, xi_mode = "ones", rect_s, dir_s = "lr";
  int ell = 2;
  auto* pxi = perco->add_subcommand("xi", "Generate an open-site mask");
  pxi->add_option("--n", n)->required();
  pxi->add_option("--mode", xi_mode, "ones, iid(p) or dilated(p,r)");
  pxi->add_option("--seed", seed);
  pxi->add_option("--out", out)->required();
  auto* pcross = perco->add_subcommand("crossing", "B-crossing of a dyadic box");
  pcross->add_option("--mask", mask_path)->required();
  pcross->add_option("--ell", ell, "box side 2^ell")->required();
  pcross->add_option("--corner", u_s, "lower-left corner x,y")->required();
  pcross->add_option("--delta", delta);
  auto* pmin = perco->add_subcommand("min-good", "Minimum open count over crossings of a rectangle");
  pmin->add_option("--mask", mask_path)->required();
  pmin->add_option("--rect", rect_s, "x0,y0,x1,y1")->required();
  pmin->add_option("--dir", dir_s, "lr or ud");
  auto* pgood = perco->add_subcommand("good-path", "Shortest path through good sites");
  pgood->add_option("--field", field_path)->required();
  pgood->add_option("--xi", mask_path, "open-site mask (default all open)");
  pgood->add_option("--u", u_s)->required();
  pgood->add_option("--v", v_s)->required();
  pgood->add_option("--c", c, "threshold c in phi <= c log N");
  pgood->add_option("--delta", delta, "for the N^{1+2 delta} diagnostic");
  auto* pstitch = perco->add_subcommand("stitch", "Good path from ladders of box crossings");
  pstitch->add_option("--field", field_path)->required();
  pstitch->add_option("--xi", mask_path);
  pstitch->add_option("--u", u_s)->required();
  pstitch->add_option("--v", v_s)->required();
  pstitch->add_option("--delta", delta);
  pstitch->add_option("--kappa", kappa);
  pstitch->add_option("--path-out", path_out);

  // ---- exp
  auto* exp = app.add_subcommand("exp", "Experiments");
  exp->require_subcommand(1);
  std::string config_path, fits_out;
  std::optional<double> gamma_override;
  auto* eexp = exp->add_subcommand("exponent", "Exponent of d_gamma between mu-sampled pairs");
  eexp->add_option("--config", config_path)->required();
  eexp->add_option("--out", out, "trial CSV (defaults to the config's output)");
  eexp->add_option("--fits", fits_out, "per-k fit table");
  eexp->add_option("--gamma", gamma_override, "override gamma");
  auto* emax = exp->add_subcommand("max", "Mean maximum of the field");
  emax->add_option("--config", config_path)->required();
  emax->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fgen->parsed()) {
      const FieldSample f = kind == "mbrw" ? mbrw(n, seed) : coarse_mbrw(build_grid_spec(n, k), seed, threads);
      save_field(out, f);
      std::cout << "wrote " << to_string(f.kind()) << " field n=" << n << " k=" << f.spec().k << " to " << out << '\n';
    } else if (fcov->parsed()) {
      std::cout << fmt(cov_analytic(build_grid_spec(n, k), parse_vertex(z_s), parse_vertex(w_s))) << '\n';
    } else if (fver->parsed()) {
      const auto rep = verify_log_bounds(build_grid_spec(n, k));
      std::cout << "pairs=" << rep.pairs_checked << " max_violation_low=" << fmt(rep.max_violation_low)
                << " max_violation_high=" << fmt(rep.max_violation_high) << " a1_constant=" << fmt(rep.a1_constant)
                << " a1_bound=" << fmt(rep.a1_bound) << " pass=" << (rep.pass && rep.a1_within_bound) << '\n';
      if (!rep.pass)
        std::cout << "worst lower violation at z=" << vstr(rep.worst_low_z) << " w=" << vstr(rep.worst_low_w) << '\n';
      if (strict && !(rep.pass && rep.a1_within_bound)) {
        std::cerr << "error: covariance bounds violated\n";
        return 1;
      }
    } else if (msample->parsed()) {
      const auto table = build_measure(load_field(field_path), gamma);
      Rng rng(seed);
      std::cout << "u_x,u_y,v_x,v_y,linf\n";
      for (std::uint64_t i = 0; i < count; ++i) {
        const auto p = sample_pair(table, rng);
        std::cout << vstr(p.u) << ',' << vstr(p.v) << ',' << p.linf << '\n';
      }
    } else if (mstats->parsed()) {
      const auto s = partition_stats(load_field(field_path), gamma, parse_reals(fractions_s));
      std::cout << "log_Z=" << fmt(s.log_Z) << " log_reference=" << fmt(s.log_reference) << " max_phi=" << fmt(s.max_phi)
                << " m_N=" << fmt(s.m_N) << '\n';
      for (std::size_t i = 0; i < s.fractions.size(); ++i)
        std::cout << "fraction=" << fmt(s.fractions[i]) << " threshold=" << fmt(s.thresholds[i])
                  << " count=" << s.counts[i] << '\n';
    } else if (mpair->parsed()) {
      const auto table = build_measure(load_field(field_path), gamma);
      const auto m = mode == "exact" ? FractionMode::exact : FractionMode::monte_carlo;
      std::cout << fmt(pair_distance_fraction(table, threshold, m, samples, seed)) << '\n';
    } else if (fdist->parsed()) {
      const auto f = load_field(field_path);
      const auto r = fpp_distance(f, gamma, parse_vertex(u_s), parse_vertex(v_s));
      std::cout << fmt(r.distance) << '\n';
      if (!path_out.empty()) save_path(path_out, r.geodesic);
    } else if (fsssp->parsed()) {
      const auto f = load_field(field_path);
      const auto map = fpp_sssp(f, gamma, parse_vertex(u_s));
      const auto& d = map.dist.data();
      std::cout << "max_dist=" << fmt(*std::max_element(d.begin(), d.end())) << '\n';
      if (!out.empty()) {
        auto os = open_output(out);
        os << "x,y,dist\n";
        for (std::size_t i = 0; i < d.size(); ++i) os << vstr(map.dist.vertex(i)) << ',' << fmt(d[i]) << '\n';
      }
    } else if (brun->parsed() || bver->parsed()) {
      const GridSpec spec = build_grid_spec(n, k);
      if (path_in.empty() == random_kind.empty()) throw Error("give exactly one of --path and --random");
      const LatticePath p = path_in.empty() ? corpus_path(spec, random_kind, seed, delta, q) : load_path(path_in, true);
      const auto res = block_nest(p, spec, delta, q);
      std::cout << "j0=" << res.params.j0 << " K1=" << res.params.K1 << " K2=" << res.params.K2
                << " |Q|=" << res.Q.size() << '\n';
      if (brun->parsed()) {
        if (out.empty())
          for (const auto& z : res.Q) std::cout << z.x << ' ' << z.y << '\n';
        else {
          auto os = open_output(out);
          for (const auto& z : res.Q) os << z.x << ' ' << z.y << '\n';
        }
      } else {
        const auto rep = verify_output(res, p);
        std::cout << "separated_points=" << rep.separated_points << " separated_blocks=" << rep.separated_blocks
                  << " counts=" << rep.counts << " coherent=" << rep.coherent << " on_path=" << rep.on_path << '\n';
        if (!rep.pass()) {
          std::cerr << "error: " << rep.first_failure << '\n';
          return 1;
        }
      }
    } else if (pxi->parsed()) {
      const auto mask = gen_xi(build_grid_spec(n, 1), parse_xi_mode(xi_mode), seed);
      save_mask(out, mask);
      std::cout << "open=" << mask.count() << " of " << mask.open.size() << '\n';
    } else if (pcross->parsed()) {
      const auto mask = load_mask(mask_path);
      const auto res = find_crossing(mask, DyadicBox{ell, parse_vertex(u_s)}, delta);
      std::cout << "exists=" << res.exists;
      if (res.vertical) std::cout << " |QV|=" << res.vertical->size() << " QV_bound=" << res.vertical_bound;
      if (res.horizontal) std::cout << " |QH|=" << res.horizontal->size() << " QH_bound=" << res.horizontal_bound;
      std::cout << '\n';
    } else if (pmin->parsed()) {
      const auto r = min_good_count(load_mask(mask_path), parse_rect(rect_s), parse_direction(dir_s));
      std::cout << r.total << '\n';
    } else if (pgood->parsed()) {
      const auto f = load_field(field_path);
      const auto r = find_good_path(f, xi_for(f, mask_path), parse_vertex(u_s), parse_vertex(v_s), c, delta);
      std::cout << "found=" << r.found;
      if (r.found) std::cout << " |P|=" << r.path.size() << " bound=" << fmt(r.cardinality_bound);
      else std::cout << " reason=\"" << r.failure << '"';
      std::cout << " u_good=" << r.u_good << " v_good=" << r.v_good << '\n';
    } else if (pstitch->parsed()) {
      const auto f = load_field(field_path);
      const auto r = stitch_good_path(f, xi_for(f, mask_path), parse_vertex(u_s), parse_vertex(v_s), delta, kappa);
      std::cout << "found=" << r.found << " l0=" << r.ell0 << " l1=" << r.ell1 << " l2=" << r.ell2 << " C=" << r.C;
      if (!r.found) {
        std::cout << " reason=\"" << r.failure << "\"\n";
      } else {
        const auto& b = r.bounds;
        std::cout << " |P|=" << r.path.size() << " |PN|=" << b.pn_size << " |PF|=" << b.pf_size
                  << " bounds_i=" << b.cardinality_ok << " bounds_ii=" << b.covariance_ok << " path_bound=" << b.path_ok
                  << '\n';
        if (!path_out.empty()) save_path(path_out, r.path);
      }
    } else if (eexp->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (gamma_override) cfg.gamma = *gamma_override;
      validate(cfg);
      const std::string dest = out.empty() ? cfg.output : out;
      if (dest.empty()) throw Error("no output path (use --out or 'output' in the config)");
      const auto res = run_exponent_experiment(cfg);
      auto os = open_output(dest);
      write_trials_csv(os, res.records);
      write_fit_table(std::cout, res.fits);
      for (const auto& m : res.mass)
        std::cout << "mass n=" << m.n << " k=" << m.k << " fraction=" << fmt(m.fraction) << '\n';
      if (!fits_out.empty()) {
        auto fs = open_output(fits_out);
        write_fit_table(fs, res.fits);
      }
    } else if (emax->parsed()) {
      const ExperimentConfig cfg = load_config(config_path);
      const std::string dest = out.empty() ? cfg.output : out;
      const auto recs = run_max_experiment(cfg);
      if (dest.empty()) {
        write_max_csv(std::cout, recs);
      } else {
        auto os = open_output(dest);
        write_max_csv(os, recs);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
