#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "monodromize/harper.hpp"
#include "monodromize/model.hpp"

namespace monodromize::cli {

namespace {

using json = nlohmann::ordered_json;

json cj(cplx z) { return json::array({z.real(), z.imag()}); }
json vj(const Eigen::Vector2cd& v) { return json::array({cj(v(0)), cj(v(1))}); }

json poly_json(const TrigPoly& f) {
  json a = json::array();
  for (const auto& [l, c] : f.coeffs()) a.push_back({{"l", l}, {"c", cj(c)}});
  return a;
}

json slots_json(const SlotCoeffs& s) {
  return {{"kind", kind_name(s.kind)}, {"A", cj(s.A)},         {"B", cj(s.B)},
          {"C", cj(s.C)},              {"D", cj(s.D)},         {"vanishing", cj(s.vanishing)}};
}

json monodromy_json(const MonodromyResult& r) {
  static const char* names[4] = {"M11", "M12", "M21", "M22"};
  json e;
  for (int k = 0; k < 4; ++k) e[names[k]] = poly_json(r.entries[k]);
  return {{"h", r.h},
          {"n", r.n},
          {"pair", std::string(kind_name(r.first)) + kind_name(r.second)},
          {"w", cj(r.w)},
          {"w_spread", r.w_spread},
          {"entries", e},
          {"fit_residual", r.fit_residual},
          {"periodicity_residual", r.periodicity_residual},
          {"periodicity_independent", r.periodicity_independent},
          {"det_residual", r.det_residual},
          {"det_poly_residual", r.det_poly_residual},
          {"tail", r.tail(r.n)}};
}

json header(const std::string& command) { return {{"schema", "monodromize/1"}, {"command", command}}; }

// Harper parameters phi+- = +-i ln(lambda) - pi
ReducedProblem harper_reduced(double lambda, cplx E, double h) {
  ReduceOptions ro;
  ro.phi_plus = I * std::log(lambda) - PI;
  ro.phi_minus = -I * std::log(lambda) - PI;
  return reduce(harper_matrix(lambda, E), h, ro);
}

double equation_residual(const MinimalSolution& s, cplx z) {
  const double sh = s.max_shift();
  Eigen::Vector2cd l = s.eval(z + s.h(), sh), r = s.matrix()(z) * s.eval(z, -sh);
  return (l - r).norm() / std::max(l.norm(), r.norm());
}

double coeff_scale(const SlotCoeffs& c) {
  return std::max({std::abs(c.A), std::abs(c.B), std::abs(c.C), std::abs(c.D)});
}

Kind parse_kind(const std::string& s) {
  static const std::map<std::string, Kind> k = {{"A", Kind::A}, {"B", Kind::B}, {"C", Kind::C}, {"D", Kind::D}};
  auto it = k.find(s);
  if (it == k.end()) throw ConfigError("kind must be one of A, B, C, D");
  return it->second;
}

struct Row {
  std::string name;
  double value, tol;
  bool pass() const { return value < tol; }
};

// sigma and model invariants at step h
std::vector<Row> selfcheck_rows(double h, const RunConfig& cfg) {
  std::vector<Row> rows;
  SigmaEngine S(h);
  rows.push_back({"sigma(-pi) closed form", std::abs(S(-PI) / S.value_at_minus_pi() - 1.0), 1e-8});
  rows.push_back({"sigma residue closed form", std::abs(-I * S(-PI + h) / S.residue_closed_form() - 1.0), 1e-8});
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> X(-12, 12), Y(-4, 4);
  double fe = 0.0, sh = 0.0, rf = 0.0;
  for (int checked = 0; checked < 200;) {
    cplx z(X(rng), Y(rng));
    double gap = 1e300;
    for (cplx p : {z + h, z - h, z + PI, z - PI, z, -z}) gap = std::min(gap, S.lattice_distance(p));
    if (gap < 0.2) continue;
    ++checked;
    cplx a = S(z + h), b = (1.0 + std::exp(-I * z)) * S(z - h);
    fe = std::max(fe, std::abs(a - b) / (1 + std::abs(a)));
    cplx c = S(z + PI), d = (1.0 + std::exp(-I * PI * z / h)) * S(z - PI);
    sh = std::max(sh, std::abs(c - d) / (1 + std::abs(c)));
    cplx ref = std::exp(-I * z * z / (4 * h) + I * PI * PI / (12 * h) + I * h / 12.0);
    rf = std::max(rf, std::abs(S(z) * S(-z) / ref - 1.0));
  }
  rows.push_back({"sigma functional equation", fe, 1e-8});
  rows.push_back({"sigma shift by pi", sh, 1e-8});
  rows.push_back({"sigma reflection", rf, 1e-8});
  double env = 0.0;
  for (double x : {-PI, -1.0, 0.0, 2.0, PI}) {
    cplx zl(x, -15.0), zu(x, 15.0);
    cplx lead = std::exp(-I * zu * zu / (4 * h) + I * PI * PI / (12 * h) + I * h / 12.0);
    env = std::max({env, std::abs(S(zl) - 1.0), std::abs(S(zu) / lead - 1.0)});
  }
  rows.push_back({"sigma envelopes at |Im z| = 15", env, 10 * std::exp(-0.9 * std::min(1.0, PI / h) * 15.0)});
  for (double xi : {0.0, 0.3}) {
    ModelPair mp(ModelParams{xi, h});
    double worst = 0.0, scale = 0.0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        cplx z(-2.0 + a, -2.0 + b);
        cplx r = mp.m(z + h) + mp.m(z - h) + 2.0 * std::exp(xi) * std::cos(z) * mp.m(z);
        worst = std::max(worst, std::abs(r));
        scale = std::max(scale, std::abs(mp.m(z)));
      }
    std::ostringstream n;
    n << "model equation, xi = " << xi;
    rows.push_back({n.str(), worst / scale, cfg.residual_tol});
    cplx w = mp.wronskian_sampled(1.0);
    std::ostringstream nw;
    nw << "model wronskian, xi = " << xi;
    rows.push_back({nw.str(), std::abs(w / mp.wronskian_closed() - 1.0), 1e-5});
  }
  return rows;
}

class Runner {
public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Monodromization of difference equations with trigonometric polynomial matrices", "monodromize"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_file, "key = value configuration file");
    app.add_option("--set", sets, "configuration override key=value");
    for (const std::string& k : config_keys()) {
      std::string flag = k;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option("--" + flag, flags[k], "configuration key " + k);
    }

    double h = std::sqrt(2.0), lambda = 1.0;
    std::string z_s, E_s = "0", xi_s = "0", side_s = "plus", kind_s = "D";
    int steps = 1;
    auto* sigma = app.add_subcommand("sigma", "sigma function");
    sigma->require_subcommand(1);
    auto* sigma_eval = sigma->add_subcommand("eval", "sigma at a point");
    sigma_eval->add_option("--h", h)->required();
    sigma_eval->add_option("--z", z_s, "re,im")->required();

    auto harper_opts = [&](CLI::App* c) {
      c->add_option("--lambda", lambda)->required()->check(CLI::PositiveNumber);
      c->add_option("--E", E_s, "re,im");
      c->add_option("--h", h)->required()->check(CLI::PositiveNumber);
    };
    auto* bloch = app.add_subcommand("bloch", "canonical Bloch basis of the Harper matrix");
    harper_opts(bloch);
    bloch->add_option("--side", side_s)->check(CLI::IsMember({"plus", "minus"}));
    bloch->add_option("--z", z_s, "re,im");
    auto* model = app.add_subcommand("model", "model equation solution");
    model->add_option("--xi", xi_s, "re,im");
    model->add_option("--h", h)->required()->check(CLI::PositiveNumber);
    model->add_option("--z", z_s, "re,im")->required();
    auto* minimal = app.add_subcommand("minimal", "minimal entire solution of the Harper equation");
    harper_opts(minimal);
    minimal->add_option("--kind", kind_s)->check(CLI::IsMember({"A", "B", "C", "D"}));
    minimal->add_option("--z", z_s, "re,im");
    auto* mono = app.add_subcommand("monodromy", "monodromy matrix of the Harper pair (psi_D, psi_B)");
    harper_opts(mono);
    auto* hmono = app.add_subcommand("harper-monodromy", "Harper monodromy projected to the one-harmonic shape");
    harper_opts(hmono);
    auto* renorm = app.add_subcommand("harper-renorm", "renormalization trajectory as CSV");
    harper_opts(renorm);
    renorm->add_option("--steps", steps)->check(CLI::PositiveNumber);
    auto* self = app.add_subcommand("selfcheck", "sigma and model invariants");
    self->add_option("--h", h)->check(CLI::PositiveNumber);

    try {
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return Pass;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << "\n";
      return Fail;
    }

    try {
      if (!config_file.empty()) cfg_ = load_config(config_file, cfg_);
      for (const std::string& s : sets) {
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value");
        set(cfg_, s.substr(0, eq), s.substr(eq + 1));
      }
      for (const auto& [k, v] : flags)
        if (!v.empty()) set(cfg_, k, v);
      validate(cfg_);
    } catch (const ConfigError& e) {
      err_ << "configuration error: " << e.what() << "\n";
      return Fail;
    }

    try {
      if (*sigma_eval) return cmd_sigma(h, parse_complex(z_s));
      if (*bloch) return cmd_bloch(lambda, parse_complex(E_s), h, side_s == "plus" ? Side::Plus : Side::Minus, z_s);
      if (*model) return cmd_model(parse_complex(xi_s), h, parse_complex(z_s));
      if (*minimal) return cmd_minimal(lambda, parse_complex(E_s), h, parse_kind(kind_s), z_s);
      if (*mono) return cmd_monodromy(lambda, parse_complex(E_s), h);
      if (*hmono) return cmd_harper_monodromy(lambda, parse_complex(E_s), h);
      if (*renorm) return cmd_renorm(lambda, parse_complex(E_s), h, steps);
      if (*self) return cmd_selfcheck(h);
    } catch (const ConfigError& e) {
      err_ << "usage error: " << e.what() << "\n";
      return Fail;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return e.code() == Errc::ShapeMismatch || e.code() == Errc::NonConstant ? CheckFailed : Fail;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return Fail;
    }
    return Fail;
  }

private:
  void emit(const std::string& text) {
    if (cfg_.out.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(cfg_.out);
    if (!f) throw std::runtime_error("cannot write '" + cfg_.out + "'");
    f << text;
  }
  void emit(const json& j) { emit(j.dump(2) + "\n"); }

  int cmd_sigma(double h, cplx z) {
    SigmaEngine S(h);
    SigmaValue v = S.eval(z);
    json j = header("sigma eval");
    j.update({{"h", h}, {"z", cj(z)}, {"value", cj(v.value)}, {"near_singular", v.near_singular}});
    if (v.value != 0.0) j["log"] = cj(v.log);
    if (v.near_singular) j["lattice_point"] = cj(v.lattice_point);
    emit(j);
    return Pass;
  }

  int cmd_bloch(double lambda, cplx E, double h, Side side, const std::string& z_s) {
    BlochOptions bo;
    bo.denom_guard = cfg_.denom_guard;
    const double xi = std::log(lambda);
    cplx phi = side == Side::Plus ? I * xi - PI : -I * xi - PI;
    BlochBasis B(harper_matrix(lambda, E), h, side, phi, bo);
    const double sgn = side == Side::Plus ? 1.0 : -1.0;
    cplx z = z_s.empty() ? cplx(0.0, sgn * (B.Y() + 2.0)) : parse_complex(z_s);
    const double det_res = std::abs(B.det(z) / B.det_target() - 1.0);
    json j = header("bloch");
    j.update({{"lambda", lambda},
              {"E", cj(E)},
              {"h", h},
              {"side", side == Side::Plus ? "plus" : "minus"},
              {"phi", cj(B.phi())},
              {"Y", B.Y()},
              {"z", cj(z)},
              {"solution_1", vj(B(1, z))},
              {"solution_2", vj(B(2, z))},
              {"multiplier_1", cj(B.multiplier_closed(1))},
              {"multiplier_2", cj(B.multiplier_closed(2))},
              {"det_target", cj(B.det_target())},
              {"det_residual", det_res}});
    emit(j);
    return det_res < cfg_.residual_tol ? Pass : CheckFailed;
  }

  int cmd_model(cplx xi, double h, cplx z) {
    ModelPair mp(ModelParams{xi, h});
    auto m = mp.m_eval(z);
    cplx r = mp.m(z + h) + mp.m(z - h) + 2.0 * std::exp(xi) * std::cos(z) * m[0];
    const double res = std::abs(r) / std::max({std::abs(mp.m(z + h)), std::abs(mp.m(z - h)), std::abs(m[0])});
    cplx ws = mp.wronskian_sampled(cfg_.residual_tol);
    const double wres = std::abs(ws / mp.wronskian_closed() - 1.0);
    json j = header("model");
    j.update({{"xi", cj(xi)},
              {"h", h},
              {"z", cj(z)},
              {"m", cj(m[0])},
              {"m_prime", cj(m[1])},
              {"mt", cj(mp.mt(z))},
              {"equation_residual", res},
              {"wronskian_closed", cj(mp.wronskian_closed())},
              {"wronskian_sampled", cj(ws)},
              {"wronskian_residual", wres}});
    emit(j);
    return res < cfg_.residual_tol && wres < cfg_.residual_tol * 10 ? Pass : CheckFailed;
  }

  int cmd_minimal(double lambda, cplx E, double h, Kind kind, const std::string& z_s) {
    ReducedProblem R = harper_reduced(lambda, E, h);
    MinimalSolution s = assemble_minimal(R, kind, cfg_.assembly());
    CanonicalBases bases = canonical_bases(R.M, h, R.phi_plus, R.phi_minus);
    SlotCoeffs c = min_asymp_coeffs(s, bases, cfg_.slots());
    cplx z = z_s.empty() ? cplx(0.3, 0.2) : parse_complex(z_s);
    double res = 0.0;
    for (cplx p : {z, z + cplx(1.1, 2.3), z + cplx(-2.0, -3.1)}) res = std::max(res, equation_residual(s, p));
    const double slot = std::abs(c.vanishing) / coeff_scale(c);
    json j = header("minimal");
    j.update({{"lambda", lambda},
              {"E", cj(E)},
              {"h", h},
              {"kind", kind_name(kind)},
              {"phi_plus", cj(R.phi_plus)},
              {"phi_minus", cj(R.phi_minus)},
              {"z", cj(z)},
              {"value", vj(s(z))},
              {"coefficients", slots_json(c)},
              {"slot_residual", slot},
              {"equation_residual", res},
              {"nodes", s.info().nodes},
              {"fredholm_residual", s.info().fredholm_residual},
              {"carried_zeros", s.info().carried}});
    emit(j);
    return res < cfg_.residual_tol && slot < cfg_.residual_tol ? Pass : CheckFailed;
  }

  int cmd_monodromy(double lambda, cplx E, double h) {
    ReducedProblem R = harper_reduced(lambda, E, h);
    MinimalSolution d = assemble_minimal(R, Kind::D, cfg_.assembly());
    MinimalSolution b = assemble_minimal(R, Kind::B, cfg_.assembly());
    MonodromyResult r = monodromy_matrix(d, b, cfg_.monodromy());
    CanonicalBases bases = canonical_bases(R.M, h, R.phi_plus, R.phi_minus);
    SlotCoeffs cd = min_asymp_coeffs(d, bases, cfg_.slots()), cb = min_asymp_coeffs(b, bases, cfg_.slots());
    StructureReport s =
        structure_check(r, R.n, bases.f->multiplier_closed(2), bases.g->multiplier_closed(1), cd, cb);
    json comps = json::array();
    for (const Comparison& c : s.comparisons)
      comps.push_back({{"name", c.name},
                       {"fitted", cj(c.fitted)},
                       {"predicted", cj(c.predicted)},
                       {"rel_error", c.rel_error},
                       {"skipped", c.skipped}});
    json j = header("monodromy");
    j.update({{"lambda", lambda}, {"E", cj(E)}, {"monodromy", monodromy_json(r)}, {"omega_member", s.omega_member},
              {"comparisons", comps}, {"worst_comparison", s.worst}});
    emit(j);
    bool ok = r.det_residual < cfg_.det_tol && r.periodicity_residual < cfg_.det_tol && r.tail(r.n) < cfg_.order_tol &&
              s.worst < cfg_.fit_tol && s.omega_member;
    return ok ? Pass : CheckFailed;
  }

  int cmd_harper_monodromy(double lambda, cplx E, double h) {
    HarperMonodromy m = harper_monodromy(lambda, E, h, cfg_.renorm().shape);
    json j = header("harper-monodromy");
    j.update({{"lambda", lambda},
              {"E", cj(E)},
              {"lambda1", m.lambda1},
              {"s", cj(m.s)},
              {"t", cj(m.t)},
              {"a", cj(m.a)},
              {"monodromy", monodromy_json(m.M)},
              {"shape",
               {{"entries", m.shape.entry},
                {"worst", m.shape.worst},
                {"a_identity", m.shape.a_identity},
                {"symmetry", m.shape.symmetry}}}});
    emit(j);
    bool ok = m.shape.a_identity < cfg_.shape_tol && m.shape.symmetry < cfg_.shape_tol &&
              m.M.det_residual < cfg_.det_tol && m.M.periodicity_residual < cfg_.det_tol;
    return ok ? Pass : CheckFailed;
  }

  int cmd_renorm(double lambda, cplx E, double h, int steps) {
    Trajectory tr = renorm_iterate(HarperPoint::harper(lambda, E, h), steps, cfg_.renorm());
    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "j,lambda,re_s,im_s,re_t,im_t,h,shape_residual,det_residual\n";
    for (const TrajectoryStep& s : tr.points) {
      const HarperPoint& p = s.point;
      csv << p.j << ',' << p.lambda << ',' << p.s.real() << ',' << p.s.imag() << ',' << p.t.real() << ','
          << p.t.imag() << ',' << p.h << ',' << s.shape_residual << ',' << s.det_residual << '\n';
    }
    emit(csv.str());
    if (tr.termination.empty()) return Pass;
    err_ << "terminated: " << tr.termination << "\n";
    if (tr.termination.rfind("RationalTermination", 0) == 0) return Pass;
    return tr.termination.rfind("ShapeMismatch", 0) == 0 ? CheckFailed : Fail;
  }

  int cmd_selfcheck(double h) {
    std::vector<Row> rows = selfcheck_rows(h, cfg_);
    std::ostringstream t;
    bool ok = true;
    t << std::left << std::setw(36) << "check" << std::setw(14) << "residual" << std::setw(14) << "tolerance"
      << "status\n";
    for (const Row& r : rows) {
      t << std::left << std::setw(36) << r.name << std::setw(14) << std::setprecision(3) << std::scientific << r.value
        << std::setw(14) << r.tol << (r.pass() ? "PASS" : "FAIL") << "\n";
      ok = ok && r.pass();
    }
    emit(t.str());
    return ok ? Pass : CheckFailed;
  }

  std::ostream& out_;
  std::ostream& err_;
  RunConfig cfg_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Runner(out, err).run(args);
}

}  // namespace monodromize::cli
