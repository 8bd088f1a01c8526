// essnorm: command-line front end.  Axes are 1-based on the command line and
// in every report; the library is 0-based.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "essnorm/essnorm.hpp"

namespace {

using namespace essnorm;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStrict = 2;

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

std::string point_str(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

struct Options {
  std::string family;
  int m = 0;
  std::string weights_file;
  std::string submodule_file;
  std::string generators;
  std::string out;
  std::string format;
  bool strict = false;
  std::uint64_t seed = 0;

  std::string kind = "self";
  int i = 1;
  int j = 0;
  std::string domain = "ambient";
  std::vector<double> p;
  std::vector<double> q;
  long max_degree = -1;
  std::string window;
  double margin = 0.1;
  int target = 0;
  std::string condition = "star";
  int level_cap = 2;
  std::size_t slice_budget = 64;
  std::string matrix_out;
};

void add_weight_flags(CLI::App* c, Options& o) {
  c->add_option("--family", o.family, "weight family (drury_arveson, factorial_ratio, hardy_ball_like, bergman_ball_like, unweighted)");
  c->add_option("--m", o.m, "number of variables");
  c->add_option("--weights-file", o.weights_file, "JSON weight description");
}

void add_submodule_flags(CLI::App* c, Options& o) {
  c->add_option("--submodule-file", o.submodule_file, "JSON submodule or set description");
  c->add_option("--generators", o.generators, "inline generator list, e.g. \"[[2,3],[3,3]]\"");
}

void add_output_flags(CLI::App* c, Options& o, const std::string& default_format) {
  c->add_option("--out", o.out, "output file (default stdout)");
  c->add_option("--format", o.format, "output format (default " + default_format + ")");
  c->add_flag("--strict", o.strict, "exit 2 when a verdict fails");
}

void add_operator_flags(CLI::App* c, Options& o) {
  c->add_option("--kind", o.kind, "self | cross | shift | adjoint | edge")->capture_default_str();
  c->add_option("--i", o.i, "first axis (1-based)")->capture_default_str();
  c->add_option("--j", o.j, "second axis for cross commutators (1-based)");
  c->add_option("--domain", o.domain, "ambient | submodule | quotient")->capture_default_str();
}

void add_verdict_flags(CLI::App* c, Options& o) {
  c->add_option("--max-degree", o.max_degree, "largest shell");
  c->add_option("--window", o.window, "fit window lo:hi");
  c->add_option("--margin", o.margin, "slope margin")->capture_default_str();
}

class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw io::InputError("", "cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

io::WeightSpec load_weights(const Options& o, std::size_t fallback_m) {
  if (!o.weights_file.empty()) return io::parse_weights(io::read_file(o.weights_file));
  io::WeightSpec w;
  const std::size_t m = o.m > 0 ? static_cast<std::size_t>(o.m) : fallback_m;
  if (m == 0) throw io::InputError("", "--m is required with --family");
  json j = {{"m", m}, {"family", o.family.empty() ? "drury_arveson" : o.family}};
  try {
    return io::parse_weights(j);
  } catch (const io::InputError& e) {
    throw io::InputError("", std::string("--family/--m: ") + e.what());
  }
}

std::optional<io::SubmoduleSpec> load_submodule(const Options& o, bool required) {
  if (!o.submodule_file.empty()) return io::parse_submodule(io::read_file(o.submodule_file));
  if (!o.generators.empty()) {
    const json g = io::parse_text(o.generators, "--generators");
    if (g.is_object()) return io::parse_submodule(g);
    if (!g.is_array()) throw io::InputError("", "--generators: expected an array");
    std::size_t m = o.m > 0 ? static_cast<std::size_t>(o.m) : 0;
    if (m == 0) {
      if (g.empty() || !g[0].is_array()) throw io::InputError("", "--generators: pass --m for an empty list");
      m = g[0].size();
    }
    if (m == 0 || m > kMaxVars) throw io::InputError("", "--generators: bad dimension");
    return io::parse_generator_list(g, m, "/generators");
  }
  if (required) throw io::InputError("", "a submodule is required (--submodule-file or --generators)");
  return std::nullopt;
}

std::size_t axis_arg(int one_based, std::size_t m, const char* flag) {
  if (one_based < 1 || static_cast<std::size_t>(one_based) > m)
    throw io::InputError("", std::string(flag) + " must be between 1 and " + std::to_string(m));
  return static_cast<std::size_t>(one_based - 1);
}

DomainKind domain_kind(const std::string& s) {
  if (s == "ambient") return DomainKind::ambient;
  if (s == "submodule") return DomainKind::submodule;
  if (s == "quotient") return DomainKind::quotient;
  throw io::InputError("", "--domain must be ambient, submodule or quotient");
}

Domain make_domain(const Options& o, std::size_t m, const std::optional<io::SubmoduleSpec>& s) {
  const DomainKind kind = domain_kind(o.domain);
  if (kind == DomainKind::ambient) return Domain::ambient(m, s ? s->k : 1);
  if (!s) throw io::InputError("", "--domain " + o.domain + " needs a submodule");
  return Domain::of(kind, s->build());
}

LatticeOperator make_operator(const Options& o, const WeightSet& w, const Domain& d) {
  const std::size_t m = w.dimension();
  const std::size_t i = axis_arg(o.i, m, "--i");
  if (o.kind == "self") return commutator(w, i, i, d);
  if (o.kind == "cross") return commutator(w, i, axis_arg(o.j, m, "--j"), d);
  if (o.kind == "shift") return shift_op(w, i, d);
  if (o.kind == "adjoint") return adjoint(shift_op(w, i, d));
  if (o.kind == "edge") return edge_gram(w, i, d);
  throw io::InputError("", "--kind must be self, cross, shift, adjoint or edge");
}

VerdictOptions verdict_options(const Options& o, long default_degree) {
  VerdictOptions v;
  v.max_degree = o.max_degree >= 0 ? o.max_degree : default_degree;
  v.margin = o.margin;
  if (!o.window.empty()) {
    const auto colon = o.window.find(':');
    if (colon == std::string::npos) throw io::InputError("", "--window must be lo:hi");
    try {
      v.window = std::pair<long, long>{std::stol(o.window.substr(0, colon)), std::stol(o.window.substr(colon + 1))};
    } catch (const std::exception&) {
      throw io::InputError("", "--window must be lo:hi");
    }
    if (v.window->first < 1 || v.window->second < v.window->first || v.window->second > v.max_degree)
      throw io::InputError("", "--window must satisfy 1 <= lo <= hi <= max degree");
  }
  return v;
}

json fit_json(const DecayFit& f) {
  return {{"window", {f.lo, f.hi}}, {"shells_used", f.used}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

json verdict_json(const CompactnessVerdict& v) {
  json out = {{"verdict", std::string(to_string(v.verdict))}, {"compactness", std::string(to_string(v.compactness))}};
  if (v.p) out["p"] = *v.p;
  if (v.schatten) out["schatten"] = std::string(to_string(*v.schatten));
  if (v.norm_fit) out["norm_fit"] = fit_json(*v.norm_fit);
  if (v.sum_fit) out["sum_fit"] = fit_json(*v.sum_fit);
  if (v.finite_rank) out["finite_rank"] = true;
  if (!v.note.empty()) out["note"] = v.note;
  return out;
}

json tests_json(const std::vector<OperatorVerdict>& tests) {
  json out = json::array();
  for (const auto& t : tests) {
    json e = verdict_json(t.result);
    e["op"] = t.op;
    out.push_back(e);
  }
  return out;
}

json slice_json(const std::vector<AxisLevel>& s) {
  json out = json::array();
  for (const auto& a : s) out.push_back({a.axis + 1, a.level});
  return out;
}

json check_json(const WeightCheck& c) {
  json out = {{"holds", c.holds}, {"worst", c.worst}};
  if (c.witness) out["witness"] = io::to_json(*c.witness);
  if (c.axis) out["axis"] = *c.axis + 1;
  return out;
}

void write_json(const Options& o, const json& j) {
  Output out(o.out);
  out.os() << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_weights_check(const Options& o) {
  const auto ws = load_weights(o, 0);
  const WeightSet w = ws.build();
  json out = {{"weights", io::to_json(ws)}, {"condition", o.condition}};
  bool holds = true;
  if (o.condition == "star" || o.condition == "spherical") {
    const long n = o.max_degree >= 0 ? o.max_degree : 100;
    const WeightCheck c = o.condition == "star" ? check_contractive(w, n) : check_spherical(w, n);
    out["max_degree"] = n;
    out.update(check_json(c));
    holds = c.holds;
  } else {
    ConditionKind kind;
    if (o.condition == "star_star") kind = ConditionKind::star_star;
    else if (o.condition == "star_star_p") kind = ConditionKind::star_star_p;
    else if (o.condition == "star_star_sup") kind = ConditionKind::star_star_sup;
    else throw io::InputError("", "--condition must be star, spherical, star_star, star_star_p or star_star_sup");
    ConditionParams params;
    params.options = verdict_options(o, kind == ConditionKind::star_star_sup ? 200 : 600);
    if (!o.p.empty()) params.p = o.p.front();
    params.level_cap = o.level_cap;
    params.slice_budget = o.slice_budget;
    const ConditionReport r = check_condition(w, kind, params);
    holds = r.holds;
    out["holds"] = r.holds;
    if (kind == ConditionKind::star_star_p) out["p"] = params.p;
    if (kind == ConditionKind::star_star_sup) out["slices_tested"] = r.slices_tested;
    json entries = json::array();
    for (const auto& e : r.entries) {
      json x = verdict_json(e.result);
      x["op"] = e.label;
      if (!e.slice.empty()) x["slice"] = slice_json(e.slice);
      if (e.order) x["order"] = *e.order;
      entries.push_back(x);
    }
    out["entries"] = entries;
  }
  write_json(o, out);
  return o.strict && !holds ? kExitStrict : kExitOk;
}

int cmd_commutator(const Options& o) {
  const auto sub = load_submodule(o, false);
  const auto ws = load_weights(o, sub ? sub->m : 0);
  const WeightSet w = ws.build();
  const Domain d = make_domain(o, w.dimension(), sub);
  const LatticeOperator op = make_operator(o, w, d);
  const long n_max = o.max_degree >= 0 ? o.max_degree : 3;
  Output out(o.out);
  json rows = json::array();
  if (o.format == "csv") out.os() << "point,target,singular_values\n";
  MultiIndex tgt;
  for (long n = 0; n <= n_max; ++n)
    for_each_in_shell(w.dimension(), n, [&](const MultiIndex& b) {
      if (!op.target(b, tgt)) return;
      const CMatrix blk = op.coefficient(b);
      if (blk.rows() == 0 || blk.cols() == 0) return;
      Eigen::JacobiSVD<CMatrix> svd(blk);
      if (o.format == "csv") {
        out.os() << '"' << point_str(b) << "\",\"" << point_str(tgt) << "\",";
        for (Eigen::Index t = 0; t < svd.singularValues().size(); ++t) out.os() << (t ? ";" : "") << num(svd.singularValues()[t]);
        out.os() << "\n";
        return;
      }
      json block = json::array();
      for (Eigen::Index r = 0; r < blk.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < blk.cols(); ++c) row.push_back(io::detail::complex_json(blk(r, c)));
        block.push_back(row);
      }
      rows.push_back({{"point", io::to_json(b)}, {"target", io::to_json(tgt)}, {"block", block}});
    });
  if (o.format != "csv") out.os() << json({{"op", op.label()}, {"domain", o.domain}, {"blocks", rows}}).dump(2) << "\n";
  return kExitOk;
}

int cmd_schatten(const Options& o) {
  if (o.p.empty()) throw io::InputError("", "at least one --p is required");
  const auto sub = load_submodule(o, false);
  const auto ws = load_weights(o, sub ? sub->m : 0);
  const WeightSet w = ws.build();
  const Domain d = make_domain(o, w.dimension(), sub);
  const LatticeOperator op = make_operator(o, w, d);
  const VerdictOptions vo = verdict_options(o, 600);
  const auto series = schatten_series(op, o.p, vo.max_degree, vo.threads);
  std::vector<CompactnessVerdict> vs;
  for (std::size_t t = 0; t < series.size(); ++t) vs.push_back(detail::judge(series[t], o.p[t], vo));
  std::optional<CriticalExponent> crit;
  if (o.p.size() >= 3) {
    std::vector<std::pair<double, double>> ps;
    for (const auto& v : vs)
      if (v.sum_fit) ps.emplace_back(*v.p, v.sum_fit->slope);
    if (ps.size() >= 3) crit = fit_critical_exponent(ps);
  }
  bool ok = true;
  for (const auto& v : vs) ok = ok && v.verdict == Verdict::converged;
  Output out(o.out);
  if (o.format == "csv") {
    for (std::size_t t = 0; t < series.size(); ++t) {
      out.os() << "# op=" << op.label() << " domain=" << o.domain << " p=" << num(series[t].p) << "\n";
      out.os() << "shell,count,shellsum,cumulative\n";
      for (std::size_t n = 0; n < series[t].shells.size(); ++n) {
        const auto& sh = series[t].shells[n];
        out.os() << sh.n << "," << sh.count << "," << num(sh.sum) << "," << num(series[t].cumulative[n]) << "\n";
      }
      const auto& v = vs[t];
      out.os() << "# verdict=" << to_string(v.verdict) << " compactness=" << to_string(v.compactness);
      if (v.sum_fit) out.os() << " slope=" << num(v.sum_fit->slope) << " window=" << v.sum_fit->lo << ":" << v.sum_fit->hi << " r2=" << num(v.sum_fit->r2);
      if (!v.note.empty()) out.os() << " note=\"" << v.note << "\"";
      out.os() << "\n";
    }
    if (crit) out.os() << "# critical_exponent=" << num(crit->p_star) << "\n";
  } else {
    json j = {{"op", op.label()}, {"domain", o.domain}, {"max_degree", vo.max_degree}};
    json arr = json::array();
    for (std::size_t t = 0; t < series.size(); ++t) {
      json shells = json::array();
      for (std::size_t n = 0; n < series[t].shells.size(); ++n) {
        const auto& sh = series[t].shells[n];
        shells.push_back({sh.n, sh.count, sh.sum, series[t].cumulative[n]});
      }
      json e = verdict_json(vs[t]);
      e["partial_sum"] = series[t].total();
      e["shells"] = shells;
      arr.push_back(e);
    }
    j["series"] = arr;
    if (crit) j["critical_exponent"] = {{"a", crit->a}, {"b", crit->b}, {"p_star", crit->p_star}};
    out.os() << j.dump(2) << "\n";
  }
  return o.strict && !ok ? kExitStrict : kExitOk;
}

json block_json(const Block& b) {
  json j = {{"description", b.describe()}, {"provenance", b.provenance}};
  j["tag"] = b.tag ? json(std::string(to_string(*b.tag))) : json(nullptr);
  json free = json::array();
  for (auto a : b.free) free.push_back(a + 1);
  j["axes"] = free;
  j["slice"] = slice_json(b.fixed);
  if (!b.submodule) {
    j["corner"] = io::to_json(b.corner);
    j["fiber_dim"] = b.fiber.cols();
    if (b.split_axis) {
      j["split_axis"] = b.free[*b.split_axis] + 1;
      j["part"] = b.face ? "face" : "interior";
    }
  } else {
    j["generators"] = b.submodule->generators().size();
  }
  json kids = json::array();
  for (const auto& c : b.children) kids.push_back(block_json(c));
  j["children"] = kids;
  return j;
}

void block_text(std::ostream& os, const Block& b, int depth) {
  os << std::string(static_cast<std::size_t>(2 * depth), ' ') << (b.tag ? std::string(to_string(*b.tag)) : std::string("node")) << ": "
     << b.describe() << "  [" << b.provenance << "]\n";
  for (const auto& c : b.children) block_text(os, c, depth + 1);
}

std::optional<std::size_t> target_axis(const Options& o, std::size_t m) {
  if (o.target == 0) return std::nullopt;
  return axis_arg(o.target, m, "--target");
}

int cmd_decompose(const Options& o) {
  const auto sub = load_submodule(o, true);
  const BlockTree tree = full_reduction(sub->build(), target_axis(o, sub->m));
  Output out(o.out);
  if (o.format == "text") {
    if (tree.empty()) out.os() << "empty submodule\n";
    else block_text(out.os(), *tree.root, 0);
    return kExitOk;
  }
  json j = {{"submodule", io::to_json(*sub)}, {"target_axis", tree.target_axis + 1}, {"depth", tree.depth()}};
  j["tree"] = tree.empty() ? json(nullptr) : block_json(*tree.root);
  out.os() << j.dump(2) << "\n";
  return kExitOk;
}

json audit_json(const AuditReport& r) {
  json leaves = json::array();
  for (const auto& l : r.leaves)
    leaves.push_back({{"path", l.path},
                      {"tag", l.tag ? json(std::string(to_string(*l.tag))) : json(nullptr)},
                      {"description", l.description},
                      {"provenance", l.provenance},
                      {"verdict", std::string(to_string(l.verdict))},
                      {"tests", tests_json(l.tests)}});
  return {{"aggregate", std::string(to_string(r.aggregate))}, {"direct", tests_json(r.direct)}, {"leaves", leaves}};
}

int cmd_audit(const Options& o) {
  const auto sub = load_submodule(o, true);
  const auto ws = load_weights(o, sub->m);
  const WeightSet w = ws.build();
  const VerdictOptions vo = verdict_options(o, 200);
  const BlockTree tree = full_reduction(sub->build(), target_axis(o, sub->m));
  const std::optional<double> p = o.p.empty() ? std::nullopt : std::optional<double>(o.p.front());
  const AuditReport r = audit(w, tree, p, vo);
  Output out(o.out);
  if (o.format == "text") {
    out.os() << "aggregate: " << to_string(r.aggregate) << "\n";
    for (const auto& t : r.direct) out.os() << "  direct " << t.op << ": " << to_string(t.result.verdict) << "\n";
    for (const auto& l : r.leaves) {
      out.os() << l.path << "  " << (l.tag ? std::string(to_string(*l.tag)) : "") << "  " << to_string(l.verdict) << "  " << l.description << "\n";
      for (const auto& t : l.tests) {
        out.os() << "    " << t.op << ": " << to_string(t.result.verdict);
        if (t.result.sum_fit) out.os() << " slope " << num(t.result.sum_fit->slope);
        else if (t.result.norm_fit) out.os() << " norm slope " << num(t.result.norm_fit->slope);
        if (!t.result.note.empty()) out.os() << " (" << t.result.note << ")";
        out.os() << "\n";
      }
    }
  } else {
    json j = audit_json(r);
    j["weights"] = io::to_json(ws);
    j["submodule"] = io::to_json(*sub);
    if (p) j["p"] = *p;
    j["max_degree"] = vo.max_degree;
    out.os() << j.dump(2) << "\n";
  }
  return o.strict && r.aggregate != Verdict::converged ? kExitStrict : kExitOk;
}

int cmd_generators(const Options& o) {
  const auto sub = load_submodule(o, true);
  write_json(o, io::to_json(sub->set()));
  return kExitOk;
}

json samuel_json(const SamuelReport& r) {
  return {{"d", r.d},
          {"stabilization_shell", r.stabilization_shell},
          {"shells_computed", r.shells_computed},
          {"polynomial", r.polynomial},
          {"binomial_coefficients", r.binomial},
          {"d_blocks", r.d_blocks},
          {"agree", r.agree},
          {"shell_counts", r.counts.shell}};
}

int cmd_dimension(const Options& o) {
  const auto sub = load_submodule(o, true);
  const SamuelReport r = dimension(sub->build(), o.max_degree >= 0 ? o.max_degree : 32);
  json j = samuel_json(r);
  j["submodule"] = io::to_json(*sub);
  write_json(o, j);
  return o.strict && !r.agree ? kExitStrict : kExitOk;
}

int cmd_zeroset(const Options& o) {
  const auto sub = load_submodule(o, true);
  std::vector<MultiIndex> pts;
  for (const auto& g : sub->generators) pts.push_back(g.alpha);
  json sets = json::array();
  for (const auto& z : common_zero_coordinates(pts)) {
    json s = json::array();
    for (auto a : z) s.push_back(a + 1);
    sets.push_back(s);
  }
  write_json(o, {{"m", sub->m}, {"generators", io::to_json(sub->set())["generators"]}, {"zero_sets", sets}});
  return kExitOk;
}

int cmd_oracle_compare(const Options& o) {
  const auto sub = load_submodule(o, false);
  const auto ws = load_weights(o, sub ? sub->m : 0);
  const WeightSet w = ws.build();
  const std::size_t m = w.dimension();
  const DomainKind kind = domain_kind(o.domain);
  const long n = o.max_degree >= 0 ? o.max_degree : 6;
  std::optional<VectorSubmodule> s;
  if (sub) s = sub->build();
  const auto t = DenseTruncation::build(w, kind, s, n);
  const Domain d = make_domain(o, m, sub);
  json rows = json::array();
  double worst = 0.0;
  auto record = [&](const LatticeOperator& op, const CMatrix& dense) {
    const double dev = compare(op, t, dense);
    double sv = 0.0;
    for (long sh = 0; sh + 1 <= n; ++sh) sv = std::max(sv, compare_singular_values(shell_singular_values(op, sh), t.shell_singular_values(dense, sh)));
    worst = std::max({worst, dev});
    rows.push_back({{"op", op.label()}, {"deviation", dev}, {"shell_sv_deviation", sv}});
  };
  for (std::size_t i = 0; i < m; ++i) {
    record(shift_op(w, i, d), t.shift(i));
    record(adjoint(shift_op(w, i, d)), t.adjoint_shift(i));
    record(edge_gram(w, i, d), t.edge_gram(i));
    for (std::size_t j = 0; j < m; ++j) record(commutator(w, i, j, d), t.commutator(i, j));
  }
  if (!o.matrix_out.empty()) {
    const std::size_t i = axis_arg(o.i, m, "--i");
    CMatrix x;
    if (o.kind == "self") x = t.commutator(i, i);
    else if (o.kind == "cross") x = t.commutator(i, axis_arg(o.j, m, "--j"));
    else if (o.kind == "shift") x = t.shift(i);
    else if (o.kind == "adjoint") x = t.adjoint_shift(i);
    else if (o.kind == "edge") x = t.edge_gram(i);
    else throw io::InputError("", "--kind must be self, cross, shift, adjoint or edge");
    std::ofstream f(o.matrix_out);
    if (!f) throw io::InputError("", "cannot write " + o.matrix_out);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (c) f << ",";
        f << num(x(r, c).real());
        if (x(r, c).imag() != 0.0) f << (x(r, c).imag() < 0 ? "" : "+") << num(x(r, c).imag()) << "i";
      }
      f << "\n";
    }
  }
  write_json(o, {{"weights", io::to_json(ws)}, {"domain", o.domain}, {"max_degree", n}, {"size", t.size()}, {"max_deviation", worst}, {"operators", rows}});
  return o.strict && worst > 1e-12 ? kExitStrict : kExitOk;
}

int cmd_report(const Options& o) {
  const auto sub = load_submodule(o, false);
  const auto ws = load_weights(o, sub ? sub->m : 0);
  const WeightSet w = ws.build();
  const std::size_t m = w.dimension();
  if (sub && sub->m != m) throw io::InputError("", "weights and submodule differ in dimension");
  const std::vector<double> ps = o.p.empty() ? std::vector<double>{static_cast<double>(m) + 1.0} : o.p;
  const VerdictOptions vo = verdict_options(o, 600);

  io::RunConfig cfg;
  cfg.command = "report";
  cfg.weights = ws;
  cfg.submodule = sub;
  cfg.format = "json";
  cfg.seed = o.seed;
  cfg.params = {{"p", ps}, {"max_degree", vo.max_degree}, {"margin", vo.margin}};
  if (vo.window) cfg.params["window"] = {vo.window->first, vo.window->second};
  if (!o.q.empty()) cfg.params["q"] = o.q;

  json j = {{"config", io::to_json(cfg)}};
  bool ok = true;
  const long star_n = std::min<long>(vo.max_degree, 100);
  json cond = {{"star", check_json(check_contractive(w, star_n))}, {"spherical", check_json(check_spherical(w, star_n))}};
  ok = ok && cond["star"]["holds"].get<bool>();

  // Every commutator once, all orders from the same shells.
  json comms = json::array();
  bool compact = true;
  std::vector<bool> in_class(ps.size(), true);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t jx = 0; jx < m; ++jx) {
      const auto op = commutator(w, i, jx, Domain::ambient(m));
      const auto vs = verdicts(op, ps, vo);
      json e = {{"op", op.label()}, {"compactness", std::string(to_string(vs.front().compactness))}};
      if (vs.front().norm_fit) e["norm_fit"] = fit_json(*vs.front().norm_fit);
      compact = compact && vs.front().compactness == Verdict::converged;
      json orders = json::array();
      std::vector<std::pair<double, double>> slopes;
      for (std::size_t t = 0; t < vs.size(); ++t) {
        orders.push_back(verdict_json(vs[t]));
        in_class[t] = in_class[t] && vs[t].verdict == Verdict::converged;
        if (vs[t].sum_fit) slopes.emplace_back(ps[t], vs[t].sum_fit->slope);
      }
      e["orders"] = orders;
      if (slopes.size() >= 3) {
        const auto c = fit_critical_exponent(slopes);
        e["critical_exponent"] = c.p_star;
      }
      comms.push_back(e);
    }
  cond["star_star"] = compact;
  json per_p = json::array();
  for (std::size_t t = 0; t < ps.size(); ++t) per_p.push_back({{"p", ps[t]}, {"holds", in_class[t]}});
  cond["star_star_p"] = per_p;
  j["conditions"] = cond;
  j["commutators"] = comms;
  ok = ok && compact;

  if (sub) {
    const VectorSubmodule s = sub->build();
    const BlockTree tree = full_reduction(s);
    std::mt19937_64 rng(o.seed);
    std::vector<MultiIndex> sample;
    const int box = static_cast<int>(std::max<long>(4, s.generator_box().degree() + 4));
    std::uniform_int_distribution<int> coord(0, box);
    for (int t = 0; t < 200; ++t) {
      MultiIndex x(m);
      for (std::size_t a = 0; a < m; ++a) x[a] = coord(rng);
      sample.push_back(x);
    }
    const PartitionCheck pc = check_partition(tree, sample);
    VerdictOptions ao = vo;
    if (m >= 3) {
      ao.max_degree = std::min<long>(vo.max_degree, 200);
      if (ao.window && ao.window->second > ao.max_degree) ao.window.reset();
    }
    const AuditReport ar = audit(w, tree, ps.front(), ao);
    json dj = audit_json(ar);
    dj["p"] = ps.front();
    dj["partition"] = {{"points", pc.points}, {"failures", pc.failures}};
    j["decomposition"] = dj;
    const SamuelReport sr = dimension(s);
    j["dimension"] = samuel_json(sr);
    const std::vector<double> qs = o.q.empty() ? ps : o.q;
    const ThresholdReport tr = threshold_consistency(s, w, qs, ao);
    json th = json::array();
    for (const auto& e : tr.entries)
      th.push_back({{"q", e.q},
                    {"verdict", std::string(to_string(e.verdict))},
                    {"expected_converged", e.expected_converged},
                    {"boundary", e.boundary},
                    {"consistent", e.consistent}});
    j["thresholds"] = {{"d", sr.d}, {"consistent", tr.consistent}, {"entries", th}};
    ok = ok && pc.failures == 0 && sr.agree && tr.consistent;
  }
  write_json(o, j);
  return o.strict && !ok ? kExitStrict : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"essnorm: essential normality of weighted shifts and monomial submodules"};
  app.require_subcommand(1);
  Options o;
  int (*run)(const Options&) = nullptr;

  std::string default_format;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Options&), const char* fmt) {
    CLI::App* c = app.add_subcommand(name, help);
    c->callback([&run, &default_format, fn, fmt] {
      run = fn;
      default_format = fmt;
    });
    return c;
  };

  auto* wc = sub("weights-check", "check weight conditions", cmd_weights_check, "json");
  add_weight_flags(wc, o);
  add_output_flags(wc, o, "json");
  add_verdict_flags(wc, o);
  wc->add_option("--condition", o.condition, "star | spherical | star_star | star_star_p | star_star_sup")->capture_default_str();
  wc->add_option("--p", o.p, "Schatten order for star_star_p");
  wc->add_option("--level-cap", o.level_cap, "largest slice level for star_star_sup")->capture_default_str();
  wc->add_option("--slice-budget", o.slice_budget, "slice budget for star_star_sup")->capture_default_str();

  auto* cm = sub("commutator", "print operator blocks shell by shell", cmd_commutator, "json");
  add_weight_flags(cm, o);
  add_submodule_flags(cm, o);
  add_operator_flags(cm, o);
  add_output_flags(cm, o, "json");
  cm->add_option("--max-degree", o.max_degree, "largest shell (default 3)");

  auto* sc = sub("schatten", "shell sums, decay fits and verdicts", cmd_schatten, "csv");
  add_weight_flags(sc, o);
  add_submodule_flags(sc, o);
  add_operator_flags(sc, o);
  add_verdict_flags(sc, o);
  add_output_flags(sc, o, "csv");
  sc->add_option("--p", o.p, "Schatten order (repeatable)");

  auto* de = sub("decompose", "block decomposition of a monomial submodule", cmd_decompose, "text");
  add_weight_flags(de, o);
  add_submodule_flags(de, o);
  add_output_flags(de, o, "text");
  de->add_option("--target", o.target, "axis left for the final filtration (default m)");

  auto* au = sub("audit", "per-block verdicts for a decomposition", cmd_audit, "text");
  add_weight_flags(au, o);
  add_submodule_flags(au, o);
  add_verdict_flags(au, o);
  add_output_flags(au, o, "text");
  au->add_option("--p", o.p, "Schatten order");
  au->add_option("--target", o.target, "axis left for the final filtration (default m)");

  auto* ge = sub("generators", "minimal generators of a shift-invariant set", cmd_generators, "json");
  add_submodule_flags(ge, o);
  ge->add_option("--m", o.m, "number of variables");
  add_output_flags(ge, o, "json");

  auto* di = sub("dimension", "Hilbert-Samuel dimension of the quotient", cmd_dimension, "json");
  add_submodule_flags(di, o);
  di->add_option("--m", o.m, "number of variables");
  di->add_option("--max-degree", o.max_degree, "initial number of shells");
  add_output_flags(di, o, "json");

  auto* ze = sub("zeroset", "coordinate subspaces of the common zero set", cmd_zeroset, "json");
  add_submodule_flags(ze, o);
  ze->add_option("--m", o.m, "number of variables");
  add_output_flags(ze, o, "json");

  auto* oc = sub("oracle-compare", "compare lattice operators with dense truncations", cmd_oracle_compare, "json");
  add_weight_flags(oc, o);
  add_submodule_flags(oc, o);
  add_operator_flags(oc, o);
  add_output_flags(oc, o, "json");
  oc->add_option("--max-degree", o.max_degree, "truncation degree (default 6)");
  oc->add_option("--matrix-out", o.matrix_out, "write the dense matrix selected by --kind/--i/--j as CSV");

  auto* rp = sub("report", "conditions, decomposition audit, dimension and thresholds in one JSON", cmd_report, "json");
  add_weight_flags(rp, o);
  add_submodule_flags(rp, o);
  add_verdict_flags(rp, o);
  add_output_flags(rp, o, "json");
  rp->add_option("--p", o.p, "Schatten orders (repeatable)");
  rp->add_option("--q", o.q, "orders for the quotient threshold test (repeatable)");
  rp->add_option("--seed", o.seed, "seed for sampled checks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (o.format.empty()) o.format = default_format;
  if (o.format != "csv" && o.format != "json" && o.format != "text") {
    std::cerr << "error: --format must be csv, json or text\n";
    return kExitInput;
  }
  try {
    return run(o);
  } catch (const io::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitInput;
}
