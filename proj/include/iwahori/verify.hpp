#pragma once

// Verification suites over a parameter set (p, f, e, r) at finite depth, with JSON reports.
//
// Config files are key = value lines; '#' starts a comment. Keys before the first [section]
// are defaults shared by every section; each section is one run. Keys:
//   p, f, e, r          integers (required)
//   depth               ball radius t (default 3)
//   horizon             kernel horizon m >= depth (default: depth)
//   modulus             residue field modulus, comma-separated coefficients low to high (default Conway)
//   eisenstein          a_0, ..., a_{e-1} of X^e + ... + a_0 (default X^e - p)
//   suites              comma-separated suite ids (default: all; an empty value selects none)
//   label               free-form run name (default: the section name)
//   out                 report path (the first run that sets it wins; --out overrides)

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwahori/errors.hpp"
#include "iwahori/exactla.hpp"
#include "iwahori/hecke.hpp"
#include "iwahori/tree.hpp"

namespace iwahori {

inline constexpr int kReportSchemaVersion = 1;

inline const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids{"hecke-relations",  "kernels",           "reduction-identities",
                                            "main-theorem",     "strict-containment", "eigencharacters"};
  return ids;
}

struct RunConfig {
  std::string label;
  std::uint32_t p = 0, f = 0, e = 0, r = 0;
  std::uint32_t depth = 3;
  std::optional<std::uint32_t> horizon;
  std::vector<std::uint32_t> modulus;
  std::vector<std::int64_t> eisenstein;
  std::optional<std::vector<std::string>> suites;  // nullopt: all; empty: none
  std::string out;

  std::uint32_t horizon_or_depth() const { return horizon.value_or(depth); }
  FieldParams field_params() const { return {p, f, e, r, modulus, eisenstein}; }

  void validate() const {
    if (!is_prime(p) || p == 2) throw ConfigError(label + ": p must be an odd prime");
    if (f < 1 || e < 1) throw ConfigError(label + ": e and f must be positive");
    const std::uint64_t q = ipow(p, f);
    if (q > FieldContext::kMaxOrder) throw ConfigError(label + ": q = p^f too large");
    if (r == 0 || r >= q - 1) throw ConfigError(label + ": r must satisfy 0 < r < q - 1");
    if (depth < 1) throw ConfigError(label + ": depth must be at least 1");
    if (horizon_or_depth() < depth) throw ConfigError(label + ": horizon must be at least depth");
    for (const auto& s : suites.value_or(std::vector<std::string>{}))
      if (std::find(suite_ids().begin(), suite_ids().end(), s) == suite_ids().end())
        throw ConfigError(label + ": unknown suite '" + s + "'");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    if constexpr (std::is_unsigned_v<Int>)
      if (v < 0) throw std::invalid_argument(s);
    return static_cast<Int>(v);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  }
}

inline void apply_key(RunConfig& c, const std::string& key, const std::string& value, const std::string& where) {
  if (key == "p") c.p = parse_int<std::uint32_t>(value, where);
  else if (key == "f") c.f = parse_int<std::uint32_t>(value, where);
  else if (key == "e") c.e = parse_int<std::uint32_t>(value, where);
  else if (key == "r") c.r = parse_int<std::uint32_t>(value, where);
  else if (key == "depth") c.depth = parse_int<std::uint32_t>(value, where);
  else if (key == "horizon") c.horizon = parse_int<std::uint32_t>(value, where);
  else if (key == "label") c.label = value;
  else if (key == "out") c.out = value;
  else if (key == "suites") c.suites = split_list(value);
  else if (key == "modulus") {
    c.modulus.clear();
    for (const auto& x : split_list(value)) c.modulus.push_back(parse_int<std::uint32_t>(x, where));
  } else if (key == "eisenstein") {
    c.eisenstein.clear();
    for (const auto& x : split_list(value)) c.eisenstein.push_back(parse_int<std::int64_t>(x, where));
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Parses the key-value config format; errors carry "source:line".
inline std::vector<RunConfig> parse_config(std::istream& in, const std::string& source = "<config>") {
  RunConfig defaults;
  std::vector<RunConfig> runs;
  std::vector<std::set<std::string>> seen_in_section;
  RunConfig* cur = &defaults;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      runs.push_back(defaults);
      runs.back().label = detail::trim(line.substr(1, line.size() - 2));
      if (runs.back().label.empty()) throw ConfigError(where + ": empty section name");
      cur = &runs.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    detail::apply_key(*cur, key, value, where);
  }
  if (runs.empty()) {
    if (defaults.p == 0) return {};
    if (defaults.label.empty()) defaults.label = "default";
    runs.push_back(defaults);
  }
  for (const auto& r : runs) {
    if (r.p == 0 || r.f == 0 || r.e == 0 || r.r == 0)
      throw ConfigError(source + ": run '" + r.label + "' is missing one of p, f, e, r");
    r.validate();
  }
  return runs;
}

inline std::vector<RunConfig> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, path);
}

// ---- reports ----

struct Check {
  std::string name;
  bool pass = true;
  nlohmann::json detail;
};

struct SuiteReport {
  std::string id;
  std::string status;  // pass, fail, flagged, skipped
  std::string outcome;  // pass or fail, before flagging
  std::string note;
  std::vector<Check> checks;
  nlohmann::json data = nlohmann::json::object();
  nlohmann::json witness;  // null unless a check failed
  double wall_time_s = 0;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  /// Records a check; the first failing check supplies the witness.
  void check(std::string name, bool pass, nlohmann::json detail = nullptr, nlohmann::json witness_data = nullptr) {
    if (!pass && witness.is_null())
      witness = nlohmann::json{{"check", name}, {"data", witness_data.is_null() ? detail : witness_data}};
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
};

inline void to_json(nlohmann::json& j, const SuiteReport& s) {
  j = nlohmann::json{{"id", s.id}, {"status", s.status}, {"outcome", s.outcome}, {"data", s.data},
                     {"witness", s.witness}, {"wall_time_s", s.wall_time_s}};
  if (!s.note.empty()) j["note"] = s.note;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : s.checks) {
    nlohmann::json cj{{"name", c.name}, {"pass", c.pass}};
    if (!c.detail.is_null()) cj["detail"] = c.detail;
    j["checks"].push_back(std::move(cj));
  }
}

struct RunReport {
  RunConfig config;
  bool within_hypotheses = true;
  std::vector<std::string> hypothesis_notes;
  std::uint32_t precision = 0;
  std::vector<std::uint32_t> modulus;
  std::vector<std::int64_t> eisenstein;
  std::vector<SuiteReport> suites;
};

inline void to_json(nlohmann::json& j, const RunReport& r) {
  const auto& c = r.config;
  j = nlohmann::json{
      {"label", c.label},
      {"params",
       {{"p", c.p}, {"f", c.f}, {"e", c.e}, {"r", c.r}, {"q", ipow(c.p, c.f)}, {"depth", c.depth},
        {"horizon", c.horizon_or_depth()}, {"precision", r.precision}, {"modulus", r.modulus}, {"eisenstein", r.eisenstein}}},
      {"hypotheses", {{"within", r.within_hypotheses}, {"notes", r.hypothesis_notes}}},
      {"suites", r.suites}};
}

/// Exit-relevant summary: failures among non-flagged suites.
inline std::size_t count_failures(const std::vector<RunReport>& runs) {
  std::size_t n = 0;
  for (const auto& r : runs)
    for (const auto& s : r.suites) n += s.status == "fail";
  return n;
}

inline nlohmann::json make_report(const std::vector<RunReport>& runs) {
  std::map<std::string, std::size_t> counts{{"pass", 0}, {"fail", 0}, {"flagged", 0}, {"skipped", 0}};
  for (const auto& r : runs)
    for (const auto& s : r.suites) ++counts[s.status];
  return nlohmann::json{{"schema", "iwahori.verification-report"},
                        {"schema_version", kReportSchemaVersion},
                        {"runs", runs},
                        {"summary", counts}};
}

// ---- shared computations ----

/// Claimed basis of the I(1)-invariants restricted to ball index <= max_n: [Id], [beta], and when
/// F != Q_p the vectors s_n^{q-1-r+p^l}, t_n^{r+p^l} and their beta-translates for 2 <= n <= max_n.
struct ClaimedVector {
  std::string name;
  ModuleVec vec;
};

inline std::vector<ClaimedVector> claimed_invariants(const HeckeContext& H, std::uint32_t max_n) {
  const auto& T = H.tree();
  const auto& P = H.params();
  std::vector<ClaimedVector> out;
  out.push_back({"[Id]", ModuleVec::basis(CosetRep::identity())});
  out.push_back({"[beta]", ModuleVec::basis(CosetRep::beta_rep())});
  if (P.e == 1 && P.f == 1) return out;
  const std::uint32_t q = H.q(), r = P.r;
  for (std::uint32_t n = 2; n <= max_n; ++n)
    for (std::uint32_t l = 0; l < P.f; ++l) {
      const std::uint32_t pl = static_cast<std::uint32_t>(ipow(P.p, l));
      const std::string sk = std::to_string(q - 1 - r + pl), tk = std::to_string(r + pl), ns = std::to_string(n);
      ModuleVec s = T.make_s(n, q - 1 - r + pl), t = T.make_t(n, r + pl);
      out.push_back({"beta s_" + ns + "^" + sk, T.beta_translate(s)});
      out.push_back({"beta t_" + ns + "^" + tk, T.beta_translate(t)});
      out.push_back({"s_" + ns + "^" + sk, std::move(s)});
      out.push_back({"t_" + ns + "^" + tk, std::move(t)});
    }
  return out;
}

struct FixedSpace {
  std::size_t interior_reps = 0;  // |B(t-2)|
  std::size_t phi_kernel = 0;     // x in span B(t-2) with (g-1)x in K<m> for all generators
  std::size_t kernel_overlap = 0;  // dim(K<m> cap span B(t-2))
  std::size_t fixed_dim() const { return phi_kernel - kernel_overlap; }
};

/// Fixed space of the I(1)-generators of radius t acting on the image of span B(inner) in V_t/K<m>.
inline FixedSpace interior_fixed_space(const HeckeContext& H, std::uint32_t inner, std::uint32_t t, std::uint32_t m) {
  const auto& T = H.tree();
  const auto& F = H.field();
  const SubspaceBasis& K = H.kernel_sum(m);
  const auto gens = T.igen_set(t);
  const auto reps = T.ball_basis(inner);
  const BallLayout Lm = T.layout(m);
  SparseMat phi;
  std::unordered_map<std::uint64_t, std::uint64_t> compress;
  for (const auto& rep : reps) {
    const ModuleVec x = ModuleVec::basis(rep);
    SparseVec col;
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
      ModuleVec y = T.act(gens[gi], x);
      y.add(F, rep, F.neg(F.one()));
      for (auto [i, c] : K.reduce(H.coords(y, m))) {
        const auto idx = compress.try_emplace(gi * Lm.size() + i, compress.size()).first->second;
        col.emplace_back(idx, c);
      }
    }
    std::sort(col.begin(), col.end());
    phi.columns.push_back(std::move(col));
  }
  phi.rows = compress.size();
  FixedSpace out;
  out.interior_reps = reps.size();
  out.phi_kernel = nullspace(F, phi).dim();
  SubspaceBasis inner_span(Lm.size(), &F);
  for (const auto& rep : reps) inner_span.insert({{Lm.index(rep), F.one()}});
  out.kernel_overlap = SubspaceBasis::intersect(K, inner_span).dim();
  return out;
}

/// Exponent pair (i, j) mod q-1 with diag([a], [d]) v = a^i d^j v for all a, d, read off from the
/// action of diag(zeta, 1) and diag(1, zeta); nullopt when v is not an eigenvector.
inline std::optional<std::pair<std::uint32_t, std::uint32_t>> torus_exponents(const HeckeContext& H, const ModuleVec& v) {
  const auto& T = H.tree();
  const auto& F = H.field();
  const auto& R = T.ring();
  const LocalInt z = R.teichmuller_lift(F.primitive());
  std::array<std::uint32_t, 2> ex{};
  for (int side = 0; side < 2; ++side) {
    const GMat2 g = side == 0 ? T.diag(z, R.one()) : T.diag(R.one(), z);
    const ModuleVec w = T.act(g, v);
    if (v.empty() || w.size() != v.size()) return std::nullopt;
    const auto& [rep0, c0] = *v.terms().begin();
    const FqElem lambda = F.div(w.coeff(rep0), c0);
    if (lambda.is_zero()) return std::nullopt;
    ModuleVec scaled;
    scaled.add(F, v, lambda);
    if (!(scaled == w)) return std::nullopt;
    ex[side] = F.log(lambda);
  }
  return std::make_pair(ex[0], ex[1]);
}

// ---- suites ----

namespace suites {

inline nlohmann::json vec_json(const ModuleVec& v, std::size_t limit = 64) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [rep, c] : v.terms()) {
    if (j.size() >= limit) break;
    nlohmann::json t = rep;
    t["coeff"] = c.v;
    j.push_back(std::move(t));
  }
  return j;
}

inline void hecke_relations(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const std::uint32_t t = cfg.depth;
  std::size_t checked = 0, bad_mp = 0, bad_pm = 0;
  nlohmann::json first_bad;
  const auto& F = H.field();
  std::map<std::pair<Op, CosetRep>, ModuleVec> memo;
  auto image = [&](Op op, const CosetRep& r) -> const ModuleVec& {
    auto [it, fresh] = memo.try_emplace({op, r});
    if (fresh) it->second = H.apply(op, ModuleVec::basis(r));
    return it->second;
  };
  auto compose = [&](Op outer, Op inner, const CosetRep& r) {
    ModuleVec out;
    for (const auto& [x, c] : image(inner, r).terms()) out.add(F, image(outer, x), c);
    return out;
  };
  for (const auto& r : H.tree().ball_basis(t)) {
    const ModuleVec mp = compose(Op::Minus, Op::Plus, r), pm = compose(Op::Plus, Op::Minus, r);
    ++checked;
    if (!mp.empty() || !pm.empty()) {
      bad_mp += !mp.empty();
      bad_pm += !pm.empty();
      if (first_bad.is_null()) first_bad = {{"rep", r}, {"T_minus_T_plus", vec_json(mp)}, {"T_plus_T_minus", vec_json(pm)}};
    }
  }
  rep.data = {{"basis_functions", checked}};
  rep.check("T_minus o T_plus vanishes on B(t)", bad_mp == 0, {{"violations", bad_mp}}, first_bad);
  rep.check("T_plus o T_minus vanishes on B(t)", bad_pm == 0, {{"violations", bad_pm}}, first_bad);
}

inline void kernels(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const std::uint32_t t = cfg.depth;
  const auto& T = H.tree();
  for (Op op : {Op::Minus, Op::Plus}) {
    const std::string name = op_name(op);
    const auto computed = H.kernel_dims_per_sphere(op, t);
    std::vector<std::size_t> predicted;
    std::size_t prev = 0;
    bool annihilated = true;
    nlohmann::json not_annihilated;
    for (std::uint32_t n = 0; n <= t; ++n) {
      const auto vs = H.predicted_kernel_vectors(op, n);
      const std::size_t d = H.span(vs, n).dim();
      predicted.push_back(d - prev);
      prev = d;
      if (n == t)
        for (const auto& v : vs)
          if (!H.apply(op, v).empty()) {
            annihilated = false;
            if (not_annihilated.is_null()) not_annihilated = vec_json(v);
          }
    }
    const SubspaceBasis& K = H.kernel(op, t);
    const SubspaceBasis S = H.span(H.predicted_kernel_vectors(op, t), t);
    bool equal = S.dim() == K.dim();
    nlohmann::json outside;
    for (const auto& row : K.rows())
      if (!S.member(row)) {
        equal = false;
        outside = vec_json(H.vec(row, t));
        break;
      }
    rep.data[name] = {{"kernel_dim", K.dim()},
                      {"per_sphere_computed", computed},
                      {"per_sphere_predicted", predicted},
                      {"fan_exponents", H.fan_exponents(op)},
                      {"exceptional_exponents", H.exceptional_exponents(op)}};
    rep.check(name + ": predicted generators are annihilated", annihilated, nullptr, not_annihilated);
    rep.check(name + ": predicted span equals computed kernel", equal, {{"predicted", S.dim()}, {"computed", K.dim()}}, outside);
    rep.check(name + ": per-sphere dimensions agree", computed == predicted);
  }
  for (std::uint32_t d = 2; d <= t; ++d) {
    const KernelPair kp = H.kernel_pair(d);
    const std::size_t cap = SubspaceBasis::intersect(kp.minus, kp.plus).dim();
    rep.check("kernels intersect trivially at depth " + std::to_string(d), cap == 0, {{"intersection_dim", cap}});
    const bool id_in = kp.sum.member(H.coords(ModuleVec::basis(CosetRep::identity()), d));
    rep.check("[Id] outside the kernel sum at depth " + std::to_string(d), !id_in);
  }
  // sphere sums of tail edges: in Ker T_{-1,0}, fixed by I(1), torus acts by a^r (d^r after beta)
  const auto gens = T.igen_set(t);
  bool in_kernel = true, fixed = true, chars = true;
  nlohmann::json bad;
  for (std::uint32_t n = 1; n <= t; ++n)
    for (bool beta : {false, true}) {
      const ModuleVec v = beta ? T.beta_translate(T.make_t(n, 0)) : T.make_t(n, 0);
      if (!H.T_minus(v).empty()) in_kernel = false;
      for (const auto& g : gens)
        if (!(T.act(g, v) == v)) {
          fixed = false;
          if (bad.is_null()) bad = {{"vector", (beta ? "beta t_" : "t_") + std::to_string(n) + "^0"}};
        }
      const auto ex = torus_exponents(H, v);
      const std::pair<std::uint32_t, std::uint32_t> want = beta ? std::make_pair(0u, H.r()) : std::make_pair(H.r(), 0u);
      if (!ex || *ex != want) chars = false;
    }
  rep.check("sphere sums t_n^0, beta t_n^0 lie in Ker T_minus", in_kernel);
  rep.check("sphere sums t_n^0, beta t_n^0 are I(1)-fixed", fixed, nullptr, bad);
  rep.check("sphere sums t_n^0, beta t_n^0 have torus characters a^r, d^r", chars);
}

inline void reduction_identities(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const std::uint32_t t = cfg.depth;
  const auto& F = H.field();
  const std::uint32_t q = H.q(), r = H.r();
  const FqElem sign = r % 2 == 1 ? F.one() : F.neg(F.one());  // (-1)^{r-1}
  std::size_t tested = 0, bad1 = 0, bad2 = 0;
  nlohmann::json w1, w2;
  for (std::uint32_t n = 2; n <= t; ++n) {
    std::vector<FqElem> prefix(n - 1, FqElem{0});
    while (true) {
      ModuleVec one, two;
      for (FqElem mu : F.elements()) {
        std::vector<FqElem> lam = prefix;
        lam.push_back(mu);
        one.add(F, CosetRep{false, n, lam, std::nullopt}, F.pow(mu, q - 1 - r));
        two.add(F, CosetRep{false, n - 1, prefix, mu}, F.pow(mu, r));
      }
      // (1): sum mu^{q-1-r} [g0(n, mu)] = -[g0(n-2, [mu]_{n-2}) u([mu_{n-2}]) w]
      one.add(F, CosetRep{false, n - 2, std::vector<FqElem>(prefix.begin(), prefix.end() - 1), prefix.back()}, F.one());
      // (2): sum mu^r [g0(n-1, [mu]_{n-1}) u([mu_{n-1}]) w] = (-1)^{r-1} [g0(n-1, [mu]_{n-1})]
      two.add(F, CosetRep{false, n - 1, prefix, std::nullopt}, F.neg(sign));
      ++tested;
      if (!H.T_plus(one).empty()) {
        ++bad1;
        if (w1.is_null()) w1 = {{"n", n}, {"prefix", digit_string(prefix)}, {"difference", vec_json(one)}};
      }
      if (!H.T_minus(two).empty()) {
        ++bad2;
        if (w2.is_null()) w2 = {{"n", n}, {"prefix", digit_string(prefix)}, {"difference", vec_json(two)}};
      }
      std::size_t i = prefix.size();
      while (i > 0 && ++prefix[i - 1].v == q) prefix[--i].v = 0;
      if (i == 0) break;
    }
  }
  rep.data = {{"prefixes_tested", tested}, {"sign_identity_2", sign.v}};
  rep.check("identity (1) lies in Ker T_plus for n = 2..t", bad1 == 0, {{"violations", bad1}}, w1);
  rep.check("identity (2) lies in Ker T_minus for n = 2..t", bad2 == 0, {{"violations", bad2}}, w2);
}

inline void main_theorem(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const std::uint32_t t = cfg.depth, m = cfg.horizon_or_depth();
  const auto& T = H.tree();
  const auto& F = H.field();
  const auto claimed = claimed_invariants(H, t - 2);
  const SubspaceBasis& K = H.kernel_sum(m);
  const auto gens = T.igen_set(t);
  // (i) invariance modulo K<m>
  std::size_t non_invariant = 0;
  nlohmann::json w;
  for (const auto& c : claimed)
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
      ModuleVec y = T.act(gens[gi], c.vec);
      y.add(F, c.vec, F.neg(F.one()));
      if (!K.reduce(H.coords(y, m)).empty()) {
        ++non_invariant;
        if (w.is_null()) w = {{"vector", c.name}, {"generator_index", gi}};
        break;
      }
    }
  // (ii) independence in V_m / K<m>
  SubspaceBasis ext = K;
  std::size_t rank = 0;
  nlohmann::json dependent;
  for (const auto& c : claimed) {
    if (ext.insert(H.coords(c.vec, m))) ++rank;
    else if (dependent.is_null()) dependent = {{"vector", c.name}};
  }
  // (iii) interior completeness
  const FixedSpace fs = interior_fixed_space(H, t - 2, t, m);
  nlohmann::json names = nlohmann::json::array();
  for (const auto& c : claimed) names.push_back(c.name);
  rep.data = {{"claimed", names},
              {"claimed_count", claimed.size()},
              {"generators", gens.size()},
              {"kernel_sum_dim", K.dim()},
              {"interior_reps", fs.interior_reps},
              {"phi_kernel_dim", fs.phi_kernel},
              {"kernel_overlap_dim", fs.kernel_overlap},
              {"interior_fixed_dim", fs.fixed_dim()}};
  rep.check("claimed vectors are invariant modulo the kernel sum", non_invariant == 0, {{"non_invariant", non_invariant}}, w);
  rep.check("claimed vectors are independent modulo the kernel sum", rank == claimed.size(), {{"rank", rank}}, dependent);
  rep.check("interior fixed space has the claimed dimension", fs.fixed_dim() == claimed.size(),
            {{"fixed", fs.fixed_dim()}, {"claimed", claimed.size()}});
}

inline void strict_containment(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const std::uint32_t t = cfg.depth;
  const auto& T = H.tree();
  const auto plus_exc = H.exceptional_exponents(Op::Plus), minus_exc = H.exceptional_exponents(Op::Minus);
  rep.data = {{"exceptional_exponents_T_plus", plus_exc}, {"exceptional_exponents_T_minus", minus_exc}, {"horizons", t}};
  if (H.params().f == 1) {
    rep.note = "no witness exists for f = 1";
    rep.check("no exceptional kernel generators when f = 1", plus_exc.empty() && minus_exc.empty());
    return;
  }
  rep.note = "horizon-bounded evidence: absence from op(V_m) for m <= depth, not a global statement";
  rep.check("an exceptional generator exists on each side", !plus_exc.empty() && !minus_exc.empty());
  auto witness = [&](Op kernel_op, Op image_op, const std::vector<std::uint32_t>& exps, const char* fam) {
    for (auto k : exps) {
      const ModuleVec v = kernel_op == Op::Plus ? T.make_s(1, k) : T.make_t(1, k);
      const std::string nm = std::string(fam) + "_1^" + std::to_string(k);
      rep.check(nm + " lies in Ker " + op_name(kernel_op), H.apply(kernel_op, v).empty());
      std::vector<std::uint32_t> found;
      for (std::uint32_t m = 0; m <= t; ++m)
        if (H.image_search(v, m, image_op)) found.push_back(m);
      rep.check(nm + " is outside " + op_name(image_op) + "(V_m) for all m <= depth", found.empty(),
                {{"horizons_with_preimage", found}});
    }
  };
  witness(Op::Plus, Op::Minus, plus_exc, "s");
  witness(Op::Minus, Op::Plus, minus_exc, "t");
}

inline void eigencharacters(const HeckeContext& H, const RunConfig& cfg, SuiteReport& rep) {
  const auto& T = H.tree();
  const auto& F = H.field();
  const auto& R = T.ring();
  const auto& P = H.params();
  const std::uint32_t q = H.q(), r = P.r, qm1 = q - 1;
  // torus formulas for s_n^k, t_n^s and beta-translates, n <= min(2, depth)
  std::vector<GMat2> tor;
  for (std::uint32_t i = 0; i < qm1; ++i)
    for (std::uint32_t j = 0; j < qm1; j += std::max<std::uint32_t>(1, qm1 / 4))
      tor.push_back(T.diag(R.teichmuller_lift(F.pow(F.primitive(), i)), R.teichmuller_lift(F.pow(F.primitive(), j))));
  std::size_t tested = 0, bad = 0;
  nlohmann::json w;
  for (std::uint32_t n = 1; n <= std::min<std::uint32_t>(2, cfg.depth); ++n)
    for (std::uint32_t k = 0; k <= qm1; ++k)
      for (int fam = 0; fam < 2; ++fam)
        for (bool beta : {false, true}) {
          const ModuleVec base = fam == 0 ? T.make_s(n, k) : T.make_t(n, k);
          const ModuleVec v = beta ? T.beta_translate(base) : base;
          for (const auto& g : tor) {
            FqElem a = R.residue(g(0, 0)), d = R.residue(g(1, 1));
            if (beta) std::swap(a, d);
            // d^r (d/a)^k for s, a^r (d/a)^k for t
            const FqElem lam = F.mul(F.pow(fam == 0 ? d : a, r), F.pow(F.div(d, a), k));
            ModuleVec expect;
            expect.add(F, v, lam);
            ++tested;
            if (!(T.act(g, v) == expect)) {
              ++bad;
              if (w.is_null()) w = {{"family", fam == 0 ? "s" : "t"}, {"beta", beta}, {"n", n}, {"k", k}};
            }
          }
        }
  rep.check("torus acts on s_n^k, t_n^s by the predicted characters", bad == 0, {{"tested", tested}, {"violations", bad}}, w);

  auto pair_json = [](std::pair<std::uint32_t, std::uint32_t> x) { return nlohmann::json::array({x.first, x.second}); };
  const auto id_pair = torus_exponents(H, ModuleVec::basis(CosetRep::identity()));
  rep.check("[Id] has exponent pair (0, r)", id_pair && *id_pair == std::make_pair(0u, r % qm1));
  if (P.f < 2) {
    rep.note = "exponent-pair disjointness needs f >= 2";
    return;
  }
  auto md = [&](std::int64_t x) { return static_cast<std::uint32_t>(((x % qm1) + qm1) % qm1); };
  // quoted characters of the known basis of the other module: c-type (r-k, k), k = p^l (r_l + 1),
  // and for e > 1 the d-type (r - p^l, p^l); each with its beta-translate (swapped)
  const auto rd = digits_base_p(r, P.p).digits;
  std::set<std::pair<std::uint32_t, std::uint32_t>> other;
  for (std::uint32_t l = 0; l < P.f; ++l) {
    const std::int64_t pl = static_cast<std::int64_t>(ipow(P.p, l));
    const std::int64_t k = pl * ((l < rd.size() ? rd[l] : 0) + 1);
    other.insert({md(r - k), md(k)});
    other.insert({md(k), md(r - k)});
    if (P.e > 1) {
      other.insert({md(r - pl), md(pl)});
      other.insert({md(pl), md(r - pl)});
    }
  }
  nlohmann::json other_json = nlohmann::json::array(), ours = nlohmann::json::array();
  for (const auto& x : other) other_json.push_back(pair_json(x));
  const std::uint32_t n = std::min<std::uint32_t>(2, cfg.depth);
  bool formulas = true, disjoint = true;
  std::vector<ModuleVec> witnesses;
  for (std::uint32_t l = 0; l < P.f; ++l) {
    const std::int64_t pl = static_cast<std::int64_t>(ipow(P.p, l));
    // witness family: s-type for e = 1, t-type for e > 1 (s-type collides with the d-type there)
    const bool use_s = P.e == 1;
    const ModuleVec v = use_s ? T.make_s(n, static_cast<std::uint32_t>(q - 1 - r + pl)) : T.make_t(n, static_cast<std::uint32_t>(r + pl));
    const auto predicted = use_s ? std::make_pair(md(r - pl), md(pl)) : std::make_pair(md(-pl), md(r + pl));
    const auto computed = torus_exponents(H, v);
    if (!computed || *computed != predicted) formulas = false;
    witnesses.push_back(v);
    witnesses.push_back(T.beta_translate(v));
    const bool absent = !other.count(predicted);
    disjoint = disjoint && absent;
    ours.push_back({{"l", l}, {"family", use_s ? "s" : "t"}, {"pair", pair_json(predicted)},
                    {"computed", computed ? pair_json(*computed) : nlohmann::json(nullptr)}, {"absent_from_other", absent}});
  }
  rep.data = {{"other_pairs", other_json}, {"witness_pairs", ours}};
  rep.check("computed exponent pairs of the witness vectors match the formulas", formulas);
  rep.check("witness exponent pairs are absent from the other module's invariant characters", disjoint, nullptr, ours);
  if (cfg.depth < 2) return;
  // diagonal pro-p generators have trivial character: they fix the witnesses modulo the kernel sum
  const SubspaceBasis& K = H.kernel_sum(cfg.depth);
  std::size_t moved = 0;
  for (const auto& g : T.igen_set(cfg.depth)) {
    if (R.valuation(g(0, 1)) != kInfiniteValuation || R.valuation(g(1, 0)) != kInfiniteValuation) continue;
    for (const auto& v : witnesses) {
      ModuleVec y = T.act(g, v);
      y.add(F, v, F.neg(F.one()));
      moved += !K.reduce(H.coords(y, cfg.depth)).empty();
    }
  }
  rep.check("diagonal pro-p generators fix the witnesses modulo the kernel sum", moved == 0, {{"violations", moved}});
}

}  // namespace suites

// ---- orchestration ----

struct RunOptions {
  std::optional<std::string> dump_dir;
  std::function<void(const std::string&)> log;
};

inline RunReport run_config(const RunConfig& cfg, const RunOptions& opts = {}) {
  cfg.validate();
  RunReport out;
  out.config = cfg;
  const std::uint32_t max_depth = std::max(cfg.depth, cfg.horizon_or_depth());
  HeckeContext H(cfg.field_params(), max_depth);
  out.within_hypotheses = H.in_hypotheses();
  if (!out.within_hypotheses) out.hypothesis_notes.push_back("outside the hypotheses: need 0 < r_j < p-1, and 2 < r < p-3 when f = 1");
  out.precision = H.tree().ring().precision();
  out.modulus = H.field().modulus();
  out.eisenstein = H.tree().ring().eisenstein();
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  using SuiteFn = void (*)(const HeckeContext&, const RunConfig&, SuiteReport&);
  const std::vector<std::pair<std::string, SuiteFn>> table{
      {"hecke-relations", suites::hecke_relations}, {"kernels", suites::kernels},
      {"reduction-identities", suites::reduction_identities}, {"main-theorem", suites::main_theorem},
      {"strict-containment", suites::strict_containment}, {"eigencharacters", suites::eigencharacters}};
  const std::map<std::string, std::uint32_t> min_depth{{"hecke-relations", 1}, {"kernels", 2},
                                                        {"reduction-identities", 3}, {"main-theorem", 3},
                                                        {"strict-containment", 1}, {"eigencharacters", 1}};
  const auto selected = cfg.suites.value_or(suite_ids());
  for (const auto& [id, fn] : table) {
    if (std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    SuiteReport rep;
    rep.id = id;
    const auto start = std::chrono::steady_clock::now();
    if (cfg.depth < min_depth.at(id)) {
      rep.status = rep.outcome = "skipped";
      rep.note = "needs depth >= " + std::to_string(min_depth.at(id));
    } else {
      log(cfg.label + ": " + id);
      try {
        fn(H, cfg, rep);
      } catch (const PrecisionError& e) {
        rep.check("computation completed within precision", false, {{"error", e.what()}});
      }
      rep.outcome = rep.all_pass() ? "pass" : "fail";
      rep.status = out.within_hypotheses ? rep.outcome : "flagged";
    }
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.suites.push_back(std::move(rep));
  }

  if (opts.dump_dir) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(*opts.dump_dir) / cfg.label;
    fs::create_directories(dir);
    std::ofstream dims(dir / "kernel_dims.csv");
    dims << "operator,sphere,dim\n";
    for (Op op : {Op::Minus, Op::Plus}) {
      const std::string nm = op == Op::Minus ? "minus" : "plus";
      H.matrix(op, cfg.depth).write_csv((dir / ("T_" + nm + "_t" + std::to_string(cfg.depth) + ".csv")).string());
      H.kernel(op, cfg.depth).write_csv((dir / ("ker_" + nm + "_t" + std::to_string(cfg.depth) + ".csv")).string());
      const auto per = H.kernel_dims_per_sphere(op, cfg.depth);
      for (std::size_t n = 0; n < per.size(); ++n) dims << op_name(op) << ',' << n << ',' << per[n] << '\n';
    }
  }
  return out;
}

}  // namespace iwahori
