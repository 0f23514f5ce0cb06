#include "bi/semantics.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace bi {

namespace {
std::string w(int x) { return std::to_string(x); }
}  // namespace

Check check_frame(const Frame& f) {
  const int n = f.n;
  auto bad = [](std::string m) { return Check{false, std::move(m)}; };
  if (n < 1) return bad("no worlds");
  if (f.e < 0 || f.e >= n || f.pi < 0 || f.pi >= n) return bad("e or pi out of range");
  if (f.leq.size() != static_cast<std::size_t>(n * n) || f.rel.size() != static_cast<std::size_t>(n * n * n))
    return bad("table sizes");
  for (int x = 0; x < n; ++x) {
    if (!f.le(x, x)) return bad("<= not reflexive at " + w(x));
    if (!f.le(x, f.pi)) return bad("pi not above " + w(x));
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (f.le(x, y) && f.le(y, z) && !f.le(x, z)) return bad("<= not transitive at " + w(x) + "," + w(y) + "," + w(z));
  }
  for (int x = 0; x < n; ++x)
    if (!f.R(x, x, f.e)) return bad("unitality fails at " + w(x));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (f.R(x, y, z) != f.R(x, z, y)) return bad("commutativity fails at " + w(x) + "," + w(y) + "," + w(z));
  // R(x,a,y) and R(y,b,c) give some t with R(x,t,c) and R(t,a,b).
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < n; ++a)
      for (int y = 0; y < n; ++y) {
        if (!f.R(x, a, y)) continue;
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            if (!f.R(y, b, c)) continue;
            bool found = false;
            for (int t = 0; t < n && !found; ++t) found = f.R(x, t, c) && f.R(t, a, b);
            if (!found) return bad("associativity fails at " + w(x) + "," + w(a) + "," + w(y) + "," + w(b) + "," + w(c));
          }
      }
  return {};
}

Check check_pcm(const PCM& m) {
  const int n = m.n;
  auto bad = [](std::string s) { return Check{false, std::move(s)}; };
  if (n < 1 || m.op.size() != static_cast<std::size_t>(n * n) || m.leq.size() != static_cast<std::size_t>(n * n))
    return bad("table sizes");
  for (int v : m.op)
    if (v < 0 || v >= n) return bad("product not total");
  for (int x = 0; x < n; ++x) {
    if (m.mul(m.e, x) != x) return bad("e is not a unit at " + w(x));
    if (m.mul(m.pi, x) != m.pi) return bad("pi is not absorbing at " + w(x));
    for (int y = 0; y < n; ++y) {
      if (m.mul(x, y) != m.mul(y, x)) return bad("not commutative at " + w(x) + "," + w(y));
      for (int z = 0; z < n; ++z)
        if (m.mul(m.mul(x, y), z) != m.mul(x, m.mul(y, z))) return bad("not associative at " + w(x) + "," + w(y) + "," + w(z));
    }
  }
  for (int x = 0; x < n; ++x) {
    if (!m.le(x, x)) return bad("<= not reflexive");
    if (!m.le(x, m.pi)) return bad("pi not on top");
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (m.le(x, y) && m.le(y, z) && !m.le(x, z)) return bad("<= not transitive");
  }
  for (int a = 0; a < n; ++a)
    for (int a2 = 0; a2 < n; ++a2) {
      if (!m.le(a, a2)) continue;
      for (int b = 0; b < n; ++b)
        for (int b2 = 0; b2 < n; ++b2)
          if (m.le(b, b2) && !m.le(m.mul(a, b), m.mul(a2, b2))) return bad("product not monotone");
    }
  return {};
}

Frame pcm_to_frame(const PCM& m) {
  Frame f;
  f.n = m.n;
  f.e = m.e;
  f.pi = m.pi;
  f.leq = m.leq;
  f.rel.assign(static_cast<std::size_t>(m.n * m.n * m.n), 0);
  for (int u = 0; u < m.n; ++u)
    for (int v = 0; v < m.n; ++v) f.rel[static_cast<std::size_t>((m.mul(u, v) * m.n + u) * m.n + v)] = 1;
  return f;
}

const std::vector<char>& Evaluator::ext(const Formula& f) {
  if (auto it = memo_.find(f); it != memo_.end()) return it->second;
  const Frame& fr = m_.frame;
  const int n = fr.n;
  std::vector<char> out(static_cast<std::size_t>(n), 0);
  auto at = [](const std::vector<char>& v, int x) { return v[static_cast<std::size_t>(x)] != 0; };
  switch (f.kind()) {
    case FKind::Atom: {
      auto it = m_.interp.find(f.name());
      if (it != m_.interp.end()) out = it->second;
      break;
    }
    case FKind::Top: std::fill(out.begin(), out.end(), 1); break;
    case FKind::Bottom: out[static_cast<std::size_t>(fr.pi)] = 1; break;
    case FKind::MultTop:
      for (int x = 0; x < n; ++x) out[static_cast<std::size_t>(x)] = fr.le(fr.e, x);
      break;
    default: {
      const std::vector<char> a = ext(f.left());
      const std::vector<char> b = ext(f.right());
      for (int x = 0; x < n; ++x) {
        bool v = false;
        switch (f.kind()) {
          case FKind::And: v = at(a, x) && at(b, x); break;
          case FKind::Or: v = at(a, x) || at(b, x); break;
          case FKind::Imp:
            v = true;
            for (int y = 0; y < n && v; ++y)
              if (fr.le(x, y) && at(a, y) && !at(b, y)) v = false;
            break;
          case FKind::Star:
            for (int u = 0; u < n && !v; ++u)
              for (int t = 0; t < n && !v; ++t) v = fr.R(x, u, t) && at(a, u) && at(b, t);
            break;
          case FKind::Wand:
            v = true;
            for (int u = 0; u < n && v; ++u)
              for (int y = 0; y < n && v; ++y)
                if (fr.R(y, x, u) && at(a, u) && !at(b, y)) v = false;
            break;
          default: break;
        }
        out[static_cast<std::size_t>(x)] = v;
      }
    }
  }
  return memo_.emplace(f, std::move(out)).first->second;
}

bool satisfies(const Model& m, int w, const Formula& f) {
  Evaluator ev(m);
  return ev.satisfies(w, f);
}

Check check_model(const Model& m, const std::vector<Formula>& formulas) {
  if (auto c = check_frame(m.frame); !c) return c;
  const int n = m.frame.n;
  for (const auto& [a, v] : m.interp)
    if (v.size() != static_cast<std::size_t>(n)) return {false, "interpretation of " + a + " has the wrong size"};
  Evaluator ev(m);
  std::vector<Formula> closure;
  {
    std::set<Formula> seen;
    std::function<void(const Formula&)> add = [&](const Formula& f) {
      if (!seen.insert(f).second) return;
      if (f.is_binary()) {
        add(f.left());
        add(f.right());
      }
    };
    for (const auto& f : formulas) add(f);
    closure.assign(seen.begin(), seen.end());
  }
  for (const Formula& f : closure) {
    if (!ev.satisfies(m.frame.pi, f)) return {false, "pi does not force " + f.str()};
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (m.frame.le(x, y) && ev.satisfies(x, f) && !ev.satisfies(y, f))
          return {false, "persistence fails for " + f.str() + " from " + w(x) + " to " + w(y)};
  }
  return {};
}

Check check_model(const Model& m, const Sequent& s) {
  if (s.is_box()) return check_model(m, std::vector<Formula>{});
  return check_model(m, std::vector<Formula>{compact(s.ctx()), s.goal()});
}

std::optional<int> refute(const Model& m, const Sequent& s) {
  if (s.is_box()) return std::nullopt;
  Evaluator ev(m);
  const Formula g = compact(s.ctx());
  for (int x = 0; x < m.frame.n; ++x)
    if (ev.satisfies(x, g) && !ev.satisfies(x, s.goal())) return x;
  return std::nullopt;
}

bool valid_in(const Model& m, const Sequent& s) { return !refute(m, s).has_value(); }

std::vector<PCM> enumerate_pcms(int max_size) {
  max_size = std::min(max_size, 4);
  std::vector<PCM> out;
  for (int n = 1; n <= max_size; ++n) {
    const int e = 0, pi = n - 1;
    // Products among the worlds other than e and pi are free.
    std::vector<std::pair<int, int>> free;
    for (int i = 1; i < n - 1; ++i)
      for (int j = i; j < n - 1; ++j) free.emplace_back(i, j);
    std::size_t tables = 1;
    for (std::size_t k = 0; k < free.size(); ++k) tables *= static_cast<std::size_t>(n);
    std::vector<std::pair<int, int>> order_pairs;
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < n - 1; ++j)
        if (i != j) order_pairs.emplace_back(i, j);
    for (std::size_t t = 0; t < tables; ++t) {
      PCM m;
      m.n = n;
      m.e = e;
      m.pi = pi;
      m.op.assign(static_cast<std::size_t>(n * n), 0);
      for (int x = 0; x < n; ++x) {
        m.op[static_cast<std::size_t>(e * n + x)] = x;
        m.op[static_cast<std::size_t>(x * n + e)] = x;
        m.op[static_cast<std::size_t>(pi * n + x)] = pi;
        m.op[static_cast<std::size_t>(x * n + pi)] = pi;
      }
      std::size_t code = t;
      for (auto [i, j] : free) {
        const int v = static_cast<int>(code % static_cast<std::size_t>(n));
        code /= static_cast<std::size_t>(n);
        m.op[static_cast<std::size_t>(i * n + j)] = v;
        m.op[static_cast<std::size_t>(j * n + i)] = v;
      }
      for (unsigned mask = 0; mask < (1u << order_pairs.size()); ++mask) {
        m.leq.assign(static_cast<std::size_t>(n * n), 0);
        for (int x = 0; x < n; ++x) {
          m.leq[static_cast<std::size_t>(x * n + x)] = 1;
          m.leq[static_cast<std::size_t>(x * n + pi)] = 1;
        }
        for (std::size_t k = 0; k < order_pairs.size(); ++k)
          if ((mask >> k) & 1u) m.leq[static_cast<std::size_t>(order_pairs[k].first * n + order_pairs[k].second)] = 1;
        if (check_pcm(m)) out.push_back(m);
      }
    }
  }
  return out;
}

std::vector<std::vector<char>> persistent_sets(const PCM& m) {
  std::vector<std::vector<char>> out;
  const int n = m.n;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<char> s(static_cast<std::size_t>(n), 0);
    for (int x = 0; x < n - 1; ++x) s[static_cast<std::size_t>(x)] = (mask >> x) & 1u;
    s[static_cast<std::size_t>(m.pi)] = 1;
    bool up = true;
    for (int x = 0; x < n && up; ++x)
      for (int y = 0; y < n && up; ++y)
        if (s[static_cast<std::size_t>(x)] && m.le(x, y) && !s[static_cast<std::size_t>(y)]) up = false;
    if (up) out.push_back(std::move(s));
  }
  return out;
}

Model model_of(const PCM& m, std::map<std::string, std::vector<char>> interp) {
  Model md;
  md.frame = pcm_to_frame(m);
  md.interp = std::move(interp);
  md.pcm = m;
  return md;
}

std::optional<Countermodel> countermodel(const Sequent& s, int max_size) {
  if (s.is_box()) return std::nullopt;
  const auto atoms = atoms_of(s);
  const std::vector<Formula> fs{compact(s.ctx()), s.goal()};
  for (const PCM& m : enumerate_pcms(max_size)) {
    const auto sets = persistent_sets(m);
    std::vector<std::size_t> idx(atoms.size(), 0);
    for (;;) {
      std::map<std::string, std::vector<char>> interp;
      for (std::size_t a = 0; a < atoms.size(); ++a) interp[atoms[a]] = sets[idx[a]];
      Model md = model_of(m, std::move(interp));
      if (auto wv = refute(md, s); wv && check_model(md, fs)) return Countermodel{std::move(md), *wv};
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == sets.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- JSON

using nlohmann::json;

json model_to_json(const Model& m) {
  const Frame& f = m.frame;
  json j;
  j["worlds"] = f.n;
  j["e"] = f.e;
  j["pi"] = f.pi;
  json leq = json::array();
  for (int x = 0; x < f.n; ++x)
    for (int y = 0; y < f.n; ++y)
      if (f.le(x, y)) leq.push_back({x, y});
  j["leq"] = leq;
  if (m.pcm) {
    json tab = json::array();
    for (int x = 0; x < f.n; ++x) {
      json row = json::array();
      for (int y = 0; y < f.n; ++y) row.push_back(m.pcm->mul(x, y));
      tab.push_back(row);
    }
    j["product"] = tab;
  } else {
    json r = json::array();
    for (int x = 0; x < f.n; ++x)
      for (int y = 0; y < f.n; ++y)
        for (int z = 0; z < f.n; ++z)
          if (f.R(x, y, z)) r.push_back({x, y, z});
    j["R"] = r;
  }
  json in = json::object();
  for (const auto& [a, v] : m.interp) {
    json ws = json::array();
    for (int x = 0; x < f.n; ++x)
      if (v[static_cast<std::size_t>(x)]) ws.push_back(x);
    in[a] = ws;
  }
  j["interp"] = in;
  return j;
}

namespace {
Model model_rec(const json& j) {
  Model m;
  Frame& f = m.frame;
  std::map<std::string, int> names;
  const json& ws = j.at("worlds");
  if (ws.is_number_integer()) {
    f.n = ws.get<int>();
  } else {
    f.n = static_cast<int>(ws.size());
    for (int i = 0; i < f.n; ++i) names[ws[static_cast<std::size_t>(i)].get<std::string>()] = i;
  }
  if (f.n < 1) throw std::runtime_error("model needs at least one world");
  auto world = [&](const json& v) {
    int x;
    if (v.is_number_integer()) {
      x = v.get<int>();
    } else {
      auto it = names.find(v.get<std::string>());
      if (it == names.end()) throw std::runtime_error("unknown world " + v.dump());
      x = it->second;
    }
    if (x < 0 || x >= f.n) throw std::runtime_error("world out of range: " + v.dump());
    return x;
  };
  f.e = world(j.at("e"));
  f.pi = world(j.at("pi"));
  f.leq.assign(static_cast<std::size_t>(f.n * f.n), 0);
  for (const auto& p : j.at("leq")) f.leq[static_cast<std::size_t>(world(p.at(0)) * f.n + world(p.at(1)))] = 1;
  f.rel.assign(static_cast<std::size_t>(f.n * f.n * f.n), 0);
  if (j.contains("product")) {
    PCM p;
    p.n = f.n;
    p.e = f.e;
    p.pi = f.pi;
    p.leq = f.leq;
    p.op.assign(static_cast<std::size_t>(f.n * f.n), 0);
    const json& tab = j.at("product");
    if (tab.size() != static_cast<std::size_t>(f.n)) throw std::runtime_error("product table has the wrong size");
    for (int x = 0; x < f.n; ++x) {
      if (tab[static_cast<std::size_t>(x)].size() != static_cast<std::size_t>(f.n))
        throw std::runtime_error("product table has the wrong size");
      for (int y = 0; y < f.n; ++y)
        p.op[static_cast<std::size_t>(x * f.n + y)] = world(tab[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]);
    }
    f = pcm_to_frame(p);
    m.pcm = p;
  } else {
    for (const auto& t : j.at("R"))
      f.rel[static_cast<std::size_t>((world(t.at(0)) * f.n + world(t.at(1))) * f.n + world(t.at(2)))] = 1;
  }
  if (j.contains("interp")) {
    for (const auto& [a, lst] : j.at("interp").items()) {
      std::vector<char> v(static_cast<std::size_t>(f.n), 0);
      for (const auto& x : lst) v[static_cast<std::size_t>(world(x))] = 1;
      m.interp[a] = std::move(v);
    }
  }
  return m;
}

}  // namespace

Model model_from_json(const json& j) {
  try {
    return model_rec(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed model: ") + e.what());
  }
}

}  // namespace bi
