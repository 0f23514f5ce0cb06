// bi: batch front end for proving, checking, countermodels and bisimulation.
//
// Exit statuses: prove 0 proved / 1 unproven; check-proof and meta-check 0 valid /
// 1 invalid; countermodel 0 found / 1 none; eval 0 valid in the model / 1 refuted;
// bisim 0 bisimilar / 1 mismatch; space 0. Errors of any command exit 2.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bi/proof_io.hpp"
#include "bi/search.hpp"
#include "bi/semantics.hpp"
#include "bi/vbi.hpp"

namespace {

using nlohmann::json;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Usage("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Usage(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Usage("cannot write " + path);
  out << text;
}

void print_tree(const bi::Proof& p, int indent, std::ostream& os) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << p.sequent.str();
  if (p.rule) os << "   [" << p.rule->str() << "]";
  os << "\n";
  for (const auto& c : p.children)
    if (!c.sequent.is_box()) print_tree(c, indent + 1, os);
}

void print_vtree(const bi::VNode& n, int indent, std::ostream& os) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << n.state.world << " |= " << n.state.sequent().str()
     << "   [" << bi::rule_name(n.alt.rule) << "]\n";
  for (const auto& k : n.kids) print_vtree(*k, indent + 1, os);
}

struct Options {
  std::string system = "slbi";
  int depth = 8;
  std::string emit, dot, model;
  int max_size = 4;
  int jobs = 1;
  bool json_out = false;
  bool cut = false;
  bool classical = false;
  bool allow_open = false;
  std::string sequent, file;
};

bi::SearchPolicy policy_of(const Options& o) {
  bi::SearchPolicy p;
  p.depth = o.depth;
  p.include_cut = o.cut;
  p.jobs = o.jobs;
  return p;
}

int cmd_prove(const Options& o) {
  const bi::Sequent s = bi::parse_sequent(o.sequent);
  const bi::SearchPolicy pol = policy_of(o);
  json j{{"command", "prove"}, {"system", o.system}, {"sequent", s.str()}, {"depth_bound", o.depth}};
  bool proved = false;
  std::ostringstream text;
  if (o.system == "slbi") {
    bi::ProveResult r = bi::prove(s, pol);
    proved = r.proved();
    j["depth"] = r.depth;
    j["expanded"] = r.expanded;
    if (proved) {
      j["proof"] = bi::proof_to_json(*r.proof);
      text << "proved at depth " << r.depth << " (" << r.proof->size() << " nodes)\n";
      print_tree(*r.proof, 1, text);
      if (!o.emit.empty()) write_file(o.emit, bi::proof_to_json(*r.proof).dump(2) + "\n");
    } else {
      j["reason"] = bi::reason_str(r.reason);
      text << "unproven: " << bi::reason_str(r.reason) << " at depth " << r.depth << "\n";
    }
  } else if (o.system == "vbi") {
    bi::VbiResult r = bi::vbi_prove(s, pol);
    proved = r.proved();
    j["depth"] = r.depth;
    j["expanded"] = r.expanded;
    if (proved) {
      bi::DljCheck c = bi::check_certificate(*r.derivation);
      j["certified"] = c.ok;
      json doc{{"theory", bi::certification_theory().name}, {"derivation", bi::derivation_to_json(*r.derivation)}};
      j["derivation_size"] = r.derivation->size();
      text << "valid at depth " << r.depth << "; certificate of " << r.derivation->size() << " DLJ nodes "
           << (c.ok ? "checks" : "FAILS: " + c.message) << "\n";
      print_vtree(*r.proof, 1, text);
      if (!o.emit.empty()) write_file(o.emit, doc.dump(2) + "\n");
    } else {
      j["reason"] = bi::reason_str(r.reason);
      text << "unproven: " << bi::reason_str(r.reason) << " at depth " << r.depth << "\n";
    }
  } else {
    throw Usage("--system must be slbi or vbi");
  }
  j["status"] = proved ? "proved" : "unproven";
  std::cout << (o.json_out ? j.dump() + "\n" : text.str());
  return proved ? 0 : 1;
}

int cmd_check_proof(const Options& o) {
  bi::Proof p = bi::proof_from_json(read_json(o.file));
  bi::CheckResult c = bi::check_proof(p, o.allow_open);
  json j{{"command", "check-proof"}, {"valid", c.ok}, {"sequent", p.sequent.str()}, {"size", p.size()}};
  if (!c.ok) {
    j["message"] = c.message;
    j["where"] = c.where;
  }
  if (o.json_out) std::cout << j.dump() << "\n";
  else if (c.ok) std::cout << "valid proof of " << p.sequent.str() << " (" << p.size() << " nodes)\n";
  else std::cout << "invalid: " << c.message << "\n";
  return c.ok ? 0 : 1;
}

int cmd_space(const Options& o) {
  const bi::Sequent s = bi::parse_sequent(o.sequent);
  bi::SearchSpace sp = bi::space(s, policy_of(o));
  std::string dot = sp.to_dot();
  if (!o.dot.empty()) write_file(o.dot, dot);
  if (o.json_out) {
    std::size_t edges = 0;
    for (const auto& n : sp.nodes) edges += n.edges.size();
    std::cout << json{{"command", "space"}, {"nodes", sp.nodes.size()}, {"edges", edges}, {"capped", sp.capped}}.dump()
              << "\n";
  } else if (o.dot.empty()) {
    std::cout << dot;
  } else {
    std::cout << sp.nodes.size() << " nodes written to " << o.dot << "\n";
  }
  return 0;
}

int cmd_countermodel(const Options& o) {
  const bi::Sequent s = bi::parse_sequent(o.sequent);
  auto cm = bi::countermodel(s, o.max_size);
  json j{{"command", "countermodel"}, {"sequent", s.str()}, {"found", cm.has_value()}};
  if (cm) {
    json m = bi::model_to_json(cm->model);
    j["model"] = m;
    j["world"] = cm->world;
    if (!o.emit.empty()) write_file(o.emit, m.dump(2) + "\n");
  }
  if (o.json_out) std::cout << j.dump() << "\n";
  else if (cm) std::cout << "refuted at world " << cm->world << " of\n" << bi::model_to_json(cm->model).dump(2) << "\n";
  else std::cout << "no countermodel with at most " << o.max_size << " worlds\n";
  return cm ? 0 : 1;
}

int cmd_eval(const Options& o) {
  if (o.model.empty()) throw Usage("eval needs --model");
  const bi::Sequent s = bi::parse_sequent(o.sequent);
  bi::Model m = bi::model_from_json(read_json(o.model));
  bi::Check ok = bi::check_model(m, s);
  if (!ok) throw Usage("not a model: " + ok.message);
  auto w = bi::refute(m, s);
  json j{{"command", "eval"}, {"sequent", s.str()}, {"valid", !w.has_value()}};
  if (w) j["world"] = *w;
  if (o.json_out) std::cout << j.dump() << "\n";
  else if (w) std::cout << "refuted at world " << *w << "\n";
  else std::cout << "valid in the model\n";
  return w ? 1 : 0;
}

int cmd_bisim(const Options& o) {
  const bi::Sequent s = bi::parse_sequent(o.sequent);
  bi::BisimResult r = bi::bisim_check(s, o.depth, policy_of(o));
  if (o.json_out) std::cout << r.to_json().dump() << "\n";
  else std::cout << r.report();
  return r.bisimilar() ? 0 : 1;
}

int cmd_meta_check(const Options& o) {
  json doc = read_json(o.file);
  const bi::Theory* th = &bi::sigma_bi();
  json body = doc;
  if (doc.contains("derivation")) {
    body = doc.at("derivation");
    if (doc.contains("theory")) {
      th = bi::theory_by_name(doc.at("theory").get<std::string>());
      if (!th) throw Usage("unknown theory " + doc.at("theory").get<std::string>());
    }
  }
  bi::MetaDerivation d = bi::derivation_from_json(body);
  bi::DljCheck c = bi::check_dlj(d, bi::DljOptions{o.classical, o.allow_open, th});
  bool wc = bi::world_conservative(d);
  json j{{"command", "meta-check"}, {"valid", c.ok}, {"theory", th->name}, {"world_conservative", wc}, {"size", d.size()}};
  if (!c.ok) {
    j["message"] = c.message;
    j["where"] = c.where;
  }
  if (o.json_out) std::cout << j.dump() << "\n";
  else if (c.ok) std::cout << "valid DLJ derivation (" << d.size() << " nodes, " << (wc ? "" : "not ") << "world-conservative)\n";
  else std::cout << "invalid: " << c.message << "\n";
  return c.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof search and validity checking for the logic of bunched implications"};
  app.require_subcommand(1);
  Options o;

  auto seq_arg = [&](CLI::App* c) { c->add_option("sequent", o.sequent, "sequent, e.g. \"p ; (p -> q) |- q\"")->required(); };
  auto common = [&](CLI::App* c) { c->add_flag("--json", o.json_out, "machine-readable report on standard output"); };
  auto search_flags = [&](CLI::App* c) {
    c->add_option("--depth", o.depth, "search depth bound")->check(CLI::NonNegativeNumber);
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    c->add_flag("--cut", o.cut, "allow the cut rule");
  };

  auto* prove = app.add_subcommand("prove", "bounded proof search");
  seq_arg(prove);
  common(prove);
  search_flags(prove);
  prove->add_option("--system", o.system, "slbi or vbi")->check(CLI::IsMember({"slbi", "vbi"}));
  prove->add_option("--emit", o.emit, "write the proof (sLBI) or meta-derivation (VBI) as JSON");

  auto* check = app.add_subcommand("check-proof", "check a proof file");
  check->add_option("file", o.file, "proof JSON")->required();
  check->add_flag("--allow-open", o.allow_open, "accept open premisses");
  common(check);

  auto* sp = app.add_subcommand("space", "depth-bounded proof-search space as DOT");
  seq_arg(sp);
  common(sp);
  search_flags(sp);
  sp->add_option("--dot", o.dot, "output path (default: standard output)");

  auto* cm = app.add_subcommand("countermodel", "search monoid models for a refutation");
  seq_arg(cm);
  common(cm);
  cm->add_option("--max-size", o.max_size, "largest number of worlds")->check(CLI::Range(1, 4));
  cm->add_option("--emit", o.emit, "write the model as JSON");

  auto* ev = app.add_subcommand("eval", "evaluate a sequent in a model");
  seq_arg(ev);
  common(ev);
  ev->add_option("--model", o.model, "model JSON")->required();

  auto* bs = app.add_subcommand("bisim", "lockstep comparison of sLBI and VBI reductions");
  seq_arg(bs);
  common(bs);
  search_flags(bs);

  auto* mc = app.add_subcommand("meta-check", "check a DLJ meta-derivation file");
  mc->add_option("file", o.file, "derivation JSON")->required();
  mc->add_flag("--classical", o.classical, "accept the classical rules");
  mc->add_flag("--allow-open", o.allow_open, "accept hyp leaves");
  common(mc);

  bs->callback([&] { o.depth = bs->count("--depth") ? o.depth : 4; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*prove) return cmd_prove(o);
    if (*check) return cmd_check_proof(o);
    if (*sp) return cmd_space(o);
    if (*cm) return cmd_countermodel(o);
    if (*ev) return cmd_eval(o);
    if (*bs) return cmd_bisim(o);
    if (*mc) return cmd_meta_check(o);
  } catch (const bi::ParseError& e) {
    std::cerr << "bi: parse error at " << e.line << ":" << e.column << ": " << e.what() << "\n";
  } catch (const bi::SearchBudgetExceeded& e) {
    std::cerr << "bi: search budget exceeded: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "bi: " << e.what() << "\n";
  }
  return 2;
}
