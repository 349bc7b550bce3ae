#include "fmplan/pddl.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace fmplan::pddl {

std::string Fact::str() const {
  std::string s = "(" + pred;
  for (const auto& a : args) s += " " + a;
  return s + ")";
}

std::string GroundOperator::str() const {
  std::string s = name + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i];
  }
  return s + ")";
}

const OperatorDef* DomainDef::find_operator(const std::string& n) const {
  for (const auto& o : operators)
    if (o.name == n) return &o;
  return nullptr;
}

const PredicateDef* DomainDef::find_predicate(const std::string& n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

bool DomainDef::is_derived(const std::string& pred) const {
  for (const auto& dd : derived)
    if (dd.pred == pred) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { LParen, RParen, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0, col = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= s_.size()) {
      t.kind = Token::Kind::End;
      return t;
    }
    char c = s_[pos_];
    if (c == '(') {
      advance();
      t.kind = Token::Kind::LParen;
      return t;
    }
    if (c == ')') {
      advance();
      t.kind = Token::Kind::RParen;
      return t;
    }
    t.kind = Token::Kind::Symbol;
    while (pos_ < s_.size() && !isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')' && s_[pos_] != ';') {
      t.text += s_[pos_];
      advance();
    }
    if (t.text.empty()) throw ParseError("unexpected character", line_, col_);
    return t;
  }

 private:
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// S-expression tree with source locations.
struct Node {
  bool is_list = false;
  std::string sym;
  std::vector<Node> items;
  int line = 0, col = 0;

  const std::string& head() const {
    static const std::string empty;
    if (!is_list || items.empty() || items[0].is_list) return empty;
    return items[0].sym;
  }
};

Node parse_node(Lexer& lx, const Token& first) {
  Node n;
  n.line = first.line;
  n.col = first.col;
  if (first.kind == Token::Kind::Symbol) {
    n.sym = first.text;
    return n;
  }
  if (first.kind != Token::Kind::LParen) throw ParseError("expected '(' or symbol", first.line, first.col);
  n.is_list = true;
  for (;;) {
    Token t = lx.next();
    if (t.kind == Token::Kind::RParen) return n;
    if (t.kind == Token::Kind::End) throw ParseError("unbalanced parenthesis", first.line, first.col);
    n.items.push_back(parse_node(lx, t));
  }
}

Node parse_tree(const std::string& text) {
  Lexer lx(text);
  Token t = lx.next();
  Node root = parse_node(lx, t);
  Token rest = lx.next();
  if (rest.kind != Token::Kind::End) throw ParseError("trailing content after top-level form", rest.line, rest.col);
  return root;
}

[[noreturn]] void fail(const Node& n, const std::string& msg) { throw ParseError(msg, n.line, n.col); }

std::vector<Parameter> parse_params(const Node& n) {
  if (!n.is_list) fail(n, "expected parameter list");
  std::vector<Parameter> out;
  std::vector<std::string> pending;
  for (size_t i = 0; i < n.items.size(); ++i) {
    const Node& it = n.items[i];
    if (it.is_list) fail(it, "unexpected list in parameters");
    if (it.sym == "-") {
      if (i + 1 >= n.items.size() || n.items[i + 1].is_list) fail(it, "expected type after '-'");
      const std::string& kind = n.items[i + 1].sym;
      for (auto& p : pending) out.push_back({p, kind});
      pending.clear();
      ++i;
    } else {
      pending.push_back(it.sym);
    }
  }
  for (auto& p : pending) out.push_back({p, "object"});
  return out;
}

Fact parse_atom(const Node& n) {
  if (!n.is_list || n.items.empty() || n.items[0].is_list) fail(n, "expected atom");
  Fact f;
  f.pred = n.items[0].sym;
  for (size_t i = 1; i < n.items.size(); ++i) {
    if (n.items[i].is_list) fail(n.items[i], "atom arguments must be symbols");
    f.args.push_back(n.items[i].sym);
  }
  return f;
}

Formula parse_formula(const Node& n) {
  if (!n.is_list || n.items.empty()) fail(n, "expected formula");
  const std::string& h = n.head();
  Formula f;
  if (h == "and" || h == "or") {
    f.kind = (h == "and") ? Formula::Kind::And : Formula::Kind::Or;
    for (size_t i = 1; i < n.items.size(); ++i) f.children.push_back(parse_formula(n.items[i]));
    return f;
  }
  if (h == "not") {
    if (n.items.size() != 2) fail(n, "'not' takes one formula");
    f.kind = Formula::Kind::Not;
    f.children.push_back(parse_formula(n.items[1]));
    return f;
  }
  if (h == "exists") {
    if (n.items.size() != 3) fail(n, "'exists' takes a variable list and a body");
    f.kind = Formula::Kind::Exists;
    f.quantified = parse_params(n.items[1]);
    f.children.push_back(parse_formula(n.items[2]));
    return f;
  }
  return Formula::make_atom(parse_atom(n));
}

std::vector<Effect> parse_effects(const Node& n) {
  std::vector<Effect> out;
  auto one = [&](const Node& e) {
    if (!e.is_list || e.items.empty()) fail(e, "expected effect literal");
    if (e.head() == "not") {
      if (e.items.size() != 2) fail(e, "'not' effect takes one atom");
      out.push_back({true, parse_atom(e.items[1])});
    } else {
      out.push_back({false, parse_atom(e)});
    }
  };
  if (n.is_list && n.head() == "and") {
    for (size_t i = 1; i < n.items.size(); ++i) one(n.items[i]);
  } else {
    one(n);
  }
  return out;
}

std::vector<Fact> parse_fact_list(const Node& n) {
  std::vector<Fact> out;
  if (n.is_list && n.head() == "and") {
    for (size_t i = 1; i < n.items.size(); ++i) out.push_back(parse_atom(n.items[i]));
  } else {
    out.push_back(parse_atom(n));
  }
  return out;
}

// Collect (atom, under_negation) references in a formula.
void collect_atoms(const Formula& f, std::vector<std::pair<const Fact*, bool>>& out, bool neg = false) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      out.push_back({&f.atom, neg});
      break;
    case Formula::Kind::Not:
      collect_atoms(f.children[0], out, true);
      break;
    default:
      for (const auto& c : f.children) collect_atoms(c, out, neg);
  }
}

void stratify(DomainDef& d) {
  // Dependency graph among derived predicates; any cycle is rejected.
  const int n = static_cast<int>(d.derived.size());
  auto index_of = [&](const std::string& pred) {
    for (int i = 0; i < n; ++i)
      if (d.derived[static_cast<size_t>(i)].pred == pred) return i;
    return -1;
  };
  std::vector<std::vector<int>> deps(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<const Fact*, bool>> atoms;
    collect_atoms(d.derived[static_cast<size_t>(i)].body, atoms);
    for (auto& [a, negated] : atoms) {
      int j = index_of(a->pred);
      if (j >= 0) deps[static_cast<size_t>(i)].push_back(j);
    }
  }
  std::vector<int> mark(static_cast<size_t>(n), 0);  // 0 new, 1 visiting, 2 done
  std::vector<int> order;
  std::function<void(int)> visit = [&](int i) {
    if (mark[static_cast<size_t>(i)] == 2) return;
    if (mark[static_cast<size_t>(i)] == 1) {
      throw ParseError("derived predicate '" + d.derived[static_cast<size_t>(i)].pred + "' is cyclically defined",
                       0, 0);
    }
    mark[static_cast<size_t>(i)] = 1;
    for (int j : deps[static_cast<size_t>(i)]) visit(j);
    mark[static_cast<size_t>(i)] = 2;
    order.push_back(i);
  };
  for (int i = 0; i < n; ++i) visit(i);
  d.strata_order = order;
}

void validate_domain(const DomainDef& d) {
  std::set<std::string> preds;
  std::map<std::string, size_t> arity;
  for (const auto& p : d.predicates) {
    preds.insert(p.name);
    arity[p.name] = p.params.size();
  }
  std::set<std::string> kinds{"object"};
  for (const auto& [t, parent] : d.types) {
    kinds.insert(t);
    (void)parent;
  }
  auto check_atom = [&](const Fact& a, const char* where) {
    if (!preds.count(a.pred)) {
      throw ParseError(std::string("undeclared predicate '") + a.pred + "' in " + where, 0, 0);
    }
    if (arity[a.pred] != a.args.size()) {
      throw ParseError("arity mismatch for '" + a.pred + "' in " + where, 0, 0);
    }
  };
  for (const auto& op : d.operators) {
    std::vector<std::pair<const Fact*, bool>> atoms;
    collect_atoms(op.precondition, atoms);
    for (auto& [a, neg] : atoms) check_atom(*a, op.name.c_str());
    for (const auto& e : op.effects) {
      check_atom(e.atom, op.name.c_str());
      if (d.is_derived(e.atom.pred)) {
        throw ParseError("operator '" + op.name + "' writes derived predicate '" + e.atom.pred + "'", 0, 0);
      }
    }
  }
  for (const auto& dd : d.derived) {
    check_atom(Fact{dd.pred, std::vector<std::string>(dd.params.size(), "_")}, "derived head");
    std::vector<std::pair<const Fact*, bool>> atoms;
    collect_atoms(dd.body, atoms);
    for (auto& [a, neg] : atoms) check_atom(*a, dd.pred.c_str());
  }
  for (const auto& s : d.streams) {
    for (const auto& a : s.input_pattern) check_atom(a, s.name.c_str());
    for (const auto& a : s.certified) check_atom(a, s.name.c_str());
  }
}

}  // namespace

DomainDef parse_domain(const std::string& text) {
  Node root = parse_tree(text);
  if (root.head() != "define") fail(root, "expected (define (domain ...) ...)");
  DomainDef d;
  if (root.items.size() < 2 || root.items[1].head() != "domain" || root.items[1].items.size() != 2) {
    fail(root, "expected (domain NAME)");
  }
  d.name = root.items[1].items[1].sym;
  for (size_t bi = 2; bi < root.items.size(); ++bi) {
    const Node& b = root.items[bi];
    const std::string& h = b.head();
    if (h == ":types") {
      std::vector<std::string> pending;
      for (size_t i = 1; i < b.items.size(); ++i) {
        if (b.items[i].sym == "-") {
          const std::string& parent = b.items[i + 1].sym;
          for (auto& t : pending) d.types.emplace_back(t, parent);
          pending.clear();
          ++i;
        } else {
          pending.push_back(b.items[i].sym);
        }
      }
      for (auto& t : pending) d.types.emplace_back(t, "object");
    } else if (h == ":predicates") {
      for (size_t i = 1; i < b.items.size(); ++i) {
        const Node& p = b.items[i];
        if (!p.is_list || p.items.empty()) fail(p, "expected predicate declaration");
        PredicateDef pd;
        pd.name = p.items[0].sym;
        Node rest = p;
        rest.items.erase(rest.items.begin());
        pd.params = parse_params(rest);
        d.predicates.push_back(pd);
      }
    } else if (h == ":action") {
      if (b.items.size() < 2) fail(b, "expected action name");
      OperatorDef op;
      op.name = b.items[1].sym;
      for (size_t i = 2; i < b.items.size(); ++i) {
        const std::string& key = b.items[i].sym;
        if (i + 1 >= b.items.size()) fail(b.items[i], "missing value after " + key);
        const Node& v = b.items[i + 1];
        if (key == ":parameters") {
          op.params = parse_params(v);
        } else if (key == ":precondition") {
          op.precondition = parse_formula(v);
        } else if (key == ":effect") {
          op.effects = parse_effects(v);
        } else if (key == ":cost") {
          Fact c = parse_atom(v);
          op.cost = CostExpr{c.pred, c.args};
        } else {
          fail(b.items[i], "unknown action section " + key);
        }
        ++i;
      }
      d.operators.push_back(std::move(op));
    } else if (h == ":derived") {
      if (b.items.size() != 3) fail(b, "expected (:derived (HEAD vars) body)");
      DerivedDef dd;
      const Node& head = b.items[1];
      if (!head.is_list || head.items.empty()) fail(head, "expected derived head");
      dd.pred = head.items[0].sym;
      Node rest = head;
      rest.items.erase(rest.items.begin());
      dd.params = parse_params(rest);
      dd.body = parse_formula(b.items[2]);
      d.derived.push_back(std::move(dd));
    } else if (h == ":stream") {
      if (b.items.size() < 2) fail(b, "expected stream name");
      StreamDef s;
      s.name = b.items[1].sym;
      for (size_t i = 2; i < b.items.size(); ++i) {
        const std::string& key = b.items[i].sym;
        if (i + 1 >= b.items.size()) fail(b.items[i], "missing value after " + key);
        const Node& v = b.items[i + 1];
        if (key == ":kind") {
          s.test = (v.sym == "test");
        } else if (key == ":inputs") {
          s.inputs = parse_params(v);
        } else if (key == ":domain") {
          s.input_pattern = parse_fact_list(v);
        } else if (key == ":outputs") {
          s.outputs = parse_params(v);
        } else if (key == ":certified") {
          s.certified = parse_fact_list(v);
        } else {
          fail(b.items[i], "unknown stream section " + key);
        }
        ++i;
      }
      d.streams.push_back(std::move(s));
    } else {
      fail(b, "unknown domain block '" + h + "'");
    }
  }
  validate_domain(d);
  stratify(d);
  return d;
}

ProblemDef parse_problem(const std::string& text, const DomainDef& d) {
  Node root = parse_tree(text);
  if (root.head() != "define") fail(root, "expected (define (problem ...) ...)");
  ProblemDef p;
  if (root.items.size() < 2 || root.items[1].head() != "problem") fail(root, "expected (problem NAME)");
  p.name = root.items[1].items[1].sym;
  for (size_t bi = 2; bi < root.items.size(); ++bi) {
    const Node& b = root.items[bi];
    const std::string& h = b.head();
    if (h == ":domain") {
      p.domain = b.items[1].sym;
    } else if (h == ":objects") {
      std::vector<std::string> pending;
      for (size_t i = 1; i < b.items.size(); ++i) {
        if (b.items[i].sym == "-") {
          const std::string& kind = b.items[i + 1].sym;
          for (auto& o : pending) p.objects.push_back({o, kind});
          pending.clear();
          ++i;
        } else {
          pending.push_back(b.items[i].sym);
        }
      }
      for (auto& o : pending) p.objects.push_back({o, "object"});
    } else if (h == ":init") {
      for (size_t i = 1; i < b.items.size(); ++i) p.init.insert(parse_atom(b.items[i]));
    } else if (h == ":goal") {
      if (b.items.size() != 2) fail(b, "expected (:goal FORMULA)");
      p.goal = parse_formula(b.items[1]);
    } else {
      fail(b, "unknown problem block '" + h + "'");
    }
  }
  std::vector<std::pair<const Fact*, bool>> atoms;
  collect_atoms(p.goal, atoms);
  for (auto& [a, neg] : atoms) {
    if (!d.find_predicate(a->pred)) throw ParseError("goal references undeclared predicate '" + a->pred + "'", 0, 0);
  }
  for (const auto& f : p.init) {
    if (!d.find_predicate(f.pred)) throw ParseError("init references undeclared predicate '" + f.pred + "'", 0, 0);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Printing (canonical; parse(print(d)) == d)
// ---------------------------------------------------------------------------

namespace {

void print_params(std::ostream& os, const std::vector<Parameter>& ps) {
  os << "(";
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) os << " ";
    os << ps[i].name << " - " << ps[i].kind;
  }
  os << ")";
}

void print_formula(std::ostream& os, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      os << f.atom.str();
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      os << "(" << (f.kind == Formula::Kind::And ? "and" : "or");
      for (const auto& c : f.children) {
        os << " ";
        print_formula(os, c);
      }
      os << ")";
      return;
    case Formula::Kind::Not:
      os << "(not ";
      print_formula(os, f.children[0]);
      os << ")";
      return;
    case Formula::Kind::Exists:
      os << "(exists ";
      print_params(os, f.quantified);
      os << " ";
      print_formula(os, f.children[0]);
      os << ")";
      return;
  }
}

}  // namespace

std::string print_domain(const DomainDef& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& [t, parent] : d.types) os << " " << t << " - " << parent;
    os << ")\n";
  }
  os << "  (:predicates\n";
  for (const auto& p : d.predicates) {
    os << "    (" << p.name;
    for (const auto& a : p.params) os << " " << a.name << " - " << a.kind;
    os << ")\n";
  }
  os << "  )\n";
  for (const auto& dd : d.derived) {
    os << "  (:derived (" << dd.pred;
    for (const auto& a : dd.params) os << " " << a.name << " - " << a.kind;
    os << ") ";
    print_formula(os, dd.body);
    os << ")\n";
  }
  for (const auto& op : d.operators) {
    os << "  (:action " << op.name << "\n    :parameters ";
    print_params(os, op.params);
    os << "\n    :precondition ";
    print_formula(os, op.precondition);
    os << "\n    :effect (and";
    for (const auto& e : op.effects) {
      os << " ";
      if (e.del) os << "(not " << e.atom.str() << ")";
      else os << e.atom.str();
    }
    os << ")";
    if (op.cost) {
      os << "\n    :cost (" << op.cost->hook;
      for (const auto& a : op.cost->args) os << " " << a;
      os << ")";
    }
    os << ")\n";
  }
  for (const auto& s : d.streams) {
    os << "  (:stream " << s.name << "\n    :kind " << (s.test ? "test" : "generative");
    os << "\n    :inputs ";
    print_params(os, s.inputs);
    os << "\n    :domain (and";
    for (const auto& a : s.input_pattern) os << " " << a.str();
    os << ")\n    :outputs ";
    print_params(os, s.outputs);
    os << "\n    :certified (and";
    for (const auto& a : s.certified) os << " " << a.str();
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const ProblemDef& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n  (:domain " << p.domain << ")\n  (:objects";
  for (const auto& o : p.objects) os << " " << o.name << " - " << o.kind;
  os << ")\n  (:init\n";
  for (const auto& f : p.init) os << "    " << f.str() << "\n";
  os << "  )\n  (:goal ";
  print_formula(os, p.goal);
  os << ")\n)\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Kinds
// ---------------------------------------------------------------------------

KindTable::KindTable(const DomainDef& d, const std::vector<ObjectDecl>& objs) {
  for (const auto& [t, parent] : d.types) type_parent_[t] = parent;
  for (const auto& o : objs) add_object(o.name, o.kind);
}

void KindTable::add_object(const std::string& name, const std::string& kind) {
  obj_kind_[name] = kind;
}

const std::string& KindTable::kind_of(const std::string& obj) const {
  auto it = obj_kind_.find(obj);
  if (it == obj_kind_.end()) throw PlanningError("unknown object '" + obj + "'");
  return it->second;
}

bool KindTable::kind_is_a(std::string kind, const std::string& want) const {
  if (want == "object") return true;
  for (int hops = 0; hops < 32; ++hops) {
    if (kind == want) return true;
    auto it = type_parent_.find(kind);
    if (it == type_parent_.end()) return false;
    kind = it->second;
  }
  return false;
}

bool KindTable::is_a(const std::string& obj, const std::string& kind) const {
  auto it = obj_kind_.find(obj);
  if (it == obj_kind_.end()) return false;
  return kind_is_a(it->second, kind);
}

std::vector<std::string> KindTable::objects_of(const std::string& kind) const {
  std::vector<std::string> out;
  for (const auto& [name, k] : obj_kind_) {
    if (kind_is_a(k, kind)) out.push_back(name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

using Env = std::map<std::string, std::string>;

bool is_var(const std::string& s) { return !s.empty() && s[0] == '?'; }

std::string resolve(const std::string& term, const Env& env) {
  if (!is_var(term)) return term;
  auto it = env.find(term);
  return it == env.end() ? term : it->second;
}

// Enumerate all environments under which `f` holds. Positive atoms inside
// conjunctions bind variables by matching the fact view; any variables still
// free when a subformula must be decided are enumerated by kind (exists only).
// When `domain` is set, derived predicates are evaluated on demand through
// their definitions, memoized per state in `memo` (0 = false, 1 = true).
struct Evaluator {
  FactView facts;
  const KindTable& kinds;
  const DomainDef* domain = nullptr;
  std::map<Fact, int>* memo = nullptr;

  bool is_lazy_derived(const std::string& pred) const { return domain && domain->is_derived(pred); }

  bool derived_holds(const Fact& g) const {
    if (memo) {
      auto it = memo->find(g);
      if (it != memo->end()) return it->second != 0;
    }
    const DerivedDef* def = nullptr;
    for (const auto& dd : domain->derived) {
      if (dd.pred == g.pred) { def = &dd; break; }
    }
    Env env;
    for (size_t i = 0; i < def->params.size(); ++i) env[def->params[i].name] = g.args[i];
    bool r = match(def->body, env, [](const Env&) { return true; });
    if (memo) (*memo)[g] = r ? 1 : 0;
    return r;
  }

  bool atom_holds(const Fact& a, const Env& env) const {
    Fact g = a;
    for (auto& arg : g.args) {
      arg = resolve(arg, env);
      if (is_var(arg)) throw PlanningError("unbound variable " + arg + " in atom " + a.pred);
    }
    if (is_lazy_derived(g.pred)) return derived_holds(g);
    return facts.count(g);
  }

  template <typename Fn>
  bool scan_pred(const FactSet* set, const Fact& a, const Env& env, const Fn& fn) const {
    if (!set) return false;
    for (auto it = set->lower_bound(Fact{a.pred, {}}); it != set->end() && it->pred == a.pred; ++it) {
      const Fact& fact = *it;
      if (fact.args.size() != a.args.size()) continue;
      Env e2 = env;
      bool ok = true;
      for (size_t i = 0; i < a.args.size(); ++i) {
        const std::string& t = a.args[i];
        if (is_var(t)) {
          auto found = e2.find(t);
          if (found == e2.end()) e2[t] = fact.args[i];
          else if (found->second != fact.args[i]) { ok = false; break; }
        } else if (t != fact.args[i]) {
          ok = false;
          break;
        }
      }
      if (ok && fn(e2)) return true;
    }
    return false;
  }

  // Calls fn for each extension of env that satisfies f; stops early when fn
  // returns true. Returns whether any call returned true.
  bool match(const Formula& f, Env env, const std::function<bool(const Env&)>& fn) const {
    switch (f.kind) {
      case Formula::Kind::Atom: {
        const Fact& a = f.atom;
        bool any_free = false;
        for (const auto& arg : a.args) {
          if (is_var(arg) && !env.count(arg)) any_free = true;
        }
        if (!any_free) return atom_holds(a, env) && fn(env);
        if (is_lazy_derived(a.pred)) {
          // Unbound derived atom: enumerate candidates by declared kind.
          const DerivedDef* def = nullptr;
          for (const auto& dd : domain->derived) {
            if (dd.pred == a.pred) { def = &dd; break; }
          }
          std::function<bool(size_t, Env)> enumerate = [&](size_t i, Env cur) -> bool {
            if (i == a.args.size()) return atom_holds(a, cur) && fn(cur);
            const std::string& t = a.args[i];
            if (!is_var(t) || cur.count(t)) return enumerate(i + 1, std::move(cur));
            for (const auto& obj : kinds.objects_of(def->params[i].kind)) {
              Env e2 = cur;
              e2[t] = obj;
              if (enumerate(i + 1, std::move(e2))) return true;
            }
            return false;
          };
          return enumerate(0, env);
        }
        if (scan_pred(facts.primary, a, env, fn)) return true;
        return scan_pred(facts.overlay, a, env, fn);
      }
      case Formula::Kind::And: {
        // Chain the children: positive atoms first so they bind variables.
        std::vector<const Formula*> order;
        for (const auto& c : f.children)
          if (c.kind == Formula::Kind::Atom) order.push_back(&c);
        for (const auto& c : f.children)
          if (c.kind != Formula::Kind::Atom) order.push_back(&c);
        std::function<bool(size_t, const Env&)> step = [&](size_t i, const Env& e) -> bool {
          if (i == order.size()) return fn(e);
          return match(*order[i], e, [&](const Env& e2) { return step(i + 1, e2); });
        };
        return step(0, env);
      }
      case Formula::Kind::Or: {
        for (const auto& c : f.children) {
          if (match(c, env, fn)) return true;
        }
        return false;
      }
      case Formula::Kind::Not: {
        // Negation as failure; free variables under negation are enumerated.
        const Formula& inner = f.children[0];
        bool holds = match(inner, env, [](const Env&) { return true; });
        return !holds && fn(env);
      }
      case Formula::Kind::Exists:
        // Quantified variables start free; the body's positive atoms bind
        // them, and anything left over is enumerated by kind.
        return match_exists(f, env, fn);
    }
    return false;
  }

  bool match_exists(const Formula& f, const Env& env, const std::function<bool(const Env&)>& fn) const {
    const Formula& body = f.children[0];
    // Distribute the quantifier over a disjunctive body so each branch can
    // bind its own variables.
    if (body.kind == Formula::Kind::Or) {
      bool hit = false;
      for (const auto& c : body.children) {
        Formula branch;
        branch.kind = Formula::Kind::Exists;
        branch.quantified = f.quantified;
        branch.children.push_back(c);
        if (match_exists(branch, env, fn)) hit = true;
        if (hit) return true;
      }
      return false;
    }

    // Split a conjunctive body into binding atoms and residual subformulas;
    // residuals (negations, nested quantifiers) run only once every
    // quantified variable is bound.
    std::vector<const Formula*> positives;
    std::vector<const Formula*> residual;
    if (body.kind == Formula::Kind::Atom) {
      positives.push_back(&body);
    } else if (body.kind == Formula::Kind::And) {
      for (const auto& c : body.children) {
        (c.kind == Formula::Kind::Atom ? positives : residual).push_back(&c);
      }
    } else {
      residual.push_back(&body);
    }

    auto finish = [&](const Env& e) -> bool {
      for (const Formula* r : residual) {
        if (!match(*r, e, [](const Env&) { return true; })) return false;
      }
      return fn(e);
    };

    std::function<bool(size_t, const Env&)> bind_positives = [&](size_t i, const Env& e) -> bool {
      if (i == positives.size()) {
        // Enumerate any quantified variable the atoms did not bind.
        std::vector<const Parameter*> missing;
        for (const auto& v : f.quantified)
          if (!e.count(v.name)) missing.push_back(&v);
        if (missing.empty()) return finish(e);
        std::function<bool(size_t, Env)> enumerate = [&](size_t k, Env cur) -> bool {
          if (k == missing.size()) return finish(cur);
          for (const auto& obj : kinds.objects_of(missing[k]->kind)) {
            Env e2 = cur;
            e2[missing[k]->name] = obj;
            if (enumerate(k + 1, std::move(e2))) return true;
          }
          return false;
        };
        return enumerate(0, e);
      }
      return match(*positives[i], e, [&](const Env& e2) { return bind_positives(i + 1, e2); });
    };
    return bind_positives(0, env);
  }
};

}  // namespace

bool eval_formula(const Formula& f, const FactSet& facts, const KindTable& kinds) {
  Evaluator ev{FactView{&facts, nullptr}, kinds, nullptr, nullptr};
  return ev.match(f, {}, [](const Env&) { return true; });
}

bool eval_formula_lazy(const Formula& f, const FactView& facts, const DomainDef& d,
                       const KindTable& kinds, std::map<Fact, int>& memo) {
  Evaluator ev{facts, kinds, &d, &memo};
  return ev.match(f, {}, [](const Env&) { return true; });
}

void enumerate_bindings(const std::vector<Parameter>& params, const std::vector<Fact>& pattern,
                        const FactView& facts, const KindTable& kinds,
                        const std::function<void(const std::map<std::string, std::string>&)>& fn) {
  Evaluator ev{facts, kinds, nullptr, nullptr};
  Formula wrapped;
  wrapped.kind = Formula::Kind::Exists;
  wrapped.quantified = params;
  Formula body;
  body.kind = Formula::Kind::And;
  for (const auto& a : pattern) body.children.push_back(Formula::make_atom(a));
  wrapped.children.push_back(body);
  ev.match_exists(wrapped, {}, [&](const Env& e) {
    fn(e);
    return false;  // keep enumerating
  });
}

FactSet evaluate_derived(const FactSet& state, const DomainDef& d, const KindTable& kinds) {
  FactSet out = state;
  for (int idx : d.strata_order) {
    const DerivedDef& dd = d.derived[static_cast<size_t>(idx)];
    Evaluator ev{FactView{&out, nullptr}, kinds, nullptr, nullptr};
    FactSet found;
    // Collect every binding of the head parameters for which the body holds.
    Formula wrapped;
    wrapped.kind = Formula::Kind::Exists;
    wrapped.quantified = dd.params;
    wrapped.children.push_back(dd.body);
    ev.match_exists(wrapped, {}, [&](const Env& e) {
      Fact h;
      h.pred = dd.pred;
      for (const auto& p : dd.params) {
        auto it = e.find(p.name);
        if (it == e.end()) return false;  // unbound head var: skip
        h.args.push_back(it->second);
      }
      found.insert(h);
      return false;  // keep enumerating
    });
    out.insert(found.begin(), found.end());
  }
  return out;
}

Formula substitute(const Formula& f, const std::map<std::string, std::string>& sub) {
  Formula out = f;
  switch (f.kind) {
    case Formula::Kind::Atom:
      for (auto& a : out.atom.args) {
        auto it = sub.find(a);
        if (it != sub.end()) a = it->second;
      }
      return out;
    case Formula::Kind::Exists: {
      out.children[0] = substitute(f.children[0], sub);
      return out;
    }
    default:
      for (size_t i = 0; i < f.children.size(); ++i) out.children[i] = substitute(f.children[i], sub);
      return out;
  }
}

namespace {

std::map<std::string, std::string> bind_params(const OperatorDef& def, const GroundOperator& op) {
  if (def.params.size() != op.args.size()) {
    throw PlanningError("ground operator " + op.name + " arity mismatch");
  }
  std::map<std::string, std::string> sub;
  for (size_t i = 0; i < def.params.size(); ++i) sub[def.params[i].name] = op.args[i];
  return sub;
}

}  // namespace

bool applicable(const FactSet& state, const GroundOperator& op, const DomainDef& d, const KindTable& kinds) {
  const OperatorDef* def = d.find_operator(op.name);
  if (!def) throw PlanningError("unknown operator '" + op.name + "'");
  auto sub = bind_params(*def, op);
  for (size_t i = 0; i < def->params.size(); ++i) {
    if (!kinds.is_a(op.args[i], def->params[i].kind)) return false;
  }
  FactSet full = evaluate_derived(state, d, kinds);
  return eval_formula(substitute(def->precondition, sub), full, kinds);
}

FactSet apply(const FactSet& state, const GroundOperator& op, const DomainDef& d, const KindTable& kinds) {
  if (!applicable(state, op, d, kinds)) {
    throw PlanningError("operator " + op.str() + " is not applicable");
  }
  const OperatorDef* def = d.find_operator(op.name);
  auto sub = bind_params(*def, op);
  FactSet out = state;
  for (const auto& e : def->effects) {
    Fact g = e.atom;
    bool wildcard = false;
    for (auto& a : g.args) {
      auto it = sub.find(a);
      if (it != sub.end()) a = it->second;
      if (a == "_") wildcard = true;
    }
    if (e.del) {
      if (wildcard) {
        for (auto it = out.begin(); it != out.end();) {
          bool m = it->pred == g.pred && it->args.size() == g.args.size();
          if (m) {
            for (size_t i = 0; i < g.args.size(); ++i) {
              if (g.args[i] != "_" && g.args[i] != it->args[i]) { m = false; break; }
            }
          }
          it = m ? out.erase(it) : std::next(it);
        }
      } else {
        out.erase(g);
      }
    } else {
      if (wildcard) throw PlanningError("wildcard in add effect of " + op.name);
      out.insert(g);
    }
  }
  return out;
}

}  // namespace fmplan::pddl
