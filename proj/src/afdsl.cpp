#include "fpt/afdsl.hpp"

#include <algorithm>
#include <cctype>

namespace fpt {

namespace {

std::shared_ptr<TermNode> make_node(TermKind kind) {
  auto node = std::make_shared<TermNode>();
  node->kind = kind;
  return node;
}

void inherit(TermNode& node) {
  for (const auto& child : node.children) {
    if (!child) throw Error(Errc::kInvalidArgument, "null subterm");
    node.rank = std::max(node.rank, child->rank);
    node.times.insert(child->times.begin(), child->times.end());
  }
}

Term composite(TermKind kind, std::vector<Term> children) {
  if (children.empty()) throw Error(Errc::kInvalidArgument, "composition needs a subterm");
  auto node = make_node(kind);
  node->children = std::move(children);
  inherit(*node);
  return node;
}

}  // namespace

Term ind(std::vector<std::string> labels) {
  if (labels.empty()) throw Error(Errc::kInvalidArgument, "ind{} needs a label");
  auto node = make_node(TermKind::kIndicator);
  node->labels = std::move(labels);
  return node;
}

Term poly(std::vector<Rational> coeffs, std::vector<std::size_t> indices) {
  if (coeffs.empty() || indices.empty()) {
    throw Error(Errc::kInvalidArgument, "poly needs coefficients and coordinates");
  }
  auto node = make_node(TermKind::kPoly);
  node->params = std::move(coeffs);
  node->indices = std::move(indices);
  return node;
}

Term prod(std::vector<Term> children) { return composite(TermKind::kProd, std::move(children)); }

Term min_of(std::vector<Term> children) {
  return composite(TermKind::kMin, std::move(children));
}

Term max_of(std::vector<Term> children) {
  return composite(TermKind::kMax, std::move(children));
}

Term constant(Rational c) {
  if (c < 0 || c > 1) {
    throw Error(Errc::kInvalidArgument, "const[" + to_string(c) + "] is outside [0,1]");
  }
  auto node = make_node(TermKind::kConst);
  node->params = {std::move(c)};
  return node;
}

Term affine(std::vector<Rational> coeffs, std::vector<Term> children) {
  if (coeffs.size() != children.size() + 1) {
    throw Error(Errc::kInvalidArgument,
                "affine with " + std::to_string(children.size()) + " subterms needs " +
                    std::to_string(children.size() + 1) + " coefficients");
  }
  auto node = make_node(TermKind::kAffine);
  node->params = std::move(coeffs);
  node->children = std::move(children);
  inherit(*node);
  return node;
}

Term cond(Term child, std::size_t t) {
  if (!child) throw Error(Errc::kInvalidArgument, "null subterm");
  if (t == 0) throw Error(Errc::kBadTimestep, "timesteps start at 1");
  auto node = make_node(TermKind::kCond);
  node->rank = child->rank + 1;
  node->times = child->times;
  node->times.insert(t);
  node->time = t;
  node->children = {std::move(child)};
  return node;
}

// Parsing.

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Term parse() {
    Term t = term();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  Term term() {
    skip();
    if (peek() == '(') {
      ++pos_;
      Term child = term();
      expect('|');
      const std::size_t at = pos_;
      const std::size_t t = index();
      if (t == 0) throw SyntaxError(at, "timesteps start at 1");
      expect(')');
      return cond(std::move(child), t);
    }
    const std::size_t at = pos_;
    const std::string name = word();
    if (name.empty()) fail("expected a term");
    if (name == "ind") {
      expect('{');
      std::vector<std::string> labels{label()};
      while (accept(',')) labels.push_back(label());
      expect('}');
      return ind(std::move(labels));
    }
    if (name == "poly") {
      expect('[');
      std::vector<Rational> coeffs{rational()};
      while (accept(',')) coeffs.push_back(rational());
      expect(';');
      std::vector<std::size_t> indices{index()};
      while (accept(',')) indices.push_back(index());
      expect(']');
      return poly(std::move(coeffs), std::move(indices));
    }
    if (name == "prod" || name == "min" || name == "max") {
      auto children = arguments();
      if (name == "prod") return prod(std::move(children));
      if (name == "min") return min_of(std::move(children));
      return max_of(std::move(children));
    }
    if (name == "const") {
      expect('[');
      const std::size_t value_at = pos_;
      Rational c = rational();
      expect(']');
      if (c < 0 || c > 1) throw SyntaxError(value_at, "const value outside [0,1]");
      return constant(std::move(c));
    }
    if (name == "affine") {
      expect('[');
      std::vector<Rational> coeffs{rational()};
      while (accept(',')) coeffs.push_back(rational());
      expect(']');
      const std::size_t args_at = pos_;
      auto children = arguments();
      if (coeffs.size() != children.size() + 1) {
        throw SyntaxError(args_at, "affine needs one more coefficient than subterms");
      }
      return affine(std::move(coeffs), std::move(children));
    }
    throw Error(Errc::kUnknownFunction,
                "unknown function '" + name + "' at position " + std::to_string(at));
  }

  std::vector<Term> arguments() {
    expect('(');
    std::vector<Term> children{term()};
    while (accept(',')) children.push_back(term());
    expect(')');
    return children;
  }

  std::string word() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  static bool label_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' ||
           c == '-';
  }

  std::string label() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && label_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a state label");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string digits() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ == start) fail("expected digits");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::size_t index() {
    skip();
    const std::size_t at = pos_;
    const std::string d = digits();
    if (d.size() > 9) throw SyntaxError(at, "integer too large");
    return static_cast<std::size_t>(std::stoul(d));
  }

  Rational rational() {
    skip();
    const std::size_t at = pos_;
    std::string text;
    if (peek() == '-') {
      text += '-';
      ++pos_;
    }
    text += digits();
    if (peek() == '/') {
      ++pos_;
      text += '/';
      text += digits();
    }
    try {
      return parse_rational(text);
    } catch (const Error& e) {
      throw SyntaxError(at, e.what());
    }
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  char peek() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const TermNode& node, std::string& out) {
  auto list = [&out](const auto& items, auto&& each) {
    bool first = true;
    for (const auto& item : items) {
      if (!first) out += ',';
      first = false;
      each(item);
    }
  };
  auto children = [&] {
    out += '(';
    list(node.children, [&out](const Term& c) { print_into(*c, out); });
    out += ')';
  };
  switch (node.kind) {
    case TermKind::kIndicator:
      out += "ind{";
      list(node.labels, [&out](const std::string& l) { out += l; });
      out += '}';
      return;
    case TermKind::kPoly:
      out += "poly[";
      list(node.params, [&out](const Rational& q) { out += to_string(q); });
      out += ';';
      list(node.indices, [&out](std::size_t i) { out += std::to_string(i); });
      out += ']';
      return;
    case TermKind::kProd:
      out += "prod";
      children();
      return;
    case TermKind::kMin:
      out += "min";
      children();
      return;
    case TermKind::kMax:
      out += "max";
      children();
      return;
    case TermKind::kConst:
      out += "const[" + to_string(node.params.front()) + "]";
      return;
    case TermKind::kAffine:
      out += "affine[";
      list(node.params, [&out](const Rational& q) { out += to_string(q); });
      out += ']';
      children();
      return;
    case TermKind::kCond:
      out += '(';
      print_into(*node.children.front(), out);
      out += '|' + std::to_string(node.time) + ')';
      return;
  }
}

}  // namespace

Term parse_term(std::string_view text) { return Parser(text).parse(); }

std::string print(const Term& term) {
  std::string out;
  print_into(*term, out);
  return out;
}

// Evaluation.

Evaluator::Evaluator(const FilteredRandomVariable& x) : x_(x) {
  if (x_.level() != 0) {
    throw Error(Errc::kInvalidArgument, "terms are evaluated on level-0 values");
  }
}

const std::vector<Rational>& Evaluator::eval(const Term& term) {
  auto it = memo_.find(term.get());
  if (it != memo_.end()) return it->second;
  std::vector<Rational> values = compute(*term);
  pinned_.push_back(term);
  return memo_.emplace(term.get(), std::move(values)).first->second;
}

Rational Evaluator::expectation(const Term& term) {
  const auto& values = eval(term);
  Rational total = 0;
  for (std::size_t a = 0; a < values.size(); ++a) total += x_.space().weight(a) * values[a];
  return total;
}

Rational Evaluator::base_value(const TermNode& node, NestedValue v) const {
  if (node.kind == TermKind::kIndicator) {
    const std::string key = v.point_label();
    return std::find(node.labels.begin(), node.labels.end(), key) != node.labels.end() ? 1 : 0;
  }
  Rational y = 0;
  for (const auto& label : v.labels()) {
    const State& s = x_.states().at(label);
    for (std::size_t i : node.indices) {
      if (i >= s.payload.size()) {
        throw Error(Errc::kInvalidArgument, "payload coordinate " + std::to_string(i) +
                                                " outside dimension " +
                                                std::to_string(s.payload.size()));
      }
      y += s.payload[i];
    }
  }
  Rational sum = 0;
  Rational power = 1;
  for (const auto& a : node.params) {
    sum += a * power;
    power *= y;
  }
  return clip_unit(sum);
}

std::vector<Rational> Evaluator::compute(const TermNode& node) {
  const std::size_t n = x_.space().size();
  std::vector<Rational> out(n);
  switch (node.kind) {
    case TermKind::kIndicator:
      for (const auto& label : node.labels) {
        std::size_t start = 0;
        while (true) {
          const std::size_t colon = label.find(':', start);
          const std::string part = label.substr(start, colon - start);
          if (!x_.states().contains(part)) {
            throw Error(Errc::kUnknownState, "ind{} names unknown state '" + part + "'");
          }
          if (colon == std::string::npos) break;
          start = colon + 1;
        }
      }
      [[fallthrough]];
    case TermKind::kPoly:
      for (std::size_t a = 0; a < n; ++a) out[a] = base_value(node, x_.value(a));
      return out;
    case TermKind::kConst:
      std::fill(out.begin(), out.end(), node.params.front());
      return out;
    case TermKind::kProd:
    case TermKind::kMin:
    case TermKind::kMax: {
      out = eval(node.children.front());
      for (std::size_t c = 1; c < node.children.size(); ++c) {
        const auto& next = eval(node.children[c]);
        for (std::size_t a = 0; a < n; ++a) {
          if (node.kind == TermKind::kProd) {
            out[a] *= next[a];
          } else if (node.kind == TermKind::kMin) {
            out[a] = std::min(out[a], next[a]);
          } else {
            out[a] = std::max(out[a], next[a]);
          }
        }
      }
      return out;
    }
    case TermKind::kAffine: {
      std::fill(out.begin(), out.end(), node.params.front());
      for (std::size_t c = 0; c < node.children.size(); ++c) {
        const auto& next = eval(node.children[c]);
        for (std::size_t a = 0; a < n; ++a) out[a] += node.params[c + 1] * next[a];
      }
      for (auto& v : out) v = clip_unit(v);
      return out;
    }
    case TermKind::kCond: {
      const Partition& p = x_.filtration().step(node.time);
      const auto& inner = eval(node.children.front());
      for (const auto& block : p.blocks()) {
        Rational mass = 0;
        Rational weighted = 0;
        for (std::size_t a : block) {
          mass += x_.space().weight(a);
          weighted += x_.space().weight(a) * inner[a];
        }
        const Rational mean = weighted / mass;
        for (std::size_t a : block) out[a] = mean;
      }
      return out;
    }
  }
  return out;
}

std::map<std::string, Rational> eval(const Term& term, const FilteredRandomVariable& x) {
  Evaluator e(x);
  const auto& values = e.eval(term);
  std::map<std::string, Rational> out;
  for (std::size_t a = 0; a < values.size(); ++a) out.emplace(x.space().id(a), values[a]);
  return out;
}

Rational expectation(const Term& term, const FilteredRandomVariable& x) {
  return Evaluator(x).expectation(term);
}

Rational eval_point(const Term& term, std::shared_ptr<const StateSpace> states, NestedValue point) {
  if (term->rank != 0) {
    throw Error(Errc::kInvalidArgument, "eval_point needs a rank-0 term, got " + print(term));
  }
  if (point.level() != 0) throw Error(Errc::kInvalidArgument, "eval_point needs a level-0 point");
  // A one-atom variable; with no conditioning the filtration is irrelevant.
  const std::size_t steps = point.labels().size() > 1 ? point.labels().size() : 1;
  FilteredRandomVariable x(std::move(states), FiniteProbSpace({{"p", Rational(1)}}),
                           Filtration(std::vector<Partition>(steps, Partition::trivial(1))),
                           {point});
  return Evaluator(x).eval(term).front();
}

// Separating families.

std::vector<Term> indicator_algebra(const std::vector<std::string>& labels,
                                    std::size_t max_terms) {
  if (labels.size() >= 63 || (std::size_t{1} << labels.size()) - 1 > max_terms) {
    throw Error(Errc::kBudgetExceeded, "indicator algebra over " +
                                           std::to_string(labels.size()) +
                                           " labels exceeds the budget of " +
                                           std::to_string(max_terms) + " terms");
  }
  std::vector<Term> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << labels.size()); ++mask) {
    std::vector<std::string> subset;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (mask >> i & 1) subset.push_back(labels[i]);
    }
    out.push_back(ind(std::move(subset)));
  }
  return out;
}

namespace {

void require_shared_frame(std::span<const FilteredRandomVariable> instances) {
  if (instances.empty()) throw Error(Errc::kInvalidArgument, "no instances given");
  for (const auto& x : instances) {
    if (x.timesteps() != instances.front().timesteps()) {
      throw Error(Errc::kIncomparable, "instances have different numbers of timesteps");
    }
    if (!(x.states() == instances.front().states())) {
      throw Error(Errc::kIncomparable, "instances live on different state spaces");
    }
  }
}

class FamilyBuilder {
 public:
  FamilyBuilder(std::span<const FilteredRandomVariable> instances, const FamilyOptions& options)
      : options_(options) {
    require_shared_frame(instances);
    for (const auto& x : instances) evaluators_.emplace_back(x);
    const std::size_t n = instances.front().timesteps();
    if (options_.times.empty()) {
      for (std::size_t t = 1; t <= n; ++t) options_.times.push_back(t);
    }
    for (std::size_t t : options_.times) {
      if (t < 1 || t > n) {
        throw Error(Errc::kBadTimestep, "conditioning time " + std::to_string(t) +
                                            " outside 1.." + std::to_string(n));
      }
    }
  }

  std::vector<Term> build(int n) {
    if (n < 0) throw Error(Errc::kInvalidArgument, "negative rank");
    // Level 0: one indicator per point value that occurs.
    std::vector<NestedValue> points;
    for (auto& e : evaluators_) {
      for (NestedValue v : e.variable().values()) points.push_back(v);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<Term> core;
    for (NestedValue v : points) {
      core.push_back(ind({v.point_label()}));
      keep(core.back(), 0);
    }
    for (int k = 1; k <= n; ++k) core = next_level(core, k);
    return std::move(family_);
  }

  Evaluator& evaluator(std::size_t i) { return evaluators_[i]; }

 private:
  using Signature = std::vector<Rational>;

  Signature signature(const Term& t) {
    Signature s;
    for (auto& e : evaluators_) {
      const auto& v = e.eval(t);
      s.insert(s.end(), v.begin(), v.end());
    }
    return s;
  }

  void charge(int level) {
    if (++created_ > options_.max_terms) {
      throw Error(Errc::kBudgetExceeded, "term budget of " + std::to_string(options_.max_terms) +
                                             " reached while building level " +
                                             std::to_string(level));
    }
  }

  // Adds t to the family unless an equal signature is already there.
  bool keep(const Term& t, int level) {
    charge(level);
    if (!seen_.insert(signature(t)).second) return false;
    family_.push_back(t);
    return true;
  }

  static bool constant_signature(const Signature& s) {
    return std::all_of(s.begin(), s.end(), [&](const Rational& q) { return q == s.front(); });
  }

  std::vector<Term> next_level(const std::vector<Term>& core, int level) {
    // Conditioned class indicators: (1_c | t)(w) is the conditional mass of
    // class c at time t, so together they pin down pp at this level.
    std::vector<Term> conds;
    std::vector<Signature> cond_sigs;
    std::set<Signature> distinct;
    for (const Term& c : core) {
      for (std::size_t t : options_.times) {
        Term term = cond(c, t);
        charge(level);
        Signature s = signature(term);
        if (constant_signature(s) || !distinct.insert(s).second) continue;
        conds.push_back(term);
        cond_sigs.push_back(std::move(s));
        keep(term, level);
      }
    }
    for (std::size_t i = 0; i < conds.size(); ++i) {
      for (std::size_t j = i; j < conds.size(); ++j) keep(prod({conds[i], conds[j]}), level);
    }
    if (conds.empty()) return {constant(1)};

    // Exact class indicators from tents around each attained value.
    const std::size_t atoms = cond_sigs.front().size();
    std::vector<Rational> eps(conds.size());
    for (std::size_t i = 0; i < conds.size(); ++i) {
      std::vector<Rational> vals = cond_sigs[i];
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      eps[i] = vals[1] - vals[0];
      for (std::size_t v = 2; v < vals.size(); ++v) eps[i] = std::min<Rational>(eps[i], vals[v] - vals[v - 1]);
    }
    std::map<Signature, std::size_t> classes;
    for (std::size_t a = 0; a < atoms; ++a) {
      Signature key;
      for (const auto& s : cond_sigs) key.push_back(s[a]);
      classes.emplace(std::move(key), classes.size());
    }
    std::map<std::pair<std::size_t, Rational>, Term> tents;
    std::vector<Term> next;
    for (const auto& [key, id] : classes) {
      std::vector<Term> factors;
      for (std::size_t i = 0; i < conds.size(); ++i) {
        auto [it, inserted] = tents.try_emplace({i, key[i]});
        if (inserted) {
          const Rational& v = key[i];
          const Rational& e = eps[i];
          it->second =
              min_of({affine({(e - v) / e, 1 / e}, {conds[i]}),
                      affine({(v + e) / e, -1 / e}, {conds[i]})});
          charge(level);
        }
        factors.push_back(it->second);
      }
      Term indicator = factors.size() == 1 ? factors.front() : prod(std::move(factors));
      next.push_back(indicator);
      keep(indicator, level);
    }
    return next;
  }

  FamilyOptions options_;
  std::vector<Evaluator> evaluators_;
  std::vector<Term> family_;
  std::set<Signature> seen_;
  std::size_t created_ = 0;
};

}  // namespace

std::vector<Term> separating_family(std::span<const FilteredRandomVariable> instances, int n,
                                    const FamilyOptions& options) {
  return FamilyBuilder(instances, options).build(n);
}

bool af_equiv(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n,
              const FamilyOptions& options) {
  const std::vector<FilteredRandomVariable> pair{x, y};
  FamilyBuilder builder(pair, options);
  const auto family = builder.build(n);
  for (const Term& t : family) {
    if (builder.evaluator(0).expectation(t) != builder.evaluator(1).expectation(t)) {
      return false;
    }
  }
  return true;
}

}  // namespace fpt
