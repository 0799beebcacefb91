#include "fairlens/dsl.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <vector>

namespace fairlens {

namespace {

enum class Tok { Ident, Number, String, LBrace, RBrace, Colon, Comma, Arrow, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

[[noreturn]] void syntax_error(int line, int col, const std::string& message) {
  fail(Errc::SyntaxError,
       std::to_string(line) + ":" + std::to_string(col) + ": " + message);
}

[[noreturn]] void syntax_error(const Token& at, const std::string& message) {
  syntax_error(at.line, at.col, message);
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= text_.size()) return tok;
    const char c = text_[pos_];
    if (c == '{') return single(tok, Tok::LBrace);
    if (c == '}') return single(tok, Tok::RBrace);
    if (c == ':') return single(tok, Tok::Colon);
    if (c == ',') return single(tok, Tok::Comma);
    if (c == '"') return string_token(tok);
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance();
      advance();
      tok.kind = Tok::Arrow;
      tok.text = "->";
      return tok;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok.kind = Tok::Ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        tok.text += text_[pos_];
        advance();
      }
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
        c == '.') {
      return number_token(tok);
    }
    syntax_error(line_, col_, std::string("unexpected character '") + c + "'");
  }

 private:
  Token single(Token tok, Tok kind) {
    tok.kind = kind;
    tok.text = text_[pos_];
    advance();
    return tok;
  }

  Token string_token(Token tok) {
    advance();  // opening quote
    tok.kind = Tok::String;
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
      tok.text += text_[pos_];
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      syntax_error(tok.line, tok.col, "unterminated string");
    }
    advance();  // closing quote
    return tok;
  }

  Token number_token(Token tok) {
    tok.kind = Tok::Number;
    const size_t start = pos_;
    if (text_[pos_] == '-' || text_[pos_] == '+') advance();
    auto digits = [&] {
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      advance();
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        advance();
      }
      digits();
    }
    tok.text = text_.substr(start, pos_ - start);
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, tok.number);
    if (ec != std::errc() || ptr != last) {
      syntax_error(tok.line, tok.col, "malformed number '" + tok.text + "'");
    }
    return tok;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct NodeDecl {
  std::string name;
  std::optional<std::string> kind;
  std::optional<double> p;
  std::optional<double> intercept;
  std::optional<double> sigma;
  std::optional<std::string> formula;
  std::map<std::string, double> coef;
  std::optional<std::string> role;
  Token at;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { shift(); }

  ScenarioSpec parse() {
    expect_keyword("graph");
    const Token name = expect(Tok::Ident, "a scenario name");
    expect(Tok::LBrace, "'{'");
    while (cur_.kind != Tok::RBrace) {
      const Token head = expect(Tok::Ident, "'node', 'edge', 'counts' or 'bind'");
      if (head.text == "node") {
        parse_node();
      } else if (head.text == "edge") {
        parse_edge();
      } else if (head.text == "counts") {
        parse_counts(head);
      } else if (head.text == "bind") {
        parse_bind(head);
      } else {
        syntax_error(head, "expected 'node', 'edge', 'counts' or 'bind', got '" +
                               head.text + "'");
      }
    }
    shift();  // closing brace
    if (cur_.kind != Tok::End) syntax_error(cur_, "trailing input after '}'");
    return assemble(name.text);
  }

 private:
  void shift() { cur_ = lexer_.next(); }

  Token expect(Tok kind, const std::string& what) {
    if (cur_.kind != kind) {
      syntax_error(cur_, "expected " + what + describe_current());
    }
    Token tok = cur_;
    shift();
    return tok;
  }

  void expect_keyword(const std::string& word) {
    if (cur_.kind != Tok::Ident || cur_.text != word) {
      syntax_error(cur_, "expected '" + word + "'" + describe_current());
    }
    shift();
  }

  std::string describe_current() const {
    if (cur_.kind == Tok::End) return ", got end of input";
    if (cur_.text.empty()) return "";
    return ", got '" + cur_.text + "'";
  }

  void parse_node() {
    NodeDecl decl;
    decl.at = cur_;
    decl.name = expect(Tok::Ident, "a node name").text;
    expect(Tok::LBrace, "'{'");
    bool first = true;
    while (cur_.kind != Tok::RBrace) {
      if (!first) expect(Tok::Comma, "',' between attributes");
      first = false;
      const Token key = expect(Tok::Ident, "an attribute name");
      expect(Tok::Colon, "':'");
      if (key.text == "kind") {
        decl.kind = expect(Tok::Ident, "a mechanism kind").text;
      } else if (key.text == "p") {
        decl.p = expect(Tok::Number, "a number").number;
      } else if (key.text == "intercept") {
        decl.intercept = expect(Tok::Number, "a number").number;
      } else if (key.text == "sigma") {
        decl.sigma = expect(Tok::Number, "a number").number;
      } else if (key.text == "expr") {
        decl.formula = expect(Tok::String, "a quoted formula").text;
      } else if (key.text == "coef") {
        parse_coef(decl);
      } else if (key.text == "role") {
        decl.role = expect(Tok::Ident, "'sensitive' or 'outcome'").text;
        if (*decl.role != "sensitive" && *decl.role != "outcome") {
          syntax_error(key, "role must be 'sensitive' or 'outcome'");
        }
      } else {
        syntax_error(key, "unknown node attribute '" + key.text + "'");
      }
    }
    shift();  // closing brace
    nodes_.push_back(std::move(decl));
  }

  void parse_coef(NodeDecl& decl) {
    expect(Tok::LBrace, "'{'");
    bool first = true;
    while (cur_.kind != Tok::RBrace) {
      if (!first) expect(Tok::Comma, "',' between coefficients");
      first = false;
      const Token parent = expect(Tok::Ident, "a parent name");
      expect(Tok::Colon, "':'");
      const Token value = expect(Tok::Number, "a number");
      if (!decl.coef.emplace(parent.text, value.number).second) {
        syntax_error(parent, "duplicate coefficient for '" + parent.text + "'");
      }
    }
    shift();
  }

  void parse_edge() {
    GraphSpec::EdgeDecl edge;
    edge.parent = expect(Tok::Ident, "a parent node name").text;
    expect(Tok::Arrow, "'->'");
    edge.child = expect(Tok::Ident, "a child node name").text;
    if (cur_.kind == Tok::LBrace) {
      shift();
      expect_keyword("label");
      expect(Tok::Colon, "':'");
      const Token label = expect(Tok::Ident, "'fair', 'unfair' or 'unknown'");
      if (label.text == "fair") {
        edge.label = EdgeLabel::Fair;
      } else if (label.text == "unfair") {
        edge.label = EdgeLabel::Unfair;
      } else if (label.text == "unknown") {
        edge.label = EdgeLabel::Unknown;
      } else {
        syntax_error(label, "label must be 'fair', 'unfair' or 'unknown'");
      }
      expect(Tok::RBrace, "'}'");
    }
    edges_.push_back(std::move(edge));
  }

  long long expect_count(const std::string& what) {
    const Token tok = expect(Tok::Number, "a nonnegative integer");
    const double v = tok.number;
    if (v < 0 || v != std::floor(v) || v > 9e15) {
      syntax_error(tok, what + " must be a nonnegative integer");
    }
    return static_cast<long long>(v);
  }

  void parse_counts(const Token& head) {
    if (counts_) fail(Errc::SemanticError, "duplicate counts block");
    GroupedCounts counts;
    bool seen[2] = {false, false};
    expect(Tok::LBrace, "'{'");
    bool first = true;
    while (cur_.kind != Tok::RBrace) {
      if (!first) expect(Tok::Comma, "',' between groups");
      first = false;
      const Token group = expect(Tok::Ident, "'group0' or 'group1'");
      int g;
      if (group.text == "group0") {
        g = 0;
      } else if (group.text == "group1") {
        g = 1;
      } else {
        syntax_error(group, "expected 'group0' or 'group1'");
      }
      if (seen[g]) syntax_error(group, "duplicate " + group.text + " block");
      seen[g] = true;
      expect(Tok::Colon, "':'");
      expect(Tok::LBrace, "'{'");
      bool first_cell = true;
      while (cur_.kind != Tok::RBrace) {
        if (!first_cell) expect(Tok::Comma, "',' between counts");
        first_cell = false;
        const Token key = expect(Tok::Ident, "'tp', 'fp', 'tn' or 'fn'");
        expect(Tok::Colon, "':'");
        GroupCounts& cell = counts.groups[g];
        if (key.text == "tp") {
          cell.tp = expect_count("tp");
        } else if (key.text == "fp") {
          cell.fp = expect_count("fp");
        } else if (key.text == "tn") {
          cell.tn = expect_count("tn");
        } else if (key.text == "fn") {
          cell.fn = expect_count("fn");
        } else {
          syntax_error(key, "expected 'tp', 'fp', 'tn' or 'fn'");
        }
      }
      shift();
    }
    shift();
    if (!seen[0] || !seen[1]) {
      syntax_error(head, "counts needs both group0 and group1");
    }
    counts_ = counts;
  }

  void parse_bind(const Token& head) {
    if (bindings_) fail(Errc::SemanticError, "duplicate bind block");
    ColumnBindings bind;
    expect(Tok::LBrace, "'{'");
    bool first = true;
    while (cur_.kind != Tok::RBrace) {
      if (!first) expect(Tok::Comma, "',' between bindings");
      first = false;
      const Token key = expect(Tok::Ident, "a binding name");
      expect(Tok::Colon, "':'");
      if (key.text == "group") {
        bind.group = expect(Tok::Ident, "a column name").text;
      } else if (key.text == "label") {
        bind.label = expect(Tok::Ident, "a column name").text;
      } else if (key.text == "prediction") {
        bind.prediction = expect(Tok::Ident, "a column name").text;
      } else if (key.text == "score") {
        bind.score = expect(Tok::Ident, "a column name").text;
      } else if (key.text == "threshold") {
        bind.threshold = expect(Tok::Number, "a number").number;
      } else {
        syntax_error(key, "unknown binding '" + key.text + "'");
      }
    }
    shift();
    if (bind.group.empty() || bind.label.empty()) {
      syntax_error(head, "bind needs at least group and label columns");
    }
    if (bind.prediction && bind.score) {
      syntax_error(head, "bind either a prediction or a score column, not both");
    }
    bindings_ = bind;
  }

  ScenarioSpec assemble(const std::string& name) {
    GraphSpec gspec;
    std::map<std::string, const NodeDecl*> decl_index;
    for (const NodeDecl& decl : nodes_) {
      gspec.nodes.push_back(decl.name);
      decl_index.emplace(decl.name, &decl);  // duplicates caught in validation
      if (decl.role == "sensitive") {
        if (gspec.sensitive) {
          fail(Errc::SemanticError, "two nodes marked sensitive: '" +
                                        *gspec.sensitive + "' and '" +
                                        decl.name + "'");
        }
        gspec.sensitive = decl.name;
      } else if (decl.role == "outcome") {
        if (gspec.outcome) {
          fail(Errc::SemanticError, "two nodes marked outcome: '" +
                                        *gspec.outcome + "' and '" + decl.name +
                                        "'");
        }
        gspec.outcome = decl.name;
      }
    }
    std::set<std::pair<std::string, std::string>> declared;
    for (const GraphSpec::EdgeDecl& e : edges_) {
      declared.emplace(e.parent, e.child);
      gspec.edges.push_back(e);
    }
    for (const NodeDecl& decl : nodes_) {
      for (const auto& [parent, value] : decl.coef) {
        (void)value;
        if (declared.emplace(parent, decl.name).second) {
          gspec.edges.push_back({parent, decl.name, EdgeLabel::Unknown});
        }
      }
    }

    ScenarioSpec out;
    out.name = name;
    try {
      out.graph = validate_graph(gspec);
      std::map<std::string, Mechanism> mechanisms;
      for (const NodeDecl& decl : nodes_) {
        if (!decl.kind) continue;
        mechanisms.emplace(decl.name, build_mechanism(decl));
      }
      if (!mechanisms.empty()) {
        out.model = build_model(out.graph, mechanisms);
      }
    } catch (const Error& e) {
      if (e.code() == Errc::SemanticError) throw;
      fail(Errc::SemanticError, e.what());
    }
    out.counts = counts_;
    out.bindings = bindings_;
    return out;
  }

  static void reject(const NodeDecl& decl, bool present, const char* attr) {
    if (present) {
      fail(Errc::SemanticError, "node '" + decl.name + "': attribute '" +
                                    std::string(attr) +
                                    "' does not apply to kind " + *decl.kind);
    }
  }

  static Mechanism build_mechanism(const NodeDecl& decl) {
    const std::string& kind = *decl.kind;
    if (kind == "bernoulli") {
      reject(decl, decl.intercept.has_value(), "intercept");
      reject(decl, decl.sigma.has_value(), "sigma");
      reject(decl, decl.formula.has_value(), "expr");
      reject(decl, !decl.coef.empty(), "coef");
      return BernoulliRoot{decl.p.value_or(0.5)};
    }
    if (kind == "logistic") {
      reject(decl, decl.p.has_value(), "p");
      reject(decl, decl.sigma.has_value(), "sigma");
      reject(decl, decl.formula.has_value(), "expr");
      return BernoulliLogistic{decl.intercept.value_or(0.0), decl.coef};
    }
    if (kind == "linear") {
      reject(decl, decl.p.has_value(), "p");
      reject(decl, decl.formula.has_value(), "expr");
      return LinearGaussian{decl.intercept.value_or(0.0), decl.coef,
                            decl.sigma.value_or(1.0)};
    }
    if (kind == "expr") {
      reject(decl, decl.p.has_value(), "p");
      reject(decl, decl.intercept.has_value(), "intercept");
      reject(decl, !decl.coef.empty(), "coef");
      if (!decl.formula) {
        fail(Errc::SemanticError,
             "node '" + decl.name + "': kind expr needs an expr: \"...\" attribute");
      }
      return ExpressionMechanism{*decl.formula, decl.sigma.value_or(1.0)};
    }
    fail(Errc::SemanticError, "node '" + decl.name + "': unknown kind '" +
                                  kind + "'");
  }

  Lexer lexer_;
  Token cur_;
  std::vector<NodeDecl> nodes_;
  std::vector<GraphSpec::EdgeDecl> edges_;
  std::optional<GroupedCounts> counts_;
  std::optional<ColumnBindings> bindings_;
};

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void append_coef(std::string& out, const std::map<std::string, double>& coef) {
  if (coef.empty()) return;
  out += ", coef: { ";
  bool first = true;
  for (const auto& [parent, value] : coef) {
    if (!first) out += ", ";
    first = false;
    out += parent + ": " + fmt(value);
  }
  out += " }";
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text) {
  return Parser(text).parse();
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  const CausalGraph& g = spec.graph;
  std::string out = "graph " + spec.name + " {\n";
  for (int v = 0; v < g.size(); ++v) {
    const std::string& name = g.name(v);
    out += "  node " + name + " {";
    std::string attrs;
    if (spec.model) {
      const Mechanism mech = spec.model->mechanism(v);
      if (const auto* b = std::get_if<BernoulliRoot>(&mech)) {
        attrs += "kind: bernoulli, p: " + fmt(b->p);
      } else if (const auto* l = std::get_if<BernoulliLogistic>(&mech)) {
        attrs += "kind: logistic, intercept: " + fmt(l->intercept);
        append_coef(attrs, l->coefficients);
      } else if (const auto* lg = std::get_if<LinearGaussian>(&mech)) {
        attrs += "kind: linear, intercept: " + fmt(lg->intercept);
        append_coef(attrs, lg->coefficients);
        attrs += ", sigma: " + fmt(lg->noise_std);
      } else if (const auto* ex = std::get_if<ExpressionMechanism>(&mech)) {
        attrs += "kind: expr, expr: \"" + ex->formula + "\"";
        attrs += ", sigma: " + fmt(ex->noise_std);
      }
    }
    if (g.sensitive() == v) {
      attrs += attrs.empty() ? "role: sensitive" : ", role: sensitive";
    } else if (g.outcome() == v) {
      attrs += attrs.empty() ? "role: outcome" : ", role: outcome";
    }
    out += attrs.empty() ? "}" : " " + attrs + " }";
    out += "\n";
  }
  for (const GraphSpec::EdgeDecl& e : g.to_spec().edges) {
    out += "  edge " + e.parent + " -> " + e.child;
    if (e.label == EdgeLabel::Fair) {
      out += " { label: fair }";
    } else if (e.label == EdgeLabel::Unfair) {
      out += " { label: unfair }";
    }
    out += "\n";
  }
  if (spec.counts) {
    out += "  counts {\n";
    for (int gi = 0; gi < 2; ++gi) {
      const GroupCounts& c = spec.counts->groups[gi];
      out += "    group" + std::to_string(gi) + ": { tp: " +
             std::to_string(c.tp) + ", fp: " + std::to_string(c.fp) +
             ", tn: " + std::to_string(c.tn) + ", fn: " + std::to_string(c.fn) +
             " }";
      out += gi == 0 ? ",\n" : "\n";
    }
    out += "  }\n";
  }
  if (spec.bindings) {
    const ColumnBindings& b = *spec.bindings;
    out += "  bind { group: " + b.group + ", label: " + b.label;
    if (b.prediction) out += ", prediction: " + *b.prediction;
    if (b.score) out += ", score: " + *b.score;
    if (b.threshold) out += ", threshold: " + fmt(*b.threshold);
    out += " }\n";
  }
  out += "}\n";
  return out;
}

}  // namespace fairlens
