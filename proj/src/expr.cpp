#include "fairlens/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

namespace fairlens::expr {

bool Ast::uses_eps() const {
  for (const auto& op : ops) {
    if (op.kind == Kind::Eps) return true;
  }
  return false;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Ast parse() {
    skip_ws();
    if (pos_ >= text_.size()) error("empty formula");
    int root = expr();
    skip_ws();
    if (pos_ < text_.size()) error("unexpected trailing input");
    (void)root;
    return std::move(ast_);
  }

 private:
  [[noreturn]] void error(const std::string& what) {
    throw FormulaSyntaxError("formula: " + what, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int emit(Ast::Op op) {
    ast_.ops.push_back(op);
    return static_cast<int>(ast_.ops.size()) - 1;
  }

  int expr() {
    int lhs = term();
    while (true) {
      if (eat('+')) {
        int rhs = term();
        lhs = emit({Ast::Kind::Add, 0.0, -1, lhs, rhs});
      } else if (eat('-')) {
        int rhs = term();
        lhs = emit({Ast::Kind::Sub, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    while (true) {
      if (eat('*')) {
        int rhs = unary();
        lhs = emit({Ast::Kind::Mul, 0.0, -1, lhs, rhs});
      } else if (eat('/')) {
        int rhs = unary();
        lhs = emit({Ast::Kind::Div, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (eat('-')) {
      int a = unary();
      return emit({Ast::Kind::Neg, 0.0, -1, a, -1});
    }
    return atom();
  }

  int atom() {
    skip_ws();
    if (pos_ >= text_.size()) error("expected a value");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    if (c == '(') {
      ++pos_;
      int inner = expr();
      if (!eat(')')) error("expected ')'");
      return inner;
    }
    error(std::string("unexpected character '") + c + "'");
  }

  int number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || end != text_.data() + pos_) {
      pos_ = start;
      error("malformed number");
    }
    return emit({Ast::Kind::Const, value, -1, -1, -1});
  }

  int ident() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name = text_.substr(start, pos_ - start);
    if (name == "eps") return emit({Ast::Kind::Eps, 0.0, -1, -1, -1});
    if (peek() == '(') {
      Ast::Kind kind;
      if (name == "exp") kind = Ast::Kind::Exp;
      else if (name == "tanh") kind = Ast::Kind::Tanh;
      else if (name == "sin") kind = Ast::Kind::Sin;
      else if (name == "sigmoid") kind = Ast::Kind::Sigmoid;
      else { pos_ = start; error("unknown function '" + name + "'"); }
      eat('(');
      int a = expr();
      if (!eat(')')) error("expected ')'");
      return emit({kind, 0.0, -1, a, -1});
    }
    auto it = name_index_.find(name);
    int idx;
    if (it == name_index_.end()) {
      idx = static_cast<int>(ast_.names.size());
      ast_.names.push_back(name);
      name_index_.emplace(name, idx);
    } else {
      idx = it->second;
    }
    return emit({Ast::Kind::Var, 0.0, idx, -1, -1});
  }

  const std::string& text_;
  size_t pos_ = 0;
  Ast ast_;
  std::map<std::string, int> name_index_;
};

}  // namespace

Ast parse_formula(const std::string& text) { return Parser(text).parse(); }

std::vector<int> resolve_slots(const Ast& ast,
                               const std::vector<std::string>& parent_names,
                               const std::string& node_name) {
  std::vector<int> slots;
  slots.reserve(ast.names.size());
  for (const auto& name : ast.names) {
    int slot = -1;
    for (size_t i = 0; i < parent_names.size(); ++i) {
      if (parent_names[i] == name) {
        slot = static_cast<int>(i);
        break;
      }
    }
    if (slot < 0) {
      fail(Errc::ParentMismatch,
           "formula for '" + node_name + "' references '" + name +
               "', which is not a parent");
    }
    slots.push_back(slot);
  }
  return slots;
}

namespace {

double eval_at(const Ast& ast, const std::vector<int>& slots,
               const std::vector<double>& parent_values, double eps, int i) {
  const Ast::Op& op = ast.ops[static_cast<size_t>(i)];
  switch (op.kind) {
    case Ast::Kind::Const: return op.value;
    case Ast::Kind::Var:
      return parent_values[static_cast<size_t>(slots[static_cast<size_t>(op.name)])];
    case Ast::Kind::Eps: return eps;
    case Ast::Kind::Add:
      return eval_at(ast, slots, parent_values, eps, op.a) +
             eval_at(ast, slots, parent_values, eps, op.b);
    case Ast::Kind::Sub:
      return eval_at(ast, slots, parent_values, eps, op.a) -
             eval_at(ast, slots, parent_values, eps, op.b);
    case Ast::Kind::Mul:
      return eval_at(ast, slots, parent_values, eps, op.a) *
             eval_at(ast, slots, parent_values, eps, op.b);
    case Ast::Kind::Div:
      return eval_at(ast, slots, parent_values, eps, op.a) /
             eval_at(ast, slots, parent_values, eps, op.b);
    case Ast::Kind::Neg:
      return -eval_at(ast, slots, parent_values, eps, op.a);
    case Ast::Kind::Exp:
      return std::exp(eval_at(ast, slots, parent_values, eps, op.a));
    case Ast::Kind::Tanh:
      return std::tanh(eval_at(ast, slots, parent_values, eps, op.a));
    case Ast::Kind::Sin:
      return std::sin(eval_at(ast, slots, parent_values, eps, op.a));
    case Ast::Kind::Sigmoid: {
      const double z = eval_at(ast, slots, parent_values, eps, op.a);
      return 1.0 / (1.0 + std::exp(-z));
    }
  }
  return 0.0;
}

int precedence(Ast::Kind k) {
  switch (k) {
    case Ast::Kind::Add:
    case Ast::Kind::Sub: return 1;
    case Ast::Kind::Mul:
    case Ast::Kind::Div: return 2;
    case Ast::Kind::Neg: return 3;
    default: return 4;
  }
}

void print(const Ast& ast, int i, int parent_prec, std::string& out);

void print_binary(const Ast& ast, const Ast::Op& op, const char* sym,
                  int prec, std::string& out) {
  print(ast, op.a, prec, out);
  out += ' ';
  out += sym;
  out += ' ';
  // Right operand of - and / needs parens at equal precedence.
  print(ast, op.b, prec + (op.kind == Ast::Kind::Sub || op.kind == Ast::Kind::Div ? 1 : 0), out);
}

void print(const Ast& ast, int i, int parent_prec, std::string& out) {
  const Ast::Op& op = ast.ops[static_cast<size_t>(i)];
  const int prec = precedence(op.kind);
  const bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (op.kind) {
    case Ast::Kind::Const: {
      char buf[40];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, op.value);
      (void)ec;
      out.append(buf, end);
      break;
    }
    case Ast::Kind::Var: out += ast.names[static_cast<size_t>(op.name)]; break;
    case Ast::Kind::Eps: out += "eps"; break;
    case Ast::Kind::Add: print_binary(ast, op, "+", prec, out); break;
    case Ast::Kind::Sub: print_binary(ast, op, "-", prec, out); break;
    case Ast::Kind::Mul: print_binary(ast, op, "*", prec, out); break;
    case Ast::Kind::Div: print_binary(ast, op, "/", prec, out); break;
    case Ast::Kind::Neg:
      out += '-';
      print(ast, op.a, prec + 1, out);
      break;
    case Ast::Kind::Exp:
    case Ast::Kind::Tanh:
    case Ast::Kind::Sin:
    case Ast::Kind::Sigmoid: {
      const char* f = op.kind == Ast::Kind::Exp    ? "exp"
                      : op.kind == Ast::Kind::Tanh ? "tanh"
                      : op.kind == Ast::Kind::Sin  ? "sin"
                                                   : "sigmoid";
      out += f;
      out += '(';
      print(ast, op.a, 0, out);
      out += ')';
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

double eval(const Ast& ast, const std::vector<int>& slots,
            const std::vector<double>& parent_values, double eps) {
  return eval_at(ast, slots, parent_values, eps,
                 static_cast<int>(ast.ops.size()) - 1);
}

std::string to_string(const Ast& ast) {
  std::string out;
  print(ast, static_cast<int>(ast.ops.size()) - 1, 0, out);
  return out;
}

}  // namespace fairlens::expr
