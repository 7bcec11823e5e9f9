#include "ucarp/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace ucarp {

namespace {
constexpr std::array<std::string_view, kNumTerminals> kTerminalNames = {
    "CFH", "CFR1", "CR", "CTD", "CTT1", "DEM", "DEM1",
    "FRT", "FUT",  "FULL", "RQ", "RQ1", "SC"};
constexpr double kMax = std::numeric_limits<double>::max();
}  // namespace

std::string_view terminal_name(Terminal t) { return kTerminalNames[static_cast<size_t>(t)]; }

std::optional<Terminal> terminal_from_name(std::string_view name) {
  for (size_t i = 0; i < kTerminalNames.size(); ++i)
    if (kTerminalNames[i] == name) return static_cast<Terminal>(i);
  return std::nullopt;
}

int arity(Op op) {
  switch (op) {
    case Op::Var:
    case Op::Const: return 0;
    case Op::IfLess: return 4;
    default: return 2;
  }
}

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "−";
    case Op::Mul: return "×";
    case Op::Div: return "÷";
    case Op::Max: return "max";
    case Op::Min: return "min";
    case Op::IfLess: return "iflt";
    default: return "";
  }
}

bool Node::operator==(const Node& other) const {
  if (op != other.op) return false;
  if (op == Op::Var) return terminal == other.terminal;
  if (op == Op::Const) return value == other.value;
  return true;
}

double apply_op(Op op, double a, double b) {
  double r = 0.0;
  switch (op) {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div: r = b == 0.0 ? 1.0 : a / b; break;
    case Op::Max: r = std::max(a, b); break;
    case Op::Min: r = std::min(a, b); break;
    default: return 0.0;
  }
  return std::clamp(r, -kMax, kMax);
}

PolicyExpr::PolicyExpr(std::vector<Node> prefix) : nodes_(std::move(prefix)) {
  if (nodes_.empty()) throw std::invalid_argument("empty policy tree");
  std::vector<int> depths;
  depths.reserve(nodes_.size());
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const int k = arity(it->op);
    if (static_cast<int>(depths.size()) < k)
      throw std::invalid_argument("policy prefix sequence is missing operands");
    int deepest = 0;
    for (int i = 0; i < k; ++i) {
      deepest = std::max(deepest, depths.back());
      depths.pop_back();
    }
    depths.push_back(deepest + 1);
    if (it->op == Op::Var) used_ |= terminal_bit(it->terminal);
  }
  if (depths.size() != 1) throw std::invalid_argument("policy prefix sequence has extra nodes");
  depth_ = depths.front();
}

PolicyExpr PolicyExpr::apply(Op op, std::initializer_list<PolicyExpr> children) {
  if (static_cast<int>(children.size()) != arity(op))
    throw std::invalid_argument("wrong number of children");
  std::vector<Node> nodes{Node::function(op)};
  for (const auto& c : children) nodes.insert(nodes.end(), c.nodes_.begin(), c.nodes_.end());
  return PolicyExpr(std::move(nodes));
}

double PolicyExpr::evaluate(const FeatureVector& features) const {
  constexpr size_t kInline = 512;
  std::array<double, kInline> inline_stack;
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (nodes_.size() > kInline) {
    heap_stack.resize(nodes_.size());
    stack = heap_stack.data();
  }
  size_t top = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    switch (it->op) {
      case Op::Var: stack[top++] = features[it->terminal]; break;
      case Op::Const: stack[top++] = it->value; break;
      case Op::IfLess: {
        const double a = stack[top - 1], b = stack[top - 2];
        const double then_v = stack[top - 3], else_v = stack[top - 4];
        top -= 4;
        stack[top++] = a < b ? then_v : else_v;
        break;
      }
      default: {
        const double a = stack[top - 1], b = stack[top - 2];
        top -= 2;
        stack[top++] = apply_op(it->op, a, b);
      }
    }
  }
  return stack[top - 1];
}

size_t PolicyExpr::subtree_end(size_t index) const {
  int open = 1;
  size_t i = index;
  while (open > 0) {
    open += arity(nodes_[i].op) - 1;
    ++i;
  }
  return i;
}

int PolicyExpr::node_level(size_t index) const {
  // walk the prefix sequence keeping the number of children still owed per level
  std::vector<int> owed;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const int level = static_cast<int>(owed.size()) + 1;
    if (i == index) return level;
    if (!owed.empty()) --owed.back();
    if (arity(nodes_[i].op) > 0) owed.push_back(arity(nodes_[i].op));
    while (!owed.empty() && owed.back() == 0) owed.pop_back();
  }
  throw std::out_of_range("node index out of range");
}

PolicySyntaxError::PolicySyntaxError(size_t position, const std::string& message)
    : std::runtime_error(fmt::format("position {}: {}", position, message)),
      position_(position) {}

namespace {

void write_node(const PolicyExpr& policy, size_t& index, std::string& out) {
  const auto& node = policy.nodes()[index++];
  if (node.op == Op::Var) {
    out += terminal_name(node.terminal);
    return;
  }
  if (node.op == Op::Const) {
    out += fmt::format("{}", node.value);
    return;
  }
  out += '(';
  out += op_symbol(node.op);
  for (int i = 0; i < arity(node.op); ++i) {
    out += ' ';
    write_node(policy, index, out);
  }
  out += ')';
}

std::optional<Op> op_from_symbol(std::string_view s) {
  if (s == "+") return Op::Add;
  if (s == "-" || s == "−") return Op::Sub;
  if (s == "*" || s == "×") return Op::Mul;
  if (s == "/" || s == "÷" || s == "%") return Op::Div;
  if (s == "max") return Op::Max;
  if (s == "min") return Op::Min;
  if (s == "iflt") return Op::IfLess;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolicyExpr parse() {
    std::vector<Node> nodes;
    parse_expr(nodes);
    skip_space();
    if (pos_ != text_.size()) throw PolicySyntaxError(pos_, "unexpected trailing input");
    return PolicyExpr(std::move(nodes));
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    const size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void parse_expr(std::vector<Node>& out) {
    skip_space();
    if (pos_ >= text_.size()) throw PolicySyntaxError(pos_, "unexpected end of input");
    if (text_[pos_] == ')') throw PolicySyntaxError(pos_, "unexpected ')'");
    if (text_[pos_] == '(') {
      const size_t open = pos_++;
      skip_space();
      const size_t sym_pos = pos_;
      auto symbol = atom();
      auto op = op_from_symbol(symbol);
      if (!op) throw PolicySyntaxError(sym_pos, fmt::format("unknown function '{}'", symbol));
      out.push_back(Node::function(*op));
      for (int i = 0; i < arity(*op); ++i) parse_expr(out);
      skip_space();
      if (pos_ >= text_.size())
        throw PolicySyntaxError(pos_, fmt::format("unexpected end of input, '(' at {} not closed", open));
      if (text_[pos_] != ')')
        throw PolicySyntaxError(pos_, fmt::format("expected ')' closing '{}'", symbol));
      ++pos_;
      return;
    }
    const size_t start = pos_;
    auto token = atom();
    if (auto t = terminal_from_name(token)) {
      out.push_back(Node::var(*t));
      return;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
      throw PolicySyntaxError(start, fmt::format("unknown terminal '{}'", token));
    out.push_back(Node::constant(value));
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

std::string serialize(const PolicyExpr& policy) {
  std::string out;
  size_t index = 0;
  write_node(policy, index, out);
  return out;
}

PolicyExpr parse_policy(std::string_view text) { return Parser(text).parse(); }

std::optional<ManualPolicy> manual_policy_id(std::string_view id) {
  if (id == "PS1") return ManualPolicy::PS1;
  if (id == "PS2") return ManualPolicy::PS2;
  if (id == "PS3") return ManualPolicy::PS3;
  if (id == "PS4") return ManualPolicy::PS4;
  if (id == "PS5") return ManualPolicy::PS5;
  return std::nullopt;
}

PolicyExpr manual_policy(ManualPolicy id) {
  const auto weighted_cfh =
      PolicyExpr::apply(Op::Mul, {PolicyExpr::constant(kManualAlpha), PolicyExpr::var(Terminal::CFH)});
  const auto ctd = PolicyExpr::var(Terminal::CTD);
  const auto dem_per_sc =
      PolicyExpr::apply(Op::Div, {PolicyExpr::var(Terminal::DEM), PolicyExpr::var(Terminal::SC)});
  switch (id) {
    case ManualPolicy::PS1: return PolicyExpr::apply(Op::Sub, {weighted_cfh, ctd});
    case ManualPolicy::PS2: return PolicyExpr::apply(Op::Add, {weighted_cfh, ctd});
    case ManualPolicy::PS3: return PolicyExpr::apply(Op::Sub, {weighted_cfh, dem_per_sc});
    case ManualPolicy::PS4: return PolicyExpr::apply(Op::Add, {weighted_cfh, dem_per_sc});
    case ManualPolicy::PS5:
      return PolicyExpr::apply(Op::IfLess,
                               {PolicyExpr::var(Terminal::FULL), PolicyExpr::constant(0.5),
                                manual_policy(ManualPolicy::PS1), manual_policy(ManualPolicy::PS2)});
  }
  throw std::invalid_argument("unknown manual policy");
}

PolicyExpr manual_policy(std::string_view id) {
  auto parsed = manual_policy_id(id);
  if (!parsed) throw std::invalid_argument(fmt::format("unknown manual policy '{}'", id));
  return manual_policy(*parsed);
}

}  // namespace ucarp
