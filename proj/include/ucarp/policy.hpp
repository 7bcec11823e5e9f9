#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ucarp {

enum class Terminal : std::uint8_t {
  CFH,   // cost from the current node to the candidate's entry node
  CFR1,  // cost from the closest other vehicle to the candidate
  CR,    // cost from the current node to the depot
  CTD,   // cost from the candidate's exit node to the depot
  CTT1,  // cost from the candidate's exit node to the closest other unserved task
  DEM,   // estimated remaining demand of the candidate
  DEM1,  // estimated remaining demand of the task behind CTT1
  FRT,   // fraction of tasks still unserved
  FUT,   // fraction of tasks still unassigned
  FULL,  // (Q - q) / Q
  RQ,    // remaining capacity q
  RQ1,   // remaining capacity of the vehicle behind CFR1
  SC,    // serving cost of the candidate
};

inline constexpr int kNumTerminals = 13;
inline constexpr std::array<Terminal, kNumTerminals> kAllTerminals = {
    Terminal::CFH, Terminal::CFR1, Terminal::CR,  Terminal::CTD,  Terminal::CTT1,
    Terminal::DEM, Terminal::DEM1, Terminal::FRT, Terminal::FUT,  Terminal::FULL,
    Terminal::RQ,  Terminal::RQ1,  Terminal::SC};

std::string_view terminal_name(Terminal t);
std::optional<Terminal> terminal_from_name(std::string_view name);

/// Bit set over Terminal.
using TerminalMask = std::uint16_t;
inline constexpr TerminalMask kAllTerminalsMask = (1u << kNumTerminals) - 1;
constexpr TerminalMask terminal_bit(Terminal t) {
  return static_cast<TerminalMask>(1u << static_cast<unsigned>(t));
}

struct FeatureVector {
  std::array<double, kNumTerminals> values{};

  double& operator[](Terminal t) { return values[static_cast<size_t>(t)]; }
  double operator[](Terminal t) const { return values[static_cast<size_t>(t)]; }
};

enum class Op : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,     // protected: x / 0 == 1
  Max,
  Min,
  IfLess,  // (iflt a b then else); not part of the evolved function set
  Var,     // terminal
  Const,   // ephemeral random constant
};

int arity(Op op);
std::string_view op_symbol(Op op);

struct Node {
  Op op = Op::Const;
  Terminal terminal = Terminal::CFH;  // Var only
  double value = 0.0;                 // Const only

  static Node var(Terminal t) { return {Op::Var, t, 0.0}; }
  static Node constant(double v) { return {Op::Const, Terminal::CFH, v}; }
  static Node function(Op op) { return {op, Terminal::CFH, 0.0}; }
  bool is_leaf() const { return op == Op::Var || op == Op::Const; }
  bool operator==(const Node& other) const;
};

/// A routing policy: an expression tree stored in prefix order. Lower
/// evaluated value means higher priority. Immutable and shareable.
class PolicyExpr {
 public:
  PolicyExpr() : PolicyExpr(std::vector<Node>{Node::constant(0.0)}) {}
  /// Throws std::invalid_argument when `prefix` is not exactly one tree.
  explicit PolicyExpr(std::vector<Node> prefix);

  static PolicyExpr var(Terminal t) { return PolicyExpr({Node::var(t)}); }
  static PolicyExpr constant(double v) { return PolicyExpr({Node::constant(v)}); }
  static PolicyExpr apply(Op op, std::initializer_list<PolicyExpr> children);

  double evaluate(const FeatureVector& features) const;

  std::span<const Node> nodes() const { return nodes_; }
  size_t size() const { return nodes_.size(); }
  /// Number of levels; a lone terminal has depth 1.
  int depth() const { return depth_; }
  /// One past the last node of the subtree rooted at `index`.
  size_t subtree_end(size_t index) const;
  /// Depth of the node at `index` counted from the root (root = 1).
  int node_level(size_t index) const;
  TerminalMask used_terminals() const { return used_; }

  bool operator==(const PolicyExpr& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<Node> nodes_;
  int depth_ = 1;
  TerminalMask used_ = 0;
};

/// Saturating arithmetic shared by evaluation and tests.
double apply_op(Op op, double a, double b);

class PolicySyntaxError : public std::runtime_error {
 public:
  PolicySyntaxError(size_t position, const std::string& message);
  size_t position() const { return position_; }

 private:
  size_t position_;
};

/// Parenthesized prefix form, e.g. "(min (+ CFH SC) (− CR 0.45))".
std::string serialize(const PolicyExpr& policy);
PolicyExpr parse_policy(std::string_view text);

enum class ManualPolicy { PS1, PS2, PS3, PS4, PS5 };
inline constexpr double kManualAlpha = 10000.0;

PolicyExpr manual_policy(ManualPolicy id);
/// "PS1".."PS5"; throws std::invalid_argument for anything else.
PolicyExpr manual_policy(std::string_view id);
std::optional<ManualPolicy> manual_policy_id(std::string_view id);

}  // namespace ucarp
