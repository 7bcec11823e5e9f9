#include "ucarp/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

namespace ucarp {

std::string_view to_string(InstanceFormat format) {
  switch (format) {
    case InstanceFormat::Gdb: return "gdb";
    case InstanceFormat::Val: return "val";
    case InstanceFormat::Egl: return "egl";
  }
  return "gdb";
}

InstanceFormat format_from_string(std::string_view name) {
  if (name == "gdb") return InstanceFormat::Gdb;
  if (name == "val") return InstanceFormat::Val;
  if (name == "egl") return InstanceFormat::Egl;
  throw std::invalid_argument(fmt::format("unknown instance format '{}'", name));
}

std::optional<InstanceFormat> infer_format(std::string_view file_name) {
  auto slash = file_name.find_last_of("/\\");
  if (slash != std::string_view::npos) file_name.remove_prefix(slash + 1);
  std::string lower(file_name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.starts_with("gdb") || lower.starts_with("ugdb")) return InstanceFormat::Gdb;
  if (lower.starts_with("val") || lower.starts_with("uval")) return InstanceFormat::Val;
  if (lower.starts_with("egl") || lower.starts_with("uegl")) return InstanceFormat::Egl;
  return std::nullopt;
}

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error(fmt::format("line {}: {}", line, message)), line_(line) {}

Instance::Instance(std::string name, int num_vertices, VertexId depot,
                   std::vector<Edge> edges, double capacity, int declared_vehicles)
    : name_(std::move(name)),
      num_vertices_(num_vertices),
      depot_(depot),
      edges_(std::move(edges)),
      capacity_(capacity),
      declared_vehicles_(declared_vehicles) {
  if (num_vertices_ < 1) throw InstanceError("instance needs at least one vertex");
  if (depot_ < 0 || depot_ >= num_vertices_)
    throw InstanceError(fmt::format("depot {} is not a vertex", depot_ + 1));
  if (!(capacity_ > 0.0) || !std::isfinite(capacity_))
    throw InstanceError("capacity must be positive");

  const auto n = static_cast<size_t>(num_vertices_);
  adjacency_.assign(n * n, -1);
  task_of_edge_.assign(edges_.size(), -1);
  for (size_t i = 0; i < edges_.size(); ++i) {
    auto& e = edges_[i];
    if (e.u < 0 || e.u >= num_vertices_ || e.v < 0 || e.v >= num_vertices_)
      throw InstanceError(fmt::format("edge {} has an endpoint outside the graph", i));
    if (e.u == e.v) throw InstanceError(fmt::format("edge {} is a self loop", i));
    if (!(e.traversal_cost > 0.0) || !std::isfinite(e.traversal_cost))
      throw InstanceError(fmt::format("edge ({},{}) needs a positive traversal cost",
                                      e.u + 1, e.v + 1));
    if (e.demand < 0.0 || e.serving_cost < 0.0)
      throw InstanceError(fmt::format("edge ({},{}) has a negative demand or serving cost",
                                      e.u + 1, e.v + 1));
    if (!e.is_task() && e.serving_cost != 0.0)
      throw InstanceError(fmt::format("non-required edge ({},{}) has a serving cost",
                                      e.u + 1, e.v + 1));
    if (e.demand > capacity_)
      throw InstanceError(fmt::format("edge ({},{}) demand {} exceeds capacity {}", e.u + 1,
                                      e.v + 1, e.demand, capacity_));
    auto& slot = adjacency_[static_cast<size_t>(e.u) * n + static_cast<size_t>(e.v)];
    if (slot != -1)
      throw InstanceError(fmt::format("parallel edges between {} and {}", e.u + 1, e.v + 1));
    slot = static_cast<EdgeId>(i);
    adjacency_[static_cast<size_t>(e.v) * n + static_cast<size_t>(e.u)] = static_cast<EdgeId>(i);
    if (e.is_task()) {
      task_of_edge_[i] = static_cast<TaskId>(tasks_.size());
      tasks_.push_back(static_cast<EdgeId>(i));
    }
  }

  std::vector<char> seen(n, 0);
  std::queue<VertexId> frontier;
  frontier.push(depot_);
  seen[static_cast<size_t>(depot_)] = 1;
  while (!frontier.empty()) {
    auto w = frontier.front();
    frontier.pop();
    for (VertexId x = 0; x < num_vertices_; ++x) {
      if (!seen[static_cast<size_t>(x)] && edge_between(w, x) != -1) {
        seen[static_cast<size_t>(x)] = 1;
        frontier.push(x);
      }
    }
  }
  for (size_t x = 0; x < n; ++x)
    if (!seen[x]) throw InstanceError(fmt::format("vertex {} is not connected to the depot", x + 1));
}

double Instance::total_demand() const {
  double total = 0.0;
  for (auto e : tasks_) total += edges_[static_cast<size_t>(e)].demand;
  return total;
}

bool Instance::operator==(const Instance& other) const {
  return name_ == other.name_ && num_vertices_ == other.num_vertices_ &&
         depot_ == other.depot_ && edges_ == other.edges_ && capacity_ == other.capacity_ &&
         declared_vehicles_ == other.declared_vehicles_;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view token, int line, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(line, fmt::format("expected a number for {}, got '{}'", what, token));
  return value;
}

int parse_int(std::string_view token, int line, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(line, fmt::format("expected an integer for {}, got '{}'", what, token));
  return value;
}

enum class Section { Header, Required, NonRequired };

struct RawEdge {
  Edge edge;
  int line;
};

// "( 1, 2)   coste 13   demanda 1" -> endpoints, cost, optional demand
RawEdge parse_edge_line(std::string_view text, int line, int num_vertices, bool required) {
  std::string buffer(text);
  for (auto& c : buffer)
    if (c == '(' || c == ')' || c == ',') c = ' ';
  std::istringstream in(buffer);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  if (tokens.size() < 4 || tokens[2] != "coste")
    throw ParseError(line, fmt::format("malformed edge line '{}'", trim(text)));
  int u = parse_int(tokens[0], line, "edge endpoint");
  int v = parse_int(tokens[1], line, "edge endpoint");
  for (int w : {u, v})
    if (w < 1 || w > num_vertices)
      throw ParseError(line, fmt::format("vertex {} is outside 1..{}", w, num_vertices));
  double cost = parse_number(tokens[3], line, "coste");
  if (cost < 0.0) throw ParseError(line, fmt::format("negative cost {}", cost));
  if (cost == 0.0) throw ParseError(line, "traversal cost must be positive");
  double demand = 0.0;
  if (tokens.size() >= 6 && tokens[4] == "demanda") {
    demand = parse_number(tokens[5], line, "demanda");
    if (demand < 0.0) throw ParseError(line, fmt::format("negative demand {}", demand));
  } else if (tokens.size() != 4) {
    throw ParseError(line, fmt::format("malformed edge line '{}'", trim(text)));
  } else if (required) {
    throw ParseError(line, "required edge without 'demanda'");
  }
  Edge e;
  e.u = u - 1;
  e.v = v - 1;
  e.traversal_cost = cost;
  e.demand = demand;
  e.serving_cost = demand > 0.0 ? cost : 0.0;
  return {e, line};
}

}  // namespace

Instance parse_instance(std::string_view text, InstanceFormat format) {
  std::string name;
  std::optional<int> vertices, required_count, nonrequired_count, vehicles, depot;
  std::optional<double> capacity;
  std::vector<RawEdge> required, nonrequired;
  int nonrequired_header_line = 0;
  Section section = Section::Header;

  int line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    if (line.front() == '(') {
      if (!vertices) throw ParseError(line_no, "edge listed before VERTICES");
      if (section == Section::Required)
        required.push_back(parse_edge_line(line, line_no, *vertices, true));
      else if (section == Section::NonRequired)
        nonrequired.push_back(parse_edge_line(line, line_no, *vertices, false));
      else
        throw ParseError(line_no, "edge line outside an edge list");
      continue;
    }

    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw ParseError(line_no, fmt::format("expected 'KEY : value', got '{}'", line));
    auto key = trim(line.substr(0, colon));
    auto value = trim(line.substr(colon + 1));

    if (key == "NOMBRE") {
      name = std::string(value);
    } else if (key == "COMENTARIO" || key == "TIPO_COSTES_ARISTAS" || key == "COSTE_TOTAL_REQ" ||
               key == "COSTE_TOTAL") {
      // informational
    } else if (key == "VERTICES") {
      vertices = parse_int(value, line_no, "VERTICES");
      if (*vertices < 1) throw ParseError(line_no, "VERTICES must be positive");
    } else if (key == "ARISTAS_REQ") {
      required_count = parse_int(value, line_no, "ARISTAS_REQ");
    } else if (key == "ARISTAS_NOREQ") {
      nonrequired_count = parse_int(value, line_no, "ARISTAS_NOREQ");
      if (*nonrequired_count != 0 && format != InstanceFormat::Egl)
        throw ParseError(line_no, fmt::format("{} files have no non-required edges",
                                              to_string(format)));
    } else if (key == "VEHICULOS") {
      vehicles = parse_int(value, line_no, "VEHICULOS");
    } else if (key == "CAPACIDAD") {
      capacity = parse_number(value, line_no, "CAPACIDAD");
      if (!(*capacity > 0.0)) throw ParseError(line_no, "CAPACIDAD must be positive");
    } else if (key == "LISTA_ARISTAS_REQ") {
      section = Section::Required;
    } else if (key == "LISTA_ARISTAS_NOREQ") {
      if (format != InstanceFormat::Egl)
        throw ParseError(line_no, fmt::format("{} files have no non-required edge list",
                                              to_string(format)));
      section = Section::NonRequired;
      nonrequired_header_line = line_no;
    } else if (key == "DEPOSITO") {
      depot = parse_int(value, line_no, "DEPOSITO");
      section = Section::Header;
    } else {
      throw ParseError(line_no, fmt::format("unknown header key '{}'", key));
    }
  }

  if (!vertices) throw ParseError(line_no, "missing VERTICES");
  if (!capacity) throw ParseError(line_no, "missing CAPACIDAD");
  if (!depot) throw ParseError(line_no, "missing DEPOSITO");
  if (!required_count) throw ParseError(line_no, "missing ARISTAS_REQ");
  if (*depot < 1 || *depot > *vertices)
    throw ParseError(line_no, fmt::format("DEPOSITO {} is outside 1..{}", *depot, *vertices));
  if (static_cast<int>(required.size()) != *required_count)
    throw ParseError(line_no, fmt::format("ARISTAS_REQ says {} but {} required edges listed",
                                          *required_count, required.size()));
  int expected_nonrequired = nonrequired_count.value_or(0);
  if (static_cast<int>(nonrequired.size()) != expected_nonrequired)
    throw ParseError(nonrequired_header_line ? nonrequired_header_line : line_no,
                     fmt::format("ARISTAS_NOREQ says {} but {} non-required edges listed",
                                 expected_nonrequired, nonrequired.size()));

  std::vector<Edge> edges;
  edges.reserve(required.size() + nonrequired.size());
  for (auto& r : required) edges.push_back(r.edge);
  for (auto& r : nonrequired) edges.push_back(r.edge);
  for (auto& r : required)
    if (r.edge.demand > *capacity)
      throw ParseError(r.line, fmt::format("demand {} exceeds capacity {}", r.edge.demand,
                                           *capacity));

  return Instance(std::move(name), *vertices, *depot - 1, std::move(edges), *capacity,
                  vehicles.value_or(0));
}

Instance load_instance(const std::filesystem::path& path, std::optional<InstanceFormat> format) {
  if (!format) format = infer_format(path.filename().string());
  if (!format)
    throw std::invalid_argument(
        fmt::format("cannot infer instance format from '{}'", path.string()));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_instance(buffer.str(), *format);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_instance(const Instance& instance, InstanceFormat format) {
  std::vector<EdgeId> required, nonrequired;
  for (EdgeId e = 0; e < instance.num_edges(); ++e) {
    if (format == InstanceFormat::Egl && !instance.edge(e).is_task())
      nonrequired.push_back(e);
    else
      required.push_back(e);
  }
  if (format != InstanceFormat::Egl) {
    for (const auto& e : instance.edges())
      if (!e.is_task())
        throw InstanceError(fmt::format("{} layout cannot hold non-required edge ({},{})",
                                        to_string(format), e.u + 1, e.v + 1));
  }
  double total_required = 0.0;
  for (auto e : instance.tasks()) total_required += instance.edge(e).serving_cost;

  std::string out;
  auto append = [&out](std::string s) { out += s; };
  append(fmt::format("NOMBRE : {}\n", instance.name()));
  append(fmt::format("VERTICES : {}\n", instance.num_vertices()));
  append(fmt::format("ARISTAS_REQ : {}\n", required.size()));
  append(fmt::format("ARISTAS_NOREQ : {}\n", nonrequired.size()));
  append(fmt::format("VEHICULOS : {}\n", instance.declared_vehicles()));
  append(fmt::format("CAPACIDAD : {}\n", instance.capacity()));
  append("TIPO_COSTES_ARISTAS : EXPLICITOS\n");
  append(fmt::format("COSTE_TOTAL_REQ : {}\n", total_required));
  append("LISTA_ARISTAS_REQ :\n");
  for (auto id : required) {
    const auto& e = instance.edge(id);
    append(fmt::format("({},{}) coste {} demanda {}\n", e.u + 1, e.v + 1, e.traversal_cost,
                       e.demand));
  }
  if (format == InstanceFormat::Egl) {
    append("LISTA_ARISTAS_NOREQ :\n");
    for (auto id : nonrequired) {
      const auto& e = instance.edge(id);
      append(fmt::format("({},{}) coste {}\n", e.u + 1, e.v + 1, e.traversal_cost));
    }
  }
  append(fmt::format("DEPOSITO : {}\n", instance.depot() + 1));
  return out;
}

int min_vehicles(const Instance& instance) {
  const double ratio = instance.total_demand() / instance.capacity();
  // integer demand totals can land a hair above an exact multiple after division
  auto m = static_cast<int>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  return std::max(m, 1);
}

}  // namespace ucarp
