// Network file format:
//
//   n = 3; model = "XX"; control = [0];
//   edges = [[0, 1, 1.0], [1, 2, 1.0]];
//   fields = [0, 0, 0]
//
// '#' starts a comment to end of line. fields is optional (defaults to
// zeros). Parsing is strict: unknown keys, duplicate keys, out-of-range
// sites, self-loops and duplicate edges are errors, reported with the line
// they occur on.
#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relaxctl/common.hpp"
#include "relaxctl/format.hpp"
#include "relaxctl/spin_network.hpp"

namespace relaxctl {

namespace netio {

enum class TokKind { Ident, Number, String, Equals, Semicolon, LBracket, RBracket, Comma, End };

struct Token {
  TokKind kind;
  std::string text;
  double number = 0.0;
  bool integral = false;
  int line = 0;
};

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> toks;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '=') {
      toks.push_back({TokKind::Equals, "=", 0, false, line});
      ++i;
      continue;
    }
    if (c == ';') {
      toks.push_back({TokKind::Semicolon, ";", 0, false, line});
      ++i;
      continue;
    }
    if (c == '[') {
      toks.push_back({TokKind::LBracket, "[", 0, false, line});
      ++i;
      continue;
    }
    if (c == ']') {
      toks.push_back({TokKind::RBracket, "]", 0, false, line});
      ++i;
      continue;
    }
    if (c == ',') {
      toks.push_back({TokKind::Comma, ",", 0, false, line});
      ++i;
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"') throw parse_error(line, "unterminated string");
      toks.push_back({TokKind::String, text.substr(i + 1, j - i - 1), 0, false, line});
      i = j + 1;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      toks.push_back({TokKind::Ident, text.substr(i, j - i), 0, false, line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      std::size_t j = i;
      if (text[j] == '-' || text[j] == '+') ++j;
      bool has_dot = false, has_exp = false, has_digit = false;
      while (j < text.size()) {
        const char d = text[j];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          has_digit = true;
          ++j;
        } else if (d == '.' && !has_dot && !has_exp) {
          has_dot = true;
          ++j;
        } else if ((d == 'e' || d == 'E') && has_digit && !has_exp) {
          has_exp = true;
          ++j;
          if (j < text.size() && (text[j] == '-' || text[j] == '+')) ++j;
        } else {
          break;
        }
      }
      if (!has_digit) throw parse_error(line, "malformed number");
      const std::string lit = text.substr(i, j - i);
      Token t{TokKind::Number, lit, std::stod(lit), !has_dot && !has_exp, line};
      toks.push_back(t);
      i = j;
      continue;
    }
    throw parse_error(line, std::string("unexpected character '") + c + "'");
  }
  toks.push_back({TokKind::End, "", 0, false, line});
  return toks;
}

struct Value {
  enum class Kind { Number, String, List } kind;
  double number = 0.0;
  bool integral = false;
  std::string str;
  std::vector<Value> list;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  // key -> value pairs in file order
  std::vector<std::pair<std::string, Value>> parse() {
    std::vector<std::pair<std::string, Value>> out;
    while (peek().kind != TokKind::End) {
      while (peek().kind == TokKind::Semicolon) advance();
      if (peek().kind == TokKind::End) break;
      const Token key = expect(TokKind::Ident, "key name");
      expect(TokKind::Equals, "'='");
      Value v = parse_value();
      out.emplace_back(key.text, std::move(v));
      if (peek().kind == TokKind::Semicolon) advance();
    }
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }

  Token expect(TokKind kind, const std::string& what) {
    if (peek().kind != kind)
      throw parse_error(peek().line, "expected " + what + ", found '" + peek().text + "'");
    return advance();
  }

  Value parse_value() {
    const Token& t = peek();
    if (t.kind == TokKind::Number) {
      advance();
      return Value{Value::Kind::Number, t.number, t.integral, "", {}, t.line};
    }
    if (t.kind == TokKind::String) {
      advance();
      return Value{Value::Kind::String, 0, false, t.text, {}, t.line};
    }
    if (t.kind == TokKind::LBracket) {
      const int line = t.line;
      advance();
      Value v{Value::Kind::List, 0, false, "", {}, line};
      if (peek().kind != TokKind::RBracket) {
        v.list.push_back(parse_value());
        while (peek().kind == TokKind::Comma) {
          advance();
          v.list.push_back(parse_value());
        }
      }
      expect(TokKind::RBracket, "']'");
      return v;
    }
    throw parse_error(t.line, "expected a value, found '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline int require_int(const Value& v, const std::string& what) {
  if (v.kind != Value::Kind::Number || !v.integral)
    throw parse_error(v.line, what + " must be an integer");
  return static_cast<int>(v.number);
}

inline double require_number(const Value& v, const std::string& what) {
  if (v.kind != Value::Kind::Number) throw parse_error(v.line, what + " must be a number");
  return v.number;
}

}  // namespace netio

inline SpinNetwork parse_network(const std::string& text, int max_sites = kDefaultMaxSites) {
  using netio::Value;
  auto pairs = netio::Parser(netio::tokenize(text)).parse();

  SpinNetwork net;
  bool have_n = false, have_model = false, have_control = false, have_edges = false,
       have_fields = false;
  int last_line = 1;
  for (const auto& [key, v] : pairs) {
    last_line = v.line;
    if (key == "n") {
      if (have_n) throw parse_error(v.line, "duplicate key 'n'");
      have_n = true;
      net.n_sites = netio::require_int(v, "n");
      if (net.n_sites < 1) throw parse_error(v.line, "n must be positive");
    } else if (key == "model") {
      if (have_model) throw parse_error(v.line, "duplicate key 'model'");
      have_model = true;
      if (v.kind != Value::Kind::String) throw parse_error(v.line, "model must be a string");
      if (v.str == "XX")
        net.model = CouplingModel::XX;
      else if (v.str == "HEISENBERG")
        net.model = CouplingModel::HEISENBERG;
      else
        throw parse_error(v.line, "model must be \"XX\" or \"HEISENBERG\"");
    } else if (key == "control") {
      if (have_control) throw parse_error(v.line, "duplicate key 'control'");
      have_control = true;
      if (v.kind != Value::Kind::List) throw parse_error(v.line, "control must be a list");
      for (const auto& e : v.list) net.control_set.push_back(netio::require_int(e, "control site"));
    } else if (key == "edges") {
      if (have_edges) throw parse_error(v.line, "duplicate key 'edges'");
      have_edges = true;
      if (v.kind != Value::Kind::List) throw parse_error(v.line, "edges must be a list");
      for (const auto& e : v.list) {
        if (e.kind != Value::Kind::List || e.list.size() != 3)
          throw parse_error(e.line, "each edge must be [site, site, coupling]");
        Edge edge{netio::require_int(e.list[0], "edge endpoint"),
                  netio::require_int(e.list[1], "edge endpoint"),
                  netio::require_number(e.list[2], "edge coupling")};
        net.edges.push_back(edge);
      }
    } else if (key == "fields") {
      if (have_fields) throw parse_error(v.line, "duplicate key 'fields'");
      have_fields = true;
      if (v.kind != Value::Kind::List) throw parse_error(v.line, "fields must be a list");
      for (const auto& e : v.list) net.local_fields.push_back(netio::require_number(e, "field"));
    } else {
      throw parse_error(v.line, "unknown key '" + key + "'");
    }
  }
  if (!have_n) throw parse_error(last_line, "missing required key 'n'");
  if (!have_model) throw parse_error(last_line, "missing required key 'model'");
  if (!have_control) throw parse_error(last_line, "missing required key 'control'");
  if (!have_edges) throw parse_error(last_line, "missing required key 'edges'");

  std::sort(net.control_set.begin(), net.control_set.end());
  try {
    validate(net, max_sites);
  } catch (const resource_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw parse_error(last_line, ex.what());
  }
  return net;
}

inline SpinNetwork load_network(const std::string& path, int max_sites = kDefaultMaxSites) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str(), max_sites);
}

inline std::string serialize_network(const SpinNetwork& net) {
  std::ostringstream out;
  out << "n = " << net.n_sites << "; model = \"" << to_string(net.model) << "\";\n";
  out << "control = [";
  for (std::size_t i = 0; i < net.control_set.size(); ++i)
    out << (i ? ", " : "") << net.control_set[i];
  out << "];\nedges = [";
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    out << (i ? ", " : "") << "[" << e.i << ", " << e.j << ", " << format_roundtrip(e.strength)
        << "]";
  }
  out << "];\n";
  if (!net.local_fields.empty()) {
    out << "fields = [";
    for (std::size_t i = 0; i < net.local_fields.size(); ++i)
      out << (i ? ", " : "") << format_roundtrip(net.local_fields[i]);
    out << "];\n";
  }
  return out.str();
}

}  // namespace relaxctl
