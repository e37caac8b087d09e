// Copyright 2026 The qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qoc/system_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "lexer.hpp"

namespace qoc {

namespace {

constexpr double kHermitianTol = 1e-12;

Matrix single_site(PauliOp op) {
  Matrix m(2, 2);
  switch (op) {
    case PauliOp::I:
      m << 1, 0, 0, 1;
      break;
    case PauliOp::X:
      m << 0, 1, 1, 0;
      break;
    case PauliOp::Y:
      m << 0, -kI, kI, 0;
      break;
    case PauliOp::Z:
      m << 1, 0, 0, -1;
      break;
    case PauliOp::SP:
      m << 0, 0, 1, 0;
      break;
    case PauliOp::SM:
      m << 0, 1, 0, 0;
      break;
  }
  return m;
}

std::optional<OperatorFactor> split_token(const std::string& tok) {
  std::size_t k = 0;
  while (k < tok.size() && std::isalpha(static_cast<unsigned char>(tok[k]))) ++k;
  if (k == 0 || k == tok.size()) return std::nullopt;
  for (std::size_t j = k; j < tok.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(tok[j]))) return std::nullopt;
  }
  const auto head = tok.substr(0, k);
  PauliOp op;
  if (head == "X") {
    op = PauliOp::X;
  } else if (head == "Y") {
    op = PauliOp::Y;
  } else if (head == "Z") {
    op = PauliOp::Z;
  } else if (head == "I") {
    op = PauliOp::I;
  } else if (head == "SP") {
    op = PauliOp::SP;
  } else if (head == "SM") {
    op = PauliOp::SM;
  } else {
    return std::nullopt;
  }
  if (tok.size() - k > 6) return std::nullopt;
  return OperatorFactor{op, std::stoi(tok.substr(k))};
}

OperatorTerm parse_term(detail::Lexer& lx) {
  OperatorTerm term;
  while (lx.peek().is('-') || lx.peek().is('+')) {
    if (lx.next().is('-')) term.coef = -term.coef;
  }
  do {
    const auto& tok = lx.peek();
    if (tok.kind == detail::TokenKind::Number) {
      term.coef *= lx.next().number;
    } else if (tok.kind == detail::TokenKind::Identifier) {
      auto id = lx.next();
      auto factor = split_token(id.text);
      if (!factor) throw lx.error_at(id, "unknown operator token '" + id.text + "'");
      term.factors.push_back(*factor);
    } else {
      throw lx.error("expected operator or coefficient but found " + detail::describe(tok));
    }
  } while (lx.accept('*'));
  return term;
}

template <typename T>
T get_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + std::string(key) + "' has the wrong type");
  }
}

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
}

OperatorExpr parse_op_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto text = get_field<std::string>(obj, key, where);
  try {
    return OperatorExpr::parse(text);
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

const nlohmann::json& list_field(const nlohmann::json& doc, const char* key) {
  static const nlohmann::json empty = nlohmann::json::array();
  if (!doc.contains(key)) return empty;
  const auto& v = doc.at(key);
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be a list");
  return v;
}

}  // namespace

OperatorExpr OperatorExpr::parse(std::string_view text) {
  detail::Lexer lx(text);
  OperatorExpr out;
  out.text_ = std::string(text);
  if (lx.at_end()) throw ParseError("empty operator expression");

  double sign = 1.0;
  if (lx.accept('-')) {
    sign = -1.0;
  } else {
    lx.accept('+');
  }
  for (;;) {
    auto term = parse_term(lx);
    term.coef *= sign;
    out.terms_.push_back(std::move(term));
    if (lx.accept('+')) {
      sign = 1.0;
    } else if (lx.accept('-')) {
      sign = -1.0;
    } else {
      break;
    }
  }
  if (!lx.at_end()) throw lx.error("unexpected " + detail::describe(lx.peek()) + " in operator expression");
  return out;
}

std::vector<int> OperatorExpr::qubits() const {
  std::set<int> qs;
  for (const auto& t : terms_) {
    for (const auto& f : t.factors) qs.insert(f.qubit);
  }
  return {qs.begin(), qs.end()};
}

int OperatorExpr::max_qubit() const {
  auto qs = qubits();
  return qs.empty() ? -1 : qs.back();
}

Matrix build_operator(const OperatorExpr& expr, int n_qubits) {
  if (n_qubits <= 0) throw ValidationError("operator needs at least one qubit");
  if (expr.max_qubit() >= n_qubits) {
    throw ValidationError("operator '" + expr.text() + "' references qubit " + std::to_string(expr.max_qubit()) +
                          " of a " + std::to_string(n_qubits) + "-qubit model");
  }
  const int dim = 1 << n_qubits;
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& term : expr.terms()) {
    std::vector<Matrix> site(n_qubits, Matrix::Identity(2, 2));
    for (const auto& f : term.factors) site[f.qubit] = site[f.qubit] * single_site(f.op);
    // Highest qubit is the leftmost Kronecker factor.
    Matrix m = Matrix::Ones(1, 1);
    for (int q = n_qubits - 1; q >= 0; --q) {
      Matrix next(m.rows() * 2, m.cols() * 2);
      for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = m(i, j) * site[q];
      }
      m = std::move(next);
    }
    total += term.coef * m;
  }
  return total;
}

Matrix build_operator(std::string_view expr, int n_qubits) { return build_operator(OperatorExpr::parse(expr), n_qubits); }

std::vector<std::string> SystemModel::channels() const {
  std::vector<std::string> out;
  out.reserve(control.size());
  for (const auto& c : control) out.push_back(c.channel);
  return out;
}

std::optional<std::size_t> SystemModel::channel_index(std::string_view channel) const {
  for (std::size_t i = 0; i < control.size(); ++i) {
    if (control[i].channel == channel) return i;
  }
  return std::nullopt;
}

double SystemModel::qubit_frequency(int qubit) const {
  if (qubit >= 0 && static_cast<std::size_t>(qubit) < qubit_freq.size()) return qubit_freq[qubit];
  return kDefaultQubitFrequency;
}

void SystemModel::validate() const {
  if (n_qubits <= 0) throw ValidationError("n_qubits must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  auto check_range = [&](const OperatorExpr& op) {
    if (op.max_qubit() >= n_qubits) {
      throw ValidationError("operator '" + op.text() + "' references a qubit outside the " + std::to_string(n_qubits) +
                            "-qubit model");
    }
  };
  for (const auto& d : drift) check_range(d.op);
  std::set<std::string> seen;
  for (const auto& c : control) {
    if (c.channel.empty()) throw ValidationError("empty channel id");
    if (!seen.insert(c.channel).second) throw ValidationError("duplicate channel id '" + c.channel + "'");
    check_range(c.op);
    if (c.quadrature) check_range(*c.quadrature);
  }
  for (const auto& c : collapse) {
    if (!(c.rate >= 0.0)) throw ValidationError("collapse rates must be non-negative");
    check_range(c.op);
  }
  for (const auto& [ch, _] : lo_delta) {
    if (!seen.count(ch)) throw ValidationError("lo_delta refers to unknown channel '" + ch + "'");
  }
}

SystemModel parse_model(const nlohmann::json& doc) {
  check_keys(doc, {"n_qubits", "dt", "drift", "control", "collapse", "lo_delta", "qubit_freq"}, "model");
  SystemModel m;
  m.n_qubits = get_field<int>(doc, "n_qubits", "model");
  m.dt = get_field<double>(doc, "dt", "model");

  const auto& drift = list_field(doc, "drift");
  for (std::size_t i = 0; i < drift.size(); ++i) {
    auto where = "drift[" + std::to_string(i) + "]";
    check_keys(drift[i], {"coef", "op"}, where);
    m.drift.push_back({get_field<double>(drift[i], "coef", where), parse_op_field(drift[i], "op", where)});
  }
  const auto& control = list_field(doc, "control");
  for (std::size_t i = 0; i < control.size(); ++i) {
    auto where = "control[" + std::to_string(i) + "]";
    check_keys(control[i], {"channel", "op", "quadrature"}, where);
    ControlChannel c{get_field<std::string>(control[i], "channel", where), parse_op_field(control[i], "op", where),
                     std::nullopt};
    if (control[i].contains("quadrature")) c.quadrature = parse_op_field(control[i], "quadrature", where);
    m.control.push_back(std::move(c));
  }
  const auto& collapse = list_field(doc, "collapse");
  for (std::size_t i = 0; i < collapse.size(); ++i) {
    auto where = "collapse[" + std::to_string(i) + "]";
    check_keys(collapse[i], {"rate", "op"}, where);
    m.collapse.push_back({get_field<double>(collapse[i], "rate", where), parse_op_field(collapse[i], "op", where)});
  }
  if (doc.contains("lo_delta")) {
    const auto& lo = doc.at("lo_delta");
    if (!lo.is_object()) throw ParseError("'lo_delta' must be a map of channel to delta");
    for (const auto& [ch, v] : lo.items()) {
      if (!v.is_number()) throw ParseError("lo_delta['" + ch + "'] must be a number");
      m.lo_delta[ch] = v.get<double>();
    }
  }
  if (doc.contains("qubit_freq")) {
    try {
      m.qubit_freq = doc.at("qubit_freq").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError("'qubit_freq' must be a list of numbers");
    }
  }

  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return m;
}

SystemModel parse_model_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model document is not valid JSON: ") + e.what());
  }
  return parse_model(doc);
}

nlohmann::json model_to_json(const SystemModel& m) {
  nlohmann::json doc;
  doc["n_qubits"] = m.n_qubits;
  doc["dt"] = m.dt;
  doc["drift"] = nlohmann::json::array();
  for (const auto& d : m.drift) doc["drift"].push_back({{"coef", d.coef}, {"op", d.op.text()}});
  doc["control"] = nlohmann::json::array();
  for (const auto& c : m.control) {
    nlohmann::json entry = {{"channel", c.channel}, {"op", c.op.text()}};
    if (c.quadrature) entry["quadrature"] = c.quadrature->text();
    doc["control"].push_back(std::move(entry));
  }
  doc["collapse"] = nlohmann::json::array();
  for (const auto& c : m.collapse) doc["collapse"].push_back({{"rate", c.rate}, {"op", c.op.text()}});
  if (!m.lo_delta.empty()) doc["lo_delta"] = m.lo_delta;
  if (!m.qubit_freq.empty()) doc["qubit_freq"] = m.qubit_freq;
  return doc;
}

SystemModel apply_detuning(const SystemModel& model, double delta) {
  SystemModel out = model;
  if (delta == 0.0) return out;
  for (int q = 0; q < model.n_qubits; ++q) {
    out.drift.push_back({-delta * model.qubit_frequency(q) / 2.0, OperatorExpr::parse("Z" + std::to_string(q))});
  }
  return out;
}

std::optional<std::size_t> ModelOperators::channel_index(std::string_view channel) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == channel) return i;
  }
  return std::nullopt;
}

ModelOperators materialize(const SystemModel& model) {
  model.validate();
  ModelOperators ops;
  ops.n_qubits = model.n_qubits;
  ops.dim = model.dim();
  ops.dt = model.dt;
  ops.drift = Matrix::Zero(ops.dim, ops.dim);
  for (const auto& d : model.drift) ops.drift += d.coef * build_operator(d.op, model.n_qubits);

  // A qubit's LO detuning comes from the first channel that drives it.
  std::set<int> detuned;
  for (const auto& c : model.control) {
    auto it = model.lo_delta.find(c.channel);
    if (it == model.lo_delta.end() || it->second == 0.0) continue;
    for (int q : c.op.qubits()) {
      if (!detuned.insert(q).second) continue;
      ops.drift += (-it->second * model.qubit_frequency(q) / 2.0) * build_operator("Z" + std::to_string(q), model.n_qubits);
    }
  }
  if (hermiticity_defect(ops.drift) > kHermitianTol) throw ValidationError("drift Hamiltonian is not Hermitian");

  for (const auto& c : model.control) {
    ops.channels.push_back(c.channel);
    Matrix op = build_operator(c.op, model.n_qubits);
    if (hermiticity_defect(op) > kHermitianTol) {
      throw ValidationError("control operator '" + c.op.text() + "' on channel '" + c.channel + "' is not Hermitian");
    }
    ops.control.push_back(std::move(op));
    if (c.quadrature) {
      Matrix q = build_operator(*c.quadrature, model.n_qubits);
      if (hermiticity_defect(q) > kHermitianTol) {
        throw ValidationError("quadrature operator on channel '" + c.channel + "' is not Hermitian");
      }
      ops.quadrature.emplace_back(std::move(q));
    } else {
      ops.quadrature.emplace_back(std::nullopt);
    }
  }
  for (const auto& c : model.collapse) {
    if (c.rate == 0.0) continue;
    ops.rates.push_back(c.rate);
    ops.collapse.push_back(build_operator(c.op, model.n_qubits));
  }
  return ops;
}

}  // namespace qoc
