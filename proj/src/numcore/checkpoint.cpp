#include "opirl/numcore/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "opirl/numcore/errors.hpp"

namespace opirl {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ParseError(line, "not a number: '" + token + "'");
  return v;
}

void ParameterFile::add(const Mlp& net) {
  std::string sizes;
  for (Index s : net.layer_sizes()) sizes += (sizes.empty() ? "" : " ") + std::to_string(s);
  std::string acts;
  for (Activation a : net.activations()) acts += (acts.empty() ? "" : " ") + std::string(activation_name(a));
  meta[net.name() + ".layers"] = sizes;
  meta[net.name() + ".activations"] = acts;
  for (const auto& p : net.parameters()) tensors.emplace_back(p.name, p.value);
}

bool ParameterFile::has_tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return true;
  }
  return false;
}

const Matrix& ParameterFile::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw SchemaError("parameter file has no tensor '" + name + "'");
}

const std::string& ParameterFile::get_meta(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw SchemaError("parameter file has no metadata key '" + key + "'");
  return it->second;
}

Mlp ParameterFile::load_mlp(const std::string& name) const {
  std::vector<Index> sizes;
  {
    std::istringstream in(get_meta(name + ".layers"));
    Index s = 0;
    while (in >> s) sizes.push_back(s);
  }
  std::vector<Activation> acts;
  {
    std::istringstream in(get_meta(name + ".activations"));
    std::string a;
    while (in >> a) acts.push_back(parse_activation(a));
  }
  Rng rng(0);
  Mlp net(name, sizes, acts, rng);
  for (auto& p : net.parameters()) {
    const Matrix& m = tensor(p.name);
    if (m.rows() != p.value.rows() || m.cols() != p.value.cols()) {
      throw SchemaError("tensor '" + p.name + "' has shape " + shape_string(m) + ", expected " +
                        shape_string(p.value));
    }
    p.value = m;
  }
  return net;
}

void save_parameter_file(const std::filesystem::path& path, const ParameterFile& file) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "opirl-parameters\n";
  out << "format-version " << ParameterFile::kFormatVersion << "\n";
  for (const auto& [k, v] : file.meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("metadata key/value not representable: '" + k + "'");
    }
    out << "meta " << k << " " << v << "\n";
  }
  for (const auto& [name, m] : file.tensors) {
    out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Index i = 0; i < m.size(); ++i) {
      if (!std::isfinite(m.data()[i])) throw NumericalError("tensor '" + name + "' holds a non-finite value");
      out << (i ? " " : "") << format_double(m.data()[i]);
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ParameterFile load_parameter_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ParameterFile file;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  if (!next() || line != "opirl-parameters") throw ParseError(lineno, "missing 'opirl-parameters' header");
  if (!next()) throw ParseError(lineno, "missing format-version");
  {
    std::istringstream hs(line);
    std::string key;
    int version = 0;
    if (!(hs >> key >> version) || key != "format-version") throw ParseError(lineno, "malformed format-version");
    if (version != ParameterFile::kFormatVersion) {
      throw SchemaError("unsupported parameter file version " + std::to_string(version));
    }
  }
  bool ended = false;
  while (next()) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      file.meta[key] = value;
    } else if (kind == "tensor") {
      std::string name;
      Index rows = -1, cols = -1;
      if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0) throw ParseError(lineno, "malformed tensor header");
      if (!next()) throw ParseError(lineno, "tensor '" + name + "' has no data line");
      Matrix m(rows, cols);
      std::istringstream vs(line);
      std::string tok;
      Index i = 0;
      while (vs >> tok) {
        if (i >= m.size()) throw ParseError(lineno, "too many values for tensor '" + name + "'");
        m.data()[i++] = parse_double(tok, lineno);
      }
      if (i != m.size()) throw ParseError(lineno, "too few values for tensor '" + name + "'");
      file.tensors.emplace_back(std::move(name), std::move(m));
    } else {
      throw ParseError(lineno, "unexpected record '" + kind + "'");
    }
  }
  if (!ended) throw ParseError(lineno, "file truncated before 'end'");
  return file;
}

}  // namespace opirl
