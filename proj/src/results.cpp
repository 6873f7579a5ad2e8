#include "panelfe/results.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "panelfe/error.hpp"

namespace panelfe {

const double* SavedResults::scalar(const std::string& name) const {
  for (const auto& [k, v] : scalars) {
    if (k == name) return &v;
  }
  return nullptr;
}

const std::string* SavedResults::macro(const std::string& name) const {
  for (const auto& [k, v] : macros) {
    if (k == name) return &v;
  }
  return nullptr;
}

const NamedMatrix* SavedResults::matrix(const std::string& name) const {
  for (const auto& m : matrices) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

double read_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedInput, "bad number '" + s + "' in saved results");
  }
  return v;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace

std::string write_saved_results(const SavedResults& results) {
  std::ostringstream os;
  for (const auto& [k, v] : results.scalars) os << "scalar " << k << ' ' << format_double(v) << '\n';
  for (const auto& [k, v] : results.macros) os << "macro " << k << ' ' << v << '\n';
  for (const auto& m : results.matrices) {
    os << "matrix " << m.name << ' ' << m.values.rows() << ' ' << m.values.cols() << '\n';
    os << "rownames";
    for (const auto& r : m.rownames) os << ' ' << r;
    os << "\ncolnames";
    for (const auto& c : m.colnames) os << ' ' << c;
    os << '\n';
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) os << (c ? " " : "") << format_double(m.values(r, c));
      os << '\n';
    }
  }
  return os.str();
}

SavedResults parse_saved_results(const std::string& text) {
  SavedResults out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("scalar ", 0) == 0) {
      const auto w = words(line);
      if (w.size() != 3) throw Error(ErrorCode::MalformedInput, "bad scalar line: " + line);
      out.scalars.emplace_back(w[1], read_double(w[2]));
    } else if (line.rfind("macro ", 0) == 0) {
      const auto rest = line.substr(6);
      const auto sp = rest.find(' ');
      if (sp == std::string::npos) {
        out.macros.emplace_back(rest, "");
      } else {
        out.macros.emplace_back(rest.substr(0, sp), rest.substr(sp + 1));
      }
    } else if (line.rfind("matrix ", 0) == 0) {
      const auto w = words(line);
      if (w.size() != 4) throw Error(ErrorCode::MalformedInput, "bad matrix line: " + line);
      NamedMatrix m;
      m.name = w[1];
      const int rows = std::stoi(w[2]);
      const int cols = std::stoi(w[3]);
      std::string names;
      if (!std::getline(in, names)) throw Error(ErrorCode::MalformedInput, "truncated matrix " + m.name);
      auto rn = words(names);
      if (rn.empty() || rn[0] != "rownames") throw Error(ErrorCode::MalformedInput, "missing rownames");
      m.rownames.assign(rn.begin() + 1, rn.end());
      if (!std::getline(in, names)) throw Error(ErrorCode::MalformedInput, "truncated matrix " + m.name);
      auto cn = words(names);
      if (cn.empty() || cn[0] != "colnames") throw Error(ErrorCode::MalformedInput, "missing colnames");
      m.colnames.assign(cn.begin() + 1, cn.end());
      m.values.resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        std::string row;
        if (!std::getline(in, row)) throw Error(ErrorCode::MalformedInput, "truncated matrix " + m.name);
        const auto v = words(row);
        if (static_cast<int>(v.size()) != cols) throw Error(ErrorCode::MalformedInput, "ragged matrix " + m.name);
        for (int c = 0; c < cols; ++c) m.values(r, c) = read_double(v[static_cast<std::size_t>(c)]);
      }
      out.matrices.push_back(std::move(m));
    } else {
      throw Error(ErrorCode::MalformedInput, "unexpected line: " + line);
    }
  }
  return out;
}

}  // namespace panelfe
