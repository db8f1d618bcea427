#include "modelfile.hpp"

#include <cstdio>
#include <sstream>

namespace holomap::modelfile {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error("model file line " + std::to_string(line) + ": " + msg);
}

double num(int line, const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "bad number '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "bad number '" + s + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

Model parse_model(const std::string& text) {
  Model m;
  struct FrameLine {
    std::string name;
    int degree;
    std::string comps;
    int line;
  };
  std::vector<FrameLine> frame_lines;
  std::vector<std::pair<std::string, int>> chart_lines;
  std::vector<std::pair<std::string, int>> control_lines;

  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  bool immersion_params_seen = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "coords" && section != "frame" && section != "immersion" &&
          section != "analysis" && section != "controls" && section != "expected")
        fail(lineno, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) {
      // preamble: optional "name <id>"
      auto toks = split_ws(line);
      if (toks.size() == 2 && toks[0] == "name") {
        m.name = toks[1];
        continue;
      }
      fail(lineno, "content before the first section");
    }
    if (section == "coords") {
      for (const auto& c : split_ws(line)) m.frame.coords.push_back(c);
    } else if (section == "frame") {
      size_t colon = line.find(':');
      if (colon == std::string::npos) fail(lineno, "frame line needs 'name degree : components'");
      auto head = split_ws(line.substr(0, colon));
      if (head.size() != 2) fail(lineno, "frame line needs 'name degree : components'");
      frame_lines.push_back({head[0], static_cast<int>(num(lineno, head[1])),
                             trim(line.substr(colon + 1)), lineno});
    } else if (section == "immersion") {
      auto toks = split_ws(line);
      if (!immersion_params_seen) {
        if (toks.empty() || toks[0] != "params")
          fail(lineno, "first immersion line must be 'params <names>'");
        for (size_t i = 1; i < toks.size(); ++i) m.im.params.push_back(toks[i]);
        if (m.im.params.empty()) fail(lineno, "immersion needs at least one parameter");
        immersion_params_seen = true;
      } else {
        chart_lines.emplace_back(line, lineno);
      }
    } else if (section == "analysis") {
      auto toks = split_ws(line);
      const std::string& key = toks[0];
      auto nums = [&](size_t from) {
        std::vector<double> v;
        for (size_t i = from; i < toks.size(); ++i) v.push_back(num(lineno, toks[i]));
        return v;
      };
      if (key == "eps" && toks.size() == 2) m.analysis.eps = num(lineno, toks[1]);
      else if (key == "steps" && toks.size() == 2) m.analysis.steps = static_cast<int>(num(lineno, toks[1]));
      else if (key == "grid" && toks.size() == 2) m.analysis.grid = static_cast<int>(num(lineno, toks[1]));
      else if (key == "tol_rank" && toks.size() == 2) m.analysis.tol_rank = num(lineno, toks[1]);
      else if (key == "tol_cert" && toks.size() == 2) m.analysis.tol_cert = num(lineno, toks[1]);
      else if (key == "tol_deg" && toks.size() == 2) m.analysis.tol_deg = num(lineno, toks[1]);
      else if (key == "sigma0_origin") m.analysis.sigma0_origin = nums(1);
      else if (key == "sigma0_dir") m.analysis.sigma0_dirs.push_back(nums(1));
      else if (key == "sigma0_extent") m.analysis.sigma0_extents = nums(1);
      else if (key == "region_lo") m.analysis.region_lo = nums(1);
      else if (key == "region_hi") m.analysis.region_hi = nums(1);
      else if (key == "target_degree" && toks.size() == 2)
        m.analysis.target_degree = static_cast<int>(num(lineno, toks[1]));
      else fail(lineno, "unknown analysis entry '" + key + "'");
    } else if (section == "controls") {
      size_t eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "controls line needs 'gN = expr' or 'csv = path'");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key == "csv") {
        m.controls_csv = val;
        m.has_controls = true;
      } else {
        control_lines.emplace_back(val, lineno);
      }
    } else if (section == "expected") {
      auto toks = split_ws(line);
      if (toks.size() < 2) fail(lineno, "expected line needs 'key value [note...]'");
      ExpectedEntry e;
      e.key = toks[0];
      e.value = toks[1];
      for (size_t i = 2; i < toks.size(); ++i) {
        if (!e.note.empty()) e.note += ' ';
        e.note += toks[i];
      }
      m.expected.push_back(std::move(e));
    }
  }

  if (m.frame.coords.empty()) fail(lineno, "missing [coords]");
  const int n = static_cast<int>(m.frame.coords.size());
  if (static_cast<int>(frame_lines.size()) != n)
    throw Error("model file: need exactly " + std::to_string(n) + " frame fields, got " +
                std::to_string(frame_lines.size()));
  for (const auto& fl : frame_lines) {
    auto comps = split_commas(fl.comps);
    if (static_cast<int>(comps.size()) != n)
      fail(fl.line, "frame field '" + fl.name + "' needs " + std::to_string(n) + " components");
    sym::VectorField f;
    f.ambient_dim = n;
    for (const auto& c : comps) {
      try {
        f.comps.push_back(sym::parse(c, m.frame.coords));
      } catch (const Error& e) {
        fail(fl.line, e.what());
      }
    }
    m.frame.names.push_back(fl.name);
    m.frame.degrees.push_back(fl.degree);
    m.frame.fields.push_back(std::move(f));
  }
  m.frame = graded::GradedFrame(m.frame.coords, m.frame.names, m.frame.fields, m.frame.degrees);

  if (!immersion_params_seen) throw Error("model file: missing [immersion]");
  if (static_cast<int>(chart_lines.size()) != n)
    throw Error("model file: immersion needs " + std::to_string(n) + " chart expressions, got " +
                std::to_string(chart_lines.size()));
  for (const auto& [expr, line] : chart_lines) {
    try {
      m.im.chart.push_back(sym::parse(expr, m.im.params));
    } catch (const Error& e) {
      fail(line, e.what());
    }
  }
  for (const auto& [expr, line] : control_lines) {
    try {
      m.controls.push_back(sym::parse(expr, m.im.params));
      m.control_text.push_back(expr);
      m.has_controls = true;
    } catch (const Error& e) {
      fail(line, e.what());
    }
  }
  return m;
}

std::string to_text(const Model& m) {
  std::ostringstream out;
  if (!m.name.empty()) out << "name " << m.name << "\n\n";
  out << "[coords]\n";
  for (size_t i = 0; i < m.frame.coords.size(); ++i)
    out << (i ? " " : "") << m.frame.coords[i];
  out << "\n\n[frame]\n";
  for (int i = 0; i < m.frame.dim(); ++i) {
    out << m.frame.names[static_cast<size_t>(i)] << " " << m.frame.degrees[static_cast<size_t>(i)] << " : ";
    const auto& f = m.frame.fields[static_cast<size_t>(i)];
    for (size_t c = 0; c < f.comps.size(); ++c)
      out << (c ? ", " : "") << sym::to_string(f.comps[c]);
    out << "\n";
  }
  out << "\n[immersion]\nparams";
  for (const auto& p : m.im.params) out << " " << p;
  out << "\n";
  for (const auto& e : m.im.chart) out << sym::to_string(e) << "\n";
  out << "\n[analysis]\n";
  out << "eps " << fmt(m.analysis.eps) << "\n";
  out << "steps " << m.analysis.steps << "\n";
  out << "grid " << m.analysis.grid << "\n";
  out << "tol_rank " << fmt(m.analysis.tol_rank) << "\n";
  out << "tol_cert " << fmt(m.analysis.tol_cert) << "\n";
  out << "tol_deg " << fmt(m.analysis.tol_deg) << "\n";
  auto vec_line = [&](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    out << key;
    for (double x : v) out << " " << fmt(x);
    out << "\n";
  };
  vec_line("sigma0_origin", m.analysis.sigma0_origin);
  for (const auto& d : m.analysis.sigma0_dirs) vec_line("sigma0_dir", d);
  vec_line("sigma0_extent", m.analysis.sigma0_extents);
  vec_line("region_lo", m.analysis.region_lo);
  vec_line("region_hi", m.analysis.region_hi);
  if (m.analysis.target_degree >= 0) out << "target_degree " << m.analysis.target_degree << "\n";
  if (m.has_controls) {
    out << "\n[controls]\n";
    if (!m.controls_csv.empty()) {
      out << "csv = " << m.controls_csv << "\n";
    } else {
      for (size_t i = 0; i < m.control_text.size(); ++i)
        out << "g" << (i + 1) << " = " << m.control_text[i] << "\n";
    }
  }
  if (!m.expected.empty()) {
    out << "\n[expected]\n";
    for (const auto& e : m.expected) {
      out << e.key << " " << e.value;
      if (!e.note.empty()) out << " " << e.note;
      out << "\n";
    }
  }
  return out.str();
}

} // namespace holomap::modelfile
