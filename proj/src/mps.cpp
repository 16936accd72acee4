#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "relumip/errors.hpp"
#include "relumip/mip_model.hpp"

namespace relumip {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // avoids "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

char sense_code(Sense s) {
  switch (s) {
    case Sense::LessEqual:
      return 'L';
    case Sense::GreaterEqual:
      return 'G';
    case Sense::Equal:
      return 'E';
  }
  return 'E';
}

}  // namespace

std::string export_mps(const MipModel& model) {
  std::ostringstream out;
  out << "NAME " << model.name() << "\n";
  out << "OBJSENSE\n    " << (model.objective().sense == ObjSense::Maximize ? "MAX" : "MIN") << "\n";
  out << "ROWS\n N OBJ\n";
  for (const Constraint& c : model.constraints()) out << " " << sense_code(c.sense) << " " << c.name << "\n";

  // Column-major view: objective entry first, then rows in insertion order.
  const auto& vars = model.variables();
  std::vector<std::vector<std::pair<std::string_view, double>>> columns(vars.size());
  for (const Term& t : model.objective().terms) columns[t.var].emplace_back("OBJ", t.coef);
  for (const Constraint& c : model.constraints())
    for (const Term& t : c.terms) columns[t.var].emplace_back(c.name, t.coef);

  out << "COLUMNS\n";
  bool in_marker = false;
  int marker = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const bool integer = vars[j].is_integer();
    if (integer && !in_marker) {
      out << "    MARKER" << marker++ << " 'MARKER' 'INTORG'\n";
      in_marker = true;
    } else if (!integer && in_marker) {
      out << "    MARKER" << marker++ << " 'MARKER' 'INTEND'\n";
      in_marker = false;
    }
    if (columns[j].empty()) {
      out << "    " << vars[j].name << " OBJ 0\n";
      continue;
    }
    for (const auto& [row, coef] : columns[j])
      out << "    " << vars[j].name << " " << row << " " << format_number(coef) << "\n";
  }
  if (in_marker) out << "    MARKER" << marker++ << " 'MARKER' 'INTEND'\n";

  out << "RHS\n";
  for (const Constraint& c : model.constraints())
    if (c.rhs != 0.0) out << "    RHS " << c.name << " " << format_number(c.rhs) << "\n";

  out << "BOUNDS\n";
  for (const Variable& v : vars) {
    const std::string& n = v.name;
    if (v.kind == VarKind::Binary && v.lo == 0.0 && v.hi == 1.0) {
      out << " BV BND " << n << "\n";
    } else if (v.is_integer()) {
      if (std::isinf(v.lo))
        out << " MI BND " << n << "\n";
      else
        out << " LI BND " << n << " " << format_number(v.lo) << "\n";
      if (std::isinf(v.hi))
        out << " PL BND " << n << "\n";
      else
        out << " UI BND " << n << " " << format_number(v.hi) << "\n";
    } else if (v.lo == v.hi) {
      out << " FX BND " << n << " " << format_number(v.lo) << "\n";
    } else if (std::isinf(v.lo) && std::isinf(v.hi)) {
      out << " FR BND " << n << "\n";
    } else {
      if (std::isinf(v.lo))
        out << " MI BND " << n << "\n";
      else if (v.lo != 0.0)
        out << " LO BND " << n << " " << format_number(v.lo) << "\n";
      if (!std::isinf(v.hi)) out << " UP BND " << n << " " << format_number(v.hi) << "\n";
    }
  }
  out << "ENDATA\n";
  return out.str();
}

namespace {

struct PendingVar {
  std::string name;
  bool integer = false;
  bool binary = false;
  double lo = 0.0;
  double hi = kInf;
};

struct PendingRow {
  std::string name;
  Sense sense;
  double rhs = 0.0;
  std::vector<Term> terms;
};

double parse_value(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("MPS line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
}

}  // namespace

MipModel parse_mps(const std::string& text) {
  enum class Section { None, Name, ObjSense, Rows, Columns, Rhs, Bounds, End };
  Section section = Section::None;
  std::string model_name = "relumip";
  ObjSense obj_sense = ObjSense::Minimize;
  std::string obj_row;
  std::vector<PendingRow> rows;
  std::unordered_map<std::string, int> row_index;
  std::vector<PendingVar> vars;
  std::unordered_map<std::string, int> var_index;
  std::vector<Term> objective;
  bool in_marker = false;

  auto fail = [](int line_no, const std::string& msg) -> ParseError {
    return ParseError("MPS line " + std::to_string(line_no) + ": " + msg);
  };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (line[0] != ' ' && line[0] != '\t') {
      const std::string& head = tok[0];
      if (head == "NAME") {
        section = Section::Name;
        if (tok.size() > 1) model_name = tok[1];
      } else if (head == "OBJSENSE") {
        section = Section::ObjSense;
        if (tok.size() > 1) obj_sense = tok[1] == "MAX" ? ObjSense::Maximize : ObjSense::Minimize;
      } else if (head == "ROWS") {
        section = Section::Rows;
      } else if (head == "COLUMNS") {
        section = Section::Columns;
      } else if (head == "RHS") {
        section = Section::Rhs;
      } else if (head == "BOUNDS") {
        section = Section::Bounds;
      } else if (head == "ENDATA") {
        section = Section::End;
        break;
      } else {
        throw fail(line_no, "unknown or unsupported section '" + head + "'");
      }
      continue;
    }

    switch (section) {
      case Section::ObjSense:
        if (tok[0] == "MAX" || tok[0] == "MAXIMIZE")
          obj_sense = ObjSense::Maximize;
        else if (tok[0] == "MIN" || tok[0] == "MINIMIZE")
          obj_sense = ObjSense::Minimize;
        else
          throw fail(line_no, "bad OBJSENSE '" + tok[0] + "'");
        break;
      case Section::Rows: {
        if (tok.size() != 2) throw fail(line_no, "ROWS entry needs type and name");
        const std::string& type = tok[0];
        if (type == "N") {
          if (obj_row.empty()) obj_row = tok[1];
          break;
        }
        Sense s;
        if (type == "L")
          s = Sense::LessEqual;
        else if (type == "G")
          s = Sense::GreaterEqual;
        else if (type == "E")
          s = Sense::Equal;
        else
          throw fail(line_no, "bad row type '" + type + "'");
        if (row_index.count(tok[1])) throw fail(line_no, "duplicate row '" + tok[1] + "'");
        row_index.emplace(tok[1], static_cast<int>(rows.size()));
        rows.push_back(PendingRow{tok[1], s, 0.0, {}});
        break;
      }
      case Section::Columns: {
        if (tok.size() == 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'")
            in_marker = true;
          else if (tok[2] == "'INTEND'")
            in_marker = false;
          else
            throw fail(line_no, "bad marker '" + tok[2] + "'");
          break;
        }
        if (tok.size() != 3 && tok.size() != 5) throw fail(line_no, "COLUMNS entry malformed");
        auto [it, inserted] = var_index.try_emplace(tok[0], static_cast<int>(vars.size()));
        if (inserted) vars.push_back(PendingVar{tok[0], in_marker, false, 0.0, kInf});
        const VarId id = it->second;
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = parse_value(tok[k + 1], line_no);
          if (tok[k] == obj_row) {
            objective.push_back({id, v});
          } else {
            auto r = row_index.find(tok[k]);
            if (r == row_index.end()) throw fail(line_no, "unknown row '" + tok[k] + "'");
            rows[r->second].terms.push_back({id, v});
          }
        }
        break;
      }
      case Section::Rhs: {
        if (tok.size() != 3 && tok.size() != 5) throw fail(line_no, "RHS entry malformed");
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = parse_value(tok[k + 1], line_no);
          if (tok[k] == obj_row) continue;
          auto r = row_index.find(tok[k]);
          if (r == row_index.end()) throw fail(line_no, "unknown row '" + tok[k] + "'");
          rows[r->second].rhs = v;
        }
        break;
      }
      case Section::Bounds: {
        if (tok.size() < 3) throw fail(line_no, "BOUNDS entry malformed");
        const std::string& type = tok[0];
        auto vit = var_index.find(tok[2]);
        if (vit == var_index.end()) throw fail(line_no, "unknown column '" + tok[2] + "'");
        PendingVar& pv = vars[vit->second];
        const bool needs_value = type == "UP" || type == "LO" || type == "FX" || type == "LI" ||
                                 type == "UI";
        if (needs_value && tok.size() != 4) throw fail(line_no, "bound '" + type + "' needs a value");
        const double v = needs_value ? parse_value(tok[3], line_no) : 0.0;
        if (type == "UP" || type == "UI") {
          pv.hi = v;
          if (type == "UI") pv.integer = true;
        } else if (type == "LO" || type == "LI") {
          pv.lo = v;
          if (type == "LI") pv.integer = true;
        } else if (type == "FX") {
          pv.lo = pv.hi = v;
        } else if (type == "FR") {
          pv.lo = -kInf;
          pv.hi = kInf;
        } else if (type == "MI") {
          pv.lo = -kInf;
        } else if (type == "PL") {
          pv.hi = kInf;
        } else if (type == "BV") {
          pv.integer = true;
          pv.binary = true;
          pv.lo = 0.0;
          pv.hi = 1.0;
        } else {
          throw fail(line_no, "unsupported bound type '" + type + "'");
        }
        break;
      }
      default:
        throw fail(line_no, "data line outside of a section");
    }
  }
  if (section != Section::End) throw ParseError("MPS: missing ENDATA");

  MipModel model(model_name);
  try {
    for (const PendingVar& pv : vars) {
      const VarKind kind =
          pv.binary ? VarKind::Binary : (pv.integer ? VarKind::Integer : VarKind::Continuous);
      model.add_variable(pv.name, kind, pv.lo, pv.hi);
    }
    for (PendingRow& r : rows) model.add_constraint(r.name, std::move(r.terms), r.sense, r.rhs);
  } catch (const ModelError& e) {
    throw ParseError(std::string("MPS: ") + e.what());
  }
  model.set_objective(obj_sense, std::move(objective));
  return model;
}

}  // namespace relumip
