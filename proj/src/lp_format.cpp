#include <cmath>
#include <sstream>

#include "relumip/mip_model.hpp"

namespace relumip {

namespace {

void write_terms(std::ostream& out, const MipModel& model, const std::vector<Term>& terms) {
  if (terms.empty()) {
    if (model.num_variables() > 0) out << " 0 " << model.variables().front().name;
    return;
  }
  for (const Term& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << format_number(std::abs(t.coef)) << " "
        << model.variables()[t.var].name;
  }
}

}  // namespace

std::string export_lp(const MipModel& model) {
  std::ostringstream out;
  out << "\\ " << model.name() << "\n";
  out << (model.objective().sense == ObjSense::Maximize ? "Maximize" : "Minimize") << "\n";
  out << " obj:";
  write_terms(out, model, model.objective().terms);
  out << "\nSubject To\n";
  for (const Constraint& c : model.constraints()) {
    out << " " << c.name << ":";
    write_terms(out, model, c.terms);
    out << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::GreaterEqual ? " >= " : " = ")
        << format_number(c.rhs) << "\n";
  }

  out << "Bounds\n";
  for (const Variable& v : model.variables()) {
    if (v.kind == VarKind::Binary && v.lo == 0.0 && v.hi == 1.0) continue;
    if (v.lo == v.hi) {
      out << " " << v.name << " = " << format_number(v.lo) << "\n";
    } else if (std::isinf(v.lo) && std::isinf(v.hi)) {
      out << " " << v.name << " free\n";
    } else if (std::isinf(v.hi)) {
      if (v.lo != 0.0) out << " " << v.name << " >= " << format_number(v.lo) << "\n";
    } else {
      out << " " << (std::isinf(v.lo) ? std::string("-inf") : format_number(v.lo)) << " <= " << v.name
          << " <= " << format_number(v.hi) << "\n";
    }
  }

  bool header = false;
  for (const Variable& v : model.variables()) {
    if (v.kind != VarKind::Binary) continue;
    if (!header) out << "Binaries\n";
    header = true;
    out << " " << v.name << "\n";
  }
  header = false;
  for (const Variable& v : model.variables()) {
    if (v.kind != VarKind::Integer) continue;
    if (!header) out << "Generals\n";
    header = true;
    out << " " << v.name << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace relumip
