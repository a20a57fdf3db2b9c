#include "report.hpp"

#include <fstream>

namespace fbh::cli {

Json to_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

Json to_json(const EstimateReport& r) {
  Json w = Json::array();
  for (const Witness& x : r.witnesses) w.push_back({{"t", x.t}, {"x", x.x}, {"y", x.y}, {"ratio", x.ratio}});
  return {{"lemma", r.lemma_id},     {"grid", r.grid},           {"two_sided", r.two_sided},
          {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}, {"witnesses", w}};
}

Json to_json(const UchiyamaReport& r) {
  return {{"family", r.family},
          {"j", r.j},
          {"space", to_json(r.space)},
          {"sigma", r.sigma},
          {"lower_constant", r.lower_constant},
          {"size_constant", r.size_constant},
          {"holder_constant", r.holder_constant},
          {"constant", r.constant},
          {"min_kernel", r.min_kernel},
          {"holder_pairs", r.holder_pairs},
          {"grid", r.grid}};
}

Json to_json(const AtomCheck& r) {
  return {{"valid", r.valid},
          {"global", r.global},
          {"support", r.support},
          {"size", r.size},
          {"cancellation", r.cancellation},
          {"shape", r.shape},
          {"sup_norm", r.sup_norm},
          {"bound", r.bound},
          {"constant", r.constant},
          {"cancellation_defect", r.cancellation_defect},
          {"support_excess", r.support_excess}};
}

Json to_json(const Atom& a) {
  return {{"kind", std::string(atom_kind_name(a.kind))},
          {"interval", to_json(a.interval)},
          {"j", a.j},
          {"height", a.profile.sup_norm()}};
}

Json to_json(const Decomposition& d) {
  Json atoms = Json::array();
  for (const Atom& a : d.atoms) atoms.push_back(to_json(a));
  return {{"family", std::string(family_name(d.family))},
          {"atoms", atoms},
          {"coefficients", d.coefficients},
          {"sum_abs_coeff", d.sum_abs_coeff},
          {"reconstruction_l1_error", d.reconstruction_l1_error},
          {"input_l1", d.input_l1},
          {"relative_error", d.relative_error()},
          {"pieces", Json::array({d.first_piece, d.last_piece})}};
}

Json to_json(const H1Report& r) {
  return {{"family", r.family},
          {"maximal_norm", r.maximal_norm},
          {"atomic_norm_upper", r.atomic_norm_upper},
          {"ratio", r.ratio},
          {"input_l1", r.input_l1},
          {"reconstruction_l1_error", r.reconstruction_l1_error},
          {"atoms", r.atoms},
          {"grid", r.grid}};
}

Json to_json(const AtomBatchReport& r) {
  Json entries = Json::array();
  for (const AtomBatchEntry& e : r.entries) {
    entries.push_back({{"scale", e.scale},
                       {"profile", std::string(profile_name(e.profile))},
                       {"interval", to_json(e.interval)},
                       {"maximal_norm", e.maximal_norm},
                       {"valid", e.valid}});
  }
  return {{"family", r.family}, {"seed", r.seed}, {"grid", r.grid}, {"max_norm", r.max_norm},
          {"slope", r.slope},   {"atoms", entries}};
}

Json duhamel_summary(const DuhamelResult& r) {
  return {{"t", r.t},
          {"closure_error", r.closure_error},
          {"lhs_sup", r.lhs.sup_norm()},
          {"r1_sup", r.r1.sup_norm()},
          {"r2_sup", r.r2.sup_norm()},
          {"r3_sup", r.r3.sup_norm()},
          {"nodes", r.lhs.size()}};
}

Json error_report(const std::string& operation, const std::string& message) {
  return {{"error", message}, {"operation", operation}};
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fbh::cli
