#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "nearstable/errors.hpp"
#include "nearstable/harness.hpp"

namespace nearstable {

std::string format_number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::write(std::ostream& os) const {
  for (const auto& c : comments) {
    os << "# " << c << '\n';
  }
  for (std::size_t k = 0; k < header.size(); ++k) {
    os << (k ? "," : "") << header[k];
  }
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      os << (k ? "," : "") << row[k];
    }
    os << '\n';
  }
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write '" + path + "'");
  }
  write(out);
}

CsvTable to_csv(const StableCltResult& r) {
  CsvTable t;
  t.header = {"N", "ks_stat", "n_samples"};
  for (const auto& row : r.rows) {
    t.rows.push_back({std::to_string(row.n), format_number(row.ks_stat), std::to_string(row.n_samples)});
  }
  return t;
}

CsvTable to_csv(const PoissonResult& r) {
  CsvTable t;
  t.header = {"replica", "n_events", "ks_p"};
  for (const auto& row : r.rows) {
    t.rows.push_back({std::to_string(row.replica), std::to_string(row.n_events), format_number(row.ks_p)});
  }
  if (r.excluded > 0) {
    t.comments.push_back("replicas with ks_p = nan had no events and are excluded from the pass fraction");
  }
  return t;
}

CsvTable to_csv(const ChaosResult& r) {
  CsvTable t;
  t.header = {"N", "t", "w1", "n_pooled"};
  for (const auto& row : r.rows) {
    t.rows.push_back({std::to_string(row.n), format_number(row.t), format_number(row.w1),
                      std::to_string(row.n_pooled)});
  }
  return t;
}

CsvTable to_csv(const std::vector<CommonNoiseRow>& rows) {
  CsvTable t;
  t.header = {"N", "var_finite", "var_limit_ref"};
  for (const auto& row : rows) {
    t.rows.push_back({std::to_string(row.n), format_number(row.var_finite), format_number(row.var_limit_ref)});
  }
  return t;
}

CsvTable to_csv(const SelfcheckResult& r) {
  CsvTable t;
  t.header = {"knob", "value_a", "value_b", "w1", "mc_se"};
  for (const auto& row : r.rows) {
    t.rows.push_back({row.knob, format_number(row.value_a), format_number(row.value_b),
                      format_number(row.w1), format_number(row.mc_se)});
  }
  return t;
}

}  // namespace nearstable
