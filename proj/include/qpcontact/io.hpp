#pragma once

#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "qpcontact/compensation.hpp"
#include "qpcontact/error.hpp"
#include "qpcontact/model.hpp"
#include "qpcontact/model_io.hpp"
#include "qpcontact/montecarlo.hpp"
#include "qpcontact/pmf.hpp"

namespace qpcontact {

inline void write_pmf_csv(std::ostream& out, const ContactPmf& pmf) {
  out.precision(17);
  out << "i,j,n,p,err_bound,method\n";
  const Rect& r = pmf.rect();
  for (int i = r.i0; i <= r.i1; ++i)
    for (int j = r.j0; j <= r.j1; ++j)
      for (int n = 0; n <= pmf.n_max(); ++n)
        out << i << ',' << j << ',' << n << ',' << pmf.at(i, j, n) << ',' << pmf.error(i, j, n) << ','
            << to_string(pmf.method()) << '\n';
}

// Cumulative form of the same table: P(Z <= n) with summed error bounds.
inline void write_cdf_csv(std::ostream& out, const ContactPmf& pmf) {
  out.precision(17);
  out << "i,j,n,cdf,err_bound,method\n";
  const Rect& r = pmf.rect();
  for (int i = r.i0; i <= r.i1; ++i)
    for (int j = r.j0; j <= r.j1; ++j) {
      double c = 0.0;
      double e = 0.0;
      for (int n = 0; n <= pmf.n_max(); ++n) {
        c += pmf.at(i, j, n);
        e += pmf.error(i, j, n);
        out << i << ',' << j << ',' << n << ',' << c << ',' << e << ',' << to_string(pmf.method()) << '\n';
      }
    }
}

inline void write_sequence_csv(std::ostream& out, const CompensationSeries& s) {
  out.precision(17);
  out << "m,alpha,beta\n";
  for (int m = s.min_index(); m <= s.max_index(); ++m) out << m << ',' << s.alpha(m) << ',' << s.beta(m) << '\n';
}

inline void write_simulation_csv(std::ostream& out, const SimEstimate& est) {
  out.precision(17);
  out << "n,p_hat,stderr\n";
  for (std::size_t n = 0; n < est.pmf.size(); ++n)
    out << n << ',' << est.pmf[n].value << ',' << est.pmf[n].stderr_ << '\n';
}

inline nlohmann::json simulation_manifest(const QuadrantModel& model, const SimConfig& cfg, const SimEstimate& est,
                                          int i, int j) {
  return {{"model_hash", hex(model_hash(model))},
          {"seed", cfg.seed},
          {"paths", cfg.paths},
          {"escape_epsilon", cfg.escape_epsilon},
          {"max_steps", cfg.max_steps},
          {"start", {i, j}},
          {"truncated", est.truncated_paths}};
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  return out;
}

}  // namespace qpcontact
