// SPDX-License-Identifier: Apache-2.0
//
// Analytical vs Monte-Carlo leakage for two users with two streams each.
#pragma once

#include "mulink/channel.hpp"
#include "mulink/feedback.hpp"
#include "mulink/harness/config.hpp"
#include "mulink/harness/parallel.hpp"
#include "mulink/leakage.hpp"
#include "mulink/precoding.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace mulink {

struct LeakageCheckOptions {
  std::vector<QuantizerConfig> bits{{4, 6, false}, {5, 7, false}, {6, 8, false}};
  int num_tx = 4;
  int streams = 2;
  int num_channels = 100;
  int samples = 10'000;
  std::uint64_t seed = 1;
};

struct LeakageCheckRow {
  QuantizerConfig bits;
  double analytical = 0.0;  // mean trace(C)/L
  double empirical = 0.0;
  double empirical_stderr = 0.0;

  double relative_error() const { return std::abs(analytical - empirical) / empirical; }
};

// Channels are shared across bit budgets. Both directions of the pair count.
inline std::vector<LeakageCheckRow> leakage_check(const LeakageCheckOptions& opt, int threads) {
  const int l = opt.streams;
  std::vector<LeakageCheckRow> out;
  for (std::size_t b = 0; b < opt.bits.size(); ++b) {
    const QuantizerConfig q = opt.bits[b];
    q.validate();
    std::vector<double> an(static_cast<std::size_t>(opt.num_channels));
    std::vector<double> em(an.size());
    std::vector<double> var(an.size());
    parallel_for(an.size(), threads, [&](std::size_t c) {
      std::vector<FeedbackReport> reports;
      for (int u = 0; u < 2; ++u) {
        Rng rng(derive_seed(opt.seed, {tag(Stream::Leakage), c, static_cast<std::uint64_t>(u)}));
        CMatrix h(l, opt.num_tx);
        for (int j = 0; j < opt.num_tx; ++j)
          for (int i = 0; i < l; ++i) h(i, j) = complex_gaussian(rng, 1.0);
        reports.push_back(build_report(u, {h}, l, q));
      }
      const std::vector<int> alloc{l, l};
      const PrecodingSolution sol = design_precoding(reports, alloc);
      double a = 0.0;
      double e = 0.0;
      double v = 0.0;
      for (int u = 0; u < 2; ++u) {
        const CMatrix& f = sol.carriers[0].f[static_cast<std::size_t>(1 - u)];
        const GivensAngles& hat = reports[static_cast<std::size_t>(u)].carriers[0].angles;
        a += expected_outer(hat, l, q, f).trace().real() / l;
        Rng rng(derive_seed(opt.seed, {tag(Stream::Sampling), b, c, static_cast<std::uint64_t>(u)}));
        const EmpiricalOuter emp = empirical_outer(hat, l, q.epsilon(), q.delta(), f * f.adjoint(), opt.samples, rng);
        e += emp.mean.trace().real() / l;
        v += std::pow(emp.trace_stderr / l, 2);
      }
      an[c] = a / 2.0;
      em[c] = e / 2.0;
      var[c] = v / 4.0;
    });
    LeakageCheckRow row;
    row.bits = q;
    double v = 0.0;
    for (std::size_t c = 0; c < an.size(); ++c) {
      row.analytical += an[c];
      row.empirical += em[c];
      v += var[c];
    }
    const double n = static_cast<double>(an.size());
    row.analytical /= n;
    row.empirical /= n;
    row.empirical_stderr = std::sqrt(v) / n;
    out.push_back(row);
  }
  return out;
}

inline std::string leakage_to_csv(const std::vector<LeakageCheckRow>& rows, const std::string& provenance) {
  std::ostringstream os;
  if (!provenance.empty()) os << provenance << '\n';
  os << "b_psi_bits,b_phi_bits,analytical_trace_per_stream,empirical_trace_per_stream,empirical_stderr,relative_error\n";
  for (const auto& r : rows)
    os << r.bits.b_psi << ',' << r.bits.b_phi << ',' << fmt(r.analytical) << ',' << fmt(r.empirical) << ','
       << fmt(r.empirical_stderr) << ',' << fmt(r.relative_error()) << '\n';
  return os.str();
}

}  // namespace mulink
