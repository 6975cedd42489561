// SPDX-License-Identifier: Apache-2.0
//
// Givens-angle parameterization of beamforming matrices, the uniform angle
// codebooks, and per-user feedback reports.
//
// Convention. For column l (0-based) of an N x L matrix with orthonormal
// columns the decomposition removes N-l phases with D_l* and then zeroes the
// entries below row l with plane rotations G(l,n)^T, n = l+1..N-1, where
//
//   G(l,n): (l,l) = cos psi, (l,n) = sin psi, (n,l) = -sin psi, (n,n) = cos psi.
//
// so that
//
//   V = prod_l [ D_l prod_n G(l,n) ] I~,   D_l = diag(1_l, e^{j phi_l}, ..., e^{j phi_{N-1}}).
//
// The representation is exact (no residual column phase). Angles of column l
// only depend on columns 0..l, so the first L columns of a report built for
// more streams are reconstructed by the leading angle sets.
#pragma once

#include "mulink/types.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mulink {

struct GivensAngles {
  int num_tx = 0;
  int streams = 0;
  std::vector<std::vector<double>> phi;  // phi[l][i]: phase of row l+i, N-l entries
  std::vector<std::vector<double>> psi;  // psi[l][k]: rotation (l, l+1+k), N-l-1 entries

  GivensAngles() = default;
  GivensAngles(int n, int l) : num_tx(n), streams(l) {
    if (n <= 0 || l <= 0 || l > n) throw std::invalid_argument("need 1 <= L <= N_tx");
    for (int c = 0; c < l; ++c) {
      phi.emplace_back(static_cast<std::size_t>(n - c), 0.0);
      psi.emplace_back(static_cast<std::size_t>(n - c - 1), 0.0);
    }
  }

  void validate() const {
    if (num_tx <= 0 || streams <= 0 || streams > num_tx) throw std::invalid_argument("need 1 <= L <= N_tx");
    if (static_cast<int>(phi.size()) != streams || static_cast<int>(psi.size()) != streams)
      throw std::invalid_argument("angle set count does not match L");
    for (int c = 0; c < streams; ++c) {
      if (static_cast<int>(phi[static_cast<std::size_t>(c)].size()) != num_tx - c ||
          static_cast<int>(psi[static_cast<std::size_t>(c)].size()) != num_tx - c - 1)
        throw std::invalid_argument("angle count does not match (N_tx, column)");
    }
  }

  // Leading L columns.
  GivensAngles truncated(int l) const {
    if (l <= 0 || l > streams) throw std::invalid_argument("cannot truncate to that many columns");
    GivensAngles out = *this;
    out.streams = l;
    out.phi.resize(static_cast<std::size_t>(l));
    out.psi.resize(static_cast<std::size_t>(l));
    return out;
  }
};

struct AngleIndices {
  int num_tx = 0;
  int streams = 0;
  std::vector<std::vector<std::uint32_t>> phi;
  std::vector<std::vector<std::uint32_t>> psi;
};

inline double wrap_phase(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

namespace detail {

// Rows l and n of x <- G(l,n)^T x.
inline void rotate_transposed(CMatrix& x, int l, int n, double c, double s) {
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const cplx a = x(l, k);
    const cplx b = x(n, k);
    x(l, k) = c * a - s * b;
    x(n, k) = s * a + c * b;
  }
}

// Rows l and n of x <- G(l,n) x.
inline void rotate(CMatrix& x, int l, int n, double c, double s) {
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const cplx a = x(l, k);
    const cplx b = x(n, k);
    x(l, k) = c * a + s * b;
    x(n, k) = -s * a + c * b;
  }
}

}  // namespace detail

inline void check_orthonormal(const CMatrix& v, double tol = 1e-10) {
  const CMatrix gram = v.adjoint() * v;
  const double err = (gram - CMatrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
  if (!(err <= tol)) throw std::invalid_argument("columns are not orthonormal");
}

inline GivensAngles givens_decompose(const CMatrix& v) {
  const int n = static_cast<int>(v.rows());
  const int l_total = static_cast<int>(v.cols());
  if (l_total <= 0 || l_total > n) throw std::invalid_argument("need 1 <= L <= N_tx");
  check_orthonormal(v);

  GivensAngles g(n, l_total);
  CMatrix x = v;
  constexpr double kTiny = 1e-14;
  for (int l = 0; l < l_total; ++l) {
    auto& phi = g.phi[static_cast<std::size_t>(l)];
    for (int i = l; i < n; ++i) {
      const cplx e = x(i, l);
      double a = 0.0;
      if (std::abs(e) > kTiny) a = std::arg(e) + (i == l ? 0.0 : kPi);
      a = wrap_phase(a);
      phi[static_cast<std::size_t>(i - l)] = a;
      const cplx rot = std::polar(1.0, -a);
      for (int k = 0; k < l_total; ++k) x(i, k) *= rot;
    }
    auto& psi = g.psi[static_cast<std::size_t>(l)];
    for (int r = l + 1; r < n; ++r) {
      const double p = std::atan2(std::max(0.0, -x(r, l).real()), std::max(0.0, x(l, l).real()));
      psi[static_cast<std::size_t>(r - l - 1)] = p;
      detail::rotate_transposed(x, l, r, std::cos(p), std::sin(p));
    }
  }
  return g;
}

inline CMatrix givens_reconstruct(const GivensAngles& g) {
  g.validate();
  const int n = g.num_tx;
  CMatrix x = CMatrix::Identity(n, g.streams);
  for (int l = g.streams - 1; l >= 0; --l) {
    const auto& psi = g.psi[static_cast<std::size_t>(l)];
    for (int r = n - 1; r > l; --r) {
      const double p = psi[static_cast<std::size_t>(r - l - 1)];
      detail::rotate(x, l, r, std::cos(p), std::sin(p));
    }
    const auto& phi = g.phi[static_cast<std::size_t>(l)];
    for (int i = l; i < n; ++i) x.row(i) *= std::polar(1.0, phi[static_cast<std::size_t>(i - l)]);
  }
  return x;
}

// Bit budgets per angle. bypass = infinite resolution.
struct QuantizerConfig {
  int b_psi = 5;
  int b_phi = 7;
  bool bypass = false;

  static QuantizerConfig perfect() { return {0, 0, true}; }

  double epsilon() const { return bypass ? 0.0 : kPi / std::ldexp(1.0, b_psi + 2); }
  double delta() const { return bypass ? 0.0 : kPi / std::ldexp(1.0, b_phi); }
  double psi_step() const { return kPi / std::ldexp(1.0, b_psi + 1); }
  double phi_step() const { return kPi / std::ldexp(1.0, b_phi - 1); }
  std::uint32_t psi_levels() const { return std::uint32_t{1} << b_psi; }
  std::uint32_t phi_levels() const { return std::uint32_t{1} << b_phi; }

  void validate() const {
    if (bypass) return;
    if (b_psi < 1 || b_psi > 24 || b_phi < 1 || b_phi > 24)
      throw std::invalid_argument("angle bit counts must lie in [1, 24]");
  }

  std::string label() const {
    return bypass ? std::string("perfect") : "(" + std::to_string(b_psi) + "," + std::to_string(b_phi) + ")";
  }
};

inline std::uint32_t quantize_psi(double psi, const QuantizerConfig& q) {
  constexpr double kSlack = 1e-9;
  if (psi < -kSlack || psi > kPi / 2 + kSlack || !std::isfinite(psi))
    throw std::invalid_argument("psi outside [0, pi/2]");
  psi = std::clamp(psi, 0.0, kPi / 2);
  const auto k = static_cast<std::int64_t>(std::floor(psi / q.psi_step()));
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(k, 0, q.psi_levels() - 1));
}

inline std::uint32_t quantize_phi(double phi, const QuantizerConfig& q) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phi is not finite");
  const auto k = static_cast<std::int64_t>(std::floor(wrap_phase(phi) / q.phi_step()));
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(k, 0, q.phi_levels() - 1));
}

inline double dequantize_psi(std::uint32_t k, const QuantizerConfig& q) {
  if (k >= q.psi_levels()) throw std::out_of_range("psi index out of range");
  return k * q.psi_step() + q.epsilon();
}

inline double dequantize_phi(std::uint32_t k, const QuantizerConfig& q) {
  if (k >= q.phi_levels()) throw std::out_of_range("phi index out of range");
  return k * q.phi_step() + q.delta();
}

inline AngleIndices quantize_angles(const GivensAngles& g, const QuantizerConfig& q) {
  g.validate();
  q.validate();
  if (q.bypass) throw std::invalid_argument("bypass quantizer has no indices");
  AngleIndices out{g.num_tx, g.streams, {}, {}};
  for (int l = 0; l < g.streams; ++l) {
    auto& ph = out.phi.emplace_back();
    for (double a : g.phi[static_cast<std::size_t>(l)]) ph.push_back(quantize_phi(a, q));
    auto& ps = out.psi.emplace_back();
    for (double a : g.psi[static_cast<std::size_t>(l)]) ps.push_back(quantize_psi(a, q));
  }
  return out;
}

inline GivensAngles dequantize_angles(const AngleIndices& idx, const QuantizerConfig& q) {
  q.validate();
  if (q.bypass) throw std::invalid_argument("bypass quantizer has no indices");
  GivensAngles g(idx.num_tx, idx.streams);
  if (idx.phi.size() != g.phi.size() || idx.psi.size() != g.psi.size())
    throw std::invalid_argument("index set count does not match L");
  for (std::size_t l = 0; l < g.phi.size(); ++l) {
    if (idx.phi[l].size() != g.phi[l].size() || idx.psi[l].size() != g.psi[l].size())
      throw std::invalid_argument("index count does not match (N_tx, column)");
    for (std::size_t i = 0; i < g.phi[l].size(); ++i) g.phi[l][i] = dequantize_phi(idx.phi[l][i], q);
    for (std::size_t i = 0; i < g.psi[l].size(); ++i) g.psi[l][i] = dequantize_psi(idx.psi[l][i], q);
  }
  return g;
}

inline constexpr double kRankThreshold = 1e-12;

struct CarrierFeedback {
  AngleIndices indices;          // empty in bypass mode
  GivensAngles angles;           // dequantized (or exact in bypass mode)
  std::vector<double> singular;  // descending, min(N_rx, N_tx) values
  int rank = 0;                  // singular values >= kRankThreshold
  CMatrix v_hat;                 // N_tx x streams, reconstructed from `angles`
};

// What one user sends back: enough for the transmitter to rebuild V^ and
// Sigma on every carrier, for any L up to `streams`.
struct FeedbackReport {
  int user = 0;
  int num_tx = 0;
  int streams = 0;
  QuantizerConfig quantizer;
  std::vector<CarrierFeedback> carriers;

  int num_carriers() const { return static_cast<int>(carriers.size()); }

  // Deficient on some carrier for this many streams.
  bool rank_deficient(int l) const {
    return std::any_of(carriers.begin(), carriers.end(), [l](const CarrierFeedback& c) { return c.rank < l; });
  }

  CMatrix beamformer(int carrier, int l) const {
    if (l <= 0 || l > streams) throw std::out_of_range("stream count exceeds the report");
    return carriers.at(static_cast<std::size_t>(carrier)).v_hat.leftCols(l);
  }

  RVector sigma(int carrier, int l) const {
    const auto& s = carriers.at(static_cast<std::size_t>(carrier)).singular;
    if (l <= 0 || l > static_cast<int>(s.size())) throw std::out_of_range("stream count exceeds the report");
    RVector out(l);
    for (int i = 0; i < l; ++i) out(i) = s[static_cast<std::size_t>(i)];
    return out;
  }
};

inline CarrierFeedback make_carrier_feedback(const CMatrix& v, std::vector<double> singular, const QuantizerConfig& q) {
  CarrierFeedback c;
  c.singular = std::move(singular);
  c.rank = static_cast<int>(
      std::count_if(c.singular.begin(), c.singular.end(), [](double s) { return s >= kRankThreshold; }));
  GivensAngles exact = givens_decompose(v);
  // Directions past the channel rank are arbitrary; report bin 0 for them.
  for (int l = c.rank; l < exact.streams; ++l) {
    std::fill(exact.phi[static_cast<std::size_t>(l)].begin(), exact.phi[static_cast<std::size_t>(l)].end(), 0.0);
    std::fill(exact.psi[static_cast<std::size_t>(l)].begin(), exact.psi[static_cast<std::size_t>(l)].end(), 0.0);
  }
  if (q.bypass) {
    c.angles = std::move(exact);
  } else {
    c.indices = quantize_angles(exact, q);
    c.angles = dequantize_angles(c.indices, q);
  }
  c.v_hat = givens_reconstruct(c.angles);
  return c;
}

// SVD per carrier, keep `streams` dominant right singular vectors, decompose
// and quantize them.
inline FeedbackReport build_report(int user, const std::vector<CMatrix>& h, int streams, const QuantizerConfig& q) {
  q.validate();
  if (h.empty()) throw std::invalid_argument("channel has no carriers");
  const int nrx = static_cast<int>(h.front().rows());
  const int ntx = static_cast<int>(h.front().cols());
  if (streams <= 0 || streams > std::min(nrx, ntx)) throw std::invalid_argument("L must satisfy 1 <= L <= min(N_rx, N_tx)");

  FeedbackReport r;
  r.user = user;
  r.num_tx = ntx;
  r.streams = streams;
  r.quantizer = q;
  r.carriers.reserve(h.size());
  for (const CMatrix& hn : h) {
    if (hn.rows() != nrx || hn.cols() != ntx) throw std::invalid_argument("carrier dimension mismatch");
    Eigen::JacobiSVD<CMatrix> svd(hn, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    std::vector<double> s(sv.data(), sv.data() + sv.size());
    r.carriers.push_back(make_carrier_feedback(svd.matrixV().leftCols(streams), std::move(s), q));
  }
  return r;
}

inline constexpr int kReportFormatVersion = 1;

inline nlohmann::json report_to_json(const FeedbackReport& r) {
  nlohmann::json j;
  j["format"] = "mulink-feedback-report";
  j["version"] = kReportFormatVersion;
  j["user"] = r.user;
  j["num_tx"] = r.num_tx;
  j["streams"] = r.streams;
  j["quantizer"] = {{"b_psi_bits", r.quantizer.b_psi}, {"b_phi_bits", r.quantizer.b_phi}, {"bypass", r.quantizer.bypass}};
  auto& cs = j["carriers"] = nlohmann::json::array();
  for (const auto& c : r.carriers) {
    nlohmann::json e;
    if (r.quantizer.bypass) {
      e["phi"] = c.angles.phi;
      e["psi"] = c.angles.psi;
    } else {
      e["phi"] = c.indices.phi;
      e["psi"] = c.indices.psi;
    }
    e["singular_values"] = c.singular;
    cs.push_back(std::move(e));
  }
  return j;
}

inline FeedbackReport report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "mulink-feedback-report") throw ConfigError("not a feedback report");
  if (j.at("version").get<int>() != kReportFormatVersion) throw ConfigError("unsupported feedback report version");
  FeedbackReport r;
  r.user = j.at("user").get<int>();
  r.num_tx = j.at("num_tx").get<int>();
  r.streams = j.at("streams").get<int>();
  const auto& q = j.at("quantizer");
  r.quantizer = {q.at("b_psi_bits").get<int>(), q.at("b_phi_bits").get<int>(), q.at("bypass").get<bool>()};
  r.quantizer.validate();
  for (const auto& e : j.at("carriers")) {
    CarrierFeedback c;
    c.singular = e.at("singular_values").get<std::vector<double>>();
    c.rank = static_cast<int>(
        std::count_if(c.singular.begin(), c.singular.end(), [](double s) { return s >= kRankThreshold; }));
    if (r.quantizer.bypass) {
      c.angles = GivensAngles(r.num_tx, r.streams);
      c.angles.phi = e.at("phi").get<std::vector<std::vector<double>>>();
      c.angles.psi = e.at("psi").get<std::vector<std::vector<double>>>();
      c.angles.validate();
    } else {
      c.indices = {r.num_tx, r.streams, e.at("phi").get<std::vector<std::vector<std::uint32_t>>>(),
                   e.at("psi").get<std::vector<std::vector<std::uint32_t>>>()};
      c.angles = dequantize_angles(c.indices, r.quantizer);
    }
    c.v_hat = givens_reconstruct(c.angles);
    r.carriers.push_back(std::move(c));
  }
  return r;
}

}  // namespace mulink
