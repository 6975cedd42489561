// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mulink {

// Post-processing SNR per (stream, carrier), linear scale, stream-major.
struct SnrGrid {
  int user = 0;
  int streams = 0;
  int carriers = 0;
  std::vector<double> values;

  SnrGrid() = default;
  SnrGrid(int user_id, int num_streams, int num_carriers, double fill = 0.0)
      : user(user_id),
        streams(num_streams),
        carriers(num_carriers),
        values(static_cast<std::size_t>(num_streams) * static_cast<std::size_t>(num_carriers), fill) {}

  static SnrGrid uniform(int num_streams, int num_carriers, double snr) {
    return SnrGrid(0, num_streams, num_carriers, snr);
  }

  double& at(int stream, int carrier) { return values[index(stream, carrier)]; }
  double at(int stream, int carrier) const { return values[index(stream, carrier)]; }
  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  // Entries finite and strictly positive.
  void validate() const {
    if (empty() || streams <= 0 || carriers <= 0) throw std::invalid_argument("empty SNR grid");
    if (values.size() != static_cast<std::size_t>(streams) * static_cast<std::size_t>(carriers))
      throw std::invalid_argument("SNR grid size does not match its shape");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("SNR grid entries must be finite and positive");
  }

 private:
  std::size_t index(int stream, int carrier) const {
    return static_cast<std::size_t>(stream) * static_cast<std::size_t>(carriers) + static_cast<std::size_t>(carrier);
  }
};

}  // namespace mulink
