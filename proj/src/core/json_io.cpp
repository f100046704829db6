// SPDX-License-Identifier: Apache-2.0
#include "core/json_io.hpp"

#include <complex>
#include <json.hpp>

#include "core/errors.hpp"

namespace timebin {

std::string state_to_json(const TimeBinState& s) {
  nlohmann::json doc;
  doc["d"] = s.dim();
  doc["delta_t"] = s.grid().delta_t;
  nlohmann::json amps = nlohmann::json::array();
  for (int j = 0; j < s.dim(); ++j) {
    amps.push_back({s.amplitudes()[j].real(), s.amplitudes()[j].imag()});
  }
  doc["amplitudes"] = std::move(amps);
  doc["normalized"] = s.is_normalized();
  return doc.dump(2) + "\n";
}

TimeBinState state_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("state document is not valid JSON: ") + e.what());
  }
  try {
    const int d = doc.at("d").get<int>();
    TimeBinGrid grid;
    grid.d = d;
    grid.delta_t = doc.at("delta_t").get<double>();
    const nlohmann::json& amps = doc.at("amplitudes");
    if (!amps.is_array() || static_cast<int>(amps.size()) != d) {
      fail(ErrorCode::ParseError, "amplitudes must be an array of length d");
    }
    Eigen::VectorXcd v(d);
    for (int j = 0; j < d; ++j) {
      const nlohmann::json& pair = amps.at(static_cast<std::size_t>(j));
      if (!pair.is_array() || pair.size() != 2) {
        fail(ErrorCode::ParseError, "each amplitude must be an [re, im] pair");
      }
      v[j] = std::complex<double>(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    const bool claimed = doc.at("normalized").get<bool>();
    TimeBinState state(grid, std::move(v));
    if (claimed != state.is_normalized()) {
      fail(ErrorCode::ParseError,
           std::string("document claims normalized=") + (claimed ? "true" : "false") +
               " but the amplitudes say otherwise");
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed state document: ") + e.what());
  }
}

}  // namespace timebin
