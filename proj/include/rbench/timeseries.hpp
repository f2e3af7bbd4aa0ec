#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rbench/common.hpp"

#include <json.hpp>

namespace rbench {

// Uniformly sampled real-valued sequence; the currency between modules.
struct TimeSeries {
  Eigen::MatrixXd data;  // T x d
  double dt = 1.0;
  std::string name;

  TimeSeries() = default;
  TimeSeries(Eigen::MatrixXd values, double step, std::string label = {})
      : data(std::move(values)), dt(step), name(std::move(label)) {
    require(dt > 0, "TimeSeries: dt must be > 0");
    require(data.rows() >= 1, "TimeSeries: need at least one sample");
    require(data.allFinite(), "TimeSeries: non-finite entries");
  }

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index dims() const { return data.cols(); }

  Eigen::VectorXd column(Eigen::Index i) const { return data.col(i); }

  TimeSeries slice(Eigen::Index start, Eigen::Index count) const {
    return TimeSeries(data.middleRows(start, count), dt, name);
  }
};

inline void write_csv(const TimeSeries& ts, std::ostream& out) {
  out << "t";
  for (Eigen::Index j = 0; j < ts.dims(); ++j) out << ",x" << j;
  out << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    out << static_cast<double>(i) * ts.dt;
    for (Eigen::Index j = 0; j < ts.dims(); ++j) out << "," << ts.data(i, j);
    out << "\n";
  }
}

inline void write_csv(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open for writing: " + path);
  write_csv(ts, out);
}

inline TimeSeries read_csv(std::istream& in, const std::string& name = {}) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty CSV");
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      double v = std::stod(cell);
      if (first) {
        times.push_back(v);
        first = false;
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "CSV has no data rows");
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    require(static_cast<Eigen::Index>(rows[i].size()) == d, "ragged CSV row");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
  if (dt <= 0) dt = 1.0;
  return TimeSeries(std::move(m), dt, name);
}

inline TimeSeries read_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open: " + path);
  return read_csv(in, path);
}

inline nlohmann::json to_json(const TimeSeries& ts) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < ts.dims(); ++j) row.push_back(ts.data(i, j));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"name", ts.name}, {"dt", ts.dt}, {"data", std::move(rows)}};
}

inline TimeSeries timeseries_from_json(const nlohmann::json& j) {
  const auto& rows = j.at("data");
  require(rows.is_array() && !rows.empty(), "timeseries json: data must be a nonempty array");
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index jj = 0; jj < d; ++jj) m(i, jj) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)].get<double>();
  return TimeSeries(std::move(m), j.at("dt").get<double>(), j.value("name", ""));
}

}  // namespace rbench
