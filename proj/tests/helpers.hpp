#pragma once

#include <string>
#include <vector>

#include "fairaudit/dataset.hpp"

namespace test {

// Dataset from (group, score, outcome) triples with groups in the given order.
inline fairaudit::Dataset make_dataset(const std::vector<std::tuple<std::string, int, int>>& rows,
                                       std::vector<std::string> groups = {"b", "w"}, int score_min = 1,
                                       int score_max = 10) {
  fairaudit::Schema s;
  s.score_min = score_min;
  s.score_max = score_max;
  s.groups = std::move(groups);
  std::vector<fairaudit::Record> records;
  for (const auto& [g, score, y] : rows) records.push_back({g, score, y, {}});
  return fairaudit::Dataset(s, std::move(records));
}

// Appends `count` copies of one record.
inline void add(std::vector<std::tuple<std::string, int, int>>& rows, const std::string& g, int score, int y,
                int count = 1) {
  for (int i = 0; i < count; ++i) rows.emplace_back(g, score, y);
}

}  // namespace test
