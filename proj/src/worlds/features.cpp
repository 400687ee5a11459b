#include "isk/worlds/features.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "isk/num/error.hpp"

namespace isk::worlds {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

real parse_cell(const std::string& cell, int row, size_t col) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  ISK_CHECK(end != s && *end == '\0' && !cell.empty(),
            "row " << row << ", column " << col + 1 << ": cell '" << cell
                   << "' is not numeric");
  return static_cast<real>(v);
}

}  // namespace

FeatureTable parse_feature_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  ISK_CHECK(std::getline(in, line), origin << ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_row(line);
  ISK_CHECK(header.size() >= 2,
            origin << ": header needs at least one feature and the label column");
  FeatureTable t;
  t.names.assign(header.begin(), header.end() - 1);
  const size_t dim = t.names.size();

  std::vector<real> values;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_row(line);
    ISK_CHECK(cells.size() == dim + 1, origin << ": row " << row << " has "
                                              << cells.size() << " cells, expected "
                                              << dim + 1);
    for (size_t c = 0; c < dim; ++c) values.push_back(parse_cell(cells[c], row, c));
    const real label = parse_cell(cells[dim], row, dim);
    const int y = static_cast<int>(label);
    ISK_CHECK(label == y && y >= 0,
              origin << ": row " << row << ": label '" << cells[dim]
                     << "' is not a non-negative integer");
    t.y.push_back(y);
    if (y + 1 > t.classes) t.classes = y + 1;
  }
  ISK_CHECK(!t.y.empty(), origin << ": no data rows");
  t.x = Tensor::from({static_cast<int>(t.y.size()), static_cast<int>(dim)},
                     std::move(values));
  return t;
}

FeatureTable load_feature_csv(const std::string& path) {
  std::ifstream f(path);
  ISK_CHECK(f.good(), "cannot open CSV file " << path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_feature_csv(text, path);
}

FeatureEnv::FeatureEnv(FeatureTable table) : table_(std::move(table)) {
  ISK_CHECK(table_.count() > 0, "feature environment needs a non-empty table");
  questions_ = QuestionSpace::uniform(table_.dim(), 1);
}

Example FeatureEnv::sample(Rng& rng) const {
  const int idx = rng.uniform_int(table_.count());
  Example ex;
  ex.y = table_.y[static_cast<size_t>(idx)];
  ex.x = Tensor({table_.dim()});
  for (int c = 0; c < table_.dim(); ++c) ex.x[c] = table_.x.at(idx, c);
  return ex;
}

StepResult FeatureEnv::observe(const Example& ex, int q) const {
  ISK_CHECK(q >= 0 && q < table_.dim(),
            "feature id " << q << " outside [0, " << table_.dim() << ")");
  StepResult r;
  r.answer = Tensor({1});
  r.answer[0] = ex.x[q];
  return r;
}

}  // namespace isk::worlds
